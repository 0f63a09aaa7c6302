"""Gambles, probability mass functions and lower previsions on a finite space.

All containers are immutable: numeric payloads are stored as read-only
numpy arrays, so instances can be shared freely between threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DimensionError, InvalidInputError

PMF_TOL = 1e-12


def _frozen(values: ArrayLike, ndim: int, what: str) -> NDArray[np.float64]:
    arr = np.array(values, dtype=float)
    if arr.ndim != ndim:
        raise InvalidInputError(f"{what} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{what} contains non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class OutcomeSpace:
    """Ordered, finite set of outcome labels."""

    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        labels = tuple(str(label) for label in self.labels)
        if not labels:
            raise InvalidInputError("an outcome space needs at least one outcome")
        if len(set(labels)) != len(labels):
            raise InvalidInputError("outcome labels must be unique")
        object.__setattr__(self, "labels", labels)

    @classmethod
    def of_size(cls, size: int) -> "OutcomeSpace":
        return cls(tuple(f"w{k}" for k in range(size)))

    def __len__(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        return self.labels.index(label)


@dataclass(frozen=True, eq=False)
class Gamble:
    """A real payoff per outcome."""

    values: NDArray[np.float64]

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", _frozen(self.values, 1, "gamble"))
        if self.values.size == 0:
            raise InvalidInputError("a gamble needs at least one outcome")

    def __len__(self) -> int:
        return self.values.size

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Gamble) and np.array_equal(self.values, other.values)

    def __hash__(self) -> int:
        return hash(self.values.tobytes())

    def __add__(self, other: Union["Gamble", float]) -> "Gamble":
        if isinstance(other, Gamble):
            _check_dims(len(self), len(other))
            return Gamble(self.values + other.values)
        return Gamble(self.values + float(other))

    def __sub__(self, other: Union["Gamble", float]) -> "Gamble":
        if isinstance(other, Gamble):
            return self + Gamble(-other.values)
        return self + (-float(other))

    def __neg__(self) -> "Gamble":
        return Gamble(-self.values)

    def __mul__(self, scalar: float) -> "Gamble":
        return Gamble(self.values * float(scalar))

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class GambleSet:
    """A finite, ordered set of desirable gambles over a common outcome space.

    ``matrix`` holds one row per gamble and one column per outcome.
    """

    space: OutcomeSpace
    matrix: NDArray[np.float64] = field(repr=False)

    def __post_init__(self) -> None:
        matrix = _frozen(self.matrix, 2, "gamble matrix")
        if matrix.shape[0] < 1:
            raise InvalidInputError("a gamble set needs at least one gamble")
        if matrix.shape[1] != len(self.space):
            raise DimensionError(
                f"gambles have {matrix.shape[1]} outcomes, space has {len(self.space)}"
            )
        object.__setattr__(self, "matrix", matrix)

    @classmethod
    def from_rows(
        cls, rows: ArrayLike, labels: Sequence[str] | None = None
    ) -> "GambleSet":
        """Build from a row-per-gamble array; labels default to ``w0, w1, ...``."""
        matrix = np.array(rows, dtype=float)
        if matrix.ndim != 2:
            raise InvalidInputError("rows must form a 2-D array")
        space = OutcomeSpace(tuple(labels)) if labels is not None else OutcomeSpace.of_size(matrix.shape[1])
        return cls(space, matrix)

    @classmethod
    def from_gambles(cls, gambles: Sequence[Gamble], space: OutcomeSpace | None = None) -> "GambleSet":
        if not gambles:
            raise InvalidInputError("a gamble set needs at least one gamble")
        size = len(gambles[0])
        for g in gambles:
            _check_dims(size, len(g))
        space = space or OutcomeSpace.of_size(size)
        return cls(space, np.vstack([g.values for g in gambles]))

    @property
    def gambles(self) -> tuple[Gamble, ...]:
        return tuple(Gamble(row) for row in self.matrix)

    @property
    def n_gambles(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_outcomes(self) -> int:
        return self.matrix.shape[1]

    def __len__(self) -> int:
        return self.n_gambles

    def __iter__(self) -> Iterator[Gamble]:
        return iter(self.gambles)

    def __getitem__(self, index: int) -> Gamble:
        return Gamble(self.matrix[index])

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, GambleSet)
            and self.space == other.space
            and np.array_equal(self.matrix, other.matrix)
        )

    def __hash__(self) -> int:
        return hash((self.space, self.matrix.tobytes()))

    def with_gamble(self, g: Gamble | ArrayLike) -> "GambleSet":
        values = g.values if isinstance(g, Gamble) else np.asarray(g, dtype=float)
        _check_dims(self.n_outcomes, values.size)
        return GambleSet(self.space, np.vstack([self.matrix, values]))

    def without(self, index: int) -> "GambleSet":
        return GambleSet(self.space, np.delete(self.matrix, index, axis=0))

    def subset(self, indices: Sequence[int]) -> "GambleSet":
        return GambleSet(self.space, self.matrix[list(indices)])

    # -- JSON --------------------------------------------------------------

    def to_dict(self) -> dict:
        return {"outcomes": list(self.space.labels), "gambles": self.matrix.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "GambleSet":
        try:
            outcomes = data["outcomes"]
            gambles = data["gambles"]
        except (KeyError, TypeError) as exc:
            raise InvalidInputError("gamble set JSON needs 'outcomes' and 'gambles'") from exc
        return cls.from_rows(gambles, outcomes)

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text: str) -> "GambleSet":
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path: str | Path) -> "GambleSet":
        return cls.from_json(Path(path).read_text())


@dataclass(frozen=True, eq=False)
class Pmf:
    """Probability mass function; entries are nonnegative and sum to one.

    A sum that misses one by at most ``PMF_TOL`` is renormalised, anything
    further off is rejected.
    """

    probs: NDArray[np.float64]

    def __post_init__(self) -> None:
        probs = np.array(self.probs, dtype=float)
        if probs.ndim != 1 or probs.size == 0:
            raise InvalidInputError("a pmf must be a nonempty vector")
        if not np.all(np.isfinite(probs)) or np.any(probs < 0):
            raise InvalidInputError("pmf entries must be finite and nonnegative")
        total = probs.sum()
        if abs(total - 1.0) > PMF_TOL:
            raise InvalidInputError(f"pmf sums to {total!r}, not 1")
        if total != 1.0:
            probs = probs / total
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_weights(cls, weights: ArrayLike) -> "Pmf":
        """Normalise nonnegative weights (negative round-off is clipped)."""
        w = np.clip(np.asarray(weights, dtype=float), 0.0, None)
        total = w.sum()
        if not total > 0:
            raise InvalidInputError("weights must have positive mass")
        return cls(w / total)

    @classmethod
    def point(cls, size: int, index: int) -> "Pmf":
        probs = np.zeros(size)
        probs[index] = 1.0
        return cls(probs)

    @classmethod
    def uniform(cls, size: int) -> "Pmf":
        return cls(np.full(size, 1.0 / size))

    def __len__(self) -> int:
        return self.probs.size

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Pmf) and np.array_equal(self.probs, other.probs)

    def __hash__(self) -> int:
        return hash(self.probs.tobytes())


# -- lower previsions --------------------------------------------------------


@dataclass(frozen=True)
class Prevision:
    pmf: Pmf


@dataclass(frozen=True)
class Polyhedral:
    """Lower envelope of finitely many expectation operators."""

    pmfs: tuple[Pmf, ...]

    def __post_init__(self) -> None:
        pmfs = tuple(self.pmfs)
        if not pmfs:
            raise InvalidInputError("a polyhedral lower prevision needs at least one pmf")
        for p in pmfs[1:]:
            _check_dims(len(pmfs[0]), len(p))
        object.__setattr__(self, "pmfs", pmfs)
        stacked = np.vstack([p.probs for p in pmfs])
        stacked.setflags(write=False)
        object.__setattr__(self, "_stacked", stacked)

    @property
    def pmf_matrix(self) -> NDArray[np.float64]:
        """The pmfs as rows of a read-only array."""
        return self._stacked  # type: ignore[attr-defined]


@dataclass(frozen=True)
class LinearVacuous:
    """``(1 - delta) * E_p + delta * min``."""

    pmf: Pmf
    delta: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.delta <= 1.0:
            raise InvalidInputError(f"delta must lie in [0, 1], got {self.delta}")


@dataclass(frozen=True)
class Vacuous:
    size: int | None = None


LowerPrevision = Union[Prevision, Polyhedral, LinearVacuous, Vacuous]


def _check_dims(expected: int, got: int) -> None:
    if expected != got:
        raise DimensionError(f"dimension mismatch: {expected} != {got}")


def _values(f: Gamble | ArrayLike) -> NDArray[np.float64]:
    if isinstance(f, Gamble):
        return f.values
    return np.asarray(f, dtype=float)


def expectation(p: Pmf, f: Gamble | ArrayLike) -> float:
    """Expected payoff of ``f`` under ``p``."""
    values = _values(f)
    _check_dims(len(p), values.size)
    return float(p.probs @ values)


def evaluate(lp: LowerPrevision, f: Gamble | ArrayLike) -> float:
    """Lower prevision of the gamble ``f``."""
    values = _values(f)
    if isinstance(lp, Prevision):
        return expectation(lp.pmf, values)
    if isinstance(lp, Polyhedral):
        _check_dims(lp.pmf_matrix.shape[1], values.size)
        return float(np.min(lp.pmf_matrix @ values))
    if isinstance(lp, LinearVacuous):
        return (1.0 - lp.delta) * expectation(lp.pmf, values) + lp.delta * float(values.min())
    if isinstance(lp, Vacuous):
        if lp.size is not None:
            _check_dims(lp.size, values.size)
        return float(values.min())
    raise TypeError(f"not a lower prevision: {lp!r}")

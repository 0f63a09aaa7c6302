"""Random gamble sets with known ground truth.

Sets that avoid sure loss are built by subtracting from uniform random
gambles their lower prevision under a randomly drawn (coherent) lower
prevision. Sets that incur sure loss add one gamble that pushes just past
the upper natural extension of such a set.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from numpy.typing import NDArray

from .checker import lower_natural_extension, upper_natural_extension
from .core import (
    GambleSet,
    LinearVacuous,
    LowerPrevision,
    OutcomeSpace,
    Pmf,
    Polyhedral,
    Prevision,
    evaluate,
)
from .errors import InvalidInputError

MASK64 = (1 << 64) - 1
Bias = Literal["none", "uniform", "constant"]
BIAS_CONSTANT = 0.01
NOT_ASL_DELTA = 0.05


def derive(*parts: object) -> int:
    """A 64-bit integer hashed from ``parts`` (stable across runs and hosts)."""
    digest = hashlib.blake2b(repr(parts).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


@dataclass(eq=False)
class RngStream:
    """A reproducible stream of random draws keyed by ``(seed, stream_id)``."""

    seed: int
    stream_id: int = 0
    _gen: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.seed = int(self.seed) & MASK64
        self.stream_id = int(self.stream_id) & MASK64
        self._gen = np.random.Generator(np.random.PCG64(np.random.SeedSequence([self.seed, self.stream_id])))

    def child(self, *key: object) -> "RngStream":
        """Independent stream for a named role (does not consume draws)."""
        return RngStream(self.seed, derive(self.stream_id, *key))

    def uniform_open(self, size: int | tuple[int, ...]) -> NDArray[np.float64]:
        """Uniform draws on the open interval (0, 1); exact zeros are redrawn."""
        out = self._gen.random(size)
        zeros = out == 0.0
        while np.any(zeros):
            out[zeros] = self._gen.random(int(zeros.sum()))
            zeros = out == 0.0
        return out


@dataclass(frozen=True)
class GenSpec:
    n_outcomes: int
    n_gambles: int
    k_previsions: int = 32
    delta: float = NOT_ASL_DELTA
    bias: Bias = "none"

    def __post_init__(self) -> None:
        if self.n_outcomes < 2:
            raise InvalidInputError("need at least 2 outcomes")
        if self.n_gambles < 1:
            raise InvalidInputError("need at least 1 gamble")
        if self.k_previsions < 1:
            raise InvalidInputError("need at least 1 prevision")
        if self.bias not in ("none", "uniform", "constant"):
            raise InvalidInputError(f"unknown bias {self.bias!r}")
        if not self.delta > 0:
            raise InvalidInputError("delta must be positive")

    def to_dict(self) -> dict:
        return {
            "n_outcomes": self.n_outcomes,
            "n_gambles": self.n_gambles,
            "k_previsions": self.k_previsions,
            "delta": self.delta,
            "bias": self.bias,
        }


def pmf_from_uniforms(r: NDArray[np.float64]) -> Pmf:
    """``p(w) = ln r_w / sum_v ln r_v`` for draws ``r`` in (0, 1)."""
    r = np.asarray(r, dtype=float)
    if r.size == 0 or np.any(r <= 0) or np.any(r >= 1):
        raise InvalidInputError("draws must lie in the open interval (0, 1)")
    logs = np.log(r)
    return Pmf(logs / logs.sum())


def gen_pmf(rng: RngStream, m: int) -> Pmf:
    if m < 1:
        raise InvalidInputError("m must be at least 1")
    return pmf_from_uniforms(rng.uniform_open(m))


def gen_prevision(rng: RngStream, m: int) -> Prevision:
    return Prevision(gen_pmf(rng, m))


def gen_polyhedral(rng: RngStream, m: int, k: int) -> Polyhedral:
    """Lower envelope of ``k`` random previsions, one child stream each."""
    if k < 1:
        raise InvalidInputError("k must be at least 1")
    return Polyhedral(tuple(gen_pmf(rng.child("prevision", j), m) for j in range(k)))


def gen_linear_vacuous(rng: RngStream, m: int, delta: float) -> LinearVacuous:
    if not 0.0 < delta < 1.0:
        raise InvalidInputError("delta must lie in (0, 1)")
    return LinearVacuous(gen_pmf(rng, m), delta)


def _lower_values(lp: LowerPrevision, F: NDArray[np.float64]) -> NDArray[np.float64]:
    if isinstance(lp, Polyhedral):
        return (F @ lp.pmf_matrix.T).min(axis=1)
    return np.array([evaluate(lp, row) for row in F])


def _bias(rng: RngStream, spec: GenSpec) -> NDArray[np.float64]:
    if spec.bias == "uniform":
        return rng.uniform_open(spec.n_gambles)
    if spec.bias == "constant":
        return np.full(spec.n_gambles, BIAS_CONSTANT)
    return np.zeros(spec.n_gambles)


def gen_asl_set(rng: RngStream, spec: GenSpec, lp: LowerPrevision) -> GambleSet:
    """``{f_i - P(f_i) + eta_i}`` for uniform random ``f_i``; avoids sure loss."""
    F = rng.uniform_open((spec.n_gambles, spec.n_outcomes))
    eta = _bias(rng, spec)
    D = F - _lower_values(lp, F)[:, None] + eta[:, None]
    return GambleSet(OutcomeSpace.of_size(spec.n_outcomes), D)


def gen_non_asl_set(rng: RngStream, e: GambleSet, delta: float = NOT_ASL_DELTA) -> GambleSet:
    """``e`` plus ``g - upper(g) - delta`` for uniform random ``g``; incurs sure loss.

    A negative ``delta`` produces a set that still avoids sure loss.
    """
    if delta == 0:
        raise InvalidInputError("delta must be nonzero")
    g = rng.uniform_open(e.n_outcomes)
    beta = upper_natural_extension(e, g)
    return e.with_gamble(g - beta - delta)


def extend_asl_set(rng: RngStream, e: GambleSet, delta: float) -> GambleSet:
    """``e`` plus ``g - P(g)`` with ``P(g) = (1 - delta) lower(g) + delta upper(g)``."""
    if not 0.0 <= delta < 1.0:
        raise InvalidInputError("delta must lie in [0, 1)")
    g = rng.uniform_open(e.n_outcomes)
    low = lower_natural_extension(e, g)
    high = upper_natural_extension(e, g)
    price = (1.0 - delta) * low + delta * high
    if not low - 1e-12 <= price <= high + 1e-12:
        raise AssertionError("price outside the natural-extension bounds")
    return e.with_gamble(g - price)


# -- benchmark instances --------------------------------------------------------


def instance_seed(seed: int, i: int, j: int, truth: str, rep: int) -> int:
    """Seed of one benchmark instance; the ``gen`` command accepts it directly."""
    return derive(int(seed), i, j, truth, rep)


def generate_instance(
    seed: int,
    n_gambles: int,
    n_outcomes: int,
    truth: str,
    *,
    k: int = 32,
    delta: float = NOT_ASL_DELTA,
    bias: Bias = "none",
) -> GambleSet:
    """One instance with known ground truth (``"asl"`` or ``"not_asl"``).

    For ``"not_asl"`` the result has ``n_gambles - 1`` gambles that avoid
    sure loss plus one that breaks it (so ``n_gambles >= 2``).
    """
    rng = RngStream(seed)
    credal = gen_polyhedral(rng.child("credal"), n_outcomes, k)
    if truth == "asl":
        return gen_asl_set(rng.child("gambles"), GenSpec(n_outcomes, n_gambles, k, delta, bias), credal)
    if truth == "not_asl":
        if n_gambles < 2:
            raise InvalidInputError("a not-ASL instance needs at least 2 gambles")
        base = gen_asl_set(rng.child("gambles"), GenSpec(n_outcomes, n_gambles - 1, k, delta, bias), credal)
        return gen_non_asl_set(rng.child("extra"), base, delta)
    raise InvalidInputError(f"truth must be 'asl' or 'not_asl', got {truth!r}")

"""Avoiding-sure-loss verdicts with checkable certificates.

A set of gambles ``D`` avoids sure loss when no nonnegative combination of
its gambles is strictly negative everywhere. Equivalently there is a pmf
under which every gamble has nonnegative expectation. Each verdict carries
one of the two witnesses, re-checked numerically before it is returned.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .core import Gamble, GambleSet, Pmf
from .errors import CertificateError, InvalidInputError, SolverError, UnboundedError
from .lp import (
    FormulationMeta,
    Kind,
    StandardLp,
    build_d3,
    build_d4_phase1,
    build_p3,
    build_p4prime,
    make_layout,
    select_omega0,
    start_point_d5,
    start_point_p3,
    start_point_p4prime,
    default_start,
)
from .solvers import (
    SolveOutcome,
    SolverOptions,
    Status,
    affine_scaling,
    primal_dual,
    revised_simplex,
)

CERT_TOL = 1e-6
GAMMA_TOL = 1e-7
GRID = 10**6


class Method(str, enum.Enum):
    SIMPLEX = "simplex"
    AFFINE = "affine"
    PRIMAL_DUAL = "primal-dual"


class Formulation(str, enum.Enum):
    P3 = "P3"
    D3 = "D3"
    D4_PRIME = "D4Prime"


VALID_PAIRS: tuple[tuple[Method, Formulation], ...] = (
    (Method.SIMPLEX, Formulation.P3),
    (Method.SIMPLEX, Formulation.D3),
    (Method.AFFINE, Formulation.P3),
    (Method.AFFINE, Formulation.D4_PRIME),
    (Method.PRIMAL_DUAL, Formulation.P3),
    (Method.PRIMAL_DUAL, Formulation.D4_PRIME),
)

_METHOD_NAMES = {
    Method.SIMPLEX: "Simplex",
    Method.AFFINE: "Affine scaling",
    Method.PRIMAL_DUAL: "Primal-dual",
}
_FORMULATION_NAMES = {Formulation.P3: "P3", Formulation.D3: "D3", Formulation.D4_PRIME: "D4'"}


@dataclass(frozen=True)
class MethodChoice:
    """A solver paired with the program it is run on."""

    method: Method
    formulation: Formulation
    options: SolverOptions = field(default_factory=SolverOptions)

    def __post_init__(self) -> None:
        try:
            method = Method(self.method)
            formulation = Formulation(self.formulation)
        except ValueError as exc:
            raise InvalidInputError(str(exc)) from exc
        if (method, formulation) not in VALID_PAIRS:
            raise InvalidInputError(f"{method.value} cannot be used on {formulation.value}")
        object.__setattr__(self, "method", method)
        object.__setattr__(self, "formulation", formulation)

    @property
    def label(self) -> str:
        return f"{_METHOD_NAMES[self.method]} {_FORMULATION_NAMES[self.formulation]}"

    @classmethod
    def all(cls, options: SolverOptions | None = None) -> tuple["MethodChoice", ...]:
        opts = options or SolverOptions()
        return tuple(cls(m, f, opts) for m, f in VALID_PAIRS)


@dataclass(frozen=True, eq=False)
class AslWitness:
    """A pmf giving every gamble nonnegative expectation."""

    p: Pmf


@dataclass(frozen=True, eq=False)
class SureLossWitness:
    """Nonnegative weights whose combination is negative on every outcome.

    ``alpha`` is the maximum of the combination over the outcomes.
    """

    lam: NDArray[np.float64]
    alpha: float

    def __post_init__(self) -> None:
        lam = np.array(self.lam, dtype=float)
        lam.setflags(write=False)
        object.__setattr__(self, "lam", lam)


Certificate = Union[AslWitness, SureLossWitness]


@dataclass(frozen=True, eq=False)
class AslVerdict:
    """``avoids`` plus the evidence for it.

    ``source`` is ``"solver"`` when the certificate came from the chosen
    method, ``"fast-path"`` for the nonnegative-outcome shortcut and
    ``"fallback"`` when it had to be recomputed with simplex on D3.
    """

    avoids: bool
    certificate: Certificate
    diagnostics: SolveOutcome
    source: str = "solver"

    def to_dict(self) -> dict:
        cert: dict
        if isinstance(self.certificate, AslWitness):
            cert = {"type": "pmf", "p": self.certificate.p.probs.tolist()}
        else:
            cert = {
                "type": "sure_loss",
                "lambda": self.certificate.lam.tolist(),
                "alpha": self.certificate.alpha,
            }
        return {
            "avoids_sure_loss": self.avoids,
            "certificate": cert,
            "certificate_source": self.source,
            "diagnostics": self.diagnostics.summary(),
        }


# -- certificate checks ------------------------------------------------------


def check_asl_witness(d: GambleSet, p: Pmf, tol: float = CERT_TOL) -> bool:
    if len(p) != d.n_outcomes:
        return False
    return bool(np.all(d.matrix @ p.probs >= -tol))


def check_sure_loss_witness(d: GambleSet, lam: ArrayLike, tol: float = CERT_TOL) -> bool:
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (d.n_gambles,) or not np.all(np.isfinite(lam)) or np.any(lam < 0):
        return False
    combo = lam @ d.matrix
    return bool(combo.max() <= -tol * max(1.0, float(lam.sum())))


def check_certificate(d: GambleSet, verdict: AslVerdict, tol: float = CERT_TOL) -> bool:
    cert = verdict.certificate
    if verdict.avoids:
        return isinstance(cert, AslWitness) and check_asl_witness(d, cert.p, tol)
    return isinstance(cert, SureLossWitness) and check_sure_loss_witness(d, cert.lam, tol)


def _pmf_from_blocks(meta: FormulationMeta, size: int, p_block: NDArray[np.float64], q: float) -> Pmf | None:
    weights = np.zeros(size)
    weights[list(meta.other_outcomes)] = p_block
    weights[meta.omega0_index] = q
    try:
        return Pmf.from_weights(weights)
    except InvalidInputError:
        return None


def _sure_loss_witness(d: GambleSet, lam: NDArray[np.float64]) -> SureLossWitness | None:
    lam = np.clip(np.asarray(lam, dtype=float), 0.0, None)
    total = float(lam.sum())
    if not np.isfinite(total) or total <= 0:
        return None
    lam = lam / total
    if not check_sure_loss_witness(d, lam):
        return None
    return SureLossWitness(lam, float((lam @ d.matrix).max()))


def _asl_witness(d: GambleSet, p: Pmf | None) -> AslWitness | None:
    if p is None or not check_asl_witness(d, p):
        return None
    return AslWitness(p)


# -- solving ------------------------------------------------------------------


def _early_opts(opts: SolverOptions) -> SolverOptions:
    return opts if opts.early_negative else opts.with_(early_negative=True)


def _require(outcome: SolveOutcome, *ok: Status) -> None:
    if outcome.status not in ok:
        raise SolverError(f"solver stopped with status {outcome.status.value}", outcome)


def _solve_p3(d: GambleSet, omega0: int, method: Method, opts: SolverOptions):
    lp = build_p3(d, omega0)
    if method == Method.SIMPLEX:
        out = revised_simplex(lp, lp.meta.initial_basis, opts)
    elif method == Method.AFFINE:
        out = affine_scaling(lp, start_point_p3(lp), _early_opts(opts))
    else:
        start = start_point_p3(lp).combine(start_point_d5(d.n_gambles, d.n_outcomes))
        out = primal_dual(lp, start, _early_opts(opts))
    _require(out, Status.OPTIMAL, Status.UNBOUNDED, Status.EARLY_NEGATIVE)
    lam_cols = lp.meta.block("lambda")
    if out.status == Status.UNBOUNDED:
        direction = out.ray if out.ray is not None else out.x
        return False, _sure_loss_witness(d, direction[lam_cols]), out
    if out.status == Status.EARLY_NEGATIVE or out.objective < -opts.early_negative_threshold:
        return False, _sure_loss_witness(d, out.x[lam_cols]), out
    # optimal value zero: minus the row duals is the pmf off the reference outcome
    p_block = np.clip(-out.y, 0.0, None)
    q = max(0.0, 1.0 - float(p_block.sum()))
    return True, _asl_witness(d, _pmf_from_blocks(lp.meta, d.n_outcomes, p_block, q)), out


def _solve_d3(d: GambleSet, omega0: int, opts: SolverOptions):
    lp = build_d3(d, omega0)
    out = revised_simplex(lp, lp.meta.initial_basis, opts)
    _require(out, Status.OPTIMAL)
    if out.objective <= GAMMA_TOL:
        p_block = lp.meta.block("p")
        q = float(out.x[lp.meta.block("q")][0])
        p = _pmf_from_blocks(lp.meta, d.n_outcomes, out.x[p_block], q)
        return True, _asl_witness(d, p), out
    signs = np.asarray(lp.meta.row_signs)
    lam = -signs * out.y[: d.n_gambles]
    return False, _sure_loss_witness(d, lam), out


def _solve_d4(d: GambleSet, omega0: int, method: Method, opts: SolverOptions):
    lp, x0 = build_d4_phase1(d, omega0)
    if method == Method.AFFINE:
        out = affine_scaling(lp, x0, opts)
    else:
        dual = start_point_p4prime(build_p4prime(lp))
        out = primal_dual(lp, x0.combine(dual), opts)
    _require(out, Status.OPTIMAL)
    gamma = float(out.x[lp.meta.block("gamma")][0])
    if gamma <= GAMMA_TOL:
        q = float(out.x[lp.meta.block("q")][0])
        p = _pmf_from_blocks(lp.meta, d.n_outcomes, out.x[lp.meta.block("p")], q)
        return True, _asl_witness(d, p), out
    return False, _sure_loss_witness(d, -out.y[: d.n_gambles]), out


def _single_outcome(d: GambleSet) -> AslVerdict:
    values = d.matrix[:, 0]
    trivial = SolveOutcome(Status.OPTIMAL, 0.0, np.zeros(0), iterations=0)
    if np.all(values >= 0):
        return AslVerdict(True, AslWitness(Pmf.point(1, 0)), trivial, "fast-path")
    lam = (values < 0).astype(float)
    lam /= lam.sum()
    return AslVerdict(False, SureLossWitness(lam, float(lam @ values)), trivial, "fast-path")


def avoids_sure_loss(d: GambleSet, choice: MethodChoice | None = None, *, fast_path: bool = True) -> AslVerdict:
    """Decide whether ``d`` avoids sure loss with the chosen method.

    With ``fast_path`` the solver is skipped when some outcome has every
    gamble nonnegative; the point mass there is the certificate.

    If the chosen method's certificate fails its check, the verdict is
    recomputed with simplex on D3; a disagreement between the two raises
    :class:`CertificateError` rather than returning an unsupported answer.
    """
    choice = choice or MethodChoice(Method.SIMPLEX, Formulation.P3)
    if d.n_outcomes == 1:
        return _single_outcome(d)
    omega0 = select_omega0(d)
    if fast_path and np.all(d.matrix[:, omega0] >= 0):
        trivial = SolveOutcome(Status.OPTIMAL, 0.0, np.zeros(0), iterations=0)
        return AslVerdict(True, AslWitness(Pmf.point(d.n_outcomes, omega0)), trivial, "fast-path")

    opts = choice.options
    if choice.formulation == Formulation.P3:
        avoids, cert, out = _solve_p3(d, omega0, choice.method, opts)
    elif choice.formulation == Formulation.D3:
        avoids, cert, out = _solve_d3(d, omega0, opts)
    else:
        avoids, cert, out = _solve_d4(d, omega0, choice.method, opts)
    if cert is not None:
        return AslVerdict(avoids, cert, out)

    if choice.method == Method.SIMPLEX and choice.formulation == Formulation.D3:
        raise CertificateError("simplex on D3 produced a certificate that fails its check", out)
    avoids2, cert2, _ = _solve_d3(d, omega0, opts)
    if cert2 is None or avoids2 != avoids:
        raise CertificateError(
            f"{choice.label} said avoids={avoids} without a valid certificate and the D3 re-check "
            f"{'disagrees' if cert2 is not None else 'failed too'}",
            out,
        )
    return AslVerdict(avoids, cert2, out, "fallback")


# -- natural extension --------------------------------------------------------


def _values(g: Gamble | ArrayLike) -> NDArray[np.float64]:
    return g.values if isinstance(g, Gamble) else np.asarray(g, dtype=float).reshape(-1)


def _matrix(e: GambleSet | NDArray[np.float64] | None, size: int) -> NDArray[np.float64]:
    if e is None:
        return np.zeros((0, size))
    F = e.matrix if isinstance(e, GambleSet) else np.asarray(e, dtype=float).reshape(-1, size)
    if F.shape[1] != size:
        raise InvalidInputError(f"gamble has {size} outcomes, set has {F.shape[1]}")
    return F


def _max_shift(F: NDArray[np.float64], h: NDArray[np.float64], method: str, opts: SolverOptions) -> float:
    """Largest ``w`` with ``sum_i lambda_i f_i + w <= h`` for some ``lambda >= 0``."""
    n, size = F.shape
    A = np.hstack([F.T, np.ones((size, 1)), np.eye(size)])
    c = np.zeros(n + 1 + size)
    c[n] = -1.0
    meta = FormulationMeta(
        Kind.NATEXT, None, make_layout([("lambda", n), ("w", 1), ("s", size)]),
        initial_basis=tuple(range(n + 1, n + 1 + size)),
    )
    lp = StandardLp(A, h, c, meta)
    if method == "simplex":
        out = revised_simplex(lp, meta.initial_basis, opts)
    elif method in ("primal-dual", "primal_dual"):
        out = primal_dual(lp, default_start(lp), opts)
    else:
        raise InvalidInputError(f"unknown method {method!r}")
    if out.status in (Status.UNBOUNDED, Status.INFEASIBLE):
        raise UnboundedError("natural extension is unbounded: the gamble set incurs sure loss", out)
    _require(out, Status.OPTIMAL)
    return float(out.x[n])


def upper_natural_extension(
    e: GambleSet | None, g: Gamble | ArrayLike, *, method: str = "simplex", options: SolverOptions | None = None
) -> float:
    """Smallest ``beta`` such that ``beta - g`` dominates a nonnegative combination of ``e``.

    ``e`` may be ``None`` or an ``(0, M)`` array for the empty set.
    """
    values = _values(g)
    F = _matrix(e, values.size)
    top = float(values.max())
    return top - _max_shift(F, top - values, method, options or SolverOptions())


def lower_natural_extension(
    e: GambleSet | None, g: Gamble | ArrayLike, *, method: str = "simplex", options: SolverOptions | None = None
) -> float:
    """Largest ``gamma`` such that ``g - gamma`` dominates a nonnegative combination of ``e``."""
    values = _values(g)
    F = _matrix(e, values.size)
    bottom = float(values.min())
    return bottom + _max_shift(F, values - bottom, method, options or SolverOptions())


# -- grid snapping ----------------------------------------------------------------


def snap_to_grid(d: GambleSet, denominator: int = GRID) -> GambleSet:
    """Round every payoff to the nearest multiple of ``1/denominator``."""
    return GambleSet(d.space, np.round(d.matrix * denominator) / denominator)

"""Timing grid over instance sizes and (method, formulation) pairs.

Each instance is checked twice and only the second run is timed, which
keeps import and cache warm-up out of the numbers. Every record also
carries the verdict, so a run doubles as a correctness sweep: a verdict
that contradicts the known ground truth aborts the grid.
"""

from __future__ import annotations

import csv
import logging
import math
import statistics
import time
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Iterable, Sequence

from .checker import MethodChoice, avoids_sure_loss
from .core import GambleSet
from .errors import InvalidInputError, SureLossError
from .gen import NOT_ASL_DELTA, generate_instance, instance_seed

log = logging.getLogger(__name__)

TRUTHS = ("asl", "not_asl")
Z95 = 1.96


@dataclass(frozen=True)
class BenchPlan:
    """Grid of ``|D| = 2**i`` gambles by ``|Omega| = 2**j`` outcomes."""

    i_range: tuple[int, ...]
    j_range: tuple[int, ...]
    reps: int
    truth: str = "both"
    methods: tuple[MethodChoice, ...] = field(default_factory=MethodChoice.all)
    seed: int = 0
    k: int = 32
    delta: float = NOT_ASL_DELTA
    fast_path: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "i_range", tuple(self.i_range))
        object.__setattr__(self, "j_range", tuple(self.j_range))
        object.__setattr__(self, "methods", tuple(self.methods))
        if not self.i_range or not self.j_range:
            raise InvalidInputError("exponent ranges must be nonempty")
        if min(self.i_range) < 1 or min(self.j_range) < 1:
            raise InvalidInputError("exponents must be at least 1")
        if self.reps < 1:
            raise InvalidInputError("reps must be at least 1")
        if self.truth not in ("asl", "not_asl", "both"):
            raise InvalidInputError(f"truth must be asl, not_asl or both, got {self.truth!r}")
        if not self.methods:
            raise InvalidInputError("plan needs at least one method")

    @property
    def truths(self) -> tuple[str, ...]:
        return TRUTHS if self.truth == "both" else (self.truth,)

    def cells(self) -> list[tuple[int, int, str]]:
        return [(i, j, t) for t in self.truths for i in self.i_range for j in self.j_range]

    @classmethod
    def preset(cls, name: str, **overrides) -> "BenchPlan":
        if name == "desk":
            base = dict(i_range=range(1, 7), j_range=range(1, 7), reps=50)
        elif name == "full":
            base = dict(i_range=range(1, 9), j_range=range(1, 9), reps=1000)
        else:
            raise InvalidInputError(f"unknown preset {name!r}")
        base.update(overrides)
        return cls(**base)


@dataclass(frozen=True)
class BenchRecord:
    method: str
    formulation: str
    n_gambles: int
    n_outcomes: int
    ground_truth: str
    rep_index: int
    seed: int
    verdict: str
    agree_with_truth: bool
    wall_time_ns: int
    iterations: int
    status: str

    @classmethod
    def columns(cls) -> list[str]:
        return [f.name for f in fields(cls)]


class BenchDisagreement(SureLossError):
    """A verdict contradicted the instance's ground truth."""

    def __init__(self, record: BenchRecord):
        super().__init__(
            f"{record.method} on {record.formulation} said {record.verdict} for a {record.ground_truth} "
            f"instance ({record.n_gambles} gambles, {record.n_outcomes} outcomes, seed {record.seed})"
        )
        self.record = record


def _verdict_name(avoids: bool) -> str:
    return "asl" if avoids else "not_asl"


def time_check(
    d: GambleSet,
    choice: MethodChoice,
    *,
    ground_truth: str = "",
    rep_index: int = 0,
    seed: int = 0,
    fast_path: bool = False,
) -> BenchRecord:
    """Check ``d`` twice and record the timing and verdict of the second run.

    Solver errors do not raise; they show up as ``status = "error: ..."``
    with an empty verdict.
    """
    def record(verdict: str, wall: int, iterations: int, status: str) -> BenchRecord:
        return BenchRecord(
            choice.method.value, choice.formulation.value, d.n_gambles, d.n_outcomes,
            ground_truth, rep_index, seed, verdict,
            bool(verdict) and verdict == ground_truth, wall, iterations, status,
        )

    try:
        first = avoids_sure_loss(d, choice, fast_path=fast_path)
        start = time.perf_counter_ns()
        second = avoids_sure_loss(d, choice, fast_path=fast_path)
        wall = time.perf_counter_ns() - start
    except SureLossError as exc:
        outcome = getattr(exc, "outcome", None)
        status = outcome.status.value if outcome is not None else type(exc).__name__
        return record("", 0, getattr(outcome, "iterations", 0), f"error: {status}")
    if first.avoids != second.avoids:
        raise AssertionError("repeated check changed its verdict")
    return record(_verdict_name(second.avoids), max(wall, 1), second.diagnostics.iterations,
                  second.diagnostics.status.value)


def _run_cell(plan: BenchPlan, cell: tuple[int, int, str]) -> list[BenchRecord]:
    i, j, truth = cell
    n, m = 2**i, 2**j
    out: list[BenchRecord] = []
    aborted: set[int] = set()
    for rep in range(plan.reps):
        seed = instance_seed(plan.seed, i, j, truth, rep)
        d = generate_instance(seed, n, m, truth, k=plan.k, delta=plan.delta)
        for idx, choice in enumerate(plan.methods):
            if idx in aborted:
                continue
            rec = time_check(d, choice, ground_truth=truth, rep_index=rep, seed=seed, fast_path=plan.fast_path)
            out.append(rec)
            if rec.status.startswith("error"):
                log.warning("aborting cell %s for %s: %s (seed %d)", cell, choice.label, rec.status, seed)
                aborted.add(idx)
            elif not rec.agree_with_truth:
                return out
    return out


def _write_csv(path: Path, header: Sequence[str], rows: Iterable[dict]) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(header), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)


SUMMARY_COLUMNS = [
    "method", "formulation", "n_gambles", "n_outcomes", "ground_truth",
    "reps", "mean_ns", "sd_ns", "ci_low_ns", "ci_high_ns", "errors",
]


def mean_ci(values: Sequence[float]) -> tuple[float, float, float, float]:
    """Mean, sample sd and the normal-approximation 95% interval on the mean."""
    mean = statistics.fmean(values)
    sd = statistics.stdev(values) if len(values) > 1 else 0.0
    half = Z95 * sd / math.sqrt(len(values))
    return mean, sd, mean - half, mean + half


def summarize(records: Iterable[BenchRecord]) -> list[dict]:
    groups: dict[tuple, list[BenchRecord]] = defaultdict(list)
    for r in records:
        groups[(r.method, r.formulation, r.n_gambles, r.n_outcomes, r.ground_truth)].append(r)
    rows = []
    for key, recs in groups.items():
        times = [r.wall_time_ns for r in recs if not r.status.startswith("error")]
        errors = len(recs) - len(times)
        mean, sd, low, high = mean_ci(times) if times else (math.nan,) * 4
        rows.append(dict(zip(SUMMARY_COLUMNS, (*key, len(times), mean, sd, low, high, errors))))
    return rows


def run_grid(plan: BenchPlan, out: str | Path, *, workers: int = 1) -> list[dict]:
    """Run every cell of ``plan`` and write ``records.csv`` and ``summary.csv`` into ``out``.

    Cells run sequentially unless ``workers > 1``; record content other
    than ``wall_time_ns`` does not depend on that choice. Raises
    :class:`BenchDisagreement` (after writing what was collected) if any
    verdict contradicts the ground truth.
    """
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    cells = plan.cells()
    records: list[BenchRecord] = []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for chunk in pool.map(_run_cell, [plan] * len(cells), cells):
                records.extend(chunk)
    else:
        for cell in cells:
            log.info("cell %s", cell)
            records.extend(_run_cell(plan, cell))

    _write_csv(out / "records.csv", BenchRecord.columns(), (asdict(r) for r in records))
    summary = summarize(records)
    _write_csv(out / "summary.csv", SUMMARY_COLUMNS, summary)
    for r in records:
        if not r.status.startswith("error") and not r.agree_with_truth:
            raise BenchDisagreement(r)
    return summary


def read_records(path: str | Path) -> list[BenchRecord]:
    """Parse a ``records.csv`` written by :func:`run_grid`."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != BenchRecord.columns():
            raise InvalidInputError(f"{path}: unexpected columns {reader.fieldnames}")
        out = []
        for line_no, row in enumerate(reader, 2):
            try:
                out.append(BenchRecord(
                    row["method"], row["formulation"], int(row["n_gambles"]), int(row["n_outcomes"]),
                    row["ground_truth"], int(row["rep_index"]), int(row["seed"]), row["verdict"],
                    row["agree_with_truth"] == "True", int(row["wall_time_ns"]), int(row["iterations"]),
                    row["status"],
                ))
            except (TypeError, ValueError) as exc:
                raise InvalidInputError(f"{path}:{line_no}: malformed record") from exc
    return out


def emit_plots(csv_path: str | Path, out_dir: str | Path) -> list[Path]:
    """SVG plots of mean time with 95% intervals, one per fixed size and truth.

    For every ``(|D|, truth)`` the x-axis is ``|Omega|``; for every
    ``(|Omega|, truth)`` it is ``|D|``. Both axes use a log scale.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    records = [r for r in read_records(csv_path) if not r.status.startswith("error")]
    if not records:
        raise InvalidInputError(f"{csv_path}: no timing records to plot")
    summary = summarize(records)
    labels = {(c.method.value, c.formulation.value): c.label for c in MethodChoice.all()}
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    files = []
    for fixed, varying, tag in (("n_gambles", "n_outcomes", "D"), ("n_outcomes", "n_gambles", "Omega")):
        for value, truth in sorted({(row[fixed], row["ground_truth"]) for row in summary}):
            rows = [r for r in summary if r[fixed] == value and r["ground_truth"] == truth]
            fig, ax = plt.subplots(figsize=(6, 4))
            for key in sorted({(r["method"], r["formulation"]) for r in rows}):
                series = sorted((r for r in rows if (r["method"], r["formulation"]) == key), key=lambda r: r[varying])
                xs = [r[varying] for r in series]
                means = [r["mean_ns"] / 1e6 for r in series]
                err = [(r["ci_high_ns"] - r["mean_ns"]) / 1e6 for r in series]
                ax.errorbar(xs, means, yerr=err, marker="o", capsize=3, label=labels.get(key, " ".join(key)))
            ax.set_xscale("log", base=2)
            ax.set_yscale("log")
            ax.set_xlabel("number of outcomes" if varying == "n_outcomes" else "number of gambles")
            ax.set_ylabel("mean time (ms)")
            fixed_name = "|D|" if tag == "D" else "|Omega|"
            ax.set_title(f"{fixed_name} = {value}, {truth.replace('_', '-')}")
            ax.legend(fontsize="small")
            fig.tight_layout()
            path = out_dir / f"time_{tag}{value}_{truth}.svg"
            fig.savefig(path, format="svg")
            plt.close(fig)
            files.append(path)
    return files

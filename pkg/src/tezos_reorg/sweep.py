"""Grid search over protocol designs ``(initial endorsers, endorsement delay, priority delay)``.

Each cell estimates ``o1``, the probability of a feasible ``n1``-block fork
(deep reorg), and ``o2``, the probability of a profitable ``n2``-block fork
(selfish mining), and combines them as
``objective = (1 - beta) * o1 + beta * o2``.
"""

from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .estimators import EstimateResult, ISConfig, choose_alpha_q, is_estimate, mc_estimate
from .protocol import ProtocolParams
from .rng import derive_seed
from .state import SamplingConfig

CSV_HEADER = ["ei", "de", "dp", "o1", "o1_lo", "o1_hi", "o2", "o2_lo", "o2_hi", "objective"]
_TARGET_KEY = {"feasible": 1, "profitable": 2}


@dataclass(frozen=True)
class IntRange:
    lo: int
    hi: int
    step: int = 1

    def __post_init__(self):
        if self.step < 1:
            raise ValueError(f"step must be >= 1, got {self.step}")
        if self.hi < self.lo:
            raise ValueError(f"empty range {self.lo}:{self.hi}")

    @classmethod
    def parse(cls, text: str) -> "IntRange":
        """``LO:HI[:STEP]`` or a single integer."""
        parts = [int(p) for p in text.split(":")]
        if len(parts) == 1:
            return cls(parts[0], parts[0])
        if len(parts) in (2, 3):
            return cls(*parts)
        raise ValueError(f"bad range {text!r}")

    def values(self) -> list[int]:
        return list(range(self.lo, self.hi + 1, self.step))


@dataclass(frozen=True)
class SweepGrid:
    alpha: float
    beta: float = 0.5
    ei_range: IntRange = IntRange(0, 32)
    de_range: IntRange = IntRange(4, 20)
    dp_range: IntRange = IntRange(0, 60)
    n1: int = 20
    n2: int = 3
    samples_per_cell: int = 10**5
    seed: int = 0
    is_threshold: int = 100
    # extra design tuples evaluated on top of the rectangular grid (e.g. design candidates)
    extra_points: tuple[tuple[int, int, int], ...] = ()

    def __post_init__(self):
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must lie in [0, 1], got {self.beta}")
        if self.n1 < 1 or self.n2 < 1:
            raise ValueError("n1 and n2 must be >= 1")
        SamplingConfig(self.alpha)  # validates alpha

    def points(self) -> list[tuple[int, int, int]]:
        grid = itertools.product(self.ei_range.values(), self.de_range.values(), self.dp_range.values())
        pts = sorted(set(grid) | {tuple(p) for p in self.extra_points})
        return pts


@dataclass(frozen=True)
class SweepCell:
    params: ProtocolParams
    beta: float
    o1: float
    o1_lo: float
    o1_hi: float
    o2: float
    o2_lo: float
    o2_hi: float
    o1_method: str = "mc"
    o2_method: str = "mc"
    error: Optional[str] = None

    @property
    def objective(self) -> float:
        return objective(self.o1, self.o2, self.beta)

    @property
    def design(self) -> tuple[int, int, int]:
        return self.params.design

    @property
    def failed(self) -> bool:
        return self.error is not None


def objective(o1: float, o2: float, beta: float) -> float:
    return (1.0 - beta) * o1 + beta * o2


def _estimate_cell(params: ProtocolParams, grid: SweepGrid, target: str, n: int, threads) -> EstimateResult:
    seed = derive_seed(grid.seed, (*params.design, _TARGET_KEY[target]))
    cfg = SamplingConfig(grid.alpha, seed=seed)
    res = mc_estimate(params, cfg, n, grid.samples_per_cell, target, threads=threads)
    if res.hits >= grid.is_threshold:
        return res
    q = choose_alpha_q(grid.alpha, n)
    res_is = is_estimate(params, cfg, ISConfig(q), n, grid.samples_per_cell, target, threads=threads)
    # an IS run that saw no more hits than MC carries less information than the CP bound
    return res_is if res_is.hits > res.hits else res


def evaluate_cell(params: ProtocolParams, grid: SweepGrid, threads: Optional[int] = 1) -> SweepCell:
    try:
        r1 = _estimate_cell(params, grid, "feasible", grid.n1, threads)
        r2 = _estimate_cell(params, grid, "profitable", grid.n2, threads)
    except (ValueError, ArithmeticError) as exc:
        nan = float("nan")
        return SweepCell(params, grid.beta, nan, nan, nan, nan, nan, nan, error=str(exc))
    return SweepCell(
        params=params,
        beta=grid.beta,
        o1=r1.p_hat,
        o1_lo=r1.ci_low,
        o1_hi=r1.ci_high,
        o2=r2.p_hat,
        o2_lo=r2.ci_low,
        o2_hi=r2.ci_high,
        o1_method=r1.method,
        o2_method=r2.method,
    )


def run_sweep(grid: SweepGrid, threads: Optional[int] = None, progress=None) -> list[SweepCell]:
    """Evaluate every grid point; cells come back ordered by ``(ei, de, dp)``.

    Each cell draws from its own seed derived from the master seed and its
    coordinates, so any cell can be recomputed in isolation.
    """
    cells = []
    for design in grid.points():
        params = ProtocolParams(*design)
        cells.append(evaluate_cell(params, grid, threads))
        if progress is not None:
            progress(cells[-1])
    return cells


# -- analysis ----------------------------------------------------------------


@dataclass
class Comparison:
    beta: float
    minimum: float
    argmin: tuple[int, int, int]
    ratios: dict[tuple[int, int, int], float] = field(default_factory=dict)


def _ratio(minimum: float, value: float) -> float:
    if value == 0.0:
        return 1.0
    return minimum / value


def compare_designs(
    cells: Sequence[SweepCell], candidates: Iterable[tuple[int, int, int]], betas: Iterable[float]
) -> list[Comparison]:
    """Ratio of the grid-wide minimum objective to each candidate's objective, per ``beta``.

    A ratio of 1 means the candidate is optimal on the grid; 0.4 means its
    objective is 2.5 times the optimum.
    """
    ok = [c for c in cells if not c.failed]
    by_design = {c.design: c for c in ok}
    candidates = [tuple(c) for c in candidates]
    missing = [c for c in candidates if c not in by_design]
    if missing:
        raise KeyError(f"candidate(s) not in sweep: {missing}")
    out = []
    for beta in betas:
        values = np.array([objective(c.o1, c.o2, beta) for c in ok])
        i = int(np.argmin(values))
        cmp = Comparison(beta=beta, minimum=float(values[i]), argmin=ok[i].design)
        for cand in candidates:
            c = by_design[cand]
            cmp.ratios[cand] = _ratio(cmp.minimum, objective(c.o1, c.o2, beta))
        out.append(cmp)
    return out


def grid_array(cells: Sequence[SweepCell], values: Optional[Sequence[float]] = None):
    """Arrange cell values on the ``(ei, de, dp)`` lattice; returns ``(array, axes)``.

    Raises ``ValueError`` if the cells do not form a full rectangular grid.
    """
    axes = [sorted({c.design[k] for c in cells}) for k in range(3)]
    shape = tuple(len(ax) for ax in axes)
    if len(cells) != int(np.prod(shape)):
        raise ValueError("cells do not form a full rectangular grid")
    index = [{v: i for i, v in enumerate(ax)} for ax in axes]
    arr = np.full(shape, np.nan)
    vals = values if values is not None else [c.objective for c in cells]
    for c, v in zip(cells, vals):
        arr[tuple(index[k][c.design[k]] for k in range(3))] = v
    if np.isnan(arr).any() and values is None:
        raise ValueError("grid has failed or missing cells")
    return arr, axes


def smooth_grid(cells: Sequence[SweepCell], sigma: float) -> np.ndarray:
    """Gaussian-filtered objective values, in the order of ``cells``.

    For display only: the raw cell values are left untouched.
    """
    from scipy.ndimage import gaussian_filter

    arr, axes = grid_array(cells)
    smoothed = arr if sigma == 0 else gaussian_filter(arr, sigma=sigma, mode="reflect")
    index = [{v: i for i, v in enumerate(ax)} for ax in axes]
    return np.array([smoothed[tuple(index[k][c.design[k]] for k in range(3))] for c in cells])


# -- CSV ---------------------------------------------------------------------


def _fmt(x: float) -> str:
    return f"{x:.10g}"


def write_csv(cells: Sequence[SweepCell], stream, smoothed: Optional[Sequence[float]] = None) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_HEADER + (["smoothed"] if smoothed is not None else []))
    for i, c in enumerate(cells):
        row = [*c.design, *(_fmt(v) for v in (c.o1, c.o1_lo, c.o1_hi, c.o2, c.o2_lo, c.o2_hi, c.objective))]
        if smoothed is not None:
            row.append(_fmt(smoothed[i]))
        writer.writerow(row)


def read_csv(stream, beta: float = 0.5) -> list[SweepCell]:
    """Load cells written by :func:`write_csv`; ``beta`` is only used for the ``objective`` property."""
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    reader = csv.DictReader(stream)
    missing = set(CSV_HEADER[:9]) - set(reader.fieldnames or [])
    if missing:
        raise ValueError(f"sweep CSV lacks columns: {sorted(missing)}")
    cells = []
    for row in reader:
        params = ProtocolParams(int(row["ei"]), int(row["de"]), int(row["dp"]))
        vals = [float(row[k]) for k in CSV_HEADER[3:9]]
        cells.append(SweepCell(params, beta, *vals))
    return cells

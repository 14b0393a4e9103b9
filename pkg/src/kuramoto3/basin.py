"""Basin-of-attraction sweeps over the torus of phase differences."""
from __future__ import annotations

import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .diameter import region_membership
from .equilibria import CriticalPointId
from .integrate import IntegratorConfig, limit_points
from .model import TWO_PI, Coupling

UNCLASSIFIED = 0
CHUNK_SIZE = 8192


def _default_integrator() -> IntegratorConfig:
    return IntegratorConfig(t_max=2000.0, convergence_eps=1e-10)


@dataclass(frozen=True)
class SweepConfig:
    resolution: int
    coupling: Coupling
    integrator: IntegratorConfig = field(default_factory=_default_integrator)
    workers: int = 1

    def __post_init__(self):
        if self.resolution < 2:
            raise ValueError("resolution must be at least 2")
        if self.workers < 1:
            raise ValueError("workers must be positive")


@dataclass(frozen=True)
class BasinGrid:
    """``cells[a, b]`` holds the critical point index (1..6) reached from the
    centre of cell ``(a, b)``, or 0 if the run was unclassified."""

    resolution: int
    cells: np.ndarray
    coupling: Coupling

    def centers(self) -> np.ndarray:
        return cell_centers(self.resolution)

    def label(self, a: int, b: int) -> str:
        return code_label(self.cells[a, b])


@dataclass
class BasinReport:
    area_fraction: dict
    unclassified_fraction: float
    violations: list = field(default_factory=list)


def cell_centers(resolution: int) -> np.ndarray:
    return -math.pi + TWO_PI * (np.arange(resolution) + 0.5) / resolution


def code_label(code: int) -> str:
    return f"star{int(code)}" if code else "unclassified"


def lifted_initials(resolution: int) -> np.ndarray:
    """Row-major ``(x, y, 0)`` lifts of every cell centre."""
    c = cell_centers(resolution)
    x, y = np.meshgrid(c, c, indexing="ij")
    return np.stack([x.ravel(), y.ravel(), np.zeros(x.size)], axis=1)


def _run_chunk(args):
    rows, coupling, integrator = args
    try:
        codes, _, _ = limit_points(rows, coupling, integrator)
    except Exception:
        # a failing batch is retried cell by cell so one bad cell cannot sink the rest
        codes = np.zeros(len(rows), dtype=np.int8)
        for i, row in enumerate(rows):
            try:
                codes[i] = limit_points(row[None, :], coupling, integrator)[0][0]
            except Exception:
                codes[i] = UNCLASSIFIED
    return codes


def sweep(config: SweepConfig) -> BasinGrid:
    """Classify the limit of every cell centre.

    Cells are cut into fixed-size chunks that depend only on the resolution,
    so the grid is identical for any worker count or completion order.
    """
    initials = lifted_initials(config.resolution)
    chunks = [
        (initials[i:i + CHUNK_SIZE], config.coupling, config.integrator)
        for i in range(0, len(initials), CHUNK_SIZE)
    ]
    if config.workers == 1:
        results = [_run_chunk(c) for c in chunks]
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_run_chunk, chunks))
    cells = np.concatenate(results).reshape(config.resolution, config.resolution)
    return BasinGrid(config.resolution, cells, config.coupling)


def basin_report(grid: BasinGrid) -> BasinReport:
    total = grid.cells.size
    if total == 0:
        raise ValueError("empty grid")
    counts = np.bincount(grid.cells.ravel().astype(np.int64), minlength=7)
    fractions = {CriticalPointId.from_index(i): counts[i] / total for i in range(1, 7)}
    return BasinReport(fractions, counts[0] / total)


def _in_box(x: float, y: float, which: CriticalPointId) -> bool:
    for a in (-1, 0, 1):
        for b in (-1, 0, 1):
            if region_membership((x + TWO_PI * a, y + TWO_PI * b, 0.0), which):
                return True
    return False


def region_mask(resolution: int, which: CriticalPointId) -> np.ndarray:
    """Cells whose centre has some 2pi-shifted lift inside the convergence box of ``which``."""
    c = cell_centers(resolution)
    return np.array([[_in_box(x, y, which) for y in c] for x in c])


def verify_region_subset(grid: BasinGrid, which: CriticalPointId) -> list[tuple[int, int]]:
    """Cells inside the convergence box of ``which`` that the sweep sent elsewhere."""
    mask = region_mask(grid.resolution, which)
    bad = mask & (grid.cells != which.index)
    return [(int(a), int(b)) for a, b in zip(*np.nonzero(bad))]


def reflection_mismatches(grid: BasinGrid, first=CriticalPointId.STAR5, second=CriticalPointId.STAR6) -> int:
    """Cells where ``(x, y) -> (-x, -y)`` fails to swap the basins of ``first`` and ``second``."""
    mirrored = grid.cells[::-1, ::-1]
    a = grid.cells == first.index
    b = mirrored == second.index
    return int(np.count_nonzero(a != b))


def grid_to_csv(grid: BasinGrid) -> str:
    """CSV with header ``x,y,class``, rows in row-major ``(a, b)`` order."""
    c = cell_centers(grid.resolution)
    buf = io.StringIO()
    buf.write("x,y,class\n")
    for a in range(grid.resolution):
        for b in range(grid.resolution):
            buf.write(f"{c[a]:.17g},{c[b]:.17g},{code_label(grid.cells[a, b])}\n")
    return buf.getvalue()

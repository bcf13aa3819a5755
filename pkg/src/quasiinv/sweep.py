"""Parameter sweeps over channel families, emitted as CSV.

A grid axis is written ``name=start:stop:count`` (``count >= 2`` points,
endpoints included). Rows are produced in row-major order over the axes as
listed by the family, whatever order they were given on the command line.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .batch import BatchResult, quasi_inverse_batch
from .channel import QubitChannel, make_amplitude_damping, make_mixed_rotation, make_tetrahedron_pair
from .errors import InvalidInputError
from .pauli import ALGEBRA_TOL, INPUT_TOL

PI_TOL = 1e-9


@dataclass(frozen=True)
class Axis:
    name: str
    start: float
    stop: float
    count: int

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class Family:
    name: str
    params: tuple[str, ...]
    bounds: tuple[tuple[float, float], ...]
    default_grid: tuple[Axis, ...]
    build: Callable[..., QubitChannel]
    # joint constraint on a grid point; points failing it are omitted
    admissible: Callable[..., bool] = lambda *args: True


FAMILIES = {
    "mixed_rotation": Family(
        "mixed_rotation",
        ("p", "theta"),
        ((0.0, 1.0 / 3.0), (0.0, 2.0 * np.pi)),
        (Axis("p", 0.0, 1.0 / 3.0, 101), Axis("theta", 0.0, 2.0 * np.pi, 101)),
        make_mixed_rotation,
    ),
    "tetrahedron": Family(
        "tetrahedron",
        ("p", "p_prime"),
        ((0.0, 0.5), (0.0, 0.5)),
        (Axis("p", 0.0, 0.5, 201), Axis("p_prime", 0.0, 0.5, 201)),
        make_tetrahedron_pair,
        lambda p, pp: p + pp <= 0.5 + 1e-12,
    ),
    "amplitude_damping": Family(
        "amplitude_damping",
        ("gamma",),
        ((-1.0, 1.0),),
        (Axis("gamma", -0.99, 0.99, 199),),
        make_amplitude_damping,
        lambda g: abs(g) < 1.0,
    ),
    "twisted_amplitude_damping": Family(
        "twisted_amplitude_damping",
        ("gamma",),
        ((-1.0, 1.0),),
        (Axis("gamma", -0.99, 0.99, 199),),
        lambda g: make_amplitude_damping(g, twisted=True),
        lambda g: abs(g) < 1.0,
    ),
}

RESULT_COLUMNS = (
    "f_before", "delta_f", "f_after", "lambda_max",
    "x0", "x1", "x2", "x3", "phi", "axis_x", "axis_y", "axis_z",
    "degenerate", "region",
)


def parse_axis(text: str) -> Axis:
    """Parse ``name=start:stop:count``."""
    name, sep, rest = text.partition("=")
    parts = rest.split(":")
    if not sep or not name or len(parts) != 3:
        raise InvalidInputError(f"grid axis must look like name=start:stop:count, got {text!r}")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise InvalidInputError(f"grid axis {text!r}: bad number") from None
    if not (np.isfinite(start) and np.isfinite(stop)):
        raise InvalidInputError(f"grid axis {name}: bounds must be finite")
    if count < 2:
        raise InvalidInputError(f"grid axis {name}: need at least 2 points, got {count}")
    return Axis(name.strip(), start, stop, count)


def resolve_grid(family: str, axes: Sequence[Axis] = ()) -> tuple[Family, tuple[Axis, ...]]:
    """Fill unspecified axes from the family defaults and check every range."""
    if family not in FAMILIES:
        raise InvalidInputError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")
    fam = FAMILIES[family]
    given = {}
    for ax in axes:
        if ax.name not in fam.params:
            raise InvalidInputError(f"{family} has no parameter {ax.name!r} (has {', '.join(fam.params)})")
        if ax.name in given:
            raise InvalidInputError(f"grid axis {ax.name} given twice")
        given[ax.name] = ax
    grid = tuple(given.get(d.name, d) for d in fam.default_grid)
    for ax, (lo, hi) in zip(grid, fam.bounds):
        if min(ax.start, ax.stop) < lo - INPUT_TOL or max(ax.start, ax.stop) > hi + INPUT_TOL:
            raise InvalidInputError(
                f"grid axis {ax.name} = [{ax.start}, {ax.stop}] leaves the domain [{lo:.12g}, {hi:.12g}]"
            )
    return fam, grid


def region_label(delta_f: float, y: np.ndarray) -> str:
    """``identity``, ``sigma_x|y|z`` (pi rotation about a coordinate axis), ``pi_rotation`` or ``rotation``."""
    if delta_f <= ALGEBRA_TOL:
        return "identity"
    if abs(y[0]) > PI_TOL:
        return "rotation"
    x = np.abs(y[1:])
    k = int(np.argmax(x))
    if x[k] >= 1.0 - PI_TOL:
        return "sigma_" + "xyz"[k]
    return "pi_rotation"


def _fmt(value: float) -> str:
    # 12 significant digits; '+ 0.0' folds negative zero
    return f"{float(value) + 0.0:.12g}"


def _row_points(fam: Family, grid: tuple[Axis, ...]) -> list[list[tuple[float, ...]]]:
    """Grid points grouped by the first axis, admissible points only."""
    first, rest = grid[0].values(), [ax.values() for ax in grid[1:]]
    rows = []
    for v in first:
        if rest:
            mesh = np.meshgrid(*rest, indexing="ij")
            tails = zip(*(m.reshape(-1) for m in mesh))
            pts = [(v, *tail) for tail in tails]
        else:
            pts = [(v,)]
        rows.append([pt for pt in pts if fam.admissible(*pt)])
    return rows


def _evaluate_row(fam: Family, points: list[tuple[float, ...]]) -> list[list[str]]:
    if not points:
        return []
    res: BatchResult = quasi_inverse_batch([fam.build(*pt) for pt in points])
    out = []
    for i, pt in enumerate(points):
        y = res.unitary[i]
        norm_x = float(np.linalg.norm(y[1:]))
        axis = y[1:] / norm_x if norm_x > ALGEBRA_TOL else np.zeros(3)
        phi = float(np.arctan2(norm_x, y[0]))
        numbers = [
            *pt, res.f_before[i], res.delta_f[i], res.f_after[i], res.lambda_max[i],
            *y, phi, *axis,
        ]
        out.append(
            [_fmt(v) for v in numbers]
            + [str(int(res.degenerate[i])), region_label(res.delta_f[i], y)]
        )
    return out


def sweep_rows(family: str, axes: Sequence[Axis] = (), workers: int = 1) -> tuple[list[str], list[list[str]]]:
    """Header and formatted rows for a sweep; order is independent of ``workers``."""
    fam, grid = resolve_grid(family, axes)
    groups = _row_points(fam, grid)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            chunks = list(pool.map(lambda pts: _evaluate_row(fam, pts), groups))
    else:
        # one batch for the whole grid: cheapest when running serially
        flat = [pt for pts in groups for pt in pts]
        chunks = [_evaluate_row(fam, flat)]
    header = [*fam.params, *RESULT_COLUMNS]
    return header, [row for chunk in chunks for row in chunk]


def sweep_csv(family: str, axes: Sequence[Axis] = (), workers: int = 1) -> str:
    header, rows = sweep_rows(family, axes, workers)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()

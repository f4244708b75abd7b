"""Parameter sweeps over the admissible (b, sigma2) region.

Sweep files are JSON::

    {
      "b": {"start": 0.0, "stop": 2.8284271247461903, "count": 11},
      "sigma2": {"mode": "fraction", "start": 0.0, "stop": 1.0, "count": 11},
      "solver": {"tolerance": 1e-10, "max_iterations": 200}
    }

In ``fraction`` mode sigma2 runs between the bounds 2 sqrt(2) b and 8 at each
b; in ``absolute`` mode it is a fixed range and infeasible points are dropped.
"""

from __future__ import annotations

import csv
import io
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bell import (
    BOUNDARY_EPS,
    SIGMA2_MAX,
    TWO_SQRT2,
    BellDiagonalState,
    Region,
    classify_constraint_point,
    two_constraint_state,
    uncertainty_lower_bound,
)
from .errors import InfeasibleError, MaxEntError
from .problem import FileFormatError, integer, number, parse_json
from .qstate import to_bell_basis
from .separability import bell_diagonal_separable
from .solver import ConstraintSet, solve_dual

log = logging.getLogger(__name__)

CSV_HEADER = (
    "b", "sigma2", "lambda1", "lambda2", "ln_Z", "entropy",
    "p_phi_plus", "p_psi_minus", "p_phi_minus", "p_psi_plus", "separable", "region",
)


def fmt(x: float) -> str:
    """12 significant digits, with negative zero normalized."""
    x = float(x)
    return format(0.0 if x == 0 else x, ".12g")


@dataclass(frozen=True)
class SweepSpec:
    b_start: float
    b_stop: float
    b_count: int
    sigma2_mode: str
    sigma2_start: float
    sigma2_stop: float
    sigma2_count: int
    tolerance: float = 1e-10
    max_iterations: int = 200

    def __post_init__(self):
        if self.b_count < 2 or self.sigma2_count < 2:
            raise FileFormatError("sweep counts must be at least 2")
        if self.sigma2_mode not in ("fraction", "absolute"):
            raise FileFormatError(f"sigma2.mode: expected 'fraction' or 'absolute', got {self.sigma2_mode!r}")


@dataclass(frozen=True)
class SweepRow:
    b: float
    sigma2: float
    lambda1: float | None
    lambda2: float | None
    ln_Z: float | None
    entropy: float
    probabilities: tuple
    separable: bool
    region: Region

    def cells(self) -> list[str]:
        opt = lambda x: "" if x is None else fmt(x)  # noqa: E731
        return [
            fmt(self.b), fmt(self.sigma2), opt(self.lambda1), opt(self.lambda2), opt(self.ln_Z),
            fmt(self.entropy), *(fmt(p) for p in self.probabilities),
            "true" if self.separable else "false", self.region.value,
        ]


@dataclass
class SweepResult:
    rows: list[SweepRow]
    warnings: list[str] = field(default_factory=list)


def _range(raw, path: str) -> tuple[float, float, int]:
    if not isinstance(raw, dict):
        raise FileFormatError(f"{path}: expected an object with start, stop, count")
    for key in ("start", "stop", "count"):
        if key not in raw:
            raise FileFormatError(f"{path}.{key}: missing")
    count = integer(raw["count"], f"{path}.count")
    if count < 2:
        raise FileFormatError(f"{path}.count: must be at least 2")
    return number(raw["start"], f"{path}.start"), number(raw["stop"], f"{path}.stop"), count


def parse_sweep(text: str) -> SweepSpec:
    data = parse_json(text, "sweep")
    b0, b1, nb = _range(data.get("b"), "b")
    s_raw = data.get("sigma2")
    mode = s_raw.get("mode", "fraction") if isinstance(s_raw, dict) else None
    s0, s1, ns = _range(s_raw, "sigma2")
    opts = {}
    solver = data.get("solver", {})
    if not isinstance(solver, dict):
        raise FileFormatError("sweep: 'solver' must be an object")
    for key, val in solver.items():
        if key == "tolerance":
            opts[key] = number(val, "solver.tolerance")
        elif key == "max_iterations":
            opts[key] = integer(val, "solver.max_iterations")
        else:
            raise FileFormatError(f"solver.{key}: unknown option")
    return SweepSpec(b0, b1, nb, mode, s0, s1, ns, **opts)


def load_sweep(path) -> SweepSpec:
    return parse_sweep(Path(path).read_text())


def grid_points(spec: SweepSpec) -> tuple[list[tuple[float, float]], list[str]]:
    """Feasible grid in b-major, ascending order, plus clipping warnings."""
    warnings = []
    lo_b, hi_b = sorted((spec.b_start, spec.b_stop))
    if lo_b < 0.0 or hi_b > TWO_SQRT2:
        warnings.append(f"b range [{fmt(lo_b)}, {fmt(hi_b)}] clipped to [0, 2*sqrt(2)]")
        lo_b, hi_b = max(lo_b, 0.0), min(hi_b, TWO_SQRT2)
    if lo_b > hi_b:
        raise InfeasibleError("b range does not intersect [0, 2*sqrt(2)]")
    points = []
    lo_s, hi_s = sorted((spec.sigma2_start, spec.sigma2_stop))
    if spec.sigma2_mode == "fraction" and (lo_s < 0.0 or hi_s > 1.0):
        warnings.append(f"sigma2 fraction range [{fmt(lo_s)}, {fmt(hi_s)}] clipped to [0, 1]")
        lo_s, hi_s = max(lo_s, 0.0), min(hi_s, 1.0)
        if lo_s > hi_s:
            raise InfeasibleError("sigma2 fraction range does not intersect [0, 1]")
    for b in np.linspace(lo_b, hi_b, spec.b_count):
        b = float(b)
        lower = min(uncertainty_lower_bound(b), SIGMA2_MAX)
        values = []
        for s in np.linspace(lo_s, hi_s, spec.sigma2_count):
            if spec.sigma2_mode == "fraction":
                values.append(lower + (SIGMA2_MAX - lower) * float(s))
            elif classify_constraint_point(b, s) is Region.INFEASIBLE:
                warnings.append(f"dropped infeasible point b={fmt(b)}, sigma2={fmt(s)}")
            else:
                values.append(float(s))
        points.extend((b, s) for s in sorted(values))
    if not points:
        raise InfeasibleError("sweep grid has no feasible points")
    return points, warnings


def evaluate_point(b: float, sigma2: float, tolerance: float = 1e-10, max_iterations: int = 200) -> SweepRow:
    """Solve the dual at an interior point; use the closed-form state elsewhere."""
    region = classify_constraint_point(b, sigma2)
    closed = two_constraint_state(b, sigma2)
    margin = min(sigma2 - TWO_SQRT2 * b, SIGMA2_MAX - sigma2)
    if region is Region.INTERIOR and margin > BOUNDARY_EPS:
        try:
            sol = solve_dual(ConstraintSet.bell_chsh(b, sigma2), tolerance=tolerance, max_iterations=max_iterations)
        except MaxEntError as exc:
            log.warning("solver failed at b=%s, sigma2=%s: %s", fmt(b), fmt(sigma2), exc)
        else:
            if sol.converged:
                solved = BellDiagonalState.from_probabilities(np.diag(to_bell_basis(sol.state)).real)
                return SweepRow(
                    b, sigma2, float(sol.multipliers[0]), float(sol.multipliers[1]), sol.ln_Z, sol.entropy,
                    tuple(float(p) for p in solved.probabilities), bell_diagonal_separable(solved).separable, region,
                )
            log.warning("solver did not converge at b=%s, sigma2=%s", fmt(b), fmt(sigma2))
    return SweepRow(
        b, sigma2, None, None, None, closed.entropy(), tuple(float(p) for p in closed.probabilities),
        bell_diagonal_separable(closed).separable, region,
    )


def run_sweep(spec: SweepSpec, jobs: int = 1) -> SweepResult:
    points, warnings = grid_points(spec)
    opts = dict(tolerance=spec.tolerance, max_iterations=spec.max_iterations)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(lambda p: evaluate_point(*p, **opts), points))
    else:
        rows = [evaluate_point(b, s, **opts) for b, s in points]
    return SweepResult(rows, warnings)


def render_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(row.cells())
    return buf.getvalue()

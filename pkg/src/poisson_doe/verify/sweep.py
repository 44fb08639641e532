"""Grid sweeps of the deduced sensitivity (equivalence-theorem checks).

A design is D-optimal on a region when the deduced sensitivity
``d(x) = f(x)' M^-1 f(x) / p - 1/lambda(x)`` is non-positive everywhere on
it.  The sweeps here evaluate ``d`` on regular grids, in parallel chunks,
and reduce to the maximum plus the list of points above tolerance.

Unbounded regions are truncated to a box ``[corner, corner + x_max]``.  The
remainder is covered by a tail certificate: with negative main effects and
non-positive interactions ``1/lambda`` grows exponentially while the
quadratic form grows polynomially, so ``d < -1`` on the outer shell of the
box is taken as evidence that ``d`` stays negative beyond it.
"""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..catalog import RegionKind, RegionSpec, design_faces, faces_model
from ..design import SingularDesignError, information_matrix, sensitivity_rows
from ..model import recenter, regression_matrix

TAIL_MARGIN = -1.0
DEFAULT_TOL = 1e-9
MAX_LISTED_VIOLATIONS = 100


@dataclass(frozen=True)
class GridConfig:
    """Sweep resolution and truncation.

    ``step=None`` picks 0.01 in two dimensions, 0.05 in three and 0.2
    beyond; ``line_step`` is used for one-dimensional boundary and diagonal
    sweeps.  ``x_max=None`` truncates at ``max(20, 10 * largest support
    coordinate)``.
    """

    step: float | None = None
    line_step: float = 0.001
    x_max: float | None = None
    tolerance: float = DEFAULT_TOL
    threads: int | None = None
    chunk_size: int = 1 << 18

    def step_for(self, k):
        if self.step is not None:
            return self.step
        return {1: self.line_step, 2: 0.01, 3: 0.05}.get(k, 0.2)

    def workers(self):
        return self.threads or os.cpu_count() or 1


@dataclass
class VerificationReport:
    max_d: float
    argmax: np.ndarray
    n_points: int
    tolerance: float
    violations: np.ndarray
    violation_values: np.ndarray
    region: RegionSpec
    reduced: bool = False
    tail_certified: bool = False
    box: tuple | None = None
    step: float | None = None
    support_max_abs_d: float | None = None
    face_max: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    max_psi: float | None = None
    psi_argmax: np.ndarray | None = None

    @property
    def n_violations(self):
        return int(self.violation_values.size)

    @property
    def verified(self):
        ok = self.max_d <= self.tolerance and all(v for k, v in self.checks.items() if k.endswith("_ok"))
        return bool(ok and (self.tail_certified or self.region.bounded))

    def to_dict(self):
        order = np.argsort(-self.violation_values)[:MAX_LISTED_VIOLATIONS]
        return {
            "verified": self.verified,
            "max_d": _num(self.max_d),
            "argmax": self.argmax.tolist(),
            "max_psi": _num(self.max_psi),
            "psi_argmax": None if self.psi_argmax is None else self.psi_argmax.tolist(),
            "n_points": self.n_points,
            "tolerance": self.tolerance,
            "n_violations": self.n_violations,
            "violations": [
                {"point": self.violations[i].tolist(), "d": _num(self.violation_values[i])} for i in order
            ],
            "region": self.region.to_dict(),
            "reduced": self.reduced,
            "tail_certified": self.tail_certified,
            "box": None if self.box is None else [list(map(float, b)) for b in self.box],
            "step": self.step,
            "support_max_abs_d": _num(self.support_max_abs_d),
            "face_max": {f"{i},{j}": _num(v) for (i, j), v in self.face_max.items()},
            "checks": {k: (_num(v) if isinstance(v, float) else v) for k, v in self.checks.items()},
        }


def _num(v):
    if v is None:
        return None
    v = float(v)
    if np.isfinite(v):
        return v
    return "-inf" if v < 0 else ("inf" if v > 0 else "nan")


# ---------------------------------------------------------------------------
# grid machinery


def axis_values(lo, hi, step):
    n = int(round((hi - lo) / step)) + 1
    return np.linspace(lo, hi, n)


class _Sweep:
    """Running max and violation list over chunks of evaluated points."""

    def __init__(self, k, tolerance):
        self.k = k
        self.tolerance = tolerance
        self.max_d = -np.inf
        self.argmax = np.full(k, np.nan)
        self.max_psi = -np.inf
        self.psi_argmax = np.full(k, np.nan)
        self.n_points = 0
        self._viol_pts = []
        self._viol_vals = []

    def add(self, pts, d, psi=None):
        if d.size == 0:
            return
        self.n_points += d.size
        i = int(np.argmax(d))
        if d[i] > self.max_d or np.isnan(self.argmax[0]):
            self.max_d = float(d[i])
            self.argmax = pts[i].copy()
        if psi is not None:
            i = int(np.argmax(psi))
            if psi[i] > self.max_psi:
                self.max_psi = float(psi[i])
                self.psi_argmax = pts[i].copy()
        bad = d > self.tolerance
        if np.any(bad):
            self._viol_pts.append(pts[bad])
            self._viol_vals.append(d[bad])

    def merge(self, other):
        self.n_points += other.n_points
        if other.max_d > self.max_d or (np.isnan(self.argmax[0]) and other.n_points):
            self.max_d, self.argmax = other.max_d, other.argmax
        if other.max_psi > self.max_psi:
            self.max_psi, self.psi_argmax = other.max_psi, other.psi_argmax
        self._viol_pts += other._viol_pts
        self._viol_vals += other._viol_vals

    @property
    def violations(self):
        if not self._viol_pts:
            return np.empty((0, self.k)), np.empty(0)
        return np.concatenate(self._viol_pts), np.concatenate(self._viol_vals)


def _evaluate(model, info, pts):
    """Deduced sensitivity and sensitivity at each point."""
    return sensitivity_rows(model, info, regression_matrix(model, pts))


def sweep_grid(model, info, axes, embed=None, tolerance=DEFAULT_TOL, threads=1, chunk_size=1 << 18):
    """Evaluate ``d`` on the tensor grid spanned by ``axes``.

    ``embed(points)`` maps grid coordinates into model space (used for faces
    and lines); by default the grid is the model space itself.
    """
    shape = tuple(len(a) for a in axes)
    total = int(np.prod(shape))
    dim = len(axes)
    starts = range(0, total, chunk_size)

    def run(start):
        idx = np.unravel_index(np.arange(start, min(start + chunk_size, total)), shape)
        grid_pts = np.column_stack([axes[j][idx[j]] for j in range(dim)])
        pts = grid_pts if embed is None else embed(grid_pts)
        part = _Sweep(model.k, tolerance)
        part.add(pts, *_evaluate(model, info, pts))
        return part

    acc = _Sweep(model.k, tolerance)
    if threads > 1 and total > chunk_size:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for part in pool.map(run, starts):
                acc.merge(part)
    else:
        for start in starts:
            acc.merge(run(start))
    return acc


def _tail_eligible(model, corner):
    local = recenter(model, corner)
    return bool(np.all(local.main_effects < 0) and np.all(local.interactions <= 0))


def _shell_max(model, info, lo, hi, step):
    """Largest ``d`` on the faces ``x_i = hi_i`` of the box."""
    k = len(lo)
    worst = -np.inf
    for i in range(k):
        axes = [axis_values(lo[j], hi[j], step) if j != i else np.array([hi[i]]) for j in range(k)]
        worst = max(worst, sweep_grid(model, info, axes).max_d)
    return worst


def _support_residual(model, info, design, inside):
    pts = design.points[inside(design.points)]
    if pts.size == 0:
        return None, pts, (np.empty(0), np.empty(0))
    d, psi = _evaluate(model, info, pts)
    return float(np.max(np.abs(d))), pts, (d, psi)


def _default_x_max(design, corner):
    return max(20.0, 10.0 * float(np.max(design.points - corner)))


def _require_info(model, design):
    info = information_matrix(model, design)
    if info.singular:
        raise SingularDesignError("design not fully informative")
    return info


# ---------------------------------------------------------------------------
# public sweeps


def verify_full_grid(model, design, region=None, grid=None):
    """Sweep the deduced sensitivity over a full grid of the region.

    Support points are evaluated as well so the maximum of an optimal
    design is attained (at zero) exactly there.
    """
    region = region or RegionSpec.orthant()
    grid = grid or GridConfig()
    region.check_dimension(model.k)
    if region.kind is RegionKind.TWO_FACES:
        return _verify_faces_region(model, design, grid)
    info = _require_info(model, design)
    k = model.k
    step = grid.step_for(k)
    if region.kind is RegionKind.RECTANGLE:
        lo = np.zeros(k)
        hi = np.array(region.bounds)
    else:
        lo = np.zeros(k) if region.shift is None else np.array(region.shift)
        x_max = grid.x_max if grid.x_max is not None else _default_x_max(design, lo)
        hi = lo + x_max
    axes = [axis_values(lo[j], hi[j], step) for j in range(k)]
    acc = sweep_grid(model, info, axes, tolerance=grid.tolerance, threads=grid.workers(),
                     chunk_size=grid.chunk_size)

    def inside(pts):
        return np.all((pts >= lo - 1e-12) & (pts <= hi + 1e-12), axis=1)

    support_abs, spts, sd = _support_residual(model, info, design, inside)
    acc.add(spts, *sd)
    tail = False
    checks = {}
    if not region.bounded:
        shell = _shell_max(model, info, lo, hi, step)
        checks["shell_max_d"] = shell
        tail = _tail_eligible(model, lo) and shell < TAIL_MARGIN
    viol, vals = acc.violations
    return VerificationReport(
        max_d=acc.max_d, argmax=acc.argmax, n_points=acc.n_points, tolerance=grid.tolerance,
        violations=viol, violation_values=vals, region=region, reduced=False,
        tail_certified=tail, box=(lo, hi), step=step, support_max_abs_d=support_abs, checks=checks,
        max_psi=acc.max_psi, psi_argmax=acc.psi_argmax,
    )


def _face_embed(k, i, j):
    def embed(p2):
        out = np.zeros((p2.shape[0], k))
        out[:, i] = p2[:, 0]
        out[:, j] = p2[:, 1]
        return out
    return embed


def _verify_faces_region(model, design, grid):
    k = model.k
    info = _require_info(model, design)
    on_faces = np.count_nonzero(design.points, axis=1) <= 2
    if not np.all(on_faces) or np.any(design.points < 0):
        raise ValueError("design must be supported on the two-dimensional faces")
    step = grid.step_for(2)
    x_max = grid.x_max if grid.x_max is not None else _default_x_max(design, np.zeros(k))
    axis = axis_values(0.0, x_max, step)
    acc = _Sweep(k, grid.tolerance)
    face_max = {}
    shell = -np.inf
    for i, j in itertools.combinations(range(k), 2):
        embed = _face_embed(k, i, j)
        part = sweep_grid(model, info, [axis, axis], embed=embed, tolerance=grid.tolerance,
                          threads=grid.workers(), chunk_size=grid.chunk_size)
        face_max[(i, j)] = part.max_d
        acc.merge(part)
        for edge in ([axis, np.array([x_max])], [np.array([x_max]), axis]):
            shell = max(shell, sweep_grid(model, info, edge, embed=embed).max_d)
    support_abs, spts, sd = _support_residual(model, info, design, lambda p: np.ones(len(p), bool))
    acc.add(spts, *sd)
    for (i, j) in face_max:
        mask = np.all(np.delete(spts, [i, j], axis=1) == 0, axis=1)
        if np.any(mask):
            face_max[(i, j)] = max(face_max[(i, j)], float(np.max(sd[0][mask])))
    viol, vals = acc.violations
    return VerificationReport(
        max_d=acc.max_d, argmax=acc.argmax, n_points=acc.n_points, tolerance=grid.tolerance,
        violations=viol, violation_values=vals, region=RegionSpec.two_faces(),
        tail_certified=_tail_eligible(model, np.zeros(k)) and shell < TAIL_MARGIN,
        box=(np.zeros(2), np.full(2, x_max)), step=step, support_max_abs_d=support_abs,
        face_max=face_max, checks={"shell_max_d": shell}, max_psi=acc.max_psi, psi_argmax=acc.psi_argmax,
    )


def verify_faces(k, rho_matrix, grid=None):
    """Check the faces design on every two-dimensional face of the orthant."""
    rho = np.asarray(rho_matrix, dtype=float)
    if rho.shape != (k, k):
        raise ValueError(f"rho_matrix must be {k} x {k}")
    return _verify_faces_region(faces_model(rho), design_faces(rho), grid or GridConfig())


def faces_conjecture_sweep(k, rho_matrix, grid=None):
    """Sweep the faces design over the full orthant box.

    Optimality there is only conjectured; the report is informational and
    nothing is asserted about it.
    """
    rho = np.asarray(rho_matrix, dtype=float)
    if rho.shape != (k, k):
        raise ValueError(f"rho_matrix must be {k} x {k}")
    grid = grid or GridConfig(x_max=8.0)
    return verify_full_grid(faces_model(rho), design_faces(rho), RegionSpec.orthant(), grid)

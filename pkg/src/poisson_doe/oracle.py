"""Grid-based D-optimal designs, independent of the closed-form catalog.

The multiplicative algorithm ``w_i <- w_i psi(x_i) / p`` increases
``log det M`` monotonically for the D-criterion.  Candidates that provably
cannot carry weight at the optimum are dropped along the way using the
bound of Harman and Pronzato (2007); this only removes points and leaves the
update rule itself unchanged.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .catalog import RegimeError, RegionSpec, diagonal_objective
from .design import (
    Design, ReferenceNotOptimalError, SingularDesignError, d_efficiency, info_from_matrix,
    information_matrix,
)
from .model import linear_predictor, regression_matrix

PRUNE_WEIGHT = 1e-10
DEFAULT_TOL = 1e-7
DEFAULT_MAX_ITER = 200_000
LOGDET_SLACK = 1e-12
SCAN_POINTS = 4001
EPS = np.finfo(float).eps
DIFF_STEP = 1e-5


class CatalogSuboptimalError(AssertionError):
    """The oracle found a design better than the catalog claims is optimal."""


@dataclass(frozen=True, eq=False)
class CandidateGrid:
    points: np.ndarray
    region: RegionSpec
    step: float | None

    @classmethod
    def box(cls, k, upper, step, lower=0.0):
        """Regular grid on ``[lower, upper]^k``; the upper end is always included."""
        n = int(np.floor((upper - lower) / step + 1e-9)) + 1
        axis = lower + step * np.arange(n)
        if axis[-1] < upper - 1e-9:
            axis = np.append(axis, upper)
        pts = np.array(list(itertools.product(axis, repeat=k)))
        region = RegionSpec.rectangle([upper] * k) if lower == 0.0 else RegionSpec.orthant()
        return cls(pts, region, step)

    @classmethod
    def from_points(cls, points, step=None, region=None):
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        return cls(pts, region or RegionSpec.orthant(), step)

    @property
    def k(self):
        return self.points.shape[1]

    def __len__(self):
        return self.points.shape[0]


@dataclass
class OracleResult:
    design: Design  # clustered support, or the raw one if clustering loses rank
    raw_design: Design  # surviving grid points and their weights
    clustered: bool
    logdet: float  # of the raw design
    iterations: int
    final_max_sensitivity_gap: float  # max psi - p over the candidates
    converged: bool
    logdet_history: list = field(default_factory=list, repr=False)

    def to_dict(self):
        return {
            "design": self.design.to_dict(),
            "raw_design": self.raw_design.to_dict(),
            "clustered": self.clustered,
            "logdet": self.logdet,
            "iterations": self.iterations,
            "final_max_sensitivity_gap": self.final_max_sensitivity_gap,
            "converged": self.converged,
        }


def _deletion_threshold(eps, p):
    # candidates with psi below this cannot support a D-optimal design
    return p * (1.0 + eps / 2.0 - np.sqrt(eps * (4.0 + eps - 4.0 / p)) / 2.0)


def multiplicative_optimize(model, grid, max_iter=DEFAULT_MAX_ITER, tol=DEFAULT_TOL,
                            cluster_radius=None, record_history=False):
    """Multiplicative weight updates from uniform weights on ``grid``."""
    pts = np.asarray(grid.points, dtype=float)
    if pts.shape[1] != model.k:
        raise ValueError("grid and model dimensions differ")
    F = regression_matrix(model, pts)
    lam = np.exp(linear_predictor(model, pts))
    G = F * np.sqrt(lam)[:, None]  # psi_i = g_i^T M^-1 g_i
    p = model.p
    active = np.arange(len(pts))
    w = np.full(len(pts), 1.0 / len(pts))
    history = []
    prev = -np.inf
    it = 0
    gap = np.inf
    while True:
        Ga = G[active]
        info = info_from_matrix((Ga.T * w) @ Ga)
        if info.singular:
            raise SingularDesignError("candidate grid does not support a nonsingular design")
        # rounding in forming M grows with the spread of the intensities
        slack = LOGDET_SLACK * max(1.0, abs(prev)) + p * EPS * info.eigvals[-1] / info.eigvals[0]
        if info.logdet < prev - slack:
            raise ArithmeticError(f"log det decreased from {prev!r} to {info.logdet!r} at iteration {it}")
        prev = info.logdet
        if record_history:
            history.append(info.logdet)
        psi = info.quadratic_form(Ga)
        gap = float(psi.max() - p)
        if gap / p < tol or it >= max_iter:
            break
        w = w * psi / p
        keep = psi >= _deletion_threshold(max(gap, 0.0), p)
        if not np.all(keep):
            active, w = active[keep], w[keep]
        w = w / w.sum()
        it += 1

    # final gap over every candidate, including deleted ones
    psi_all = info.quadratic_form(G)
    gap = float(psi_all.max() - p)
    keep = w >= PRUNE_WEIGHT
    raw = Design(pts[active[keep]], w[keep] / w[keep].sum())
    radius = cluster_radius if cluster_radius is not None else 2.0 * (grid.step or 0.0)
    clustered = cluster_support(raw, radius)
    # true support points closer than the radius would collapse into too few
    merged = not information_matrix(model, clustered).singular
    return OracleResult(
        design=clustered if merged else raw, raw_design=raw, clustered=merged, logdet=information_matrix(model, raw).logdet,
        iterations=it, final_max_sensitivity_gap=gap, converged=gap / p < tol,
        logdet_history=history,
    )


def cluster_support(design, radius):
    """Merge points within ``radius`` (Chebyshev distance) of a heavier point.

    Clusters are grown greedily around the heaviest remaining point, which
    avoids chaining distinct support points through their neighbours.  Each
    cluster becomes its weighted centroid carrying the total weight.
    """
    if radius <= 0 or design.n == 1:
        return design
    pts, w = design.points, design.weights
    remaining = np.ones(design.n, dtype=bool)
    out_pts, out_w = [], []
    for i in np.argsort(-w, kind="stable"):
        if not remaining[i]:
            continue
        members = remaining & (np.abs(pts - pts[i]).max(axis=1) <= radius + 1e-12)
        remaining &= ~members
        wm = w[members]
        out_pts.append(wm @ pts[members] / wm.sum())
        out_w.append(wm.sum())
    out_w = np.array(out_w)
    return Design(np.array(out_pts), out_w / out_w.sum()).sorted()


# ---------------------------------------------------------------------------
# scalar searches for the four-point class


def maximize_scalar(fun, lo, hi, n_scan=SCAN_POINTS):
    """Global maximizer of ``fun`` on ``[lo, hi]``.

    A dense scan picks the best cell and golden-section search narrows it
    down.  Comparing function values cannot resolve the argmax below about
    ``sqrt(eps)``, so the result is finished off as the sign change of a
    central-difference derivative.  Endpoint maxima are returned as is.
    """
    xs = np.linspace(lo, hi, n_scan)
    vals = fun(xs)
    i = int(np.argmax(vals))
    if i in (0, n_scan - 1):
        return float(xs[i])
    f = lambda s: float(fun(np.array(s)))
    res = minimize_scalar(lambda s: -f(s), bracket=(xs[i - 1], xs[i], xs[i + 1]), method="golden", tol=1e-10)
    x = float(res.x)
    h = DIFF_STEP * max(1.0, abs(x))
    slope = lambda s: f(s + h) - f(s - h)
    a, b = max(lo + h, x - 4 * h), min(hi - h, x + 4 * h)
    if a < b and slope(a) > 0 > slope(b):
        x = brentq(slope, a, b, xtol=1e-14)
    return x


UNBOUNDED_SEARCH = 8.0  # optimal coordinates are at most 2 when rho >= 0


def xi0_class_optimize(rho, b=None):
    """Best four-point design (origin, two axis points, one diagonal point).

    Weights are 1/4 and each coordinate is chosen on its own: the axis point
    maximizes ``x^2 exp(-x)`` and the diagonal point ``s^4 exp(-2s - rho s^2)``.
    """
    if b is None:
        if rho < 0:
            raise RegimeError("rho < 0 on an unbounded region: no optimal design exists; give a bound")
        hi = UNBOUNDED_SEARCH
    else:
        if b <= 0:
            raise ValueError("bound must be positive")
        hi = float(b)

    def log_axis(x):
        with np.errstate(divide="ignore"):
            return 2.0 * np.log(x) - x

    def log_diag(s):
        with np.errstate(divide="ignore"):
            return np.log(diagonal_objective(s, rho))

    a = maximize_scalar(log_axis, 0.0, hi)
    s = maximize_scalar(log_diag, 0.0, hi)
    return Design.uniform([[0.0, 0.0], [a, 0.0], [0.0, a], [s, s]])


def compare_to_catalog(model, catalog_design, oracle_result, min_efficiency=0.0):
    """D-efficiency of the oracle design relative to the catalog design.

    Raises :class:`CatalogSuboptimalError` if the oracle wins by more than
    ``1e-9`` and ``AssertionError`` if it falls below ``min_efficiency``.
    """
    try:
        eff = d_efficiency(model, oracle_result.design, catalog_design)
    except ReferenceNotOptimalError as exc:
        raise CatalogSuboptimalError(f"catalog design suboptimal: {exc}") from None
    if eff < min_efficiency:
        raise AssertionError(f"oracle efficiency {eff:.6g} below {min_efficiency}")
    return eff

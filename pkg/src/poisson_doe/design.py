"""Approximate designs, information matrices and the D-criterion.

Determinants are kept on the log scale throughout: the information of a
minimally supported design is a product of many small intensity factors
and underflows quickly once k grows.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .model import DimensionError, as_points, linear_predictor, regression_matrix

WEIGHT_SUM_TOL = 1e-12
DUPLICATE_TOL = 1e-12
# eigenvalues below this fraction of the largest count as zero
SINGULAR_RTOL = 1e-12
EFFICIENCY_TOL = 1e-9


class SingularDesignError(ValueError):
    """The information matrix of a design is singular."""


class ReferenceNotOptimalError(ValueError):
    """A candidate design beat the design supplied as the optimum."""


@dataclass(frozen=True, eq=False)
class Design:
    """Finitely supported design: distinct points with weights summing to one."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        w = np.array(self.weights, dtype=float).reshape(-1)
        if pts.ndim != 2 or pts.shape[0] != w.size:
            raise ValueError("points and weights must have the same length")
        if w.size == 0:
            raise ValueError("a design needs at least one point")
        if not (np.all(np.isfinite(pts)) and np.all(np.isfinite(w))):
            raise ValueError("design entries must be finite")
        if np.any(w < 0):
            raise ValueError("weights must be non-negative")
        if abs(w.sum() - 1.0) > WEIGHT_SUM_TOL:
            raise ValueError(f"weights sum to {w.sum()!r}, not 1")
        diff = np.abs(pts[:, None, :] - pts[None, :, :]).max(axis=2)
        np.fill_diagonal(diff, np.inf)
        if np.any(diff <= DUPLICATE_TOL):
            raise ValueError("design points must be mutually distinct")
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, points):
        pts = np.array(points, dtype=float)
        n = pts.shape[0]
        return cls(pts, np.full(n, 1.0 / n))

    @property
    def k(self):
        return self.points.shape[1]

    @property
    def n(self):
        return self.points.shape[0]

    def sorted(self):
        """Copy with support points in lexicographic order."""
        order = np.lexsort(self.points.T[::-1])
        return Design(self.points[order], self.weights[order])

    def same_as(self, other, atol=1e-12):
        """True when both designs put the same weights on the same points."""
        if self.points.shape != other.points.shape:
            return False
        a, b = self.sorted(), other.sorted()
        return bool(
            np.allclose(a.points, b.points, rtol=0, atol=atol)
            and np.allclose(a.weights, b.weights, rtol=0, atol=atol)
        )

    def __repr__(self):
        return f"Design(points={self.points.tolist()}, weights={self.weights.tolist()})"

    def to_dict(self):
        return {"points": self.points.tolist(), "weights": self.weights.tolist()}

    @classmethod
    def from_dict(cls, data):
        return cls(data["points"], data["weights"])

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True, eq=False)
class InfoMatrix:
    """Symmetric information matrix with its eigendecomposition.

    The decomposition is of the equilibrated matrix ``D^-1 M D^-1`` with
    ``D = sqrt(diag M)``; intensities spanning many orders of magnitude
    otherwise make a perfectly regular design look singular.  ``logdet`` is
    ``-inf`` and ``inverse`` is ``None`` when the matrix is numerically
    singular.
    """

    m: np.ndarray
    logdet: float
    inverse: np.ndarray | None
    eigvals: np.ndarray
    eigvecs: np.ndarray
    scale: np.ndarray

    @property
    def p(self):
        return self.m.shape[0]

    @property
    def singular(self):
        return self.inverse is None

    def quadratic_form(self, F):
        """``f @ inv(M) @ f`` for each row ``f`` of ``F``."""
        if self.singular:
            raise SingularDesignError("design not fully informative")
        z = (F / self.scale) @ self.eigvecs
        return np.sum(z * z / self.eigvals, axis=-1)


def info_from_matrix(m):
    m = np.array(m, dtype=float)
    m = 0.5 * (m + m.T)
    diag = np.diag(m)
    if np.any(diag <= 0):
        vals, vecs = np.linalg.eigh(m)
        return InfoMatrix(m, -np.inf, None, vals, vecs, np.ones(len(m)))
    scale = np.sqrt(diag)
    vals, vecs = np.linalg.eigh(m / np.outer(scale, scale))
    if vals[0] <= SINGULAR_RTOL * vals[-1]:
        return InfoMatrix(m, -np.inf, None, vals, vecs, scale)
    inverse = ((vecs / vals) @ vecs.T) / np.outer(scale, scale)
    inverse = 0.5 * (inverse + inverse.T)
    logdet = float(np.sum(np.log(vals)) + 2.0 * np.sum(np.log(scale)))
    return InfoMatrix(m, logdet, inverse, vals, vecs, scale)


def _check_dims(model, design):
    if design.k != model.k:
        raise DimensionError(
            f"point/model dimension mismatch: design has k={design.k}, model has k={model.k}"
        )


def information_matrix(model, design):
    """``M = sum_i w_i lambda(x_i) f(x_i) f(x_i)^T``."""
    _check_dims(model, design)
    F = regression_matrix(model, design.points)
    lam = np.exp(linear_predictor(model, design.points))
    return info_from_matrix((F.T * (design.weights * lam)) @ F)


def d_criterion(info):
    """Natural log of ``det M``; ``-inf`` for a singular matrix."""
    return info.logdet


def _info(model, design, info):
    info = information_matrix(model, design) if info is None else info
    if info.singular:
        raise SingularDesignError("design not fully informative")
    return info


def sensitivity(model, design, x, info=None):
    """``psi(x) = lambda(x) f(x)^T M^-1 f(x)``; vectorized over rows of ``x``."""
    info = _info(model, design, info)
    pts, single = as_points(model, x)
    F = regression_matrix(model, pts)
    with np.errstate(over="ignore"):
        lam = np.exp(F @ model.beta)
    out = lam * info.quadratic_form(F)
    return out[0] if single else out


def deduced_sensitivity(model, design, x, info=None):
    """``d(x) = f(x)^T M^-1 f(x) / p - 1 / lambda(x)``.

    Same sign as ``psi - p``.  Far out in the region ``1/lambda`` overflows
    and the value is ``-inf`` rather than NaN.
    """
    info = _info(model, design, info)
    pts, single = as_points(model, x)
    out = deduced_sensitivity_rows(model, info, regression_matrix(model, pts))
    return out[0] if single else out


def deduced_sensitivity_rows(model, info, F):
    """Deduced sensitivity for precomputed regression rows ``F``."""
    return sensitivity_rows(model, info, F)[0]


def sensitivity_rows(model, info, F):
    """``(d, psi)`` for precomputed regression rows ``F``."""
    quad = info.quadratic_form(F)
    eta = F @ model.beta
    with np.errstate(over="ignore", invalid="ignore"):
        inv_lam = np.exp(-eta)
        d = np.where(np.isinf(inv_lam), -np.inf, quad / model.p - inv_lam)
        psi = quad * np.exp(eta)
    return d, psi


def d_efficiency(model, candidate, optimal):
    """``(det M(candidate) / det M(optimal)) ** (1/p)``.

    A singular candidate has efficiency 0.  Raises
    :class:`ReferenceNotOptimalError` when the candidate is better than the
    reference by more than ``1e-9``.
    """
    ref = information_matrix(model, optimal)
    if ref.singular:
        raise SingularDesignError("reference design not fully informative")
    cand = information_matrix(model, candidate)
    if cand.singular:
        return 0.0
    eff = float(np.exp((cand.logdet - ref.logdet) / model.p))
    if eff > 1.0 + EFFICIENCY_TOL:
        raise ReferenceNotOptimalError(f"reference not optimal: efficiency {eff!r} > 1")
    return min(eff, 1.0)

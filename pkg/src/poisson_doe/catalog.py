"""Closed-form locally D-optimal designs and their transformations.

All constructors return :class:`~poisson_doe.design.Design` objects with
equal weights on a minimal support.  The two-factor designs are built for
the standardized parameter ``(0, -1, -1, -rho)`` and mapped to general
parameters by rescaling each axis with ``1/|beta_j|``.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from math import comb, sqrt
from typing import NamedTuple

import numpy as np

from .design import Design
from .model import InteractionStructure, ModelSpec

# below this |rho| the closed form for t loses digits; use its Taylor series
SERIES_CUTOFF = 1e-8
ANTAGONISTIC_LIMIT = -0.125


class RegimeError(ValueError):
    """Parameters outside the hypotheses of the requested construction."""


# ---------------------------------------------------------------------------
# regions


class RegionKind(str, enum.Enum):
    ORTHANT = "orthant"
    RECTANGLE = "rectangle"
    SHIFTED_ORTHANT = "shifted_orthant"
    TWO_FACES = "two_faces"


@dataclass(frozen=True)
class RegionSpec:
    kind: RegionKind = RegionKind.ORTHANT
    bounds: tuple | None = None  # rectangle upper corner b
    shift: tuple | None = None  # shifted orthant corner a

    def __post_init__(self):
        kind = RegionKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is RegionKind.RECTANGLE:
            if self.bounds is None or min(self.bounds) <= 0:
                raise ValueError("rectangle bounds must be strictly positive")
            object.__setattr__(self, "bounds", tuple(float(b) for b in self.bounds))
        if kind is RegionKind.SHIFTED_ORTHANT:
            if self.shift is None or min(self.shift) < 0:
                raise ValueError("shift must be a non-negative vector")
            object.__setattr__(self, "shift", tuple(float(a) for a in self.shift))

    @classmethod
    def orthant(cls):
        return cls(RegionKind.ORTHANT)

    @classmethod
    def rectangle(cls, b):
        return cls(RegionKind.RECTANGLE, bounds=tuple(b))

    @classmethod
    def shifted(cls, a):
        return cls(RegionKind.SHIFTED_ORTHANT, shift=tuple(a))

    @classmethod
    def two_faces(cls):
        return cls(RegionKind.TWO_FACES)

    @property
    def bounded(self):
        return self.kind is RegionKind.RECTANGLE

    def check_dimension(self, k):
        if self.kind is RegionKind.TWO_FACES and k < 3:
            raise ValueError("the union of two-dimensional faces needs k >= 3")
        vec = self.bounds if self.kind is RegionKind.RECTANGLE else self.shift
        if vec is not None and len(vec) != k:
            raise ValueError(f"region vector has length {len(vec)}, expected {k}")

    def to_dict(self):
        out = {"kind": self.kind.value}
        if self.bounds is not None:
            out["bounds"] = list(self.bounds)
        if self.shift is not None:
            out["shift"] = list(self.shift)
        return out

    @classmethod
    def from_dict(cls, data):
        return cls(RegionKind(data["kind"]), data.get("bounds"), data.get("shift"))


# ---------------------------------------------------------------------------
# optimal diagonal coordinate


def _t_closed_form(rho):
    # (sqrt(1 + 8 rho) - 1) / (2 rho), rationalized
    return 4.0 / (1.0 + sqrt(1.0 + 8.0 * rho))


def _t_series(rho):
    return 2.0 - 4.0 * rho + 16.0 * rho * rho


def t_extended(rho):
    """Stationary point of ``s**4 exp(-2s - rho s**2)`` for ``rho >= -1/8``."""
    rho = float(rho)
    if rho < ANTAGONISTIC_LIMIT:
        raise RegimeError(f"t undefined for rho < -1/8 (got {rho})")
    if abs(rho) < SERIES_CUTOFF:
        return _t_series(rho)
    return _t_closed_form(rho)


def t_of_rho(rho):
    """Diagonal coordinate of the optimal design at synergy strength ``rho``.

    ``t(0) = 2``, decreasing in ``rho`` and tending to 0 as ``rho`` grows.
    """
    if rho < 0:
        raise RegimeError("rho < 0 is antagonistic; use design_antagonistic_class")
    return t_extended(rho)


def rho_of_t(t):
    """Inverse of :func:`t_of_rho` on ``0 < t <= 2``."""
    if not 0 < t <= 2:
        raise ValueError("t must lie in (0, 2]")
    return (2.0 - t) / (t * t)


def diagonal_objective(s, rho):
    """``s**4 exp(-2s - rho s**2)``, the diagonal factor of ``det M``."""
    s = np.asarray(s, dtype=float)
    with np.errstate(over="ignore", divide="ignore"):
        return s ** 4 * np.exp(-2.0 * s - rho * s * s)


# ---------------------------------------------------------------------------
# one and two factors


def _negative(*effects):
    for b in effects:
        if not b < 0:
            raise RegimeError(
                f"main effects must be negative (got {b}); no optimal design on an unbounded region"
            )


def design_1d(beta1):
    """Equal weights on ``0`` and ``2/|beta1|``."""
    _negative(beta1)
    return Design([[0.0], [2.0 / abs(beta1)]], [0.5, 0.5])


def design_2d_no_interaction(beta1, beta2):
    """Origin and one point per axis at ``2/|beta_j|``, weights 1/3."""
    _negative(beta1, beta2)
    return Design.uniform([[0.0, 0.0], [2.0 / abs(beta1), 0.0], [0.0, 2.0 / abs(beta2)]])


def xi_design(s, scale=(1.0, 1.0)):
    """Four-point design with axis points at 2 and diagonal point ``(s, s)``.

    ``scale`` divides each coordinate, mapping the standardized design to
    main effects ``-scale``.
    """
    a, b = scale
    return Design.uniform([[0.0, 0.0], [2.0 / a, 0.0], [0.0, 2.0 / b], [s / a, s / b]])


def synergy(beta):
    """``rho = -beta12 / (beta1 beta2)``."""
    _, b1, b2, b12 = (float(v) for v in beta)
    return -b12 / (b1 * b2)


def design_2d_interaction(beta):
    """Optimal four-point design for ``beta = (b0, b1, b2, b12)``.

    Requires ``b1, b2 < 0`` and ``b12 <= 0``.  The intercept is irrelevant.
    """
    beta = np.asarray(beta.beta if isinstance(beta, ModelSpec) else beta, dtype=float)
    if beta.shape != (4,):
        raise ValueError("beta must have 4 entries (b0, b1, b2, b12)")
    _, b1, b2, b12 = beta
    _negative(b1, b2)
    if b12 > 0:
        raise RegimeError("antagonistic interaction (beta12 > 0); use design_antagonistic_class with a bound")
    t = 2.0 if b12 == 0 else t_of_rho(synergy(beta))
    return xi_design(t, scale=(abs(b1), abs(b2)))


# ---------------------------------------------------------------------------
# k factors at zero interactions


def _axis_points(k, subsets, level=2.0):
    pts = np.zeros((len(subsets), k))
    for row, subset in enumerate(subsets):
        pts[row, list(subset)] = level
    return pts


def _require_standard(model, k, structure):
    if model is None:
        return
    if model.k != k or model.structure is not InteractionStructure(structure):
        raise RegimeError(f"model must be k={k} with {InteractionStructure(structure).value} terms")
    if not np.all(model.main_effects == -1.0):
        raise RegimeError("theorem is local at main effects equal to -1")
    if np.any(model.interactions != 0.0):
        raise RegimeError("theorem is local at interactions equal to 0; nonzero values rejected")


def design_product_k(k, model=None):
    """Full factorial on ``{0, 2}^k`` with weights ``2**-k``.

    Optimal for the complete-interaction model at main effects -1 and
    vanishing interactions.
    """
    _require_standard(model, k, InteractionStructure.COMPLETE)
    pts = np.array(list(itertools.product([0.0, 2.0], repeat=k)))
    order = np.lexsort((np.arange(len(pts)), (pts > 0).sum(axis=1)))
    return Design.uniform(pts[order])


def _subsets_up_to(k, degree):
    out = [()]
    for d in range(1, degree + 1):
        out.extend(itertools.combinations(range(k), d))
    return out


def design_kdim_first_order(k, model=None):
    """Origin, axial points at 2 and pair points ``x_i + x_j``."""
    if k < 2:
        raise ValueError("first-order design needs k >= 2")
    structure = InteractionStructure.FIRST_ORDER
    if model is not None and k == 2 and model.structure is InteractionStructure.TWO_DIM_INTERACTION:
        structure = model.structure
    _require_standard(model, k, structure)
    return Design.uniform(_axis_points(k, _subsets_up_to(k, 2)))


def design_kdim_second_order(k, model=None):
    """First-order support plus the triple points ``x_i + x_j + x_l``."""
    if k < 3:
        raise ValueError("second-order design needs k >= 3")
    _require_standard(model, k, InteractionStructure.SECOND_ORDER)
    return Design.uniform(_axis_points(k, _subsets_up_to(k, 3)))


def faces_model(rho_matrix):
    """First-order model with main effects -1 and ``beta_ij = -rho_ij``."""
    rho = np.asarray(rho_matrix, dtype=float)
    k = rho.shape[0]
    if rho.shape != (k, k) or not np.allclose(rho, rho.T):
        raise ValueError("rho_matrix must be a symmetric k x k matrix")
    beta = [0.0] + [-1.0] * k + [-rho[i, j] for i, j in itertools.combinations(range(k), 2)]
    return ModelSpec(k, InteractionStructure.FIRST_ORDER, beta)


def design_faces(rho_matrix):
    """Design for the union of two-dimensional faces with pairwise synergies.

    The pair point on face ``(i, j)`` sits at ``x_i = x_j = t(rho_ij)``.
    """
    rho = np.asarray(rho_matrix, dtype=float)
    k = rho.shape[0]
    if k < 3:
        raise ValueError("faces design needs k >= 3")
    if rho.shape != (k, k) or not np.allclose(rho, rho.T):
        raise ValueError("rho_matrix must be a symmetric k x k matrix")
    pairs = list(itertools.combinations(range(k), 2))
    if any(rho[i, j] < 0 for i, j in pairs):
        raise RegimeError("faces design needs rho_ij >= 0")
    pts = [np.zeros(k)] + list(2.0 * np.eye(k))
    for i, j in pairs:
        x = np.zeros(k)
        x[[i, j]] = t_of_rho(rho[i, j])
        pts.append(x)
    return Design.uniform(pts)


# ---------------------------------------------------------------------------
# antagonistic interaction on a square


class AntagonisticDesign(NamedTuple):
    design: Design
    case: str  # "a": diagonal point at t, "b": diagonal point at the corner b
    t: float | None
    class_restricted: bool = True


def design_antagonistic_class(rho, b):
    """Best design within the four-point class on ``[0, b]^2`` for ``rho < 0``.

    Only optimal among designs with the origin, one point per axis and one
    on the diagonal; the result carries ``class_restricted=True``.
    """
    if not rho < 0:
        raise RegimeError("antagonistic construction needs rho < 0")
    if b < 2:
        raise RegimeError("b < 2 is outside the hypothesis b >= 2")
    t = t_extended(rho) if rho > ANTAGONISTIC_LIMIT else None
    if t is not None and t <= b and diagonal_objective(t, rho) >= diagonal_objective(b, rho):
        return AntagonisticDesign(xi_design(t), "a", t)
    return AntagonisticDesign(xi_design(b), "b", t)


# ---------------------------------------------------------------------------
# transformations


def scale_design(design, main_effects):
    """Map a standardized design to main effects ``beta_j`` (``x_j / |beta_j|``)."""
    scale = np.abs(np.asarray(main_effects, dtype=float))
    return Design(design.points / scale, design.weights)


def standardize_model(model):
    """Two-factor model mapped back to ``(0, -1, -1, -rho)``."""
    return ModelSpec(model.k, model.structure, [0.0, -1.0, -1.0, -synergy(model.beta)])


def shift_design(design, a):
    a = np.asarray(a, dtype=float)
    if a.shape != (design.k,) or np.any(a < 0):
        raise ValueError("shift must be a non-negative vector of length k")
    return Design(design.points + a, design.weights)


def rectangle_validity(design, b):
    """True when every support point lies in ``[0, b_1] x ... x [0, b_k]``."""
    b = np.asarray(b, dtype=float)
    if b.shape != (design.k,) or np.any(b <= 0):
        raise ValueError("b must be a strictly positive vector of length k")
    return bool(np.all(design.points >= 0) and np.all(design.points <= b))


def support_size(k, order):
    if order == 1:
        return 1 + k + comb(k, 2)
    if order == 2:
        return 1 + k + comb(k, 2) + comb(k, 3)
    return 2 ** k

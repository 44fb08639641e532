"""Boundary-and-diagonal verification via contours of constant intensity.

In the standardized two-factor model with synergy ``rho > 0`` the
coordinates

    x1 = (v e^u - 1) / rho,    x2 = (v e^-u - 1) / rho

turn the quadrant into ``v >= 1, |u| <= log v``, and the intensity is
constant on each curve of fixed ``v``.  For a swap-symmetric design the
deduced sensitivity along such a curve is a quadratic in ``cosh(u)`` with
positive leading coefficient, so its maximum sits at the diagonal
(``u = 0``) or at an axis (``|u| = log v``).  For ``rho = 0`` the contours
are the lines ``x1 + x2 = 2v`` and the same holds for a quartic in ``u``.

``verify_reduced`` sweeps only the axes and the diagonal, and checks the
contour shape numerically on a sample of contours.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..catalog import RegionSpec
from ..design import deduced_sensitivity_rows
from ..model import regression_matrix
from .sweep import (
    GridConfig, TAIL_MARGIN, VerificationReport, _Sweep, _default_x_max, _evaluate, _require_info,
    _tail_eligible, axis_values,
)

N_CONTOURS = 40
N_CONTOUR_SAMPLES = 201
FIT_RTOL = 1e-8
LEAD_RTOL = 1e-12


@dataclass(frozen=True)
class HyperbolicCoords:
    u: float
    v: float
    rho: float

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError("hyperbolic coordinates need rho > 0")
        if not self.v >= 1.0:
            raise ValueError("v must be >= 1")


def to_hyperbolic(x, rho):
    """Hyperbolic angle and distance of a point of the quadrant."""
    if not rho > 0:
        raise ValueError("rho <= 0: use to_linear_contour (x1 = v + u, x2 = v - u)")
    x1, x2 = (float(c) for c in x)
    if x1 < 0 or x2 < 0:
        raise ValueError("point must lie in the non-negative quadrant")
    a, b = 1.0 + rho * x1, 1.0 + rho * x2
    return HyperbolicCoords(u=0.5 * (np.log(a) - np.log(b)), v=float(np.sqrt(a * b)), rho=rho)


def from_hyperbolic(h):
    if abs(h.u) > np.log(h.v) + 1e-12:
        raise ValueError("outside quadrant: |u| > log v")
    x1 = (h.v * np.exp(h.u) - 1.0) / h.rho
    x2 = (h.v * np.exp(-h.u) - 1.0) / h.rho
    return np.array([max(x1, 0.0), max(x2, 0.0)])


def to_linear_contour(x):
    """``(u, v)`` with ``x1 = v + u`` and ``x2 = v - u`` (the ``rho = 0`` case)."""
    x1, x2 = (float(c) for c in x)
    return 0.5 * (x1 - x2), 0.5 * (x1 + x2)


def from_linear_contour(u, v):
    if abs(u) > v + 1e-12:
        raise ValueError("outside quadrant: |u| > v")
    return np.array([v + u, v - u])


def hyperbolic_contour(v, rho, u):
    """Points ``(x1, x2)`` on the contour ``v`` for an array of angles."""
    u = np.asarray(u, dtype=float)
    return np.column_stack([(v * np.exp(u) - 1.0) / rho, (v * np.exp(-u) - 1.0) / rho])


def linear_contour(v, u):
    u = np.asarray(u, dtype=float)
    return np.column_stack([v + u, v - u])


# ---------------------------------------------------------------------------


def _symmetric(design, atol=1e-12):
    if design.k != 2:
        return False
    swapped = design.points[:, ::-1]
    for p, w in zip(swapped, design.weights):
        match = np.all(np.abs(design.points - p) <= atol, axis=1)
        if not np.any(match) or abs(design.weights[match][0] - w) > atol:
            return False
    return True


def _quadratic_part(model, info, pts):
    F = regression_matrix(model, pts)
    return info.quadratic_form(F) / model.p


def contour_shape_check(model, info, rho, v_values, n_samples=N_CONTOUR_SAMPLES):
    """Check the maximum-at-the-ends property on each contour.

    Model coordinates must be standardized (main effects -1).  Returns a
    dict with the worst relative interior excess over the endpoint values, the worst
    relative residual of the polynomial fit and the smallest relative leading
    coefficient.  ``1/lambda`` is constant on a contour so the fit uses the
    quadratic-form part of ``d`` only.
    """
    worst_interior = -np.inf
    worst_fit = 0.0
    min_lead = np.inf
    for v in v_values:
        if rho > 0:
            umax = np.log(v)
            u = np.linspace(0.0, umax, n_samples)
            pts = hyperbolic_contour(v, rho, u)
            degree = 2
        else:
            umax = v
            u = np.linspace(0.0, umax, n_samples)
            pts = linear_contour(v, u)
            degree = 4
        q = _quadratic_part(model, info, np.maximum(pts, 0.0))
        excess = (np.max(q[1:-1]) - max(q[0], q[-1])) / max(np.max(np.abs(q)), 1.0)
        worst_interior = max(worst_interior, float(excess))

        # fit on degree+1 distinct abscissae, validate on one more
        if rho > 0:
            nodes = np.linspace(0.0, umax, degree + 2)
            xs = np.cosh(nodes)
            ys = _quadratic_part(model, info, hyperbolic_contour(v, rho, nodes))
        else:
            nodes = np.linspace(-umax, umax, degree + 2)
            xs = nodes
            ys = _quadratic_part(model, info, linear_contour(v, nodes))
        coef = np.polyfit(xs[:-1], ys[:-1], degree)
        scale = max(np.max(np.abs(ys)), 1.0)
        worst_fit = max(worst_fit, abs(np.polyval(coef, xs[-1]) - ys[-1]) / scale)
        min_lead = min(min_lead, coef[0] / max(np.max(np.abs(coef)), np.finfo(float).tiny))
    return {
        "n_contours": len(v_values),
        "interior_excess": worst_interior,
        "fit_residual": worst_fit,
        "min_relative_leading_coef": min_lead,
        "endpoint_max_ok": bool(worst_interior <= 1e-12),
        "fit_ok": bool(worst_fit <= FIT_RTOL),
        "leading_positive_ok": bool(min_lead > LEAD_RTOL),
    }


def contour_v_values(rho, x_max, n=N_CONTOURS):
    """Contour levels covering the box ``[0, x_max]^2`` up to its axis ends."""
    if rho > 0:
        return np.geomspace(1.0 + 1e-3, np.sqrt(1.0 + rho * x_max), n)
    return np.linspace(1e-3, x_max / 2.0, n)


def verify_reduced(model, design, grid=None):
    """Verify a swap-symmetric two-factor design on axes and diagonal only.

    ``model`` needs equal main effects ``-c < 0`` and an interaction
    ``-rho c**2 <= 0``; contours are traced in the standardized coordinates
    ``c * x``.
    """
    grid = grid or GridConfig()
    if model.k != 2 or not _symmetric(design):
        raise ValueError("reduction requires swap symmetry")
    _, b1, b2, b12 = model.beta
    if b1 != b2 or not b1 < 0:
        raise ValueError("reduction requires swap symmetry (beta1 == beta2 < 0)")
    if b12 > 0:
        raise ValueError("reduction requires beta12 <= 0")
    c = -b1
    rho = -b12 / (c * c)
    info = _require_info(model, design)
    x_max = grid.x_max if grid.x_max is not None else _default_x_max(design, np.zeros(2))
    line = axis_values(0.0, x_max, grid.line_step)
    zeros = np.zeros_like(line)
    acc = _Sweep(2, grid.tolerance)
    paths = {
        "boundary_x1": np.column_stack([line, zeros]),
        "boundary_x2": np.column_stack([zeros, line]),
        "diagonal": np.column_stack([line, line]),
    }
    checks = {}
    for name, pts in paths.items():
        d, psi = _evaluate(model, info, pts)
        checks[f"{name}_max_d"] = float(np.max(d))
        acc.add(pts, d, psi)
    support = design.points
    sd, spsi = _evaluate(model, info, support)
    acc.add(support, sd, spsi)

    # contour shape in standardized coordinates; the design is mapped too
    std_model = type(model)(2, model.structure, [model.beta[0], -1.0, -1.0, -rho])
    std_info = _require_info(std_model, type(design)(design.points * c, design.weights))
    checks.update(contour_shape_check(std_model, std_info, rho, contour_v_values(rho, c * x_max)))

    # by symmetry the edge x1 = x_max covers the whole outer shell
    edge = np.column_stack([np.full_like(line, x_max), line])
    shell = float(np.max(deduced_sensitivity_rows(model, info, regression_matrix(model, edge))))
    checks["shell_max_d"] = shell
    viol, vals = acc.violations
    return VerificationReport(
        max_d=acc.max_d, argmax=acc.argmax, n_points=acc.n_points, tolerance=grid.tolerance,
        violations=viol, violation_values=vals, region=RegionSpec.orthant(), reduced=True,
        tail_certified=_tail_eligible(model, np.zeros(2)) and shell < TAIL_MARGIN,
        box=(np.zeros(2), np.full(2, x_max)), step=grid.line_step,
        support_max_abs_d=float(np.max(np.abs(sd))), checks=checks,
        max_psi=acc.max_psi, psi_argmax=acc.psi_argmax,
    )


def antagonistic_contour_experiment(rho, b, n_contours=N_CONTOURS, n_samples=N_CONTOUR_SAMPLES):
    """Contour maxima for ``-1/8 < rho < 0`` on ``[0, b]^2`` with ``b <= 1/|rho|``.

    The hyperbolic system is centred at ``(1/|rho|, 1/|rho|)``; here
    ``(1 + rho x1)(1 + rho x2) = v**2`` with ``0 <= v <= 1``.  Reports, for
    the within-class design, where the maximum of ``d`` along each contour
    inside the square falls.  Experimental only: nothing is asserted.
    """
    from ..catalog import design_antagonistic_class
    from ..model import two_dim_model

    if not -0.125 < rho < 0:
        raise ValueError("experiment defined for -1/8 < rho < 0")
    if b > 1.0 / abs(rho):
        raise ValueError("experiment needs b <= 1/|rho|")
    model = two_dim_model([0.0, -1.0, -1.0, -rho])
    design = design_antagonistic_class(rho, b).design
    info = _require_info(model, design)
    m = 1.0 + rho * b  # level of the corner (b, b); the origin has level 1
    at_ends = 0
    interior = []
    for v in np.linspace(max(m, 1e-9), 1.0, n_contours + 2)[1:-1]:
        # u >= 0 moves towards x1 = 0 (level factor 1) or x2 = b (level factor m)
        u_hi = -np.log(v)
        if m > 0:
            u_hi = min(u_hi, np.log(v / m))
        pts = np.clip(hyperbolic_contour(v, rho, np.linspace(0.0, u_hi, n_samples)), 0.0, b)
        d = deduced_sensitivity_rows(model, info, regression_matrix(model, pts))
        i = int(np.argmax(d))
        if i in (0, d.size - 1):
            at_ends += 1
        else:
            interior.append(float(v))
    return {"rho": rho, "b": b, "contours_max_at_ends": at_ends, "contours_interior_max": interior,
            "design": design.to_dict()}


__all__ = [
    "HyperbolicCoords", "to_hyperbolic", "from_hyperbolic", "to_linear_contour", "from_linear_contour",
    "hyperbolic_contour", "linear_contour", "contour_shape_check", "verify_reduced",
    "antagonistic_contour_experiment",
]

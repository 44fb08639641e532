"""The diagonal inequality for the two-factor design and its case split.

With ``rho = (2 - t) / t**2`` and ``x = q t`` the deduced sensitivity of
the optimal design on the diagonal is

    d((x, x)) = (q-1)^2 (q(t-1) - 1)^2 + e^2 t^2 (q-1)^2 q^2 / 2
                + e^(t+2) q^4 - exp(2tq + (2-t) q^2)

and optimality on the diagonal means this is ``<= 0`` for ``q >= 0`` and
``0 <= t <= 2``.  It splits as ``h0 - h1`` (polynomial part minus
exponential part) with a piecewise separating function ``h2``:
``h0 <= h2 <= h1``.

Differences that vanish at ``q = 1`` are evaluated in factored form, using
``2tq + (2-t)q^2 - (t+2) = -t (q-1)^2 + 2 (q^2 - 1)``, so that the equality
at the support point comes out as an exact zero rather than rounding noise.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import e, exp, sqrt

import numpy as np
from scipy.optimize import brentq

Q0 = 3.0 / 5.0
E2 = e * e


def _exponent_excess(q, t):
    # 2tq + (2-t)q^2 - (t+2), written to vanish exactly at q = 1
    return -t * (q - 1.0) ** 2 + 2.0 * (q * q - 1.0)


def h0(q, t):
    q, t = np.asarray(q, dtype=float), np.asarray(t, dtype=float)
    return 0.5 * E2 * t * t * (q - 1.0) ** 2 * q * q + (q - 1.0) ** 2 * (q * (t - 1.0) - 1.0) ** 2


def _h1_minus_1_low(q, t):
    # exact zero at q = 0
    return np.expm1(2.0 * t * q + (2.0 - t) * q * q) - np.exp(t + 2.0) * q ** 4


def h1(q, t):
    q, t = np.asarray(q, dtype=float), np.asarray(t, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        high = np.exp(t + 2.0) * (np.exp(_exponent_excess(q, t)) - q ** 4)
        return np.where(q <= Q0, 1.0 + _h1_minus_1_low(q, t), high)


def h2(q, t):
    q, t = np.asarray(q, dtype=float), np.asarray(t, dtype=float)
    return np.where(q <= Q0, 1.0, np.exp(t + 2.0) * (q - 1.0) ** 2 * q * q)


def h_split(q, t):
    """``(h0, h1, h2)``; the diagonal sensitivity equals ``h0 - h1``."""
    return h0(q, t), h1(q, t), h2(q, t)


def equi2(q, t):
    """Deduced sensitivity on the diagonal in the ``(q, t)`` parametrization.

    Exactly zero at both support abscissae ``q = 0`` and ``q = 1``.
    """
    q, t = np.asarray(q, dtype=float), np.asarray(t, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        low = (h0(q, t) - 1.0) - _h1_minus_1_low(q, t)
        return np.where(q <= Q0, low, h0(q, t) - h1(q, t))


def equi2_direct(q, t):
    """The same expression evaluated term by term without rearrangement."""
    q, t = np.asarray(q, dtype=float), np.asarray(t, dtype=float)
    with np.errstate(over="ignore"):
        return ((q - 1) ** 2 * (q * (t - 1) - 1) ** 2 + 0.5 * E2 * t ** 2 * (q - 1) ** 2 * q ** 2
                + np.exp(t + 2) * q ** 4 - np.exp(2 * t * q + (2 - t) * q ** 2))


def taylor2(q, t):
    """Sufficient condition for ``h0 <= h2`` on ``q > q0`` (must be ``>= 0``)."""
    q, t = np.asarray(q, dtype=float), np.asarray(t, dtype=float)
    return (E2 * (t + 1.0) - (t - 1.0) ** 2) * q * q + 2.0 * (t - 1.0) * q - 1.0


def minorante(q):
    """``((1-q)^2 q^2 + q^4) exp(4(1-q))``; at most 1 with equality at ``q = 1``."""
    q = np.asarray(q, dtype=float)
    return ((1.0 - q) ** 2 * q * q + q ** 4) * np.exp(4.0 * (1.0 - q))


# constants of the case analysis

Q1 = (E2 + 2.0 + sqrt(E2 * E2 - 4.0 * E2)) / (4.0 * E2 + 2.0)


def h0_at_q1_closed_form():
    """Local maximum of ``h0(., 2)`` on ``[0, q0]`` in closed form."""
    return (exp(4) * (3 * e - sqrt(E2 - 4)) ** 2 * (E2 + 2 + sqrt(E2 * E2 - 4 * E2))
            / (8 * (2 * E2 + 1) ** 3))


def q2():
    """Root of ``exp(2q^2) = e^2 q^2`` in ``(0, q0)``, where ``h1(., 0)`` turns."""
    return brentq(lambda q: exp(2 * q * q) - E2 * q * q, 0.1, Q0, xtol=1e-15)


def diagonal_constants():
    """Computed values of the constants quoted for the diagonal proof."""
    return {
        "q0": Q0,
        "q1": Q1,
        "q2": q2(),
        "h0(q1,2)": float(h0(Q1, 2.0)),
        "h0(q1,2) closed form": h0_at_q1_closed_form(),
        "h1(q0,0)": float(h1(Q0, 0.0)),
        "taylor2(q0,0)": float(taylor2(Q0, 0.0)),
    }


# ---------------------------------------------------------------------------
# grid checks


def default_grid(n_q=2000, n_t=200, q_max=10.0):
    return np.linspace(0.0, q_max, n_q), np.linspace(0.0, 2.0, n_t)


@dataclass
class HChainResult:
    """Minimum slack of each link of ``h0 <= h2 <= h1`` over a grid."""

    slack_h0_le_1: float  # q <= q0
    slack_1_le_h1: float  # q <= q0
    slack_h0_le_h2: float  # q > q0
    slack_h2_le_h1: float  # q > q0
    worst: dict
    n_points: int

    @property
    def min_slack(self):
        return min(self.slack_h0_le_1, self.slack_1_le_h1, self.slack_h0_le_h2, self.slack_h2_le_h1)

    @property
    def ok(self):
        return self.min_slack >= 0.0


def h_chain_check(q_grid=None, t_grid=None):
    """Evaluate every link of the separating chain on a ``(q, t)`` grid."""
    if q_grid is None or t_grid is None:
        q_grid, t_grid = default_grid()
    Q, T = np.meshgrid(np.asarray(q_grid, float), np.asarray(t_grid, float), indexing="ij")
    low = Q <= Q0
    slack = {}
    worst = {}

    def record(name, values, mask):
        vals = np.where(mask, values, np.inf)
        i = np.unravel_index(np.argmin(vals), vals.shape)
        slack[name] = float(vals[i]) if np.any(mask) else np.inf
        worst[name] = (float(Q[i]), float(T[i]))

    record("h0_le_1", 1.0 - h0(Q, T), low)
    record("1_le_h1", _h1_minus_1_low(Q, T), low)
    # both differences carry a factor (q-1)^2 which is pulled out
    with np.errstate(over="ignore"):
        sq = (Q - 1.0) ** 2
        record("h0_le_h2", sq * (Q * Q * (np.exp(T + 2.0) - 0.5 * E2 * T * T) - (Q * (T - 1.0) - 1.0) ** 2), ~low)
        record("h2_le_h1", np.exp(T + 2.0) * (np.exp(_exponent_excess(Q, T)) - sq * Q * Q - Q ** 4), ~low)
    return HChainResult(slack["h0_le_1"], slack["1_le_h1"], slack["h0_le_h2"], slack["h2_le_h1"],
                        worst, Q.size)


@dataclass
class Equi2Result:
    max_value: float
    argmax: tuple
    max_abs_at_support: float  # over q in {0, 1}
    n_points: int

    def ok(self, zero_tol=1e-12):
        return self.max_value <= zero_tol and self.max_abs_at_support <= zero_tol


def equi2_check(q_grid=None, t_grid=None):
    """Maximum of the diagonal sensitivity over a grid and its support zeros."""
    if q_grid is None or t_grid is None:
        q_grid, t_grid = default_grid()
    t_grid = np.asarray(t_grid, float)
    Q, T = np.meshgrid(np.asarray(q_grid, float), t_grid, indexing="ij")
    vals = equi2(Q, T)
    i = np.unravel_index(np.argmax(vals), vals.shape)
    zeros = np.concatenate([equi2(0.0, t_grid), equi2(1.0, t_grid)])
    return Equi2Result(float(vals[i]), (float(Q[i]), float(T[i])), float(np.max(np.abs(zeros))), Q.size)

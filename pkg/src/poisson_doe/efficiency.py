"""D-efficiency of the four-point designs ``xi_x`` and the curve of ``t``.

For the standardized two-factor model ``xi_x`` puts weight 1/4 on the
origin, ``(2, 0)``, ``(0, 2)`` and ``(x, x)``.  Only the diagonal factor of
the determinant changes with ``x``, so its efficiency against ``xi_t`` is

    (x / t) exp((2t + rho t^2 - 2x - rho x^2) / 4).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .catalog import ANTAGONISTIC_LIMIT, RegimeError, t_extended, t_of_rho


def closed_form_efficiency(x, rho):
    """Efficiency of ``xi_x`` when the true synergy strength is ``rho >= 0``."""
    if not x > 0:
        raise ValueError("x must be positive")
    t = t_of_rho(rho)
    return float(np.exp(np.log(x / t) + (2 * t + rho * t * t - 2 * x - rho * x * x) / 4.0))


def peak_rho(x):
    """Synergy strength at which ``xi_x`` is optimal, ``(2 - x) / x^2``."""
    return (2.0 - x) / (x * x)


def _rho_samples(lo, hi, n, extra=()):
    rho = np.linspace(lo, hi, n)
    inside = [r for r in extra if lo <= r <= hi]
    return np.unique(np.concatenate([rho, inside])) if inside else rho


@dataclass
class EfficiencyCurve:
    x: float
    rho: np.ndarray
    efficiency: np.ndarray

    @property
    def samples(self):
        return list(zip(self.rho.tolist(), self.efficiency.tolist()))

    def peak(self):
        i = int(np.argmax(self.efficiency))
        return float(self.rho[i]), float(self.efficiency[i])

    def to_csv(self, path=None):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["rho", "efficiency"])
        for r, e in self.samples:
            writer.writerow([repr(r), repr(e)])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text


def efficiency_curve(x, rho_range=(0.0, 3.0), n_samples=301):
    """Efficiency of ``xi_x`` sampled over ``rho``.

    The peak ``rho = (2 - x) / x^2`` is added to the samples whenever it lies
    in range, so the curve reaches exactly 1 there.
    """
    lo, hi = map(float, rho_range)
    if lo < 0 or hi < lo:
        raise ValueError("rho range must satisfy 0 <= lo <= hi")
    if n_samples < 2:
        raise ValueError("need at least 2 samples")
    rho = _rho_samples(lo, hi, n_samples, extra=(peak_rho(x),))
    eff = np.array([closed_form_efficiency(x, r) for r in rho])
    return EfficiencyCurve(float(x), rho, eff)


def t_curve(rho_range=(ANTAGONISTIC_LIMIT, 3.0), n_samples=301):
    """Samples ``(rho, t(rho))``; defined down to ``rho = -1/8`` where ``t = 4``."""
    lo, hi = map(float, rho_range)
    if lo < ANTAGONISTIC_LIMIT:
        raise RegimeError(f"t undefined for rho < -1/8 (got {lo})")
    if hi < lo or n_samples < 2:
        raise ValueError("need lo <= hi and at least 2 samples")
    rho = np.linspace(lo, hi, n_samples)
    return [(float(r), t_extended(r)) for r in rho]


def t_curve_csv(samples, path=None):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["rho", "t"])
    for r, t in samples:
        writer.writerow([repr(r), repr(t)])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text

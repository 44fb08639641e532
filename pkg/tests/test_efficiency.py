import numpy as np
import pytest

from poisson_doe.catalog import RegimeError, t_of_rho, xi_design
from poisson_doe.design import d_efficiency
from poisson_doe.efficiency import (
    closed_form_efficiency, efficiency_curve, peak_rho, t_curve, t_curve_csv,
)

from conftest import standard_pair


def test_examples():
    assert closed_form_efficiency(2.0, 1.0) == pytest.approx(2 * np.exp(-1.25), abs=1e-12)
    assert closed_form_efficiency(1.0, 0.0) == pytest.approx(np.exp(0.5) / 2, abs=1e-12)
    for rho in (0.0, 0.3, 1.0, 4.0):
        assert closed_form_efficiency(t_of_rho(rho), rho) == 1.0


def test_nonpositive_x():
    with pytest.raises(ValueError):
        closed_form_efficiency(0.0, 1.0)


def test_matches_determinant_ratio():
    # independent route through the generic information matrix
    for x in np.linspace(0.1, 4.0, 14):
        for rho in np.linspace(0.0, 6.0, 13):
            model, opt = standard_pair(rho)
            assert closed_form_efficiency(x, rho) == pytest.approx(
                d_efficiency(model, xi_design(x), opt), abs=1e-9)


@pytest.mark.parametrize("x, peak", [(2.0, 0.0), (1.0, 1.0), (0.5, 6.0)])
def test_curve_peaks(x, peak):
    assert peak_rho(x) == peak
    curve = efficiency_curve(x, (0.0, 8.0), 161)
    r, e = curve.peak()
    assert r == peak and e == pytest.approx(1.0, abs=1e-12)
    others = curve.efficiency[curve.rho != peak]
    assert np.all(others < 1.0) and np.all(others > 0.0)
    # unimodal on the samples
    i = int(np.argmax(curve.efficiency))
    assert np.all(np.diff(curve.efficiency[: i + 1]) > 0) and np.all(np.diff(curve.efficiency[i:]) < 0)


def test_product_design_loses_efficiency():
    curve = efficiency_curve(2.0, (0.0, 3.0), 301)
    assert np.all(np.diff(curve.efficiency) < 0)


def test_unit_design_robust_proxy_threshold():
    curve = efficiency_curve(1.0, (0.0, 3.0), 301)
    assert curve.efficiency.min() >= 0.8


def test_curve_csv(tmp_path):
    path = tmp_path / "curve.csv"
    text = efficiency_curve(1.0, (0.0, 3.0), 4).to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "rho,efficiency" and text == path.read_text()
    assert len(lines) == 5  # the peak rho = 1 is one of the samples


def test_curve_validation():
    with pytest.raises(ValueError):
        efficiency_curve(1.0, (-1.0, 3.0))
    with pytest.raises(ValueError):
        efficiency_curve(1.0, (0.0, 3.0), 1)


class TestTCurve:
    def test_endpoints(self):
        samples = t_curve((-0.125, 3.0), 301)
        assert samples[0] == (-0.125, 4.0)
        assert samples[-1][1] == pytest.approx(2 / 3, abs=1e-15)

    def test_monotone(self):
        t = np.array([v for _, v in t_curve()])
        assert np.all(np.diff(t) < 0)

    def test_undefined_below_limit(self):
        with pytest.raises(RegimeError, match="t undefined"):
            t_curve((-0.2, 1.0))

    def test_csv(self):
        text = t_curve_csv(t_curve((0.0, 1.0), 3))
        assert text.splitlines() == ["rho,t", "0.0,2.0", f"0.5,{t_of_rho(0.5)!r}", "1.0,1.0"]

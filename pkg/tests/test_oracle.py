import json

import numpy as np
import pytest

from poisson_doe.catalog import (
    RegimeError, design_1d, design_antagonistic_class, design_kdim_first_order, diagonal_objective, t_of_rho,
    xi_design,
)
from poisson_doe.design import Design, SingularDesignError, d_efficiency
from poisson_doe.model import ModelSpec, standardized_model, two_dim_model
from poisson_doe.oracle import (
    CandidateGrid, CatalogSuboptimalError, cluster_support, compare_to_catalog, maximize_scalar,
    multiplicative_optimize, xi0_class_optimize,
)

from conftest import standard_pair


def test_one_factor_grid():
    m = ModelSpec(1, "main_effects", [0.0, -1.0])
    grid = CandidateGrid.from_points(np.arange(0, 6.01, 0.5), step=0.5)
    res = multiplicative_optimize(m, grid)
    assert res.converged
    assert res.design.same_as(design_1d(-1.0), atol=1e-6)


def test_zero_synergy_exact_grid():
    m, d = standard_pair(0.0)
    res = multiplicative_optimize(m, CandidateGrid.box(2, 4.0, 0.1))
    assert compare_to_catalog(m, d, res) >= 0.9999


def test_rho_one_clusters_at_the_support():
    m, d = standard_pair(1.0)
    res = multiplicative_optimize(m, CandidateGrid.box(2, 4.0, 0.05))
    assert res.clustered and res.design.n == 4
    for point in d.points:
        i = np.argmin(np.abs(res.design.points - point).max(axis=1))
        assert np.abs(res.design.points[i] - point).max() <= 0.1
        assert res.design.weights[i] == pytest.approx(0.25, abs=0.01)


def test_logdet_is_monotone_and_gap_small():
    m, _ = standard_pair(0.5)
    res = multiplicative_optimize(m, CandidateGrid.box(2, 4.0, 0.25), record_history=True)
    hist = np.array(res.logdet_history)
    assert np.all(np.diff(hist) >= -1e-12 * np.maximum(1, np.abs(hist[:-1])))
    assert res.converged and res.final_max_sensitivity_gap / 4 < 1e-7


def test_result_json():
    m, _ = standard_pair(1.0)
    res = multiplicative_optimize(m, CandidateGrid.box(2, 3.0, 0.5))
    data = json.loads(json.dumps(res.to_dict()))
    assert data["iterations"] == res.iterations and "design" in data


def test_singular_grid():
    m, _ = standard_pair(1.0)
    grid = CandidateGrid.from_points([[0, 0], [1, 0], [2, 0], [3, 0]])
    with pytest.raises(SingularDesignError):
        multiplicative_optimize(m, grid)


def test_dimension_mismatch():
    m, _ = standard_pair(1.0)
    with pytest.raises(ValueError):
        multiplicative_optimize(m, CandidateGrid.box(3, 2.0, 1.0))


def test_three_factor_exact_grid():
    m = standardized_model(3, "first_order")
    cat = design_kdim_first_order(3)
    res = multiplicative_optimize(m, CandidateGrid.box(3, 4.0, 0.5))
    assert compare_to_catalog(m, cat, res) >= 0.9999
    support = {tuple(p) for p in cat.points}
    assert all(tuple(np.round(p, 6)) in support for p in res.design.points)


def test_catalog_losing_is_reported():
    # xi_2 posing as the catalog design at rho = 1
    m, _ = standard_pair(1.0)
    res = multiplicative_optimize(m, CandidateGrid.box(2, 4.0, 0.1))
    with pytest.raises(CatalogSuboptimalError, match="catalog design suboptimal"):
        compare_to_catalog(m, xi_design(2.0), res)


def test_min_efficiency_enforced():
    m, d = standard_pair(2.0)
    res = multiplicative_optimize(m, CandidateGrid.box(2, 4.0, 1.0))
    with pytest.raises(AssertionError, match="below"):
        compare_to_catalog(m, d, res, min_efficiency=0.99999)


class TestClusterSupport:
    def test_merges_neighbours(self):
        d = Design([[0, 0], [0.05, 0], [2, 0]], [0.3, 0.2, 0.5])
        c = cluster_support(d, 0.1)
        assert c.n == 2
        assert np.allclose(c.points[0], [0.02, 0.0]) and c.weights[0] == pytest.approx(0.5)

    def test_does_not_chain(self):
        pts = [[0.1 * i, 0.0] for i in range(6)]
        w = [0.3, 0.05, 0.05, 0.05, 0.05, 0.5]
        c = cluster_support(Design(pts, w), 0.2)
        assert c.n == 2

    def test_zero_radius(self):
        d = xi_design(1.0)
        assert cluster_support(d, 0.0) is d


class TestScalarSearch:
    def test_interior(self):
        assert maximize_scalar(lambda s: -(s - 1.3) ** 2, 0, 4) == pytest.approx(1.3, abs=1e-9)

    def test_endpoints(self):
        assert maximize_scalar(lambda s: s, 0, 4) == 4.0
        assert maximize_scalar(lambda s: -s, 1, 4) == 1.0


class TestXi0Class:
    def test_rho_zero(self):
        d = xi0_class_optimize(0.0)
        assert d.points[3] == pytest.approx([2.0, 2.0], abs=1e-8)
        assert d.points[1] == pytest.approx([2.0, 0.0], abs=1e-8)

    def test_rho_one(self):
        assert xi0_class_optimize(1.0).points[3, 0] == pytest.approx(1.0, abs=1e-8)

    @pytest.mark.parametrize("rho", [0.1, 0.7, 3.0])
    def test_matches_t(self, rho):
        assert xi0_class_optimize(rho).points[3, 0] == pytest.approx(t_of_rho(rho), abs=1e-8)

    def test_small_bound_caps_axis(self):
        d = xi0_class_optimize(0.0, b=1.5)
        assert d.points[1, 0] == 1.5 and d.points[3, 0] == 1.5

    def test_antagonistic_matches_case_analysis(self):
        for rho, b in [(-0.05, 4.0), (-0.2, 3.0), (-0.1, 12.0)]:
            s = xi0_class_optimize(rho, b).points[3, 0]
            ref = design_antagonistic_class(rho, b).design.points[3, 0]
            assert diagonal_objective(s, rho) == pytest.approx(diagonal_objective(ref, rho), rel=1e-10)

    def test_unbounded_antagonistic_rejected(self):
        with pytest.raises(RegimeError):
            xi0_class_optimize(-0.05)

    def test_beats_catalog_never(self):
        m, d = standard_pair(0.4)
        assert d_efficiency(m, xi0_class_optimize(0.4), d) == pytest.approx(1.0, abs=1e-12)


def test_determinant_unbounded_for_strong_antagonism():
    rho = -0.2
    m = two_dim_model([0.0, -1.0, -1.0, -rho])
    logdets = [multiplicative_optimize(m, CandidateGrid.box(2, b, b / 40)).logdet for b in (4.0, 8.0, 16.0)]
    assert logdets[0] < logdets[1] < logdets[2]

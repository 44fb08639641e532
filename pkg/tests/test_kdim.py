from math import comb

import numpy as np
import pytest

from poisson_doe.catalog import design_kdim_first_order, design_kdim_second_order
from poisson_doe.model import regression_matrix, standardized_model
from poisson_doe.verify import (
    build_kdim_F, cross_check_diagonal_formula, incidence, kdim_diagonal_sensitivity, kdim_diagonal_sweep,
    pair_triple_incidence,
)


@pytest.mark.parametrize("k", [3, 4, 6])
def test_incidence_shapes(k):
    S2, S3 = incidence(k, 2), incidence(k, 3)
    assert S2.shape == (comb(k, 2), k) and np.all(S2.sum(axis=1) == 2)
    assert np.all(S3.sum(axis=1) == 3)
    S23 = pair_triple_incidence(k)
    assert np.array_equal(S23, (S3 @ S2.T == 2).astype(float))
    assert np.all(S23.sum(axis=1) == 3)


@pytest.mark.parametrize("k, order", [(3, 1), (4, 1), (5, 1), (3, 2), (4, 2), (5, 2)])
def test_F_is_the_design_regression_matrix(k, order):
    structure = "first_order" if order == 1 else "second_order"
    design = (design_kdim_first_order if order == 1 else design_kdim_second_order)(k)
    F = regression_matrix(standardized_model(k, structure), design.points)
    assert np.array_equal(build_kdim_F(k, order).F, F)


@pytest.mark.parametrize("k, order", [(k, 1) for k in range(2, 9)] + [(k, 2) for k in range(3, 7)])
def test_block_inverse(k, order):
    res = build_kdim_F(k, order)
    assert res.identity_residual() <= 1e-12
    assert np.allclose(res.F_inv, np.linalg.inv(res.F), atol=1e-12)


def test_k2_first_order():
    F = build_kdim_F(2, 1).F
    assert F.tolist() == [[1, 0, 0, 0], [1, 2, 0, 0], [1, 0, 2, 0], [1, 2, 2, 4]]


def test_k3_first_column():
    assert np.all(build_kdim_F(3, 1).F[:, 0] == 1)


@pytest.mark.parametrize("k, order", [(1, 1), (2, 2), (3, 3)])
def test_invalid_orders(k, order):
    with pytest.raises(ValueError):
        build_kdim_F(k, order)


@pytest.mark.parametrize("order", [1, 2])
def test_formula_vanishes_at_support(order):
    for j in range(2, 6):
        assert kdim_diagonal_sensitivity(5, order, j, 0.0) == 0.0


def test_formula_example_value():
    # order 1, j = 2 at q = 1/2 by hand
    q = 0.5
    expected = (q * q - 2 * q + 1) ** 2 + 2 * np.e ** 2 * (q * q - q) ** 2 + np.e ** 4 * q ** 4 - np.exp(4 * q)
    assert kdim_diagonal_sensitivity(3, 1, 2, q) == pytest.approx(expected, rel=1e-14)


def test_j_out_of_range():
    with pytest.raises(ValueError):
        kdim_diagonal_sensitivity(3, 1, 4, 0.5)


@pytest.mark.parametrize("k, order", [(3, 1), (4, 1), (5, 1), (3, 2), (4, 2), (5, 2)])
def test_formula_against_generic_pipeline(k, order):
    q = np.linspace(0, 3, 301)
    for j in range(2, k + 1):
        assert cross_check_diagonal_formula(k, order, j, q, relative=True) <= 1e-12


@pytest.mark.parametrize("k, order", [(3, 1), (6, 1), (4, 2), (6, 2)])
def test_diagonal_sweep(k, order):
    sweep = kdim_diagonal_sweep(k, order)
    assert sweep.max_value <= 1e-12
    assert set(sweep.max_by_j) == set(range(2, k + 1))

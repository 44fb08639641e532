"""Block structure of the k-factor minimally supported designs.

Rows of the essential design matrix ``F`` are the regression vectors of the
support points (origin, axial points, pair points and, for second order,
triple points, all at level 2).  ``F = B A`` with a unit lower-triangular
block matrix ``B`` built from incidence matrices of all blocks of size two
and three, so the inverse is available in closed form.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb, exp

import numpy as np

from ..catalog import design_kdim_first_order, design_kdim_second_order
from ..design import deduced_sensitivity, information_matrix
from ..model import InteractionStructure, standardized_model

IDENTITY_TOL = 1e-12


def incidence(k, size):
    """``C(k, size) x k`` 0/1 matrix of all blocks in lexicographic order."""
    blocks = list(itertools.combinations(range(k), size))
    S = np.zeros((len(blocks), k))
    for row, block in enumerate(blocks):
        S[row, list(block)] = 1.0
    return S


def pair_triple_incidence(k):
    """``C(k, 3) x C(k, 2)`` matrix marking the pairs contained in each triple."""
    pairs = {pair: col for col, pair in enumerate(itertools.combinations(range(k), 2))}
    triples = list(itertools.combinations(range(k), 3))
    S = np.zeros((len(triples), len(pairs)))
    for row, triple in enumerate(triples):
        for pair in itertools.combinations(triple, 2):
            S[row, pairs[pair]] = 1.0
    return S


@dataclass(frozen=True, eq=False)
class KDimDesignMatrix:
    k: int
    order: int
    F: np.ndarray
    F_inv: np.ndarray
    A: np.ndarray  # diagonal entries
    S2: np.ndarray
    S3: np.ndarray | None
    S23: np.ndarray | None

    @property
    def p(self):
        return self.F.shape[0]

    def identity_residual(self):
        return float(np.max(np.abs(self.F @ self.F_inv - np.eye(self.p))))


def _check_order(k, order):
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    if k < order + 1:
        raise ValueError(f"order {order} needs k >= {order + 1}")


def build_kdim_F(k, order):
    """``F`` and its block-formula inverse for the order-1 or order-2 design."""
    _check_order(k, order)
    S2 = incidence(k, 2)
    n2 = S2.shape[0]
    one = lambda n: np.ones((n, 1))
    blocks = [
        [np.ones((1, 1)), np.zeros((1, k)), np.zeros((1, n2))],
        [one(k), np.eye(k), np.zeros((k, n2))],
        [one(n2), S2, np.eye(n2)],
    ]
    inv_blocks = [
        [np.ones((1, 1)), np.zeros((1, k)), np.zeros((1, n2))],
        [-one(k), np.eye(k), np.zeros((k, n2))],
        [one(n2), -S2, np.eye(n2)],
    ]
    a = [1.0] + [2.0] * k + [4.0] * n2
    S3 = S23 = None
    if order == 2:
        S3, S23 = incidence(k, 3), pair_triple_incidence(k)
        n3 = S3.shape[0]
        for row in blocks + inv_blocks:
            row.append(np.zeros((row[0].shape[0], n3)))
        blocks.append([one(n3), S3, S23, np.eye(n3)])
        inv_blocks.append([-one(n3), S3, -S23, np.eye(n3)])
        a += [8.0] * n3
    A = np.array(a)
    F = np.block(blocks) * A
    F_inv = np.block(inv_blocks) / A[:, None]
    out = KDimDesignMatrix(k, order, F, F_inv, A, S2, S3, S23)
    residual = out.identity_residual()
    if residual > IDENTITY_TOL:
        raise ArithmeticError(f"block inverse off by {residual:g}")
    return out


def kdim_diagonal_sensitivity(k, order, j, q):
    """Deduced sensitivity on the diagonal of a ``j``-face, at ``x = 2q``.

    The expression depends on ``j`` only; ``k`` is validated.
    """
    _check_order(k, order)
    if not 2 <= j <= k:
        raise ValueError("j must lie in 2..k")
    q = np.asarray(q, dtype=float)
    c2, c3 = comb(j, 2), comb(j, 3)
    with np.errstate(over="ignore"):
        growth = np.exp(2.0 * j * q)
        if order == 1:
            return ((c2 * q ** 2 - j * q + 1) ** 2 + j * exp(2) * ((j - 1) * q ** 2 - q) ** 2
                    + c2 * exp(4) * q ** 4 - growth)
        return ((c3 * q ** 3 - c2 * q ** 2 + j * q - 1) ** 2
                + j * exp(2) * ((c2 - j + 1) * q ** 3 - (j - 1) * q ** 2 + q) ** 2
                + c2 * exp(4) * ((j - 2) * q ** 3 - q ** 2) ** 2
                + c3 * exp(6) * q ** 6 - growth)


def _standard_pair(k, order):
    if order == 1:
        return standardized_model(k, InteractionStructure.FIRST_ORDER), design_kdim_first_order(k)
    return standardized_model(k, InteractionStructure.SECOND_ORDER), design_kdim_second_order(k)


def face_diagonal_points(k, j, q):
    q = np.atleast_1d(np.asarray(q, dtype=float))
    pts = np.zeros((q.size, k))
    pts[:, :j] = 2.0 * q[:, None]
    return pts


def generic_diagonal_sensitivity(k, order, j, q):
    """The same quantity from the catalog design and the information matrix."""
    model, design = _standard_pair(k, order)
    info = information_matrix(model, design)
    return deduced_sensitivity(model, design, face_diagonal_points(k, j, q), info=info)


def cross_check_diagonal_formula(k, order, j, q, relative=False):
    """Largest gap between the closed form and the generic pipeline.

    With ``relative=True`` each gap is divided by ``max(1, |1/lambda|)``:
    both sides cancel terms of size ``exp(2jq)`` for large ``q``.
    """
    closed = np.atleast_1d(kdim_diagonal_sensitivity(k, order, j, q))
    generic = generic_diagonal_sensitivity(k, order, j, q)
    gap = np.abs(closed - generic)
    if relative:
        with np.errstate(over="ignore"):
            gap = gap / np.maximum(1.0, np.exp(2.0 * j * np.atleast_1d(np.asarray(q, float))))
    return float(np.max(gap))


@dataclass
class DiagonalSweep:
    k: int
    order: int
    max_by_j: dict  # j -> (max value, argmax q)
    n_points: int

    @property
    def max_value(self):
        return max(v for v, _ in self.max_by_j.values())


def kdim_diagonal_sweep(k, order, q_max=10.0, step=0.001):
    """Maximum of the closed-form diagonal sensitivity over ``q`` for every ``j``."""
    q = np.linspace(0.0, q_max, int(round(q_max / step)) + 1)
    out = {}
    for j in range(2, k + 1):
        vals = kdim_diagonal_sensitivity(k, order, j, q)
        i = int(np.argmax(vals))
        out[j] = (float(vals[i]), float(q[i]))
    return DiagonalSweep(k, order, out, q.size * (k - 1))

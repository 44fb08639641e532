"""Poisson regression model structures with a log link.

A model is the number of explanatory variables ``k``, an interaction
structure and a dense parameter vector ``beta``.  The regression vector
``f(x)`` consists of products of coordinates ordered by degree first and
lexicographically within a degree::

    1, x1, ..., xk, x1*x2, x1*x3, ..., x(k-1)*xk, x1*x2*x3, ...

``beta`` is indexed the same way, so ``f(x) @ beta`` is the linear
predictor and ``exp(f(x) @ beta)`` the intensity.
"""

from __future__ import annotations

import enum
import itertools
import json
from dataclasses import dataclass, field
from math import comb

import numpy as np


class DimensionError(ValueError):
    """Raised when a point does not match the model dimension."""


class InteractionStructure(str, enum.Enum):
    MAIN_EFFECTS = "main_effects"
    FIRST_ORDER = "first_order"
    SECOND_ORDER = "second_order"
    COMPLETE = "complete"
    TWO_DIM_INTERACTION = "two_dim_interaction"

    @property
    def max_degree(self):
        return {
            "main_effects": 1,
            "first_order": 2,
            "second_order": 3,
            "two_dim_interaction": 2,
        }.get(self.value)


def monomial_terms(k, structure):
    """Index tuples of the monomials in ``f(x)``, intercept first."""
    structure = InteractionStructure(structure)
    max_degree = k if structure is InteractionStructure.COMPLETE else structure.max_degree
    terms = [()]
    for degree in range(1, min(max_degree, k) + 1):
        terms.extend(itertools.combinations(range(k), degree))
    return terms


def n_parameters(k, structure):
    structure = InteractionStructure(structure)
    if structure is InteractionStructure.COMPLETE:
        return 2 ** k
    return sum(comb(k, d) for d in range(structure.max_degree + 1))


def _check_structure(k, structure):
    if k < 1:
        raise ValueError("k must be a positive integer")
    if structure is InteractionStructure.TWO_DIM_INTERACTION and k != 2:
        raise ValueError("two_dim_interaction requires k = 2")
    if structure is InteractionStructure.SECOND_ORDER and k < 3:
        raise ValueError("second_order requires k >= 3")
    if structure is InteractionStructure.FIRST_ORDER and k < 2:
        raise ValueError("first_order requires k >= 2")


@dataclass(frozen=True)
class ModelSpec:
    """Poisson regression model ``lambda(x) = exp(f(x) @ beta)``.

    Attributes:
        k: number of explanatory variables.
        structure: which interaction terms enter ``f``.
        beta: parameter vector in monomial order (see module docstring).
    """

    k: int
    structure: InteractionStructure
    beta: np.ndarray
    terms: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        structure = InteractionStructure(self.structure)
        _check_structure(self.k, structure)
        beta = np.array(self.beta, dtype=float).reshape(-1)
        p = n_parameters(self.k, structure)
        if beta.shape != (p,):
            raise ValueError(
                f"beta has {beta.size} entries, {structure.value} with k={self.k} needs {p}"
            )
        if not np.all(np.isfinite(beta)):
            raise ValueError("beta must be finite")
        beta.setflags(write=False)
        object.__setattr__(self, "structure", structure)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "terms", tuple(monomial_terms(self.k, structure)))

    @property
    def p(self):
        return self.beta.size

    @property
    def main_effects(self):
        return self.beta[1:self.k + 1]

    @property
    def interactions(self):
        return self.beta[self.k + 1:]

    def coefficient(self, *variables):
        """Entry of beta for the monomial over the given 0-based variables."""
        return self.beta[self.terms.index(tuple(sorted(variables)))]

    def with_intercept(self, beta0):
        beta = self.beta.copy()
        beta[0] = beta0
        return ModelSpec(self.k, self.structure, beta)

    # serialization

    def to_dict(self):
        return {"k": self.k, "structure": self.structure.value, "beta": self.beta.tolist()}

    @classmethod
    def from_dict(cls, data):
        return cls(int(data["k"]), InteractionStructure(data["structure"]), data["beta"])

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def two_dim_model(beta):
    """Two-factor model with interaction, ``beta = (b0, b1, b2, b12)``."""
    return ModelSpec(2, InteractionStructure.TWO_DIM_INTERACTION, beta)


def standardized_model(k, structure, rho=0.0):
    """Intercept 0, main effects -1 and every interaction equal to ``-rho``."""
    p = n_parameters(k, structure)
    beta = np.full(p, -float(rho))
    beta[0] = 0.0
    beta[1:k + 1] = -1.0
    return ModelSpec(k, InteractionStructure(structure), beta)


def as_points(model, x):
    """Return ``(points, single)`` with points as an (n, k) array."""
    x = np.asarray(x, dtype=float)
    single = x.ndim <= 1
    pts = x.reshape(1, -1) if single else x
    # in one dimension a flat array is a batch of points
    if model.k == 1 and x.ndim == 1 and x.size != 1:
        pts = x.reshape(-1, 1)
        single = False
    if pts.ndim != 2 or pts.shape[1] != model.k:
        raise DimensionError(
            f"point/model dimension mismatch: got {x.shape}, model has k={model.k}"
        )
    return pts, single


def regression_matrix(model, points):
    """Rows ``f(x)`` for an (n, k) array of points."""
    pts, _ = as_points(model, points)
    out = np.ones((pts.shape[0], model.p))
    for col, term in enumerate(model.terms):
        for i in term:
            out[:, col] *= pts[:, i]
    return out


def regression_vector(model, x):
    """``f(x)`` for a single point (or rows for a batch)."""
    pts, single = as_points(model, x)
    F = regression_matrix(model, pts)
    return F[0] if single else F


def linear_predictor(model, x):
    pts, single = as_points(model, x)
    eta = regression_matrix(model, pts) @ model.beta
    return eta[0] if single else eta


def intensity(model, x):
    """``lambda(x) = exp(f(x) @ beta)``."""
    return np.exp(linear_predictor(model, x))


def inverse_intensity(model, x):
    """``1 / lambda(x)`` evaluated as ``exp(-eta)``; ``inf`` on overflow."""
    with np.errstate(over="ignore"):
        return np.exp(-linear_predictor(model, x))


def recenter(model, c):
    """Model in local coordinates ``y = x - c``: ``lambda'(y) = lambda(y + c)``.

    Expanding each monomial about ``c`` only produces monomials over subsets
    of its variables, so the structure is preserved.
    """
    c = np.asarray(c, dtype=float)
    if c.shape != (model.k,):
        raise DimensionError(f"point/model dimension mismatch: got {c.shape}, model has k={model.k}")
    index = {term: i for i, term in enumerate(model.terms)}
    beta = np.zeros(model.p)
    for term, coef in zip(model.terms, model.beta):
        for r in range(len(term) + 1):
            for sub in itertools.combinations(term, r):
                rest = [i for i in term if i not in sub]
                beta[index[sub]] += coef * np.prod(c[rest]) if rest else coef
    return ModelSpec(model.k, model.structure, beta)

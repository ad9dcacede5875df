"""Multivariate polynomials, Hermite expansion and expected derivative tensors.

Hermite polynomials are probabilists' ones (orthogonal for the standard
gaussian weight, E h_j(g) h_k(g) = k! delta_jk).  The monomial <-> Hermite
change of basis is done per variable with exact integer coefficients, so a
round trip reproduces a polynomial bit for bit.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from math import factorial

import numpy as np

from .errors import ValidationError
from .spaces import ValueSpace
from .tensor import CoeffTensor

__all__ = [
    "PolynomialSpec",
    "HermiteExpansion",
    "hermite_value",
    "hermite_monomial_coeffs",
    "monomial_in_hermite_basis",
    "expand",
    "expected_gradient_tensor",
    "homogeneous_parts",
]

MAX_DEGREE = 6
MAX_VARIABLES = 16


@dataclass(frozen=True)
class PolynomialSpec:
    """A polynomial R^n -> R^m given by monomial terms."""

    n: int
    D: int
    m: int
    terms: tuple  # tuple of (exps tuple, coeff ndarray of shape (m,))
    space: ValueSpace

    def __post_init__(self):
        if not (1 <= self.n <= MAX_VARIABLES):
            raise ValidationError(f"n must be in [1, {MAX_VARIABLES}]")
        if not (0 <= self.D <= MAX_DEGREE):
            raise ValidationError(f"D must be in [0, {MAX_DEGREE}]")
        if self.space.m != self.m:
            raise ValidationError("space dimension != coefficient dimension")
        norm_terms = []
        for exps, coeff in self.terms:
            exps = tuple(int(e) for e in exps)
            if len(exps) != self.n or any(e < 0 for e in exps):
                raise ValidationError(f"bad exponent vector {exps}")
            if sum(exps) > self.D:
                raise ValidationError(f"term degree {sum(exps)} exceeds D={self.D}")
            c = np.asarray(coeff, dtype=float).reshape(self.m)
            c.setflags(write=False)
            norm_terms.append((exps, c))
        object.__setattr__(self, "terms", tuple(norm_terms))

    def degree_of_term(self, i: int) -> int:
        return sum(self.terms[i][0])

    def evaluate(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros(self.m)
        for exps, coeff in self.terms:
            out += coeff * np.prod(x**np.asarray(exps))
        return out

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "D": self.D,
            "m": self.m,
            "terms": [
                {"exps": list(e), "coeff": [float(v) for v in c]} for e, c in self.terms
            ],
            "space": self.space.to_dict(),
        }

    @staticmethod
    def from_dict(obj: dict) -> "PolynomialSpec":
        if not isinstance(obj, dict):
            raise ValidationError("polynomial descriptor must be a JSON object")
        extra = set(obj) - {"n", "D", "m", "terms", "space"}
        if extra:
            raise ValidationError(f"unknown polynomial fields: {sorted(extra)}")
        try:
            terms = tuple((tuple(t["exps"]), t["coeff"]) for t in obj["terms"])
            return PolynomialSpec(
                n=int(obj["n"]), D=int(obj["D"]), m=int(obj["m"]),
                terms=terms, space=ValueSpace.from_dict(obj["space"]),
            )
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"bad polynomial descriptor: {exc}") from exc

    @staticmethod
    def load(path) -> "PolynomialSpec":
        with open(path) as fh:
            return PolynomialSpec.from_dict(json.load(fh))


@dataclass(frozen=True)
class HermiteExpansion:
    """Coefficients a_d of f = sum over degree vectors d of a_d prod_k h_{d_k}(x_k)."""

    n: int
    D: int
    m: int
    coeffs: dict  # exponent tuple -> ndarray (m,)
    space: ValueSpace

    def coefficient(self, dvec) -> np.ndarray:
        return self.coeffs.get(tuple(dvec), np.zeros(self.m))

    def to_polynomial(self) -> PolynomialSpec:
        """Substitute monomial expansions back in; inverse of :func:`expand`."""
        acc: dict = {}
        for dvec, coeff in self.coeffs.items():
            per_var = [hermite_monomial_coeffs(dk) for dk in dvec]
            for combo in itertools.product(*[list(enumerate(c)) for c in per_var]):
                exps = tuple(i for i, _ in combo)
                factor = 1
                for _, f in combo:
                    factor *= f
                if factor == 0:
                    continue
                key = exps
                acc[key] = acc.get(key, np.zeros(self.m)) + factor * coeff
        terms = tuple((e, c) for e, c in sorted(acc.items()) if np.any(c != 0.0))
        return PolynomialSpec(n=self.n, D=self.D, m=self.m, terms=terms, space=self.space)


def hermite_value(mth: int, x: float) -> float:
    """h_m(x) by the three-term recurrence h_{m+1} = x h_m - m h_{m-1}."""
    if mth < 0:
        raise ValidationError("degree must be >= 0")
    h_prev, h = 1.0, float(x)
    if mth == 0:
        return 1.0
    for k in range(1, mth):
        h_prev, h = h, x * h - k * h_prev
    return h


def hermite_monomial_coeffs(k: int) -> list:
    """Integer monomial coefficients of h_k: h_k = sum_i coeffs[i] x^i."""
    rows = [[1], [0, 1]]
    for deg in range(1, k):
        prev, prev2 = rows[deg], rows[deg - 1]
        nxt = [0] * (deg + 2)
        for i, c in enumerate(prev):
            nxt[i + 1] += c
        for i, c in enumerate(prev2):
            nxt[i] -= deg * c
        rows.append(nxt)
    return rows[k]


def monomial_in_hermite_basis(k: int) -> list:
    """Integer Hermite coefficients of x^k (back substitution, exact)."""
    coeffs = [0] * (k + 1)
    residual = [0] * (k + 1)
    residual[k] = 1
    for deg in range(k, -1, -1):
        c = residual[deg]
        if c == 0:
            continue
        coeffs[deg] = c
        for i, hc in enumerate(hermite_monomial_coeffs(deg)):
            residual[i] -= c * hc
    return coeffs


def expand(f: PolynomialSpec) -> HermiteExpansion:
    """Expand a monomial polynomial in the multivariate Hermite basis."""
    acc: dict = {}
    for exps, coeff in f.terms:
        per_var = [monomial_in_hermite_basis(e) for e in exps]
        for combo in itertools.product(*[list(enumerate(c)) for c in per_var]):
            dvec = tuple(i for i, _ in combo)
            factor = 1
            for _, fct in combo:
                factor *= fct
            if factor == 0:
                continue
            acc[dvec] = acc.get(dvec, np.zeros(f.m)) + factor * coeff
    coeffs = {d: c for d, c in acc.items() if np.any(c != 0.0)}
    return HermiteExpansion(n=f.n, D=f.D, m=f.m, coeffs=coeffs, space=f.space)


def expected_gradient_tensor(f: PolynomialSpec, d: int) -> CoeffTensor:
    """The symmetric order-d tensor of expected d-th partial derivatives.

    For f = sum a_dvec prod h_{d_k}, the entry at a multi-index i whose
    histogram is dvec (sum = d) equals a_dvec * prod_k d_k!; all other
    entries vanish.
    """
    if not (1 <= d <= f.D):
        raise ValidationError(f"derivative order must be in [1, {f.D}]")
    exp_f = expand(f)
    values = np.zeros((f.n,) * d + (f.m,))
    for dvec, coeff in exp_f.coeffs.items():
        if sum(dvec) != d:
            continue
        entry = coeff * float(np.prod([factorial(dk) for dk in dvec]))
        word = tuple(k for k, dk in enumerate(dvec) for _ in range(dk))
        for perm in set(itertools.permutations(word)):
            values[perm] = entry
    return CoeffTensor(d=d, n=f.n, m=f.m, values=values, space=f.space)


def homogeneous_parts(Q: PolynomialSpec) -> list:
    """Split a tetrahedral polynomial into its homogeneous degree parts."""
    for exps, _ in Q.terms:
        if any(e > 1 for e in exps):
            raise ValidationError("polynomial is not tetrahedral (an exponent exceeds 1)")
    by_degree: dict = {}
    for exps, coeff in Q.terms:
        by_degree.setdefault(sum(exps), []).append((exps, coeff))
    parts = []
    for deg in sorted(by_degree):
        parts.append(
            PolynomialSpec(n=Q.n, D=deg, m=Q.m, terms=tuple(by_degree[deg]), space=Q.space)
        )
    return parts

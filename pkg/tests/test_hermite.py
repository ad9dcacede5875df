import itertools
import math

import numpy as np
import pytest

from chaos_bounds.errors import ValidationError
from chaos_bounds.hermite import (
    PolynomialSpec,
    expand,
    expected_gradient_tensor,
    hermite_monomial_coeffs,
    hermite_value,
    homogeneous_parts,
    monomial_in_hermite_basis,
)
from chaos_bounds.spaces import ValueSpace

from .oracles import hermegauss_moment

SCALAR = ValueSpace.lq(2.0, [1.0])


def poly(n, D, terms, m=1, space=None):
    return PolynomialSpec(n=n, D=D, m=m, terms=tuple(terms), space=space or ValueSpace.lq(2.0, np.ones(m)))


def test_hermite_base_cases():
    for x in (-1.3, 0.0, 2.4):
        assert hermite_value(0, x) == 1.0
        assert hermite_value(1, x) == x


def test_hermite_recurrence_values():
    assert hermite_value(2, 1.0) == pytest.approx(0.0)  # x^2 - 1
    assert hermite_value(3, 2.0) == pytest.approx(2.0)  # x^3 - 3x


def test_hermite_orthogonality_via_quadrature():
    x, w = np.polynomial.hermite_e.hermegauss(40)
    w = w / np.sum(w)
    for j in range(5):
        for k in range(5):
            inner = float(np.sum(w * [hermite_value(j, xi) * hermite_value(k, xi) for xi in x]))
            expected = float(math.factorial(j)) if j == k else 0.0
            assert inner == pytest.approx(expected, abs=1e-8)


def test_monomial_to_hermite_square():
    # x^2 = h_2 + h_0
    assert monomial_in_hermite_basis(2) == [1, 0, 1]
    assert monomial_in_hermite_basis(1) == [0, 1]


def test_expand_square():
    f = poly(1, 2, [((2,), [1.0])])
    exp_f = expand(f)
    assert np.allclose(exp_f.coefficient((2,)), [1.0])
    assert np.allclose(exp_f.coefficient((0,)), [1.0])


def test_expand_linear():
    f = poly(1, 1, [((1,), [1.0])])
    exp_f = expand(f)
    assert set(exp_f.coeffs) == {(1,)}


def test_expand_round_trip():
    gen = np.random.default_rng(3)
    terms = []
    for exps in itertools.product(range(3), repeat=2):
        if sum(exps) <= 3:
            terms.append((exps, gen.standard_normal(2)))
    f = poly(2, 3, terms, m=2)
    back = expand(f).to_polynomial()
    ours = {e: c for e, c in f.terms}
    theirs = {e: c for e, c in back.terms}
    for e in set(ours) | set(theirs):
        assert np.allclose(ours.get(e, np.zeros(2)), theirs.get(e, np.zeros(2)),
                           rtol=1e-12, atol=1e-12)


def test_expand_matches_pointwise_evaluation():
    gen = np.random.default_rng(4)
    terms = [((2, 1), gen.standard_normal(1)), ((0, 3), gen.standard_normal(1)),
             ((1, 0), gen.standard_normal(1))]
    f = poly(2, 3, terms)
    exp_f = expand(f)
    for _ in range(20):
        x = gen.standard_normal(2)
        direct = f.evaluate(x)
        viah = sum(
            c * hermite_value(dv[0], x[0]) * hermite_value(dv[1], x[1])
            for dv, c in exp_f.coeffs.items()
        )
        assert np.allclose(direct, viah, rtol=1e-10, atol=1e-12)


def _degree3_polynomial(gen, n, m):
    """f = sum a_ijk x_i x_j x_k + sum b_ij x_i x_j + sum c_i x_i + d with
    symmetric a, b; returns (spec, a, b, c)."""
    a = gen.standard_normal((n, n, n, m))
    a = (a + a.transpose(1, 0, 2, 3) + a.transpose(2, 1, 0, 3)
         + a.transpose(0, 2, 1, 3) + a.transpose(1, 2, 0, 3) + a.transpose(2, 0, 1, 3)) / 6
    b = gen.standard_normal((n, n, m))
    b = (b + b.transpose(1, 0, 2)) / 2
    c = gen.standard_normal((n, m))
    d0 = gen.standard_normal(m)
    terms: dict = {}

    def add(exps, coeff):
        exps = tuple(exps)
        terms[exps] = terms.get(exps, np.zeros(m)) + coeff

    for i, j, k in itertools.product(range(n), repeat=3):
        e = [0] * n
        e[i] += 1; e[j] += 1; e[k] += 1
        add(e, a[i, j, k])
    for i, j in itertools.product(range(n), repeat=2):
        e = [0] * n
        e[i] += 1; e[j] += 1
        add(e, b[i, j])
    for i in range(n):
        e = [0] * n
        e[i] += 1
        add(e, c[i])
    add([0] * n, d0)
    spec = poly(n, 3, sorted(terms.items()), m=m)
    return spec, a, b, c


def test_degree3_example_gradients():
    gen = np.random.default_rng(5)
    n, m = 3, 2
    f, a, b, c = _degree3_polynomial(gen, n, m)
    g1 = expected_gradient_tensor(f, 1).values
    g2 = expected_gradient_tensor(f, 2).values
    g3 = expected_gradient_tensor(f, 3).values
    expected_g1 = c + 3 * np.einsum("ijjm->im", a)
    assert np.allclose(g1, expected_g1, rtol=1e-10, atol=1e-12)
    assert np.allclose(g2, 2 * b, rtol=1e-10, atol=1e-12)
    assert np.allclose(g3, 6 * a, rtol=1e-10, atol=1e-12)


def test_pure_hermite_second_derivative():
    # f = h_2(x_1): finite differences under gaussian quadrature give E f'' = 2
    f = poly(1, 2, [((2,), [1.0]), ((0,), [-1.0])])
    val = expected_gradient_tensor(f, 2).values[0, 0, 0]
    x, w = np.polynomial.hermite_e.hermegauss(40)
    w = w / np.sum(w)
    h = 1e-4

    def feval(t):
        return t**2 - 1.0

    fd = np.sum(w * (feval(x + h) - 2 * feval(x) + feval(x - h)) / h**2)
    assert val == pytest.approx(2.0, rel=1e-12)
    assert val == pytest.approx(float(fd), rel=1e-6)


def test_gradient_tensors_are_symmetric():
    gen = np.random.default_rng(6)
    f, *_ = _degree3_polynomial(gen, 2, 1)
    for d in (2, 3):
        t = expected_gradient_tensor(f, d).values
        for perm in itertools.permutations(range(d)):
            assert np.array_equal(t, np.transpose(t, perm + (d,)))


def test_gradient_matches_quadrature_oracle():
    # analytic differentiation of the monomial form, then per-variable
    # gaussian quadrature of the expectation
    gen = np.random.default_rng(7)
    for n, D in ((2, 3), (3, 2)):
        terms = []
        for exps in itertools.product(range(D + 1), repeat=n):
            if 0 < sum(exps) <= D and gen.random() < 0.7:
                terms.append((exps, gen.standard_normal(1)))
        f = poly(n, D, terms)
        for d in range(1, D + 1):
            ours = expected_gradient_tensor(f, d).values
            oracle = np.zeros((n,) * d + (1,))
            for idx in itertools.product(range(n), repeat=d):
                total = 0.0
                for exps, coeff in f.terms:
                    counts = [0] * n
                    for i in idx:
                        counts[i] += 1
                    factor = 1.0
                    ok = True
                    for k in range(n):
                        if counts[k] > exps[k]:
                            ok = False
                            break
                        for r in range(counts[k]):
                            factor *= exps[k] - r
                    if not ok:
                        continue
                    moment = 1.0
                    for k in range(n):
                        moment *= hermegauss_moment(exps[k] - counts[k])
                    total += factor * moment * coeff[0]
                oracle[idx + (0,)] = total
            assert np.allclose(ours, oracle, rtol=1e-8, atol=1e-8)


def test_homogeneous_parts_grouping():
    f = poly(2, 2, [((0, 0), [1.0]), ((1, 0), [1.0]), ((1, 1), [1.0])])
    parts = homogeneous_parts(f)
    assert [p.D for p in parts] == [0, 1, 2]
    total = {}
    for part in parts:
        for e, c in part.terms:
            total[e] = total.get(e, 0.0) + c[0]
    assert total == {(0, 0): 1.0, (1, 0): 1.0, (1, 1): 1.0}


def test_homogeneous_parts_single():
    f = poly(2, 2, [((1, 1), [2.0])])
    parts = homogeneous_parts(f)
    assert len(parts) == 1 and parts[0].D == 2


def test_homogeneous_parts_rejects_squares():
    f = poly(1, 2, [((2,), [1.0])])
    with pytest.raises(ValidationError, match="tetrahedral"):
        homogeneous_parts(f)


def test_polynomial_json_round_trip():
    f = poly(2, 2, [((1, 1), [3.0])])
    back = PolynomialSpec.from_dict(f.to_dict())
    assert back.terms[0][0] == (1, 1)
    bad = f.to_dict()
    bad["bogus"] = True
    with pytest.raises(ValidationError, match="unknown"):
        PolynomialSpec.from_dict(bad)


def test_degree_and_size_caps():
    with pytest.raises(ValidationError):
        poly(1, 7, [])
    with pytest.raises(ValidationError):
        poly(17, 2, [])
    with pytest.raises(ValidationError):
        poly(1, 2, [((3,), [1.0])])

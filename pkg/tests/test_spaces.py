import numpy as np
import pytest

from chaos_bounds.errors import UnsupportedSpaceError, ValidationError
from chaos_bounds.spaces import ValueSpace, norm_batch, norm_subgrad, norm_value, type2_K


def test_lq_euclidean():
    sp = ValueSpace.lq(2.0, [1.0, 1.0])
    assert norm_value(sp, [3.0, 4.0]) == pytest.approx(5.0)


def test_finite_sup_dual_points():
    sp = ValueSpace.finite_sup([[1, 0], [-1, 0], [0, 1], [0, -1]])
    assert norm_value(sp, [3.0, -4.0]) == pytest.approx(4.0)


def test_lq_weighted_q3():
    # direct formula: (2*1 + 1*1)^(1/3)
    sp = ValueSpace.lq(3.0, [2.0, 1.0])
    assert norm_value(sp, [1.0, 1.0]) == pytest.approx(3.0 ** (1.0 / 3.0))


def test_type2_K_values():
    assert type2_K(ValueSpace.lq(4.0, [1.0])) == pytest.approx(2.0)
    assert type2_K(ValueSpace.lq(1.0, [1.0])) == pytest.approx(1.0)
    assert type2_K(ValueSpace.lq(9.0, [1.0]), c=2.0) == pytest.approx(6.0)


def test_type2_K_finite_sup_unsupported():
    sp = ValueSpace.finite_sup([[1.0], [-1.0]])
    with pytest.raises(UnsupportedSpaceError):
        type2_K(sp)


def test_invalid_spaces():
    with pytest.raises(ValidationError):
        ValueSpace.lq(0.5, [1.0])
    with pytest.raises(ValidationError):
        ValueSpace.lq(2.0, [1.0, -1.0])
    with pytest.raises(ValidationError):
        ValueSpace.finite_sup([[1.0, 0.0]])  # not symmetric
    with pytest.raises(ValidationError):
        norm_value(ValueSpace.lq(2.0, [1.0, 1.0]), [1.0, 2.0, 3.0])


@pytest.mark.parametrize("kind", ["lq2", "lq5", "sup"])
def test_norm_axioms_on_random_triples(kind):
    gen = np.random.default_rng(20240601)
    m = 4
    if kind == "lq2":
        sp = ValueSpace.lq(2.0, gen.uniform(0.5, 2.0, m))
    elif kind == "lq5":
        sp = ValueSpace.lq(5.0, gen.uniform(0.5, 2.0, m))
    else:
        pts = gen.standard_normal((6, m))
        sp = ValueSpace.finite_sup(np.vstack([pts, -pts]))
    for _ in range(200):
        u = gen.standard_normal(m)
        v = gen.standard_normal(m)
        c = gen.standard_normal()
        nu, nv = norm_value(sp, u), norm_value(sp, v)
        assert norm_value(sp, c * u) == pytest.approx(abs(c) * nu, rel=1e-12, abs=1e-12)
        assert norm_value(sp, u + v) <= nu + nv + 1e-12 * (nu + nv)


def test_finite_sup_even():
    gen = np.random.default_rng(3)
    pts = gen.standard_normal((5, 3))
    sp = ValueSpace.finite_sup(np.vstack([pts, -pts]))
    for _ in range(50):
        v = gen.standard_normal(3)
        assert norm_value(sp, v) == pytest.approx(norm_value(sp, -v))


@pytest.mark.parametrize("q", [1.0, 2.0, 3.5, 12.0])
def test_subgradient_supports_norm(q):
    # g in the subdifferential at v satisfies <g, v> = |v| and stays in the dual ball
    gen = np.random.default_rng(7)
    sp = ValueSpace.lq(q, gen.uniform(0.5, 2.0, 5))
    for _ in range(100):
        v = gen.standard_normal(5)
        g = norm_subgrad(sp, v)
        assert float(g @ v) == pytest.approx(norm_value(sp, v), rel=1e-9)
        w = gen.standard_normal(5)
        assert float(g @ w) <= norm_value(sp, w) + 1e-9


def test_norm_batch_matches_scalar():
    gen = np.random.default_rng(11)
    sp = ValueSpace.lq(3.0, gen.uniform(0.5, 2.0, 4))
    V = gen.standard_normal((10, 4))
    batch = norm_batch(sp, V)
    for i in range(10):
        assert batch[i] == pytest.approx(norm_value(sp, V[i]))


def test_json_round_trip():
    sp = ValueSpace.lq(4.0, [1.0, 2.0])
    back = ValueSpace.from_dict(sp.to_dict())
    assert back.kind == "lq" and back.q == sp.q
    assert np.array_equal(back.weights, sp.weights)
    sup = ValueSpace.finite_sup([[1.0, 0.0], [-1.0, 0.0]])
    back = ValueSpace.from_dict(sup.to_dict())
    assert np.array_equal(back.T, sup.T)
    with pytest.raises(ValidationError):
        ValueSpace.from_dict({"kind": "lq", "q": 2.0, "weights": [1.0], "bogus": 1})

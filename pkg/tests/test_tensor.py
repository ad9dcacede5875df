import itertools

import numpy as np
import pytest

from chaos_bounds.errors import ValidationError
from chaos_bounds.spaces import ValueSpace
from chaos_bounds.tensor import (
    BlockAssignment,
    CoeffTensor,
    contract,
    mask_offdiagonal,
    slice_fix,
    symmetrize,
    validate,
)

SP = ValueSpace.lq(2.0, [1.0])


def make(d, n, m, flat, space=None):
    return CoeffTensor.from_flat(d, n, m, flat, space or ValueSpace.lq(2.0, np.ones(m)))


def test_validate_ok():
    validate(make(1, 2, 1, [3.0, 4.0]))


def test_validate_length_mismatch():
    with pytest.raises(ValidationError, match="3"):
        make(2, 2, 1, [1.0, 2.0, 3.0])


def test_validate_d_zero_rejected():
    t = CoeffTensor(d=0, n=1, m=1, values=np.array([1.0]), space=SP)
    with pytest.raises(ValidationError, match="d >= 1"):
        validate(t)


def test_slice_identity_matrix():
    t = make(2, 3, 1, np.eye(3).reshape(-1))
    sl = slice_fix(t, [1], [1])
    assert sl.d == 1
    assert np.allclose(sl.values.ravel(), [1.0, 0.0, 0.0])


def test_slice_empty_is_identity():
    t = make(2, 2, 2, np.arange(8.0))
    sl = slice_fix(t, [], [])
    assert np.array_equal(sl.values, t.values)


def test_slice_all_gives_order_zero():
    t = make(2, 2, 3, np.arange(12.0))
    sl = slice_fix(t, [1, 2], [2, 1])
    assert sl.d == 0
    assert np.array_equal(sl.values, t.values[1, 0])


def test_slice_index_out_of_range():
    t = make(1, 2, 1, [1.0, 2.0])
    with pytest.raises(ValidationError):
        slice_fix(t, [1], [3])


def test_contract_dot_product():
    t = make(1, 2, 1, [3.0, 4.0])
    ba = BlockAssignment(blocks=(((1,), "deterministic"),))
    out = contract(t, ba, vectors={(1,): [0.6, 0.8]})
    assert out.d == 0
    assert out.values[0] == pytest.approx(5.0)


def test_contract_rank_one_identity():
    gen = np.random.default_rng(5)
    u, v = gen.standard_normal(3), gen.standard_normal(3)
    t = make(2, 3, 1, np.outer(u, v).reshape(-1))
    ba = BlockAssignment(blocks=(((2,), "deterministic"),))
    out = contract(t, ba, vectors={(2,): v / np.linalg.norm(v)})
    assert np.allclose(out.values.ravel(), np.linalg.norm(v) * u)


def test_contract_matches_brute_force_triple_loop():
    gen = np.random.default_rng(9)
    n, m = 3, 2
    vals = gen.standard_normal(n * n * n * m)
    t = make(3, n, m, vals)
    w = gen.standard_normal(n * n)  # block {1,2}, jointly indexed
    x = gen.standard_normal(n)      # block {3}
    ba = BlockAssignment(blocks=(((1, 2), "gaussian"), ((3,), "deterministic")))
    out = contract(t, ba, vectors={(3,): x}, weights={(1, 2): w})
    arr = vals.reshape(n, n, n, m)
    wm = w.reshape(n, n)
    expected = np.zeros(m)
    for i in range(n):
        for j in range(n):
            for k in range(n):
                expected += arr[i, j, k] * wm[i, j] * x[k]
    assert out.d == 0
    assert np.allclose(out.values, expected)


def test_contract_shape_mismatch():
    t = make(2, 2, 1, np.ones(4))
    ba = BlockAssignment(blocks=(((1, 2), "gaussian"),))
    with pytest.raises(ValidationError):
        contract(t, ba, weights={(1, 2): np.ones(3)})


def test_contract_linearity():
    gen = np.random.default_rng(21)
    a = make(2, 3, 2, gen.standard_normal(18))
    b = make(2, 3, 2, gen.standard_normal(18))
    al, be = 1.7, -0.3
    combo = make(2, 3, 2, (al * a.values + be * b.values).reshape(-1))
    ba = BlockAssignment(blocks=(((1,), "deterministic"), ((2,), "gaussian")))
    arrs = dict(vectors={(1,): gen.standard_normal(3)}, weights={(2,): gen.standard_normal(3)})
    lhs = contract(combo, ba, **arrs).values
    rhs = al * contract(a, ba, **arrs).values + be * contract(b, ba, **arrs).values
    assert np.allclose(lhs, rhs, rtol=1e-13, atol=1e-13)


def test_contract_basis_vectors_reproduce_slices():
    gen = np.random.default_rng(33)
    t = make(2, 2, 2, gen.standard_normal(8))
    for i, j in itertools.product(range(2), range(2)):
        e1 = np.zeros(2); e1[i] = 1.0
        e2 = np.zeros(2); e2[j] = 1.0
        ba = BlockAssignment(blocks=(((1,), "deterministic"), ((2,), "deterministic")))
        out = contract(t, ba, vectors={(1,): e1, (2,): e2})
        sl = slice_fix(t, [1, 2], [i + 1, j + 1])
        assert np.allclose(out.values, sl.values)


def test_mask_offdiagonal_d2():
    t = make(2, 2, 1, np.ones(4))
    masked = mask_offdiagonal(t)
    assert np.allclose(masked.values.ravel(), [0.0, 1.0, 1.0, 0.0])


def test_mask_offdiagonal_d1_unchanged():
    t = make(1, 3, 1, [1.0, 2.0, 3.0])
    assert np.array_equal(mask_offdiagonal(t).values, t.values)


def test_mask_offdiagonal_pigeonhole():
    t = make(3, 2, 1, np.ones(8))
    assert not np.any(mask_offdiagonal(t).values)


def test_symmetrize_idempotent_and_commutes_with_mask():
    gen = np.random.default_rng(14)
    t = make(3, 3, 2, gen.standard_normal(54))
    s = symmetrize(t)
    assert np.allclose(symmetrize(s).values, s.values, rtol=1e-14, atol=1e-14)
    a = mask_offdiagonal(symmetrize(t)).values
    b = symmetrize(mask_offdiagonal(t)).values
    assert np.allclose(a, b, rtol=1e-13, atol=1e-14)


def test_json_round_trip_and_unknown_fields():
    t = make(2, 2, 2, np.arange(8.0))
    back = CoeffTensor.from_dict(t.to_dict())
    assert np.array_equal(back.values, t.values)
    bad = t.to_dict()
    bad["extra"] = 1
    with pytest.raises(ValidationError, match="unknown"):
        CoeffTensor.from_dict(bad)
    incomplete = t.to_dict()
    del incomplete["values"]
    with pytest.raises(ValidationError, match="missing"):
        CoeffTensor.from_dict(incomplete)

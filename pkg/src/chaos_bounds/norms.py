"""Estimators for the partition-indexed chaos norms.

Every norm here is a supremum, over unit vectors attached to blocks of
coordinates, of either a deterministic quantity or an expected norm of a
gaussian contraction.  All of them are estimated the same way:

* gaussian blocks are replaced by a frozen sample set, so the stochastic
  supremum becomes a deterministic optimization (sample-average
  approximation);
* each block vector in turn is updated by normalised (sub)gradient ascent on
  the unit sphere.  The per-block objective is a norm of a linear image of
  the block vector, hence convex and positively homogeneous, which makes the
  update ``x <- g / |g|_2`` monotone; a step-halving fallback guards against
  rounding;
* the sweep is restarted from independent random initialisations and the
  best candidate is re-evaluated on fresh draws.

The reported value is therefore a lower estimate of the supremum, up to
Monte-Carlo noise on the final evaluation (quantified by ``stderr``).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import rng
from ._parallel import pmap
from .errors import NumericError, UnsupportedSpaceError, ValidationError
from .partitions import (
    CoverSequence,
    PartitionPair,
    canonical_partition,
    covered,
    render_pair,
    singletons,
)
from .spaces import ValueSpace, norm_batch, norm_subgrad
from .tensor import CoeffTensor

__all__ = [
    "OptimizerConfig",
    "NormEstimate",
    "mixed_norm",
    "triple_norm",
    "lq_triple_norm",
    "lq_cover_norm",
    "real_chaos_sup",
]


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 8
    saa_samples: int = 256
    eval_samples: int = 4096
    max_sweeps: int = 100
    tol: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if min(self.restarts, self.saa_samples, self.eval_samples, self.max_sweeps) < 1:
            raise ValidationError("all optimizer counts must be >= 1")
        if not self.tol > 0:
            raise ValidationError("tol must be positive")


@dataclass(frozen=True)
class NormEstimate:
    value: float
    restarts_used: int
    saa_samples: int
    eval_samples: int
    stderr: float
    best_vectors: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "restarts_used": self.restarts_used,
            "saa_samples": self.saa_samples,
            "eval_samples": self.eval_samples,
            "stderr": self.stderr,
            "best_vectors": {
                "{" + ",".join(str(c) for c in b) + "}": [float(x) for x in v]
                for b, v in self.best_vectors.items()
            },
        }


# ---------------------------------------------------------------------------
# objective machinery


class _LqL2Head:
    """Weighted L_q over the value axis of the ell_2 taken over leading axes."""

    def __init__(self, weights, q: float):
        self.weights = np.asarray(weights, dtype=float)
        self.q = float(q)

    def value(self, free: np.ndarray) -> float:
        flat = free.reshape(-1, free.shape[-1])
        r = np.sqrt(np.sum(flat**2, axis=0))
        s = float(np.max(r)) if r.size else 0.0
        if s == 0.0:
            return 0.0
        u = r / s
        return s * float(np.sum(self.weights * u**self.q)) ** (1.0 / self.q)

    def dual(self, free: np.ndarray) -> np.ndarray:
        flat = free.reshape(-1, free.shape[-1])
        r = np.sqrt(np.sum(flat**2, axis=0))
        s = float(np.max(r)) if r.size else 0.0
        if s == 0.0:
            return np.zeros_like(free)
        u = r / s
        acc = float(np.sum(self.weights * u**self.q))
        # dN/dv = w_j r_j^(q-2) v N^(1-q), kept in max-scaled form
        with np.errstate(invalid="ignore", divide="ignore"):
            coef = self.weights * u ** (self.q - 2.0) * acc ** (1.0 / self.q - 1.0)
        coef = np.where(r > 0, np.nan_to_num(coef), 0.0)
        return (flat * coef / s).reshape(free.shape)


class _SpaceHead:
    """Mean of value-space norms over a leading sample axis (or none)."""

    def __init__(self, space: ValueSpace, mean: bool):
        self.space = space
        self.mean = mean

    def value(self, free: np.ndarray) -> float:
        norms = norm_batch(self.space, free)
        return float(np.mean(norms)) if self.mean else float(norms)

    def dual(self, free: np.ndarray) -> np.ndarray:
        g = norm_subgrad(self.space, free)
        if self.mean:
            g = g / free.shape[0]
        return g


class _Objective:
    """Contraction of a coefficient array against per-block unit vectors.

    ``fixed_ops`` (e.g. frozen gaussian draws carrying a sample axis) are
    merged into the array once at construction.  ``blocks`` lists the axis
    labels each optimised vector attaches to, with the block's ndarray shape
    alongside; duplicate axis labels across blocks multiply pointwise, which
    is exactly the overlap rule of the covering-sequence norms.
    """

    def __init__(self, values, tensor_labels, blocks, block_shapes, fixed_ops, out_labels, head):
        self.blocks = [list(b) for b in blocks]
        self.block_shapes = list(block_shapes)
        self.out_labels = list(out_labels)
        self.head = head
        needed = set(out_labels) | {l for b in blocks for l in b}
        if fixed_ops:
            ops = [values, list(tensor_labels)]
            have = set(tensor_labels)
            for arr, labels in fixed_ops:
                ops.extend([arr, list(labels)])
                have |= set(labels)
            self.tensor_labels = sorted(needed & have)
            self.values = np.einsum(*ops, self.tensor_labels, optimize=True)
        else:
            self.values = values
            self.tensor_labels = list(tensor_labels)

    def _ops(self, xs, skip: int | None = None) -> list:
        ops = [self.values, self.tensor_labels]
        for r, axes in enumerate(self.blocks):
            if r == skip:
                continue
            ops.extend([xs[r].reshape(self.block_shapes[r]), axes])
        return ops

    def contract(self, xs) -> np.ndarray:
        return np.einsum(*self._ops(xs), self.out_labels, optimize=True)

    def value(self, xs) -> float:
        return self.head.value(self.contract(xs))

    def grad(self, xs, r: int) -> np.ndarray:
        dual = self.head.dual(self.contract(xs))
        ops = self._ops(xs, skip=r)
        ops.extend([dual, self.out_labels])
        return np.einsum(*ops, self.blocks[r], optimize=True).ravel()


def _normalize(x: np.ndarray) -> np.ndarray:
    nrm = float(np.linalg.norm(x))
    return x / nrm if nrm > 0 else x


def _ascend(obj: _Objective, xs: list, cfg: OptimizerConfig) -> float:
    val = obj.value(xs)
    if not np.isfinite(val):
        raise NumericError("optimization failure: non-finite objective")
    for _ in range(cfg.max_sweeps):
        prev = val
        for r in range(len(xs)):
            g = obj.grad(xs, r)
            ng = float(np.linalg.norm(g))
            if ng == 0.0:
                continue
            cand = g / ng
            cand_val = obj.value(xs[:r] + [cand] + xs[r + 1:])
            if cand_val >= val:
                xs[r] = cand
                val = cand_val
                continue
            # rounding can break the exact ascent guarantee; halve toward cand
            step = 0.5
            for _ in range(6):
                mid = _normalize(xs[r] + step * (cand - xs[r]))
                mid_val = obj.value(xs[:r] + [mid] + xs[r + 1:])
                if mid_val > val:
                    xs[r] = mid
                    val = mid_val
                    break
                step *= 0.5
        if not np.isfinite(val):
            raise NumericError("optimization failure: non-finite objective")
        if val <= prev * (1.0 + cfg.tol):
            break
    return val


def _optimize(build_objective, dims, cfg: OptimizerConfig, tag: str) -> list:
    """Run ``cfg.restarts`` independent ascents, one frozen objective each.

    Restart streams are keyed by (seed, restart), so results do not depend
    on whether restarts run serially or across threads.
    """

    def one(restart: int):
        obj = build_objective(restart)
        xs = []
        for bi, dim in enumerate(dims):
            g = rng.stream(cfg.seed, tag, "init", restart, bi)
            xs.append(_normalize(g.standard_normal(dim)))
        val = _ascend(obj, xs, cfg)
        return (val, xs)

    return pmap(one, range(cfg.restarts))


# ---------------------------------------------------------------------------
# the norms


def _zero_estimate(A: CoeffTensor, blocks) -> NormEstimate:
    vectors = {}
    for b in blocks:
        e = np.zeros(A.n ** len(b))
        e[0] = 1.0
        vectors[tuple(b)] = e
    return NormEstimate(
        value=0.0, restarts_used=0, saa_samples=0, eval_samples=0, stderr=0.0,
        best_vectors=vectors,
    )


def mixed_norm(A: CoeffTensor, pair: PartitionPair, cfg: OptimizerConfig | None = None) -> NormEstimate:
    """Estimate the mixed norm of ``A`` for the pair ``(P, P')``.

    Unit-vector suprema run over the blocks of ``pair.P``; each block of
    ``pair.Pprime`` contributes a jointly-indexed gaussian weight under the
    expectation.  With no gaussian blocks the objective is exact and
    ``stderr`` is 0.
    """
    cfg = cfg or OptimizerConfig()
    pair = PartitionPair(P=canonical_partition(pair.P), Pprime=canonical_partition(pair.Pprime))
    pair.validate_for(A.d)
    P, Pp = pair.P, pair.Pprime
    if A.is_zero():
        return _zero_estimate(A, P)

    tag = "mixed:" + render_pair(pair)
    value_label = A.d
    sample_label = A.d + 1
    tensor_labels = list(range(A.d)) + [value_label]
    det_axes = [[c - 1 for c in b] for b in P]
    det_shapes = [(A.n,) * len(b) for b in P]
    dims = [A.n ** len(b) for b in P]

    if not Pp:
        def build(_restart):
            return _Objective(
                A.values, tensor_labels, det_axes, det_shapes, [], [value_label],
                _SpaceHead(A.space, mean=False),
            )

        results = _optimize(build, dims, cfg, tag)
        best_val, best_xs = max(results, key=lambda t: t[0])
        return NormEstimate(
            value=float(best_val), restarts_used=cfg.restarts, saa_samples=0,
            eval_samples=0, stderr=0.0,
            best_vectors={tuple(b): x for b, x in zip(P, best_xs)},
        )

    gauss_labels = [[sample_label] + [c - 1 for c in b] for b in Pp]

    def draws_for(purpose, restart, size):
        out = []
        for bi, b in enumerate(Pp):
            g = rng.stream(cfg.seed, tag, purpose, restart, bi)
            out.append(g.standard_normal((size,) + (A.n,) * len(b)))
        return out

    def eval_objective() -> _Objective:
        draws = draws_for("eval", 0, cfg.eval_samples)
        return _Objective(
            A.values, tensor_labels, det_axes, det_shapes,
            list(zip(draws, gauss_labels)), [sample_label, value_label],
            _SpaceHead(A.space, mean=True),
        )

    if not P:
        v = eval_objective().contract([])
        norms = norm_batch(A.space, v)
        with np.errstate(over="ignore"):
            value = float(np.mean(norms))
        if not np.isfinite(value):
            raise NumericError("optimization failure: non-finite objective")
        sem = float(np.std(norms, ddof=1) / np.sqrt(norms.size))
        return NormEstimate(
            value=value, restarts_used=0, saa_samples=0,
            eval_samples=cfg.eval_samples, stderr=sem, best_vectors={},
        )

    def build(restart: int) -> _Objective:
        draws = draws_for("saa", restart, cfg.saa_samples)
        return _Objective(
            A.values, tensor_labels, det_axes, det_shapes,
            list(zip(draws, gauss_labels)), [sample_label, value_label],
            _SpaceHead(A.space, mean=True),
        )

    results = _optimize(build, dims, cfg, tag)
    final = eval_objective()
    best = None
    for _saa_val, xs in results:
        norms = norm_batch(A.space, final.contract(xs))
        with np.errstate(over="ignore"):
            value = float(np.mean(norms))
        sem = float(np.std(norms, ddof=1) / np.sqrt(norms.size))
        if best is None or value > best[0]:
            best = (value, sem, xs)
    value, sem, xs = best
    if not np.isfinite(value):
        raise NumericError("optimization failure: non-finite objective")
    return NormEstimate(
        value=value, restarts_used=cfg.restarts, saa_samples=cfg.saa_samples,
        eval_samples=cfg.eval_samples, stderr=sem,
        best_vectors={tuple(b): x for b, x in zip(P, xs)},
    )


def triple_norm(A: CoeffTensor, J, P, cfg: OptimizerConfig | None = None) -> NormEstimate:
    """Mixed norm with single-coordinate gaussians outside ``J``.

    ``P`` partitions ``J``; the gaussian side is the singleton family on
    ``[d] \\ J``, so this is exactly ``mixed_norm`` with that pair.
    """
    J = tuple(sorted(J))
    P = canonical_partition(P)
    if covered(P) != frozenset(J):
        raise ValidationError("P must partition J")
    rest = [c for c in range(1, A.d + 1) if c not in J]
    return mixed_norm(A, PartitionPair(P=P, Pprime=singletons(rest)), cfg)


def lq_triple_norm(A: CoeffTensor, J, P, cfg: OptimizerConfig | None = None) -> float:
    """Deterministic L_q replacement of the triple norm.

    Contract the blocks of ``P`` (a partition of ``J``) against unit vectors,
    take the pointwise ell_2 over the remaining chaos coordinates for each
    value coordinate, then the weighted L_q norm.  No sampling is involved.
    """
    cfg = cfg or OptimizerConfig()
    if A.space.kind != "lq":
        raise UnsupportedSpaceError("lq_triple_norm needs an lq value space")
    J = tuple(sorted(J))
    if any(not 1 <= c <= A.d for c in J):
        raise ValidationError(f"J must be a subset of [{A.d}]")
    P = canonical_partition(P)
    if covered(P) != frozenset(J):
        raise ValidationError("P must partition J")
    if A.is_zero():
        return 0.0
    head = _LqL2Head(A.space.weights, A.space.q)
    if not P:
        return head.value(A.values)
    out_labels = [c - 1 for c in range(1, A.d + 1) if c not in J] + [A.d]
    tensor_labels = list(range(A.d)) + [A.d]
    det_axes = [[c - 1 for c in b] for b in P]
    det_shapes = [(A.n,) * len(b) for b in P]
    dims = [A.n ** len(b) for b in P]
    tag = "lqtr:" + render_pair(PartitionPair(P=P, Pprime=()))

    def build(_restart):
        return _Objective(A.values, tensor_labels, det_axes, det_shapes, [], out_labels, head)

    results = _optimize(build, dims, cfg, tag)
    return float(max(v for v, _ in results))


def lq_cover_norm(A: CoeffTensor, M: CoverSequence, q: float | None = None,
              cfg: OptimizerConfig | None = None) -> float:
    """Covering-sequence L_q norm: unit vectors on each ``I_r``, ell_2 over ``J``.

    Blocks of ``M`` may overlap (each coordinate lies in at most two of the
    sets); overlapping factors multiply pointwise in the contraction.
    """
    cfg = cfg or OptimizerConfig()
    if A.space.kind != "lq":
        raise UnsupportedSpaceError("lq_cover_norm needs an lq value space")
    M.validate_for(A.d)
    head = _LqL2Head(A.space.weights, A.space.q if q is None else float(q))
    if A.is_zero():
        return 0.0
    if not M.blocks:
        return head.value(A.values)
    out_labels = [c - 1 for c in M.J] + [A.d]
    tensor_labels = list(range(A.d)) + [A.d]
    axes = [[c - 1 for c in b] for b in M.blocks]
    shapes = [(A.n,) * len(b) for b in M.blocks]
    dims = [A.n ** len(b) for b in M.blocks]
    tag = "lqM:" + M.key()

    def build(_restart):
        return _Objective(A.values, tensor_labels, axes, shapes, [], out_labels, head)

    results = _optimize(build, dims, cfg, tag)
    return float(max(v for v, _ in results))


def real_chaos_sup(A: CoeffTensor, P, cfg: OptimizerConfig | None = None) -> float:
    """Supremum of the real multilinear form over products of unit balls.

    ``P`` must partition all of ``[d]`` and the tensor must be scalar-valued;
    this is the alternating (higher-order power method) estimate, best of
    ``cfg.restarts`` starts.
    """
    cfg = cfg or OptimizerConfig()
    if A.m != 1:
        raise ValidationError("real_chaos_sup needs m = 1")
    P = canonical_partition(P)
    if covered(P) != frozenset(range(1, A.d + 1)):
        raise ValidationError("P must partition [d]")
    if A.is_zero():
        return 0.0
    head = _LqL2Head(np.ones(1), 2.0)  # reduces to |v| on one value coordinate
    tensor_labels = list(range(A.d)) + [A.d]
    det_axes = [[c - 1 for c in b] for b in P]
    det_shapes = [(A.n,) * len(b) for b in P]
    dims = [A.n ** len(b) for b in P]
    tag = "real:" + render_pair(PartitionPair(P=P, Pprime=()))

    def build(_restart):
        return _Objective(A.values, tensor_labels, det_axes, det_shapes, [], [A.d], head)

    results = _optimize(build, dims, cfg, tag)
    return float(max(v for v, _ in results))

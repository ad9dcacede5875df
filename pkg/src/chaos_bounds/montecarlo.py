"""Sampling of chaoses and empirical L_p moment estimation.

Draws come from counter-based streams keyed by ``(seed, purpose, batch)``,
batches are processed independently (optionally across threads, capped by
the ``CHAOS_BOUNDS_THREADS`` environment variable) and reduced with a fixed
pairwise tree, so estimates are bit-identical regardless of worker count.

Moment accumulation is carried out on norms scaled by their running maximum,
which keeps ``|S|^p`` representable for any moment order; the estimate is a
single-pass formula applied to a regenerated stream (two passes over the same
keyed draws).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import bounds as _bounds
from . import rng
from ._parallel import pmap
from .errors import ValidationError
from .spaces import ValueSpace, norm_batch
from .tensor import CoeffTensor, mask_offdiagonal, symmetrize

__all__ = [
    "MCConfig",
    "MomentEstimate",
    "ChaosSampler",
    "decoupled_sampler",
    "undecoupled_sampler",
    "exponential_sampler",
    "block_gaussian_sampler",
    "sample_decoupled",
    "sample_undecoupled",
    "sample_exponential",
    "empirical_moment",
    "decoupling_ratio",
    "hypercontractivity_ratio",
    "alpha_plus_ratio",
    "sandwich_check",
    "SandwichResult",
]


@dataclass(frozen=True)
class MCConfig:
    samples: int = 100_000
    p_values: tuple = (2.0,)
    seed: int = 0
    batch: int = 65_536
    bootstrap: bool = False  # heavy-tail alternative to the CLT interval
    bootstrap_replicates: int = 200

    def __post_init__(self):
        if self.samples < 2:
            raise ValidationError("at least 2 samples required")
        if any(p < 1 for p in self.p_values):
            raise ValidationError("every moment order must be >= 1")
        if self.batch < 1:
            raise ValidationError("batch must be >= 1")
        if self.bootstrap and self.bootstrap_replicates < 2:
            raise ValidationError("at least 2 bootstrap replicates required")
        object.__setattr__(self, "p_values", tuple(float(p) for p in self.p_values))


@dataclass(frozen=True)
class MomentEstimate:
    """(E|S|^p)^(1/p) with a delta-method CLT interval on the p-power mean."""

    p: float
    value: float
    ci_low: float
    ci_high: float
    samples: int
    scale: float
    scaled_mean: float
    scaled_sem: float

    def interval(self, z: float) -> tuple:
        if self.scale == 0.0:
            return (0.0, 0.0)
        lo = max(self.scaled_mean - z * self.scaled_sem, 0.0)
        hi = self.scaled_mean + z * self.scaled_sem
        return (self.scale * lo ** (1.0 / self.p), self.scale * hi ** (1.0 / self.p))

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "value": self.value,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "samples": self.samples,
        }


@dataclass(frozen=True)
class ChaosSampler:
    """A batched sampler of one chaos variable: draw(generator, size) -> (size, m)."""

    tag: str
    space: ValueSpace
    m: int
    draw: object  # callable (np.random.Generator, int) -> np.ndarray


def _product_labels(d: int):
    sample, value = d + 1, d
    tensor_labels = list(range(d)) + [value]
    return tensor_labels, sample, value


def decoupled_sampler(A: CoeffTensor) -> ChaosSampler:
    """One independent gaussian vector per coordinate slot."""
    tensor_labels, s_lab, v_lab = _product_labels(A.d)

    def draw(gen, size):
        ops = [A.values, tensor_labels]
        for k in range(A.d):
            ops.extend([gen.standard_normal((size, A.n)), [s_lab, k]])
        return np.einsum(*ops, [s_lab, v_lab], optimize=True)

    return ChaosSampler(tag="decoupled", space=A.space, m=A.m, draw=draw)


def undecoupled_sampler(A: CoeffTensor) -> ChaosSampler:
    """A single gaussian vector in every slot, repeated indices dropped.

    Entries whose multi-index repeats a coordinate are ignored, and the sum
    runs over all orderings, so off-diagonal entries of a symmetric tensor
    accumulate (a symmetric 2-tensor with a_12 = a_21 = 1 yields 2 g_1 g_2).
    """
    masked = mask_offdiagonal(A).values
    tensor_labels, s_lab, v_lab = _product_labels(A.d)

    def draw(gen, size):
        g = gen.standard_normal((size, A.n))
        ops = [masked, tensor_labels]
        for k in range(A.d):
            ops.extend([g, [s_lab, k]])
        return np.einsum(*ops, [s_lab, v_lab], optimize=True)

    return ChaosSampler(tag="undecoupled", space=A.space, m=A.m, draw=draw)


def exponential_sampler(A: CoeffTensor, mode: str = "direct") -> ChaosSampler:
    """Decoupled chaos in symmetric exponential variables.

    ``direct`` draws by inverse CDF with a random sign; ``gg`` substitutes
    eps * g * g' per coordinate, a comparable family for the same chaos.
    """
    if mode not in ("direct", "gg"):
        raise ValidationError(f"unknown exponential mode {mode!r}")
    tensor_labels, s_lab, v_lab = _product_labels(A.d)

    def draw_axis(gen, size):
        if mode == "direct":
            u = gen.random((size, A.n))
            signs = gen.integers(0, 2, size=(size, A.n)) * 2 - 1
            return signs * -np.log1p(-u)
        signs = gen.integers(0, 2, size=(size, A.n)) * 2 - 1
        return signs * gen.standard_normal((size, A.n)) * gen.standard_normal((size, A.n))

    def draw(gen, size):
        ops = [A.values, tensor_labels]
        for k in range(A.d):
            ops.extend([draw_axis(gen, size), [s_lab, k]])
        return np.einsum(*ops, [s_lab, v_lab], optimize=True)

    return ChaosSampler(tag=f"exponential-{mode}", space=A.space, m=A.m, draw=draw)


def block_gaussian_sampler(A: CoeffTensor, blocks) -> ChaosSampler:
    """Jointly-indexed gaussian weights, one i.i.d. array per block of ``blocks``."""
    cover = sorted(c for b in blocks for c in b)
    if cover != list(range(1, A.d + 1)):
        raise ValidationError("blocks must partition [d]")
    tensor_labels, s_lab, v_lab = _product_labels(A.d)
    tag = "blocks:" + ";".join(",".join(str(c) for c in b) for b in blocks)

    def draw(gen, size):
        ops = [A.values, tensor_labels]
        for b in blocks:
            ops.extend([gen.standard_normal((size,) + (A.n,) * len(b)),
                        [s_lab] + [c - 1 for c in b]])
        return np.einsum(*ops, [s_lab, v_lab], optimize=True)

    return ChaosSampler(tag=tag, space=A.space, m=A.m, draw=draw)


def sample_decoupled(A: CoeffTensor, gen: np.random.Generator) -> np.ndarray:
    return decoupled_sampler(A).draw(gen, 1)[0]


def sample_undecoupled(A: CoeffTensor, gen: np.random.Generator) -> np.ndarray:
    return undecoupled_sampler(A).draw(gen, 1)[0]


def sample_exponential(A: CoeffTensor, gen: np.random.Generator, mode: str = "direct") -> np.ndarray:
    return exponential_sampler(A, mode).draw(gen, 1)[0]


def _tree_sum(parts: list):
    while len(parts) > 1:
        nxt = []
        for i in range(0, len(parts) - 1, 2):
            nxt.append(parts[i] + parts[i + 1])
        if len(parts) % 2:
            nxt.append(parts[-1])
        parts = nxt
    return parts[0]


def _batches(total: int, batch: int):
    out = []
    start = 0
    b = 0
    while start < total:
        out.append((b, min(batch, total - start)))
        start += batch
        b += 1
    return out


def empirical_moment(sampler: ChaosSampler, cfg: MCConfig) -> list:
    """Estimates of (E|S|^p)^(1/p) for every p in ``cfg.p_values``.

    The error on the p-power mean is a CLT standard error by default, or a
    Poisson-bootstrap one when ``cfg.bootstrap`` is set (heavy tails: d >= 3
    or large p).  Either way the interval is transformed through the 1/p
    power (delta method, monotone map).
    """
    batches = _batches(cfg.samples, cfg.batch)

    def batch_norms(job):
        b, size = job
        gen = rng.stream(cfg.seed, "mc", sampler.tag, b)
        return norm_batch(sampler.space, sampler.draw(gen, size))

    maxima = pmap(lambda job: float(np.max(batch_norms(job))), batches)
    scale = max(maxima)
    if scale == 0.0:
        return [
            MomentEstimate(p=p, value=0.0, ci_low=0.0, ci_high=0.0,
                           samples=cfg.samples, scale=0.0, scaled_mean=0.0, scaled_sem=0.0)
            for p in cfg.p_values
        ]

    def batch_sums(job):
        norms = batch_norms(job) / scale
        out = []
        for p in cfg.p_values:
            y = norms**p
            out.append(np.array([np.sum(y), np.sum(y * y)]))
        return np.stack(out)

    partials = pmap(batch_sums, batches)
    sums = _tree_sum(partials)

    boot_sems = None
    if cfg.bootstrap:
        reps = cfg.bootstrap_replicates

        def batch_boot(job):
            b, size = job
            norms = batch_norms(job) / scale
            weights = rng.stream(cfg.seed, "boot", sampler.tag, b).poisson(
                1.0, size=(reps, size))
            return np.stack([weights @ norms**p for p in cfg.p_values])

        rep_sums = _tree_sum(pmap(batch_boot, batches))  # (n_p, reps)
        boot_sems = np.std(rep_sums / cfg.samples, axis=1, ddof=1)

    out = []
    n = cfg.samples
    for i, (p, (s1, s2)) in enumerate(zip(cfg.p_values, sums)):
        mean = s1 / n
        var = max(s2 / n - mean**2, 0.0) * n / (n - 1)
        sem = float(boot_sems[i]) if boot_sems is not None else float(np.sqrt(var / n))
        est = MomentEstimate(
            p=p, value=float(scale * mean ** (1.0 / p)),
            ci_low=0.0, ci_high=0.0, samples=n,
            scale=float(scale), scaled_mean=float(mean), scaled_sem=sem,
        )
        lo, hi = est.interval(1.0)
        out.append(MomentEstimate(**{**est.__dict__, "ci_low": lo, "ci_high": hi}))
    return out


def _single_moment(sampler: ChaosSampler, p: float, cfg: MCConfig) -> MomentEstimate:
    return empirical_moment(sampler, MCConfig(
        samples=cfg.samples, p_values=(p,), seed=cfg.seed, batch=cfg.batch))[0]


def decoupling_ratio(A: CoeffTensor, p: float, cfg: MCConfig) -> float:
    """Empirical |S|_p / |S'|_p for a symmetric tensor with zero diagonal."""
    if not np.allclose(A.values, symmetrize(A).values):
        raise ValidationError("decoupling_ratio needs a symmetric tensor")
    if not np.array_equal(A.values, mask_offdiagonal(A).values):
        raise ValidationError("decoupling_ratio needs a zero generalized diagonal")
    num = _single_moment(undecoupled_sampler(A), p, cfg)
    den = _single_moment(decoupled_sampler(A), p, cfg)
    return num.value / den.value


def hypercontractivity_ratio(A: CoeffTensor, p: float, q: float, cfg: MCConfig) -> float:
    """|S|_q / ((q/p)^(d/2) |S|_p), both moments on the same draws."""
    if not p < q:
        raise ValidationError("need p < q")
    est = empirical_moment(decoupled_sampler(A), MCConfig(
        samples=cfg.samples, p_values=(p, q), seed=cfg.seed, batch=cfg.batch))
    return est[1].value / ((q / p) ** (A.d / 2.0) * est[0].value)


def alpha_plus_ratio(B: CoeffTensor, cfg: MCConfig) -> float:
    """E|sum b_ij g_ij| / E|sum b_ij g_i g'_j| for an order-2 tensor."""
    if B.d != 2:
        raise ValidationError("alpha_plus_ratio needs an order-2 tensor")
    num = _single_moment(block_gaussian_sampler(B, ((1, 2),)), 1.0, cfg)
    den = _single_moment(decoupled_sampler(B), 1.0, cfg)
    return num.value / den.value


@dataclass(frozen=True)
class SandwichResult:
    ratio_lower: float
    ratio_upper: float
    empirical: float
    lower_sum: float
    upper_sum: float

    def to_dict(self) -> dict:
        return {
            "ratio_lower": self.ratio_lower,
            "ratio_upper": self.ratio_upper,
            "empirical": self.empirical,
            "lower_sum": self.lower_sum,
            "upper_sum": self.upper_sum,
        }


def sandwich_check(A: CoeffTensor, p: float, cfg: MCConfig, norm_cfg=None) -> SandwichResult:
    """Structural lower/upper sums against the empirical decoupled moment."""
    if A.is_zero():
        return SandwichResult(1.0, 1.0, 0.0, 0.0, 0.0)
    lower = _bounds.lower_sum(A, p, norm_cfg)
    upper = _bounds.upper_sum(A, p, norm_cfg)
    emp = _single_moment(decoupled_sampler(A), p, cfg)
    return SandwichResult(
        ratio_lower=lower.structural_sum / emp.value,
        ratio_upper=emp.value / upper.structural_sum,
        empirical=emp.value,
        lower_sum=lower.structural_sum,
        upper_sum=upper.structural_sum,
    )

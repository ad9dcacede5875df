"""Structural moment sums, tail exponents and their specializations.

Every bound is assembled as a table of (partition descriptor, p-power, norm
value) terms; the structural sum is ``prefactor * sum p^power * value`` with
all unpinned universal constants kept out of the sum and recorded in an
explicit ``constant_policy`` (default 1).  Term estimates draw from streams
keyed by the canonical partition string, so identical norms appearing in
different sums agree exactly for a fixed master seed.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

import numpy as np

from . import rng
from ._parallel import pmap
from .errors import ValidationError
from .hermite import PolynomialSpec, expected_gradient_tensor
from .norms import (
    OptimizerConfig,
    lq_cover_norm,
    lq_triple_norm,
    mixed_norm,
    real_chaos_sup,
    triple_norm,
)
from .partitions import (
    CoverSequence,
    PartitionPair,
    canonical_partition,
    enumerate_cover_sequences,
    enumerate_partition_pairs,
    enumerate_partitions,
    enumerate_subset_partitions,
    render_pair,
    render_partition,
    singletons,
)
from .spaces import type2_K
from .tensor import CoeffTensor, slice_fix

__all__ = [
    "BoundTerm",
    "BoundReport",
    "TailReport",
    "upper_sum",
    "lower_sum",
    "tail_exponent_upper",
    "tail_exponent_lower",
    "special_space_upper",
    "comparison_ratio",
    "lq_bound",
    "exp_chaos_bound",
    "real_moment_twosided",
    "conjecture_gap",
    "general_poly_bounds",
    "GeneralPolyReport",
]

LOWER_TAIL_CAVEAT = (
    "the lower tail bound applies to deviations t above a 1/C(d) fraction of "
    "the mean; with C(d) unpinned only the exponent is reported"
)


@dataclass(frozen=True)
class BoundTerm:
    label: str
    power: float
    value: float
    stderr: float = 0.0

    def to_dict(self) -> dict:
        return {"label": self.label, "power": self.power,
                "value": self.value, "stderr": self.stderr}


@dataclass(frozen=True)
class BoundReport:
    p: float
    side: str  # upper | lower | sum
    terms: tuple
    constant_policy: dict = field(default_factory=dict)
    prefactor: float = 1.0

    @property
    def structural_sum(self) -> float:
        return self.prefactor * sum(self.p**t.power * t.value for t in self.terms)

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "side": self.side,
            "prefactor": self.prefactor,
            "constant_policy": dict(self.constant_policy),
            "terms": [t.to_dict() for t in self.terms],
            "structural_sum": self.structural_sum,
        }


@dataclass(frozen=True)
class TailReport:
    side: str
    t: float
    exponent: float
    threshold: float | None
    terms: tuple
    caveat: str | None = None

    def to_dict(self) -> dict:
        out = {
            "side": self.side,
            "t": self.t,
            "exponent": self.exponent,
            "threshold": self.threshold,
            "probability_template": "2*exp(-exponent/C(d))"
            if self.side == "upper" else "exp(-C(d)*exponent)/C(d)",
            "terms": [t.to_dict() for t in self.terms],
        }
        if self.caveat:
            out["caveat"] = self.caveat
        return out


def _term_cfg(cfg: OptimizerConfig, label: str) -> OptimizerConfig:
    return replace(cfg, seed=rng.derive_seed(cfg.seed, "term", label))


def _pair_terms(A: CoeffTensor, cfg: OptimizerConfig):
    """Mixed-norm estimates for every pair (P, P').

    Terms are independent; each draws from a stream keyed by its canonical
    label, so the table is the same whether terms run serially or in a pool.
    """

    def one(pair):
        label = render_pair(pair)
        return (pair, label, mixed_norm(A, pair, _term_cfg(cfg, label)))

    return pmap(one, enumerate_partition_pairs(A.d))


def _subset_terms(A: CoeffTensor, cfg: OptimizerConfig):
    """Triple-norm estimates for every (J, P), using the singleton-pair label."""

    def one(item):
        J, P = item
        rest = [c for c in range(1, A.d + 1) if c not in J]
        pair = PartitionPair(P=P, Pprime=singletons(rest))
        label = render_pair(pair)
        return ((J, P), label, mixed_norm(A, pair, _term_cfg(cfg, label)))

    return pmap(one, enumerate_subset_partitions(A.d))


def upper_sum(A: CoeffTensor, p: float, cfg: OptimizerConfig | None = None) -> BoundReport:
    """Sum over all pairs (P, P') of p^(|P|/2) times the mixed norm."""
    if p < 1:
        raise ValidationError("p >= 1 required")
    cfg = cfg or OptimizerConfig()
    terms = tuple(
        BoundTerm(label=label, power=len(pair.P) / 2.0, value=est.value, stderr=est.stderr)
        for pair, label, est in _pair_terms(A, cfg)
    )
    return BoundReport(p=float(p), side="upper", terms=terms,
                       constant_policy={"C_d": 1.0})


def lower_sum(A: CoeffTensor, p: float, cfg: OptimizerConfig | None = None) -> BoundReport:
    """Sum over subsets J and partitions P of J of p^(|P|/2) triple norms."""
    if p < 1:
        raise ValidationError("p >= 1 required")
    cfg = cfg or OptimizerConfig()
    terms = tuple(
        BoundTerm(label=label, power=len(P) / 2.0, value=est.value, stderr=est.stderr)
        for (J, P), label, est in _subset_terms(A, cfg)
    )
    return BoundReport(p=float(p), side="lower", terms=terms,
                       constant_policy={"C_d": 1.0})


def tail_exponent_upper(A: CoeffTensor, t: float, cfg: OptimizerConfig | None = None) -> TailReport:
    """min over pairs with at least one deterministic block of (t/norm)^(2/|P|).

    Also reports the threshold (the sum of the pure-expectation norms) below
    which the exponent is not asserted.
    """
    if not t > 0:
        raise ValidationError("t > 0 required")
    cfg = cfg or OptimizerConfig()
    exponent = float("inf")
    threshold = 0.0
    terms = []
    for pair, label, est in _pair_terms(A, cfg):
        k = len(pair.P)
        if k == 0:
            threshold += est.value
            continue
        e = (t / est.value) ** (2.0 / k) if est.value > 0 else float("inf")
        terms.append(BoundTerm(label=label, power=2.0 / k, value=e, stderr=0.0))
        exponent = min(exponent, e)
    return TailReport(side="upper", t=float(t), exponent=exponent,
                      threshold=threshold, terms=tuple(terms))


def tail_exponent_lower(A: CoeffTensor, t: float, cfg: OptimizerConfig | None = None) -> TailReport:
    """min over nonempty J and P in P(J) of (t/|||A|||_P)^(2/|P|)."""
    if t < 0:
        raise ValidationError("t >= 0 required")
    cfg = cfg or OptimizerConfig()
    if t == 0:
        return TailReport(side="lower", t=0.0, exponent=0.0, threshold=None,
                          terms=(), caveat=LOWER_TAIL_CAVEAT)
    exponent = float("inf")
    terms = []
    for (J, P), label, est in _subset_terms(A, cfg):
        if not J:
            continue
        k = len(P)
        e = (t / est.value) ** (2.0 / k) if est.value > 0 else float("inf")
        terms.append(BoundTerm(label=label, power=2.0 / k, value=e, stderr=0.0))
        exponent = min(exponent, e)
    return TailReport(side="lower", t=float(t), exponent=exponent, threshold=None,
                      terms=tuple(terms), caveat=LOWER_TAIL_CAVEAT)


def special_space_upper(A: CoeffTensor, p: float, K: float,
                        cfg: OptimizerConfig | None = None) -> BoundReport:
    """K^(d-1) times the lower structural sum, for spaces with comparison constant K."""
    if K < 1:
        raise ValidationError("K >= 1 required")
    base = lower_sum(A, p, cfg)
    return BoundReport(
        p=base.p, side="upper", terms=base.terms,
        constant_policy={"C_d": 1.0, "K": float(K), "K_power": A.d - 1},
        prefactor=float(K) ** (A.d - 1),
    )


def comparison_ratio(A: CoeffTensor, pair: PartitionPair, cfg: OptimizerConfig | None = None,
                calibration: float = 1.0) -> float:
    """Diagnostic ratio of a mixed norm to its triple-norm comparison bound.

    The denominator is K^(|union P'| - |P'|) times the triple norm with the
    same deterministic blocks (gaussians reduced to single coordinates);
    expected <= 1 up to Monte-Carlo noise and the calibration of K.
    """
    cfg = cfg or OptimizerConfig()
    pair = PartitionPair(P=canonical_partition(pair.P), Pprime=canonical_partition(pair.Pprime))
    pair.validate_for(A.d)
    if A.is_zero():
        return 0.0
    K = type2_K(A.space, calibration)
    union_pp = sorted(c for b in pair.Pprime for c in b)
    power = len(union_pp) - len(pair.Pprime)
    label = render_pair(pair)
    num = mixed_norm(A, pair, _term_cfg(cfg, label))
    den_pair = PartitionPair(P=pair.P, Pprime=singletons(union_pp))
    den_label = render_pair(den_pair)
    den = mixed_norm(A, den_pair, _term_cfg(cfg, den_label))
    if den.value == 0.0:
        return 0.0
    return num.value / (K**power * den.value)


def lq_bound(A: CoeffTensor, p: float, q: float | None = None,
             cfg: OptimizerConfig | None = None):
    """Two-sided deterministic bounds for lq-valued tensors.

    One shared table of deterministic L_q triple norms; lower prefactor
    q^((1-d)/2), upper prefactor q^(d-1/2).
    """
    if p < 1:
        raise ValidationError("p >= 1 required")
    if A.space.kind != "lq":
        raise ValidationError("lq_bound needs an lq value space")
    if q is not None and float(q) != A.space.q:
        raise ValidationError("q must match the tensor's value-space q")
    q = A.space.q
    cfg = cfg or OptimizerConfig()
    terms = []
    for J, P in enumerate_subset_partitions(A.d):
        rest = [c for c in range(1, A.d + 1) if c not in J]
        label = render_pair(PartitionPair(P=P, Pprime=singletons(rest)))
        val = lq_triple_norm(A, J, P, _term_cfg(cfg, label))
        terms.append(BoundTerm(label=label, power=len(P) / 2.0, value=val, stderr=0.0))
    terms = tuple(terms)
    d = A.d
    lower = BoundReport(p=float(p), side="lower", terms=terms,
                        constant_policy={"C_d": 1.0, "q": q},
                        prefactor=q ** ((1.0 - d) / 2.0))
    upper = BoundReport(p=float(p), side="upper", terms=terms,
                        constant_policy={"C_d": 1.0, "q": q},
                        prefactor=q ** (d - 0.5))
    return lower, upper


def _render_ijp(I, J, P) -> str:
    bi = "{" + ",".join(str(c) for c in I) + "}"
    bj = "{" + ",".join(str(c) for c in J) + "}"
    return f"I={bi};J={bj};P={render_partition(P)}"


def _relabel(blocks, kept) -> list:
    pos = {c: i + 1 for i, c in enumerate(sorted(kept))}
    return [tuple(pos[c] for c in b) for b in blocks]


def exp_chaos_bound(A: CoeffTensor, p: float, q: float | None = None,
                    cfg: OptimizerConfig | None = None, full_m: bool = False) -> BoundReport:
    """Structural sum for chaoses in symmetric exponential variables.

    Enumerates disjoint I, J inside [d] with P partitioning the rest; each
    term is p^(|I|+|P|/2) times the max over fixed I-indices of the slice's
    deterministic L_q norm (unit vectors on the P blocks, ell_2 over J).
    ``full_m=True`` instead sums over every covering sequence, the redundant
    family the reduced enumeration is equivalent to.
    """
    if p < 1:
        raise ValidationError("p >= 1 required")
    if A.space.kind != "lq":
        raise ValidationError("exp_chaos_bound needs an lq value space")
    if q is not None and float(q) != A.space.q:
        raise ValidationError("q must match the tensor's value-space q")
    q = A.space.q
    if q < 2:
        raise ValidationError("q >= 2 required")
    cfg = cfg or OptimizerConfig()
    d = A.d
    policy = {
        "C_d": 1.0,
        "q": q,
        "q_lower_factor": q ** (0.5 - d),
        "q_upper_factor": q ** (2.0 * d - 0.5),
    }
    terms = []
    if full_m:
        for M in enumerate_cover_sequences(d):
            label = M.key()
            val = lq_cover_norm(A, M, cfg=_term_cfg(cfg, label))
            terms.append(BoundTerm(label=label, power=(M.size - 1) / 2.0, value=val))
        return BoundReport(p=float(p), side="sum", terms=tuple(terms),
                           constant_policy=policy)
    ground = list(range(1, d + 1))
    for ri in range(d + 1):
        for I in itertools.combinations(ground, ri):
            rest_i = [c for c in ground if c not in I]
            for rj in range(len(rest_i) + 1):
                for J in itertools.combinations(rest_i, rj):
                    pset = [c for c in rest_i if c not in J]
                    for P in enumerate_partitions(pset):
                        label = _render_ijp(I, J, P)
                        term_cfg = _term_cfg(cfg, label)
                        kept = rest_i
                        P_rel = canonical_partition(_relabel(P, kept))
                        J_rel = tuple(sorted(c for b in P_rel for c in b))
                        best = 0.0
                        for idx in itertools.product(range(1, A.n + 1), repeat=len(I)):
                            sl = slice_fix(A, I, idx)
                            val = (lq_triple_norm(sl, J_rel, P_rel, term_cfg)
                                   if sl.d > 0 else float(
                                       _lq_value_norm(sl)))
                            best = max(best, val)
                        terms.append(BoundTerm(label=label,
                                               power=len(I) + len(P) / 2.0, value=best))
    return BoundReport(p=float(p), side="sum", terms=tuple(terms), constant_policy=policy)


def _lq_value_norm(t0: CoeffTensor) -> float:
    # order-0 slice: plain weighted L_q norm of the single value vector
    from .spaces import norm_value

    return norm_value(t0.space, t0.values.reshape(t0.m))


def real_moment_twosided(A: CoeffTensor, p: float, cfg: OptimizerConfig | None = None):
    """Two-sided structural sum for scalar-valued chaoses.

    Sum over full partitions P of [d] of p^(|P|/2) times the multilinear-form
    supremum; both sides of the equivalence share the table, constants kept
    in the policy.
    """
    if A.m != 1:
        raise ValidationError("real_moment_twosided needs m = 1")
    if p < 2:
        raise ValidationError("p >= 2 required")
    cfg = cfg or OptimizerConfig()
    terms = []
    for P in enumerate_partitions(range(1, A.d + 1)):
        label = render_pair(PartitionPair(P=P, Pprime=()))
        val = real_chaos_sup(A, P, _term_cfg(cfg, label))
        terms.append(BoundTerm(label=label, power=len(P) / 2.0, value=val))
    terms = tuple(terms)
    policy = {"C_d": 1.0}
    return (
        BoundReport(p=float(p), side="lower", terms=terms, constant_policy=policy),
        BoundReport(p=float(p), side="upper", terms=terms, constant_policy=policy),
    )


def conjecture_gap(A: CoeffTensor, p: float, mc_cfg=None, cfg: OptimizerConfig | None = None) -> float:
    """Empirical decoupled moment divided by the lower structural sum.

    Diagnoses the conjectured reversal of the lower bound; scale-invariant
    for a fixed seed.  Defined as 1 for the zero tensor.
    """
    from . import montecarlo

    if A.is_zero():
        return 1.0
    mc_cfg = mc_cfg or montecarlo.MCConfig()
    est = montecarlo.empirical_moment(
        montecarlo.decoupled_sampler(A),
        montecarlo.MCConfig(samples=mc_cfg.samples, p_values=(float(p),),
                            seed=mc_cfg.seed, batch=mc_cfg.batch),
    )[0]
    low = lower_sum(A, p, cfg)
    return est.value / low.structural_sum


@dataclass(frozen=True)
class GeneralPolyReport:
    D: int
    flavor: str  # "lq" | "banach"
    degrees: tuple  # tuple of (d, lower BoundReport, upper BoundReport)
    constant_policy: dict

    @property
    def lower_total(self) -> float:
        return sum(rep.structural_sum for _, rep, _ in self.degrees)

    @property
    def upper_total(self) -> float:
        return sum(rep.structural_sum for _, _, rep in self.degrees)

    def eta(self, t: float) -> float:
        """Tail exponent min over degrees and nonempty partitions of (t/norm)^(2/|P|)."""
        if t < 0:
            raise ValidationError("t >= 0 required")
        if t == 0:
            return 0.0
        out = float("inf")
        for _, rep, _ in self.degrees:
            for term in rep.terms:
                if term.power == 0:
                    continue
                e = (t / term.value) ** (1.0 / term.power) if term.value > 0 else float("inf")
                out = min(out, e)
        return out

    def to_dict(self) -> dict:
        return {
            "D": self.D,
            "flavor": self.flavor,
            "constant_policy": dict(self.constant_policy),
            "lower_total": self.lower_total,
            "upper_total": self.upper_total,
            "degrees": [
                {"d": d, "lower": lo.to_dict(), "upper": up.to_dict()}
                for d, lo, up in self.degrees
            ],
        }


def general_poly_bounds(f: PolynomialSpec, p: float, q: float | None = None,
                        K: float | None = None,
                        cfg: OptimizerConfig | None = None) -> GeneralPolyReport:
    """Bounds for a centered polynomial in a standard gaussian vector.

    The polynomial is split into expected derivative tensors A_d, one sum per
    degree.  With ``q`` set (lq flavor) the per-degree sums use deterministic
    L_q norms with factors q^((1-d)/2) and q^(d-1/2); otherwise the triple
    norms are estimated directly and the upper side carries K^(D-1), with K
    supplied or derived from the value space.
    """
    if p < 1:
        raise ValidationError("p >= 1 required")
    cfg = cfg or OptimizerConfig()
    if q is not None:
        flavor = "lq"
        if f.space.kind != "lq":
            raise ValidationError("lq flavor needs an lq value space")
        if float(q) != f.space.q:
            raise ValidationError("q must match the polynomial's value-space q")
        policy = {"C_D": 1.0, "q": f.space.q}
    else:
        flavor = "banach"
        if K is None:
            K = type2_K(f.space)
        if K < 1:
            raise ValidationError("K >= 1 required")
        policy = {"C_D": 1.0, "K": float(K), "K_power": max(f.D - 1, 0)}
    degrees = []
    for d in range(1, f.D + 1):
        A_d = expected_gradient_tensor(f, d)
        dcfg = replace(cfg, seed=rng.derive_seed(cfg.seed, "poly-degree", d))
        if flavor == "lq":
            lo, up = lq_bound(A_d, p, cfg=dcfg)
        else:
            lo = lower_sum(A_d, p, dcfg)
            up = BoundReport(p=lo.p, side="upper", terms=lo.terms,
                             constant_policy=policy, prefactor=float(K) ** (f.D - 1))
        degrees.append((d, lo, up))
    return GeneralPolyReport(D=f.D, flavor=flavor, degrees=tuple(degrees),
                             constant_policy=policy)

"""Set-partition combinatorics indexing the bounds.

Blocks are sorted tuples of 1-based coordinates and partitions are sorted
tuples of blocks, giving canonical forms for deduplication and a stable
iteration order (hence deterministic bound assembly).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb

from .errors import ValidationError

__all__ = [
    "Partition",
    "PartitionPair",
    "CoverSequence",
    "bell_number",
    "enumerate_partitions",
    "enumerate_partition_pairs",
    "enumerate_subset_partitions",
    "enumerate_cover_sequences",
    "filter_reduced_class",
    "canonical_partition",
    "singletons",
    "render_partition",
    "render_pair",
    "parse_pair",
]

Block = tuple
Partition = tuple  # tuple of Blocks, canonically sorted


def canonical_partition(blocks) -> Partition:
    out = tuple(sorted(tuple(sorted(b)) for b in blocks))
    seen: set[int] = set()
    for b in out:
        if not b:
            raise ValidationError("empty block")
        if seen & set(b):
            raise ValidationError("blocks must be pairwise disjoint")
        seen.update(b)
    return out


def singletons(elements) -> Partition:
    return tuple((e,) for e in sorted(elements))


def covered(partition: Partition) -> frozenset:
    return frozenset(e for b in partition for e in b)


@dataclass(frozen=True)
class PartitionPair:
    """A deterministic fragment ``P`` and a gaussian fragment ``Pprime``.

    Together the blocks of ``P`` and ``Pprime`` must partition ``[d]``; the
    mixed norm of a tensor takes unit-vector suprema over ``P`` blocks and
    jointly-indexed gaussian weights over ``Pprime`` blocks.
    """

    P: Partition
    Pprime: Partition

    def __post_init__(self):
        canonical_partition(self.P + self.Pprime)  # disjointness across both sides

    def validate_for(self, d: int) -> None:
        cov = covered(canonical_partition(self.P + self.Pprime))
        if cov != frozenset(range(1, d + 1)):
            raise ValidationError(f"pair does not partition [{d}]")

    def key(self) -> str:
        return render_pair(self)


@dataclass(frozen=True)
class CoverSequence:
    """A covering sequence ``(J, I_1..I_k)`` for exponential-chaos norms.

    The union of ``J`` and the blocks is ``[d]``, every element lies in at
    most two of the sets, and the blocks are kept in canonical sorted order.
    """

    J: Block
    blocks: tuple  # tuple of Blocks, sorted, duplicates allowed

    @property
    def size(self) -> int:
        return len(self.blocks) + 1

    def validate_for(self, d: int) -> None:
        ground = set(range(1, d + 1))
        cover = set(self.J) | {e for b in self.blocks for e in b}
        if cover != ground:
            raise ValidationError("J and the blocks must cover [d]")
        for e in ground:
            hits = (e in self.J) + sum(e in b for b in self.blocks)
            if hits > 2:
                raise ValidationError(f"element {e} covered {hits} > 2 times")
        if any(len(b) == 0 for b in self.blocks):
            raise ValidationError("empty block")

    def key(self) -> str:
        j = "{" + ",".join(str(e) for e in self.J) + "}"
        blocks = ",".join("{" + ",".join(str(e) for e in b) + "}" for b in self.blocks)
        return f"J={j};I={blocks}"


def bell_number(k: int) -> int:
    # B_{n+1} = sum_j C(n, j) B_j
    bells = [1]
    for nn in range(k):
        bells.append(sum(comb(nn, j) * bells[j] for j in range(nn + 1)))
    return bells[k]


def enumerate_partitions(J) -> list:
    """All partitions of the finite set ``J``, each exactly once.

    The empty set has exactly one partition, the empty one.
    """
    elements = sorted(set(J))
    parts: list[Partition] = []

    def rec(i: int, blocks: list):
        if i == len(elements):
            parts.append(canonical_partition(blocks))
            return
        e = elements[i]
        for b in blocks:
            b.append(e)
            rec(i + 1, blocks)
            b.pop()
        blocks.append([e])
        rec(i + 1, blocks)
        blocks.pop()

    rec(0, [])
    return sorted(set(parts))


def enumerate_partition_pairs(d: int) -> list:
    """All pairs (P, P') of disjoint block families with P u P' in P([d])."""
    if d < 1:
        raise ValidationError("d >= 1 required")
    pairs: list[PartitionPair] = []
    for pi in enumerate_partitions(range(1, d + 1)):
        k = len(pi)
        for mask in range(2**k):
            P = canonical_partition(pi[j] for j in range(k) if mask >> j & 1)
            Pp = canonical_partition(pi[j] for j in range(k) if not mask >> j & 1)
            pairs.append(PartitionPair(P=P, Pprime=Pp))
    return sorted(pairs, key=lambda pr: pr.key())


def enumerate_subset_partitions(d: int) -> list:
    """All pairs (J, P) with J a subset of [d] and P a partition of J."""
    if d < 1:
        raise ValidationError("d >= 1 required")
    out = []
    ground = list(range(1, d + 1))
    for r in range(d + 1):
        for J in itertools.combinations(ground, r):
            for P in enumerate_partitions(J):
                out.append((J, P))
    return out


def enumerate_cover_sequences(d: int) -> list:
    """All covering sequences (J, I_1..I_k) of [d], blocks canonically sorted.

    Every element must be hit at least once and at most twice across J and
    the blocks; block multisets are enumerated without duplicates.
    """
    if d < 1:
        raise ValidationError("d >= 1 required")
    ground = list(range(1, d + 1))
    subsets = []
    for r in range(1, d + 1):
        subsets.extend(itertools.combinations(ground, r))
    subsets.sort()
    out: list[CoverSequence] = []

    def rec(start: int, blocks: list, cover: dict):
        # elements hit twice by blocks cannot also sit in J
        required = tuple(e for e in ground if cover[e] == 0)
        optional = [e for e in ground if cover[e] == 1]
        for r in range(len(optional) + 1):
            for extra in itertools.combinations(optional, r):
                J = tuple(sorted(required + extra))
                out.append(CoverSequence(J=J, blocks=tuple(blocks)))
        for j in range(start, len(subsets)):
            b = subsets[j]
            if any(cover[e] >= 2 for e in b):
                continue
            for e in b:
                cover[e] += 1
            blocks.append(b)
            rec(j, blocks, cover)
            blocks.pop()
            for e in b:
                cover[e] -= 1

    rec(0, [], {e: 0 for e in ground})
    return sorted(out, key=lambda s: (s.size, s.key()))


def filter_reduced_class(seqs) -> list:
    """Keep the sequences where J misses every block and only singleton
    blocks may repeat or overlap."""
    kept = []
    for s in seqs:
        jset = set(s.J)
        if any(jset & set(b) for b in s.blocks):
            continue
        ok = True
        for a, b in itertools.combinations(range(len(s.blocks)), 2):
            ba, bb = s.blocks[a], s.blocks[b]
            if set(ba) & set(bb) and not (len(ba) == 1 and ba == bb):
                ok = False
                break
        if ok:
            kept.append(s)
    return kept


def render_partition(p: Partition) -> str:
    return ",".join("{" + ",".join(str(e) for e in b) + "}" for b in p)


def render_pair(pair: PartitionPair) -> str:
    """Canonical ``P'|P`` string, gaussian blocks first: e.g. ``{1}|{2},{3}``."""
    return f"{render_partition(pair.Pprime)}|{render_partition(pair.P)}"


def _parse_blocks(text: str) -> Partition:
    text = text.strip()
    if text in ("", "-"):
        return ()
    if not (text.startswith("{") and text.endswith("}")):
        raise ValidationError(f"cannot parse blocks from {text!r}")
    blocks = []
    for chunk in text[1:-1].split("},{"):
        items = [s for s in chunk.split(",") if s.strip()]
        try:
            blocks.append(tuple(sorted(int(s) for s in items)))
        except ValueError as exc:
            raise ValidationError(f"bad block element in {text!r}") from exc
    return canonical_partition(blocks)


def parse_pair(text: str) -> PartitionPair:
    """Parse a ``P'|P`` pair string; an empty side is written ``""`` or ``-``."""
    if "|" not in text:
        raise ValidationError(f"pair string needs a '|': {text!r}")
    left, right = text.split("|", 1)
    return PartitionPair(P=_parse_blocks(right), Pprime=_parse_blocks(left))

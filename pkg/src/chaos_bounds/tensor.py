"""Dense d-indexed coefficient tensors with vector values.

A :class:`CoeffTensor` stores a map from multi-indices in ``[n]^d`` to vectors
in R^m as one dense row-major array of shape ``(n,)*d + (m,)``.  Coordinates
(axis numbers) and indices are 1-based throughout the public API, matching the
``[d]``/``[n]`` conventions used by the partition machinery; the value axis is
always materialised, even for scalar coefficients (m=1).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .spaces import ValueSpace

__all__ = [
    "CoeffTensor",
    "BlockAssignment",
    "validate",
    "slice_fix",
    "contract",
    "mask_offdiagonal",
    "symmetrize",
]

Block = tuple  # sorted tuple of 1-based coordinates


@dataclass(frozen=True)
class CoeffTensor:
    d: int
    n: int
    m: int
    values: np.ndarray  # shape (n,)*d + (m,)
    space: ValueSpace

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        shape = (self.n,) * self.d + (self.m,)
        if self.d < 0 or self.n < 1 or self.m < 1:
            raise ValidationError("d >= 0, n >= 1 and m >= 1 required")
        if v.shape != shape:
            if v.ndim == 1 and v.size == int(np.prod(shape)):
                v = v.reshape(shape)
            else:
                raise ValidationError(
                    f"values length {v.size} != {self.n}^{self.d} * {self.m} = {np.prod(shape)}"
                )
        v = np.ascontiguousarray(v)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @staticmethod
    def from_flat(d: int, n: int, m: int, flat, space: ValueSpace) -> "CoeffTensor":
        return CoeffTensor(d=d, n=n, m=m, values=np.asarray(flat, dtype=float), space=space)

    def replace_values(self, values: np.ndarray) -> "CoeffTensor":
        return CoeffTensor(d=self.d, n=self.n, m=self.m, values=values, space=self.space)

    def is_zero(self) -> bool:
        return not np.any(self.values)

    def frobenius(self) -> float:
        """Plain ell_2 norm of the full coefficient array."""
        return float(np.sqrt(np.sum(self.values**2)))

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "n": self.n,
            "m": self.m,
            "space": self.space.to_dict(),
            "values": [float(x) for x in self.values.ravel()],
        }

    @staticmethod
    def from_dict(obj: dict) -> "CoeffTensor":
        if not isinstance(obj, dict):
            raise ValidationError("tensor descriptor must be a JSON object")
        extra = set(obj) - {"d", "n", "m", "space", "values"}
        if extra:
            raise ValidationError(f"unknown tensor fields: {sorted(extra)}")
        missing = {"d", "n", "m", "space", "values"} - set(obj)
        if missing:
            raise ValidationError(f"missing tensor fields: {sorted(missing)}")
        t = CoeffTensor.from_flat(
            int(obj["d"]), int(obj["n"]), int(obj["m"]),
            obj["values"], ValueSpace.from_dict(obj["space"]),
        )
        validate(t)
        return t


@dataclass(frozen=True)
class BlockAssignment:
    """Disjoint blocks of coordinates with a role per block.

    ``deterministic`` blocks are contracted against unit vectors, ``gaussian``
    blocks against jointly-indexed weight arrays (one weight per multi-index
    of the block).
    """

    blocks: tuple  # tuple of (Block, role)

    def __post_init__(self):
        seen: set[int] = set()
        for block, role in self.blocks:
            if len(block) == 0:
                raise ValidationError("empty block in assignment")
            if role not in ("deterministic", "gaussian"):
                raise ValidationError(f"unknown block role {role!r}")
            if seen & set(block):
                raise ValidationError("assignment blocks must be pairwise disjoint")
            seen.update(block)


def validate(tensor: CoeffTensor) -> None:
    """Raise unless the full tensor contract holds (d >= 1 included)."""
    if tensor.d < 1:
        raise ValidationError("d >= 1 required")
    if tensor.n < 1:
        raise ValidationError("n >= 1 required")
    if tensor.m < 1:
        raise ValidationError("m >= 1 required")
    if tensor.space.m != tensor.m:
        raise ValidationError(
            f"space dimension {tensor.space.m} != value dimension {tensor.m}"
        )
    expected = tensor.n**tensor.d * tensor.m
    if tensor.values.size != expected:
        raise ValidationError(f"values length {tensor.values.size} != {expected}")


def _check_coords(tensor: CoeffTensor, coords) -> tuple:
    coords = tuple(sorted(coords))
    for c in coords:
        if not (1 <= c <= tensor.d):
            raise ValidationError(f"coordinate {c} outside [{tensor.d}]")
    if len(set(coords)) != len(coords):
        raise ValidationError("repeated coordinate")
    return coords


def slice_fix(tensor: CoeffTensor, I, i_I) -> CoeffTensor:
    """Fix the coordinates in ``I`` at the (1-based) indices ``i_I``.

    Returns the order ``d - |I|`` slice; ``I = []`` is the identity and
    ``I = [d]`` yields an order-0 tensor holding a single value vector.
    """
    coords = _check_coords(tensor, I)
    i_I = tuple(i_I)
    if len(i_I) != len(coords):
        raise ValidationError("one fixed index per sliced coordinate required")
    key: list = [slice(None)] * tensor.d + [slice(None)]
    for c, i in zip(coords, i_I):
        if not (1 <= i <= tensor.n):
            raise ValidationError(f"index {i} outside [{tensor.n}]")
        key[c - 1] = i - 1
    out = tensor.values[tuple(key)]
    return CoeffTensor(
        d=tensor.d - len(coords), n=tensor.n, m=tensor.m, values=out, space=tensor.space
    )


def contract(
    tensor: CoeffTensor,
    assignment: BlockAssignment,
    vectors: dict | None = None,
    weights: dict | None = None,
) -> CoeffTensor:
    """Sum the tensor against one flat array per block.

    ``vectors`` maps each deterministic block to an array of length
    ``n^|block|``; ``weights`` does the same for gaussian blocks.  The result
    keeps the free coordinates (those of [d] not in any block) plus the value
    axis.
    """
    vectors = dict(vectors or {})
    weights = dict(weights or {})
    d, n = tensor.d, tensor.n
    operands: list = [tensor.values, list(range(d)) + [d]]
    used: set[int] = set()
    for block, role in assignment.blocks:
        block = _check_coords(tensor, block)
        used.update(block)
        source = vectors if role == "deterministic" else weights
        if block not in source and frozenset(block) in source:
            arr = source[frozenset(block)]
        else:
            try:
                arr = source[block]
            except KeyError:
                raise ValidationError(f"no array supplied for block {block}") from None
        arr = np.asarray(arr, dtype=float)
        if arr.size != n ** len(block):
            raise ValidationError(
                f"block {block} needs length {n ** len(block)}, got {arr.size}"
            )
        operands.append(arr.reshape((n,) * len(block)))
        operands.append([c - 1 for c in block])
    free = [c for c in range(1, d + 1) if c not in used]
    out_labels = [c - 1 for c in free] + [d]
    result = np.einsum(*operands, out_labels, optimize=True)
    return CoeffTensor(d=len(free), n=n, m=tensor.m, values=result, space=tensor.space)


def mask_offdiagonal(tensor: CoeffTensor) -> CoeffTensor:
    """Zero every entry whose multi-index has a repeated coordinate."""
    if tensor.d < 2:
        return tensor
    grids = np.indices((tensor.n,) * tensor.d)
    distinct = np.ones((tensor.n,) * tensor.d, dtype=bool)
    for a, b in itertools.combinations(range(tensor.d), 2):
        distinct &= grids[a] != grids[b]
    return tensor.replace_values(tensor.values * distinct[..., None])


def symmetrize(tensor: CoeffTensor) -> CoeffTensor:
    """Average over all permutations of the index axes (value axis untouched)."""
    if tensor.d < 2:
        return tensor
    acc = np.zeros_like(tensor.values)
    perms = list(itertools.permutations(range(tensor.d)))
    for perm in perms:
        acc += np.transpose(tensor.values, perm + (tensor.d,))
    return tensor.replace_values(acc / len(perms))

"""Value spaces: how the norm on R^m is evaluated.

Two kinds are supported.  ``lq`` is a weighted ell_q space, i.e. an m-point
discretisation of L_q(X, mu) with quadrature weights.  ``finite_sup``
evaluates the norm by duality against a finite symmetric set T of points in
R^m (sup of inner products).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import UnsupportedSpaceError, ValidationError

__all__ = ["ValueSpace", "norm_value", "norm_batch", "norm_subgrad", "type2_K"]


@dataclass(frozen=True)
class ValueSpace:
    kind: str
    q: float | None = None
    weights: np.ndarray | None = None
    T: np.ndarray | None = None
    m: int = field(default=0)

    @staticmethod
    def lq(q: float, weights) -> "ValueSpace":
        w = np.asarray(weights, dtype=float)
        if w.ndim != 1 or w.size < 1:
            raise ValidationError("lq weights must be a nonempty 1-d array")
        if q < 1:
            raise ValidationError(f"q >= 1 required, got {q}")
        if not np.all(w > 0):
            raise ValidationError("lq weights must all be positive")
        w = w.copy()
        w.setflags(write=False)
        return ValueSpace(kind="lq", q=float(q), weights=w, m=w.size)

    @staticmethod
    def finite_sup(T) -> "ValueSpace":
        pts = np.asarray(T, dtype=float)
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise ValidationError("finite_sup needs a nonempty list of points")
        rows = {tuple(row) for row in pts}
        for row in pts:
            if tuple(-row) not in rows:
                raise ValidationError("finite_sup set must be symmetric (t in T => -t in T)")
        pts = pts.copy()
        pts.setflags(write=False)
        return ValueSpace(kind="finite_sup", T=pts, m=pts.shape[1])

    @staticmethod
    def scalar() -> "ValueSpace":
        """Plain absolute value on R (m=1, q=2, unit weight)."""
        return ValueSpace.lq(2.0, [1.0])

    def to_dict(self) -> dict:
        if self.kind == "lq":
            return {"kind": "lq", "q": self.q, "weights": [float(w) for w in self.weights]}
        return {"kind": "finite_sup", "T": [[float(x) for x in t] for t in self.T]}

    @staticmethod
    def from_dict(obj: dict) -> "ValueSpace":
        if not isinstance(obj, dict) or "kind" not in obj:
            raise ValidationError("space descriptor must be an object with a 'kind' field")
        kind = obj["kind"]
        if kind == "lq":
            extra = set(obj) - {"kind", "q", "weights"}
            if extra:
                raise ValidationError(f"unknown space fields: {sorted(extra)}")
            return ValueSpace.lq(obj["q"], obj["weights"])
        if kind == "finite_sup":
            extra = set(obj) - {"kind", "T"}
            if extra:
                raise ValidationError(f"unknown space fields: {sorted(extra)}")
            return ValueSpace.finite_sup(obj["T"])
        raise ValidationError(f"unknown space kind {kind!r}")


def _check_len(space: ValueSpace, v: np.ndarray) -> None:
    if v.shape[-1] != space.m:
        raise ValidationError(f"vector length {v.shape[-1]} != space dimension {space.m}")


def norm_batch(space: ValueSpace, v) -> np.ndarray:
    """Norms of a batch of vectors; ``v`` has shape (..., m)."""
    v = np.asarray(v, dtype=float)
    _check_len(space, v)
    if space.kind == "lq":
        a = np.abs(v)
        s = np.max(a, axis=-1, keepdims=True)
        safe = np.where(s > 0, s, 1.0)
        # non-finite inputs propagate to a non-finite norm without warnings
        with np.errstate(invalid="ignore", over="ignore"):
            acc = np.sum(space.weights * (a / safe) ** space.q, axis=-1)
            return s[..., 0] * acc ** (1.0 / space.q)
    return np.max(v @ space.T.T, axis=-1)


def norm_value(space: ValueSpace, v) -> float:
    """Norm of a single vector in R^m."""
    return float(norm_batch(space, np.asarray(v, dtype=float)))


def norm_subgrad(space: ValueSpace, v: np.ndarray) -> np.ndarray:
    """A subgradient of the norm at ``v`` (rows of a batch handled independently)."""
    v = np.asarray(v, dtype=float)
    _check_len(space, v)
    if space.kind == "lq":
        q = space.q
        a = np.abs(v)
        s = np.max(a, axis=-1, keepdims=True)
        safe = np.where(s > 0, s, 1.0)
        u = a / safe
        acc = np.sum(space.weights * u**q, axis=-1, keepdims=True)
        # d/dv_j of (sum w |v|^q)^(1/q), written in scaled form so large q stays finite
        with np.errstate(invalid="ignore", divide="ignore"):
            g = space.weights * u ** (q - 1.0) * np.sign(v) * acc ** (1.0 / q - 1.0)
        return np.where(s > 0, np.nan_to_num(g), 0.0)
    idx = np.argmax(v @ space.T.T, axis=-1)
    return space.T[idx]


def type2_K(space: ValueSpace, c: float = 1.0) -> float:
    """Comparison constant K = c * sqrt(q) for weighted ell_q spaces.

    ``c`` is an explicit calibration knob (default 1); for ``finite_sup``
    spaces no formula is available and the caller must supply K directly.
    """
    if space.kind != "lq":
        raise UnsupportedSpaceError(
            "K is only known for lq spaces; pass an explicit K for finite_sup"
        )
    return float(c * np.sqrt(space.q))

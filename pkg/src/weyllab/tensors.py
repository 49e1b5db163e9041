"""Dense multi-index tensors with per-slot variance tracking.

Variance is data, not type: each slot is 'u' (contravariant) or 'd'
(covariant) and mismatches raise :class:`VarianceError` with slot
diagnostics. Storage is dense row-major; tensors are immutable after
construction and every operation returns a new tensor.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import VarianceError

VALID_VARIANCE = frozenset("ud")


@dataclass(frozen=True)
class Tensor:
    n: int
    valence: str
    data: np.ndarray

    def __post_init__(self):
        if not self.valence or set(self.valence) - VALID_VARIANCE:
            raise VarianceError(f"invalid valence string {self.valence!r}")
        expected = (self.n,) * len(self.valence)
        if self.data.shape != expected:
            raise VarianceError(
                f"data shape {self.data.shape} does not match valence "
                f"{self.valence!r} at n={self.n}")

    @property
    def rank(self) -> int:
        return len(self.valence)

    def to_json(self) -> str:
        return json.dumps(
            {"n": self.n, "valence": self.valence, "data": self.data.tolist()},
            sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Tensor":
        obj = json.loads(text)
        return cls(int(obj["n"]), obj["valence"], np.asarray(obj["data"], dtype=float))


def maxabs(a) -> float:
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a)))


def scaled_defect(residual, *references) -> float:
    """Max-abs of residual divided by the max-abs of the dominant reference.

    Returns the raw max-abs when every reference vanishes, so an exactly
    zero configuration reports 0 instead of 0/0.
    """
    r = maxabs(residual)
    scale = max((maxabs(ref) for ref in references), default=0.0)
    if scale == 0.0:
        return r
    return r / scale


def _metric_for(direction: str, m) -> np.ndarray:
    return m.ginv if direction == "raise" else m.g


def raise_lower(t: Tensor, slot: int, m, direction: str) -> Tensor:
    """Contract the given slot with g (lower) or g^-1 (raise), flipping variance."""
    if direction not in ("raise", "lower"):
        raise VarianceError(f"direction must be 'raise' or 'lower', got {direction!r}")
    if not 0 <= slot < t.rank:
        raise VarianceError(f"slot {slot} out of range for rank {t.rank}")
    have = t.valence[slot]
    need = "d" if direction == "raise" else "u"
    if have != need:
        raise VarianceError(
            f"cannot {direction} slot {slot}: variance is {have!r}, expected {need!r}")
    mat = _metric_for(direction, m)
    moved = np.tensordot(mat, t.data, axes=(1, slot))
    data = np.moveaxis(moved, 0, slot)
    flipped = "u" if have == "d" else "d"
    valence = t.valence[:slot] + flipped + t.valence[slot + 1:]
    return Tensor(t.n, valence, data)


def contract(t: Tensor, slot_a: int, slot_b: int):
    """Trace over a pair of opposite-variance slots; rank drops by two.

    Returns a float when the result is rank 0.
    """
    if slot_a == slot_b:
        raise VarianceError("contraction slots must differ")
    for s in (slot_a, slot_b):
        if not 0 <= s < t.rank:
            raise VarianceError(f"slot {s} out of range for rank {t.rank}")
    if t.valence[slot_a] == t.valence[slot_b]:
        raise VarianceError(
            f"cannot contract slots {slot_a} and {slot_b}: both are "
            f"{t.valence[slot_a]!r}")
    data = np.trace(t.data, axis1=slot_a, axis2=slot_b)
    keep = [i for i in range(t.rank) if i not in (slot_a, slot_b)]
    valence = "".join(t.valence[i] for i in keep)
    if not valence:
        return float(data)
    return Tensor(t.n, valence, data)


def raise_all(data: np.ndarray, m) -> np.ndarray:
    """Raise every slot of an all-lower dense array."""
    out = data
    for axis in range(data.ndim):
        out = np.moveaxis(np.tensordot(m.ginv, out, axes=(1, axis)), 0, axis)
    return out


def full_square(t: Tensor, m) -> float:
    """Full self-contraction of an all-lower tensor with its raised copy."""
    if set(t.valence) != {"d"}:
        raise VarianceError(f"full_square requires all-lower slots, got {t.valence!r}")
    return float(np.sum(t.data * raise_all(t.data, m)))


def full_square_scale(t: Tensor, m) -> float:
    """Cancellation-free magnitude of the full self-contraction.

    Sum of |lower| * |raised| entries; full_square is 'numerically zero'
    relative to this scale exactly when the contraction cancels.
    """
    if set(t.valence) != {"d"}:
        raise VarianceError(f"full_square requires all-lower slots, got {t.valence!r}")
    return float(np.sum(np.abs(t.data) * np.abs(raise_all(t.data, m))))

"""Order-3 multivariate truncated-Taylor arithmetic.

A :class:`Jet3` carries a scalar value together with every partial
derivative through third order in ``n`` coordinates. Second and third
derivatives are stored packed: only canonical (sorted) index tuples are
kept, so the symmetries d2[i,j] == d2[j,i] and the full permutation
symmetry of d3 are structural properties of the storage, not assertions.

All operations are pure and return new jets; instances are safe to share
between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations

import numpy as np

from .errors import DomainError


class _Tables:
    """Packed-index bookkeeping for one coordinate count.

    i2/j2 list the (i, j) of each packed pair slot; i3/j3/k3 the sorted
    triple of each packed triple slot; pij/pik/pjk map each triple slot to
    the packed pair slots of its two-index subsets.
    """

    def __init__(self, n: int):
        self.n = n
        pairs = [(i, j) for i in range(n) for j in range(i, n)]
        triples = [(i, j, k) for i in range(n) for j in range(i, n) for k in range(j, n)]
        self.n_pairs = len(pairs)
        self.n_triples = len(triples)
        pair_pos = np.empty((n, n), dtype=np.intp)
        for pos, (i, j) in enumerate(pairs):
            pair_pos[i, j] = pos
            pair_pos[j, i] = pos
        triple_pos = np.empty((n, n, n), dtype=np.intp)
        for pos, t in enumerate(triples):
            for perm in permutations(t):
                triple_pos[perm] = pos
        self.pair_pos = pair_pos
        self.triple_pos = triple_pos
        self.i2 = np.array([p[0] for p in pairs], dtype=np.intp)
        self.j2 = np.array([p[1] for p in pairs], dtype=np.intp)
        self.i3 = np.array([t[0] for t in triples], dtype=np.intp)
        self.j3 = np.array([t[1] for t in triples], dtype=np.intp)
        self.k3 = np.array([t[2] for t in triples], dtype=np.intp)
        self.pij = pair_pos[self.i3, self.j3]
        self.pik = pair_pos[self.i3, self.k3]
        self.pjk = pair_pos[self.j3, self.k3]


@lru_cache(maxsize=64)
def tables(n: int) -> _Tables:
    return _Tables(n)


@dataclass(frozen=True)
class Jet3:
    """Value plus packed partial derivatives through order 3 in n variables."""

    n: int
    v: float
    d1: np.ndarray
    d2: np.ndarray  # packed pairs, length n(n+1)/2
    d3: np.ndarray  # packed sorted triples, length n(n+1)(n+2)/6

    def unpack_d2(self) -> np.ndarray:
        """Dense symmetric (n, n) array of second partials."""
        return self.d2[tables(self.n).pair_pos]

    def unpack_d3(self) -> np.ndarray:
        """Dense fully symmetric (n, n, n) array of third partials."""
        return self.d3[tables(self.n).triple_pos]

    def is_finite(self) -> bool:
        return (
            math.isfinite(self.v)
            and bool(np.all(np.isfinite(self.d1)))
            and bool(np.all(np.isfinite(self.d2)))
            and bool(np.all(np.isfinite(self.d3)))
        )

    # -- arithmetic ---------------------------------------------------

    def __add__(self, other):
        other = _as_jet(other, self.n)
        _check_dims(self, other)
        return Jet3(self.n, self.v + other.v, self.d1 + other.d1,
                    self.d2 + other.d2, self.d3 + other.d3)

    __radd__ = __add__

    def __neg__(self):
        return Jet3(self.n, -self.v, -self.d1, -self.d2, -self.d3)

    def __sub__(self, other):
        other = _as_jet(other, self.n)
        _check_dims(self, other)
        return Jet3(self.n, self.v - other.v, self.d1 - other.d1,
                    self.d2 - other.d2, self.d3 - other.d3)

    def __rsub__(self, other):
        return _as_jet(other, self.n) - self

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            c = float(other)
            return Jet3(self.n, self.v * c, self.d1 * c, self.d2 * c, self.d3 * c)
        _check_dims(self, other)
        return _mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, float)):
            return self * (1.0 / float(other))
        _check_dims(self, other)
        return _mul(self, reciprocal(other))

    def __rtruediv__(self, other):
        return _as_jet(other, self.n) / self


def _check_dims(a: Jet3, b: Jet3) -> None:
    if a.n != b.n:
        raise DomainError(f"jet dimension mismatch: {a.n} vs {b.n}")


def _as_jet(x, n: int) -> Jet3:
    if isinstance(x, Jet3):
        return x
    return constant(float(x), n)


def constant(value: float, n: int) -> Jet3:
    t = tables(n)
    return Jet3(n, float(value), np.zeros(n), np.zeros(t.n_pairs), np.zeros(t.n_triples))


def seed_variable(index: int, value: float, n: int) -> Jet3:
    """Jet of the coordinate function x^index at the given value."""
    if not 0 <= index < n:
        raise DomainError(f"coordinate index {index} out of range for n={n}")
    t = tables(n)
    d1 = np.zeros(n)
    d1[index] = 1.0
    return Jet3(n, float(value), d1, np.zeros(t.n_pairs), np.zeros(t.n_triples))


def _mul(a: Jet3, b: Jet3) -> Jet3:
    t = tables(a.n)
    v = a.v * b.v
    d1 = a.d1 * b.v + a.v * b.d1
    d2 = (a.d2 * b.v + a.v * b.d2
          + a.d1[t.i2] * b.d1[t.j2] + a.d1[t.j2] * b.d1[t.i2])
    d3 = (a.d3 * b.v + a.v * b.d3
          + a.d2[t.pij] * b.d1[t.k3] + a.d2[t.pik] * b.d1[t.j3] + a.d2[t.pjk] * b.d1[t.i3]
          + a.d1[t.k3] * b.d2[t.pij] + a.d1[t.j3] * b.d2[t.pik] + a.d1[t.i3] * b.d2[t.pjk])
    return Jet3(a.n, v, d1, d2, d3)


def compose(a: Jet3, f0: float, f1: float, f2: float, f3: float) -> Jet3:
    """Chain rule through order 3 for a univariate f applied to jet a.

    f0..f3 are the derivatives of f at a.v.
    """
    t = tables(a.n)
    d1 = f1 * a.d1
    d2 = f1 * a.d2 + f2 * a.d1[t.i2] * a.d1[t.j2]
    d3 = (f1 * a.d3
          + f2 * (a.d2[t.pij] * a.d1[t.k3] + a.d2[t.pik] * a.d1[t.j3] + a.d2[t.pjk] * a.d1[t.i3])
          + f3 * a.d1[t.i3] * a.d1[t.j3] * a.d1[t.k3])
    return Jet3(a.n, float(f0), d1, d2, d3)


def exp(a: Jet3) -> Jet3:
    e = math.exp(a.v)
    return compose(a, e, e, e, e)


def sin(a: Jet3) -> Jet3:
    s, c = math.sin(a.v), math.cos(a.v)
    return compose(a, s, c, -s, -c)


def cos(a: Jet3) -> Jet3:
    s, c = math.sin(a.v), math.cos(a.v)
    return compose(a, c, -s, -c, s)


def log(a: Jet3) -> Jet3:
    if a.v <= 0.0:
        raise DomainError(f"log requires a positive value, got {a.v}")
    u = a.v
    return compose(a, math.log(u), 1.0 / u, -1.0 / u**2, 2.0 / u**3)


def reciprocal(a: Jet3) -> Jet3:
    if a.v == 0.0:
        raise DomainError("division by a jet with zero value")
    u = a.v
    return compose(a, 1.0 / u, -1.0 / u**2, 2.0 / u**3, -6.0 / u**4)


def pow_int(a: Jet3, exponent: int) -> Jet3:
    """Integer power a**m, exact derivative coefficients m, m(m-1), m(m-1)(m-2)."""
    m = int(exponent)
    if m == 0:
        return constant(1.0, a.n)
    u = a.v
    if m < 0 and u == 0.0:
        raise DomainError("negative integer power of a jet with zero value")
    c1 = float(m)
    c2 = float(m * (m - 1))
    c3 = float(m * (m - 1) * (m - 2))
    f0 = u**m
    f1 = c1 * u ** (m - 1) if c1 != 0.0 else 0.0
    f2 = c2 * u ** (m - 2) if c2 != 0.0 else 0.0
    f3 = c3 * u ** (m - 3) if c3 != 0.0 else 0.0
    return compose(a, f0, f1, f2, f3)


def affine(a: Jet3, scale: float, offset: float) -> Jet3:
    return a * scale + offset


_BINARY = {
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
    "div": lambda a, b: a / b,
}

_UNARY = {
    "exp": exp,
    "sin": sin,
    "cos": cos,
    "ln": log,
}


def arith(a: Jet3, b: Jet3, op: str) -> Jet3:
    """Binary jet arithmetic by name: add, sub, mul, div."""
    try:
        fn = _BINARY[op]
    except KeyError:
        raise DomainError(f"unknown jet operation {op!r}") from None
    return fn(a, b)


def elementary(a: Jet3, name: str, exponent: int | None = None) -> Jet3:
    """Unary elementary function by name: exp, sin, cos, ln, pow_int."""
    if name == "pow_int":
        if exponent is None:
            raise DomainError("pow_int requires an exponent")
        return pow_int(a, exponent)
    try:
        fn = _UNARY[name]
    except KeyError:
        raise DomainError(f"unknown elementary function {name!r}") from None
    return fn(a)

"""Layered central-difference oracles for jet derivatives.

Each derivative order is validated against a central difference of the
previous (already validated) order, which keeps roundoff at eps/h per layer
instead of eps/h^3 for a raw third-order stencil.
"""

import numpy as np

from weyllab.jets import Jet3, tables

H1 = 1e-5  # steps for orders 1 and 2
H3 = 1e-4  # step for order 3


def jet_fd_defect(build, x: np.ndarray) -> float:
    """Largest mismatch between stored jet partials and layered FD estimates.

    build(point) -> Jet3 of the expression at that point. Mismatch is
    |jet - fd| / max(1, |jet|, |fd|).
    """
    n = len(x)
    t = tables(n)
    jet = build(x)
    worst = 0.0

    def rel(a, b):
        return abs(a - b) / max(1.0, abs(a), abs(b))

    plus1 = []
    minus1 = []
    for a in range(n):
        dx = np.zeros(n)
        dx[a] = H1
        plus1.append(build(x + dx))
        minus1.append(build(x - dx))
        fd = (plus1[a].v - minus1[a].v) / (2 * H1)
        worst = max(worst, rel(jet.d1[a], fd))
    for pos in range(t.n_pairs):
        a, b = t.i2[pos], t.j2[pos]
        fd = (plus1[a].d1[b] - minus1[a].d1[b]) / (2 * H1)
        worst = max(worst, rel(jet.d2[pos], fd))
    for pos in range(t.n_triples):
        a = t.i3[pos]
        pair = t.pair_pos[t.j3[pos], t.k3[pos]]
        dx = np.zeros(n)
        dx[a] = H3
        fd = (build(x + dx).d2[pair] - build(x - dx).d2[pair]) / (2 * H3)
        worst = max(worst, rel(jet.d3[pos], fd))
    return worst


class Expression:
    """Random closed expression evaluable both as floats and as jets."""

    def __init__(self, fn, jet_fn, label):
        self.fn = fn
        self.jet_fn = jet_fn
        self.label = label

    def __call__(self, x):
        return self.fn(np.asarray(x, dtype=float))

    def jet(self, x, seeds):
        return self.jet_fn([seeds[i] for i in range(len(x))])


def random_expression(rng: np.random.Generator, n: int, depth: int) -> Expression:
    from weyllab import jets as J

    if depth == 0 or rng.random() < 0.25:
        if rng.random() < 0.7:
            i = int(rng.integers(0, n))
            return Expression(lambda x, i=i: x[i],
                              lambda s, i=i: s[i], f"x{i}")
        c = float(rng.uniform(-1.0, 1.0))
        return Expression(lambda x, c=c: c,
                          lambda s, c=c: J.constant(c, len(s)), f"{c:.2f}")

    kind = rng.choice(["add", "sub", "mul", "div", "exp", "sin", "cos",
                       "log", "pow2", "pow3", "recip"])
    a = random_expression(rng, n, depth - 1)
    if kind in ("add", "sub", "mul", "div"):
        b = random_expression(rng, n, depth - 1)
    if kind == "add":
        return Expression(lambda x: a(x) + b(x),
                          lambda s: a.jet_fn(s) + b.jet_fn(s), f"({a.label}+{b.label})")
    if kind == "sub":
        return Expression(lambda x: a(x) - b(x),
                          lambda s: a.jet_fn(s) - b.jet_fn(s), f"({a.label}-{b.label})")
    if kind == "mul":
        return Expression(lambda x: a(x) * b(x),
                          lambda s: a.jet_fn(s) * b.jet_fn(s), f"({a.label}*{b.label})")
    if kind == "div":
        # denominator bounded away from zero
        return Expression(lambda x: a(x) / (1.8 + np.sin(b(x))),
                          lambda s: a.jet_fn(s) / (1.8 + J.sin(b.jet_fn(s))),
                          f"({a.label}/(1.8+sin({b.label})))")
    if kind == "exp":
        return Expression(lambda x: np.exp(0.5 * np.sin(a(x))),
                          lambda s: J.exp(0.5 * J.sin(a.jet_fn(s))),
                          f"exp(sin({a.label})/2)")
    if kind == "sin":
        return Expression(lambda x: np.sin(a(x)),
                          lambda s: J.sin(a.jet_fn(s)), f"sin({a.label})")
    if kind == "cos":
        return Expression(lambda x: np.cos(a(x)),
                          lambda s: J.cos(a.jet_fn(s)), f"cos({a.label})")
    if kind == "log":
        return Expression(lambda x: np.log(1.7 + np.sin(a(x))),
                          lambda s: J.log(1.7 + J.sin(a.jet_fn(s))),
                          f"log(1.7+sin({a.label}))")
    if kind == "pow2":
        return Expression(lambda x: a(x) ** 2,
                          lambda s: J.pow_int(a.jet_fn(s), 2), f"({a.label})^2")
    if kind == "pow3":
        return Expression(lambda x: a(x) ** 3,
                          lambda s: J.pow_int(a.jet_fn(s), 3), f"({a.label})^3")
    # recip: negative integer power with a shifted, sign-definite base
    return Expression(lambda x: (2.2 + np.sin(a(x))) ** -2,
                      lambda s: J.pow_int(2.2 + J.sin(a.jet_fn(s)), -2),
                      f"(2.2+sin({a.label}))^-2")

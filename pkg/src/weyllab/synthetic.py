"""Seeded synthetic fixtures for the identity batteries.

No catalog metric is guaranteed to have a nonzero Weyl square (the
Lorentzian recurrent examples all cancel), so the quadratic-tensor and
spectral batteries always run on synthetic instances and only
opportunistically on metric points.
"""

from __future__ import annotations

import numpy as np

from . import metrics, weylops
from .curvature import _weyl_from_parts


def flat_point(n: int, signature: str = "lorentzian") -> metrics.MetricAtPoint:
    spec = metrics.MetricSpec("flat", n, {"signature": signature})
    return metrics.evaluate(spec, np.zeros(n))


def random_symmetric(rng: np.random.Generator, n: int, scale: float = 1.0) -> np.ndarray:
    a = rng.normal(size=(n, n), scale=scale)
    return 0.5 * (a + a.T)


def random_covector(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.normal(size=n)


def random_timelike_vector(rng: np.random.Generator,
                           m: metrics.MetricAtPoint) -> np.ndarray:
    """Unnormalized time-like vector for a mostly-plus Lorentzian metric."""
    spatial = rng.normal(size=m.n - 1)
    u = np.concatenate([[1.0 + float(np.linalg.norm(spatial))], spatial])
    if float(u @ m.g @ u) >= 0.0:
        u[0] *= 2.0
    return u


def random_null_covector(rng: np.random.Generator,
                         m: metrics.MetricAtPoint) -> np.ndarray:
    """Null covector for the flat mostly-plus metric diag(-1, 1, ..., 1)."""
    direction = rng.normal(size=m.n - 1)
    direction /= np.linalg.norm(direction)
    return np.concatenate([[1.0], direction])


def electric_pair(rng: np.random.Generator, m: metrics.MetricAtPoint,
                  alpha: np.ndarray | None = None):
    """Random (E, alpha) with E symmetric, trace-free and E alpha^sharp = 0.

    Projects a random symmetric matrix onto the alpha-orthogonal complement
    and removes the remaining trace against theta = g - alpha x alpha / alpha^2.
    """
    n = m.n
    if alpha is None:
        while True:
            alpha = random_covector(rng, n)
            sq, scale = weylops.alpha_square(alpha, m)
            if abs(sq) > 0.1 * scale:
                break
    sq, _ = weylops.alpha_square(alpha, m)
    up = m.ginv @ alpha
    q = np.eye(n) - np.outer(alpha, up) / sq  # q_i^a kills alpha on the slot
    raw = random_symmetric(rng, n)
    e = q @ raw @ q.T
    theta = m.g - np.outer(alpha, alpha) / sq
    trace = float(np.einsum("ij,ij->", m.ginv, e))
    e = e - trace / (n - 1) * theta
    return e, alpha


def cr_weyl_instance(rng: np.random.Generator, m: metrics.MetricAtPoint,
                     alpha: np.ndarray | None = None):
    """Synthetic recurrent-form Weyl tensor from a random electric pair.

    Returns (C, E, alpha) with C the Kulkarni-Nomizu representation and
    nabla C modeled as alpha x C by the caller when needed.
    """
    e, alpha = electric_pair(rng, m, alpha)
    n = m.n
    sq, _ = weylops.alpha_square(alpha, m)
    factor = (m.g - (n - 2) * np.outer(alpha, alpha) / sq) / (n - 3)
    c = weylops.kulkarni_nomizu(factor, e)
    return c, e, alpha


def timelike_alpha(rng: np.random.Generator, m: metrics.MetricAtPoint) -> np.ndarray:
    """Time-like covector for the flat mostly-plus metric."""
    u = random_timelike_vector(rng, m)
    return m.g @ u


def random_curvature_like(rng: np.random.Generator,
                          m: metrics.MetricAtPoint) -> np.ndarray:
    """Random tensor with all Riemann index symmetries and first Bianchi."""
    n = m.n
    t = rng.normal(size=(n, n, n, n))
    a = 0.25 * (t - np.swapaxes(t, 0, 1) - np.swapaxes(t, 2, 3)
                + np.swapaxes(np.swapaxes(t, 0, 1), 2, 3))
    b = 0.5 * (a + np.transpose(a, (2, 3, 0, 1)))
    cyc = b + np.transpose(b, (1, 2, 0, 3)) + np.transpose(b, (2, 0, 1, 3))
    return b - cyc / 3.0


def random_weyl_like(rng: np.random.Generator,
                     m: metrics.MetricAtPoint) -> np.ndarray:
    """Random fully trace-free tensor with Riemann symmetries."""
    r = random_curvature_like(rng, m)
    ric = -np.einsum("mkla,am->kl", r, m.ginv)
    scal = float(np.einsum("kl,kl->", m.ginv, ric))
    return _weyl_from_parts(m.g, ric, scal, r, m.n)


def spectral_instance(rng: np.random.Generator, n: int, n_h: int):
    """Euclidean-metric h/Ricci pair with the prescribed spectral structure.

    h has eigenvalues (n-3)/(2(n-2)) with multiplicity n_h (trace fixes the
    other), Ricci = (R/n) g + G (h - g/n); alpha spans a direction of the
    first eigenspace.
    """
    m = flat_point(n, "euclidean")
    h_val, h_prime = weylops.two_eigenvalue_h(n, n_h)
    basis, _ = np.linalg.qr(rng.normal(size=(n, n)))
    eigs = np.concatenate([np.full(n_h, h_val), np.full(n - n_h, h_prime)])
    h = basis @ np.diag(eigs) @ basis.T
    scalar = float(rng.normal(scale=2.0))
    g_fit = float(rng.normal(loc=2.0, scale=1.0))
    if abs(g_fit) < 0.5:
        g_fit = 0.5 if g_fit >= 0 else -0.5
    ricci = (scalar / n) * m.g + g_fit * (h - m.g / n)
    alpha = basis[:, 0].copy()
    return {
        "m": m,
        "h": weylops.ParallelTensor(h=h, c2=1.0, proportional_to_metric=False),
        "ricci": ricci,
        "scalar": scalar,
        "G": g_fit,
        "alpha": alpha,
        "n_h": n_h,
        "h_val": h_val,
        "h_prime": h_prime,
    }

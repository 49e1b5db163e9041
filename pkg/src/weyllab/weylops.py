"""Algebraic identity battery around the Weyl tensor.

Covers the electric tensor E_il = alpha^j alpha^k C_ijkl / alpha^2, the
Kulkarni-Nomizu representation of a recurrent Weyl tensor, cyclic
compatibility defects, the covariantly constant quadratic tensor
h_ij = C_i^klm C_jklm / C^2, the Grycak proportionality of traceless Ricci
to traceless h, and the resulting two-eigenvalue spectral structure of the
Ricci tensor.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import metrics
from .errors import DomainError, InapplicableCheck
from .tensors import Tensor, full_square, full_square_scale, maxabs, raise_all, scaled_defect

ALPHA_NULL_RTOL = 1e-10
C2_NULL_RTOL = 1e-10


def alpha_square(alpha: np.ndarray, m: metrics.MetricAtPoint) -> tuple[float, float]:
    """(alpha_i alpha^i, cancellation-free scale of the contraction)."""
    up = m.ginv @ alpha
    return float(alpha @ up), float(np.abs(alpha) @ np.abs(up))


def alpha_is_null(alpha: np.ndarray, m: metrics.MetricAtPoint) -> bool:
    sq, scale = alpha_square(alpha, m)
    if scale == 0.0:
        return True
    return abs(sq) <= ALPHA_NULL_RTOL * scale


# ---------------------------------------------------------------------------
# electric tensor and the Kulkarni-Nomizu representation

@dataclass(frozen=True)
class ElectricTensor:
    E: np.ndarray
    alpha_used: np.ndarray
    alpha_sq: float


def electric_tensor(c: np.ndarray, alpha: np.ndarray,
                    m: metrics.MetricAtPoint) -> ElectricTensor:
    """E_il = alpha^j alpha^k C_ijkl / alpha^2 (undefined for null alpha).

    The result is symmetric, trace-free and annihilates alpha; violations
    beyond rounding indicate an invalid input tensor.
    """
    sq, scale = alpha_square(alpha, m)
    if scale == 0.0 or abs(sq) <= ALPHA_NULL_RTOL * scale:
        raise InapplicableCheck("electric tensor undefined for null recurrence")
    up = m.ginv @ alpha
    e = np.einsum("j,k,ijkl->il", up, up, c) / sq
    _validate_electric(e, up, m)
    return ElectricTensor(E=e, alpha_used=alpha.copy(), alpha_sq=sq)


def _validate_electric(e: np.ndarray, alpha_up: np.ndarray,
                       m: metrics.MetricAtPoint) -> None:
    scale = maxabs(e)
    if scale == 0.0:
        return
    sym = maxabs(e - e.T) / scale
    trace = abs(float(np.einsum("ij,ij->", m.ginv, e))) / scale
    annih = maxabs(e @ alpha_up) / (scale * max(maxabs(alpha_up), 1e-300))
    if max(sym, trace, annih) > 1e-8:
        raise DomainError(
            f"electric tensor invariants violated (sym {sym:.2e}, "
            f"trace {trace:.2e}, alpha {annih:.2e}); input is not a valid "
            "trace-free curvature-type tensor")


def observer_electric_tensor(c: np.ndarray, u_up: np.ndarray) -> np.ndarray:
    """Observer form E_kl = u^j u^m C_jklm (no alpha^2 normalization)."""
    return np.einsum("j,m,jklm->kl", u_up, u_up, c)


def kulkarni_nomizu(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(A o B)_jklm = A_jl B_km + A_km B_jl - A_jm B_kl - A_kl B_jm.

    Both factors must be symmetric; the product carries all Riemann index
    symmetries and satisfies the first Bianchi identity.
    """
    for name, t in (("first", a), ("second", b)):
        if maxabs(t - t.T) > 1e-12 * max(1.0, maxabs(t)):
            raise DomainError(f"{name} Kulkarni-Nomizu factor is not symmetric")
    return (np.einsum("jl,km->jklm", a, b) + np.einsum("km,jl->jklm", a, b)
            - np.einsum("jm,kl->jklm", a, b) - np.einsum("kl,jm->jklm", a, b))


def reconstruct_weyl(e: ElectricTensor, alpha: np.ndarray,
                     m: metrics.MetricAtPoint,
                     c: np.ndarray | None = None):
    """Weyl tensor rebuilt from (E, alpha) as a Kulkarni-Nomizu product.

    C_rec = KN((g - (n-2) alpha x alpha / alpha^2) / (n-3), E). Returns
    (C_rec, scaled defect against c) with defect None when c is omitted.
    """
    n = m.n
    if n < 5:
        raise DomainError("the representation needs n >= 5")
    sq, scale = alpha_square(alpha, m)
    if scale == 0.0 or abs(sq) <= ALPHA_NULL_RTOL * scale:
        raise InapplicableCheck("representation undefined for null recurrence")
    factor = (m.g - (n - 2) * np.outer(alpha, alpha) / sq) / (n - 3)
    c_rec = kulkarni_nomizu(factor, e.E)
    defect = None if c is None else scaled_defect(c - c_rec, c, c_rec)
    return c_rec, defect


def representation_square_ratio(e: ElectricTensor, c2: float, n: int,
                                m: metrics.MetricAtPoint) -> float:
    """Relative defect of C^2 = 4 (n-2)/(n-3) E_ij E^ij."""
    e_sq = float(np.sum(e.E * raise_all(e.E, m)))
    expected = 4.0 * (n - 2) / (n - 3) * e_sq
    denom = max(abs(c2), abs(expected))
    if denom == 0.0:
        return 0.0
    return abs(c2 - expected) / denom


# ---------------------------------------------------------------------------
# cyclic compatibility defects

def compatibility_defect(s: np.ndarray, k_lower: np.ndarray,
                         m: metrics.MetricAtPoint) -> float:
    """Scaled max-abs of S_im K_jkl^m + S_jm K_kil^m + S_km K_ijl^m.

    K must carry Riemann symmetries (Weyl or Riemann); S may be
    non-symmetric, in which case the cyclic expression is evaluated
    literally.
    """
    k_mixed = np.einsum("jkla,am->jklm", k_lower, m.ginv)
    t1 = np.einsum("im,jklm->ijkl", s, k_mixed)
    total = (t1 + np.einsum("jm,kilm->ijkl", s, k_mixed)
             + np.einsum("km,ijlm->ijkl", s, k_mixed))
    return scaled_defect(total, t1)


def cyclic_weyl_identity_defect(c: np.ndarray, alpha: np.ndarray,
                                m: metrics.MetricAtPoint) -> float:
    """Algebraic cyclic identity tying alpha x C to metric traces of C.

    alpha_i C_jklm + alpha_j C_kilm + alpha_k C_ijlm
      = alpha^p/(n-3) (g_jm C_kilp + g_km C_ijlp + g_im C_jklp
                       + g_kl C_jimp + g_il C_kjmp + g_jl C_ikmp)
    """
    n = m.n
    if n < 4:
        raise DomainError("identity requires n >= 4")
    up = m.ginv @ alpha
    v = np.einsum("p,abcp->abc", up, c)
    lhs = (np.einsum("i,jklm->ijklm", alpha, c)
           + np.einsum("j,kilm->ijklm", alpha, c)
           + np.einsum("k,ijlm->ijklm", alpha, c))
    g = m.g
    rhs = (np.einsum("jm,kil->ijklm", g, v) + np.einsum("km,ijl->ijklm", g, v)
           + np.einsum("im,jkl->ijklm", g, v) + np.einsum("kl,jim->ijklm", g, v)
           + np.einsum("il,kjm->ijklm", g, v) + np.einsum("jl,ikm->ijklm", g, v)) / (n - 3)
    return scaled_defect(lhs - rhs, lhs, rhs)


def gradient_family_defects(c: np.ndarray, ricci: np.ndarray, alpha: np.ndarray,
                            nabla_alpha: np.ndarray,
                            m: metrics.MetricAtPoint) -> tuple[float, float, float]:
    """Cyclic compatibility of the three gradient-family tensors.

    alpha x alpha, (nabla alpha + transpose + Ricci), and
    (nabla alpha - transpose + (n-4)/(n-2) Ricci).
    """
    n = m.n
    s1 = np.outer(alpha, alpha)
    s2 = nabla_alpha + nabla_alpha.T + ricci
    s3 = nabla_alpha - nabla_alpha.T + (n - 4) / (n - 2) * ricci
    return (compatibility_defect(s1, c, m),
            compatibility_defect(s2, c, m),
            compatibility_defect(s3, c, m))


def nabla_alpha_from_gradient(dalpha: np.ndarray, alpha: np.ndarray,
                              gamma: np.ndarray) -> np.ndarray:
    """nabla_i alpha_j from the coordinate gradient dalpha[i, j] = d_i alpha_j."""
    return dalpha - np.einsum("aij,a->ij", gamma, alpha)


# ---------------------------------------------------------------------------
# parallel quadratic tensor and Grycak proportionality

@dataclass(frozen=True)
class ParallelTensor:
    h: np.ndarray
    c2: float
    proportional_to_metric: bool


def h_tensor(c: np.ndarray, m: metrics.MetricAtPoint,
             tol: float = C2_NULL_RTOL) -> ParallelTensor:
    """h_ij = C_i^klm C_jklm / C^2 (undefined when C^2 is numerically null).

    Trace is 1 by construction; the proportional-to-metric flag compares h
    against g/n.
    """
    t = Tensor(m.n, "dddd", c)
    c2 = full_square(t, m)
    scale = full_square_scale(t, m)
    if scale == 0.0 or abs(c2) <= tol * scale:
        raise InapplicableCheck("h undefined (null Weyl square)")
    c_up3 = c
    for axis in (1, 2, 3):
        c_up3 = np.moveaxis(np.tensordot(m.ginv, c_up3, axes=(1, axis)), 0, axis)
    h = np.einsum("iklm,jklm->ij", c_up3, c) / c2
    trace = float(np.einsum("ij,ij->", m.ginv, h))
    if abs(trace - 1.0) > 1e-8:
        raise DomainError(f"h trace invariant violated: {trace!r}")
    prop = maxabs(h - m.g / m.n) <= tol * max(maxabs(h), 1e-300)
    return ParallelTensor(h=h, c2=c2, proportional_to_metric=prop)


def h_alpha_eigen_defect(h: ParallelTensor, alpha: np.ndarray,
                         m: metrics.MetricAtPoint) -> float:
    """Defect of h alpha = (n-3)/(2(n-2)) alpha (alpha as an eigenvector)."""
    n = m.n
    up = m.ginv @ alpha
    lhs = h.h @ up
    rhs = (n - 3) / (2 * (n - 2)) * alpha
    return scaled_defect(lhs - rhs, lhs, rhs)


def h_ricci_commutation_defect(h: np.ndarray, ricci: np.ndarray,
                               m: metrics.MetricAtPoint) -> float:
    hm = m.ginv @ h
    rm = m.ginv @ ricci
    lhs = h @ rm
    rhs = ricci @ hm
    return scaled_defect(lhs - rhs, lhs, rhs)


def parallel_h_defect(c: np.ndarray, nabla_c: np.ndarray,
                      m: metrics.MetricAtPoint,
                      tol: float = C2_NULL_RTOL) -> float:
    """Scaled max-abs of nabla_k h_ij assembled from nabla C by the quotient rule.

    Recurrence nabla C = alpha x C makes the quotient cancel exactly, so this
    defect is a sharp test of recurrence at the quadratic level.
    """
    t = Tensor(m.n, "dddd", c)
    c2 = full_square(t, m)
    scale = full_square_scale(t, m)
    if scale == 0.0 or abs(c2) <= tol * scale:
        raise InapplicableCheck("h undefined (null Weyl square)")
    c_up3 = c
    for axis in (1, 2, 3):
        c_up3 = np.moveaxis(np.tensordot(m.ginv, c_up3, axes=(1, axis)), 0, axis)
    h_unnorm = np.einsum("iklm,jklm->ij", c_up3, c)
    nabla_c_up3 = nabla_c
    for axis in (2, 3, 4):
        nabla_c_up3 = np.moveaxis(np.tensordot(m.ginv, nabla_c_up3, axes=(1, axis)), 0, axis)
    t1 = np.einsum("aiklm,jklm->aij", nabla_c_up3, c)
    dh_unnorm = t1 + np.einsum("iklm,ajklm->aij", c_up3, nabla_c)
    dc2 = 2.0 * np.einsum("ajklm,jklm->a", nabla_c, raise_all(c, m))
    nabla_h = dh_unnorm / c2 - np.einsum("a,ij->aij", dc2, h_unnorm) / c2**2
    return scaled_defect(nabla_h, t1 / c2)


@dataclass(frozen=True)
class GrycakFit:
    G: float
    residual: float
    status: str  # "ok" | "einstein_indeterminate"


def grycak_fit(ricci: np.ndarray, scalar: float, h: ParallelTensor,
               m: metrics.MetricAtPoint, tol: float = 1e-9) -> GrycakFit:
    """Least-squares G with traceless(Ricci) = G traceless(h), plus residual.

    Raises the inapplicability signal when h is proportional to the metric;
    flags the fit as indeterminate when both traceless parts vanish.
    """
    n = m.n
    s = ricci - (scalar / n) * m.g
    t = h.h - m.g / n
    if h.proportional_to_metric or maxabs(t) <= tol * max(maxabs(h.h), 1e-300):
        raise InapplicableCheck("proportionality hypothesis violated: h is a "
                                "multiple of the metric")
    if maxabs(s) <= tol * max(maxabs(ricci), 1.0):
        return GrycakFit(G=0.0, residual=0.0, status="einstein_indeterminate")
    g_fit = float(np.sum(s * t) / np.sum(t * t))
    residual = scaled_defect(s - g_fit * t, s, g_fit * t)
    return GrycakFit(G=g_fit, residual=residual, status="ok")


# ---------------------------------------------------------------------------
# spectral structure

def two_eigenvalue_h(n: int, n_h: int) -> tuple[float, float]:
    """The two admissible eigenvalues of h for given multiplicity n_h."""
    h_val = (n - 3) / (2 * (n - 2))
    h_prime = (1.0 - n_h * h_val) / (n - n_h)
    return h_val, h_prime


def zero_second_eigenvalue_dims(n_range) -> list[tuple[int, int]]:
    """Dimensions where the second eigenvalue of h can vanish.

    h' = 0 forces n_h = 2(n-2)/(n-3) to be an integer in [1, n).
    """
    out = []
    for n in n_range:
        num, den = 2 * (n - 2), n - 3
        if den > 0 and num % den == 0 and 1 <= num // den < n:
            out.append((n, num // den))
    return out


@dataclass
class SpectralResult:
    n_h: int | None
    mu: float | None
    mu_prime: float | None
    G: float
    H: float | None
    cluster_count: int
    status: str  # "ok" | "h_proportional" | "cluster_violation"
    defects: dict = field(default_factory=dict)
    projector: np.ndarray | None = None


def _cluster(eigvals: np.ndarray, rel_tol: float) -> list[np.ndarray]:
    vals = np.sort(eigvals)
    scale = max(float(np.max(np.abs(vals))), 1e-300)
    groups = [[vals[0]]]
    for v in vals[1:]:
        if v - groups[-1][-1] > rel_tol * scale:
            groups.append([v])
        else:
            groups[-1].append(v)
    return [np.asarray(grp) for grp in groups]


def spectral_analysis(ricci: np.ndarray, h: ParallelTensor, scalar: float,
                      g_fit: float, m: metrics.MetricAtPoint,
                      cluster_rel_tol: float = 1e-6) -> SpectralResult:
    """Two-eigenvalue structure of h and the induced Ricci spectrum.

    Clusters the eigenvalues of h^i_j; more than two clusters is reported as
    a finding (status "cluster_violation"), not an error. For two clusters
    it measures n_h, checks mu / mu' against the closed forms, builds the
    eigenprojector and verifies idempotency, trace, the scalar sum
    R = n_h mu + (n - n_h) mu', and the constant of the quadratic relation
    h^2 - (tr h^2 / n) g = H (h - g / n).
    """
    n = m.n
    h_mixed = m.ginv @ h.h
    eig = np.linalg.eigvals(h_mixed)
    imag = maxabs(eig.imag)
    defects: dict = {"eigenvalue_imag": scaled_defect(imag, eig.real, 1.0)}
    clusters = _cluster(eig.real, cluster_rel_tol)
    result = SpectralResult(n_h=None, mu=None, mu_prime=None, G=g_fit, H=None,
                            cluster_count=len(clusters), status="ok",
                            defects=defects)
    if len(clusters) == 1:
        result.status = "h_proportional"
        return result
    if len(clusters) > 2 or defects["eigenvalue_imag"] > cluster_rel_tol:
        result.status = "cluster_violation"
        return result
    h_target = (n - 3) / (2 * (n - 2))
    means = [float(np.mean(c)) for c in clusters]
    idx = int(np.argmin([abs(mu - h_target) for mu in means]))
    h_val, h_other = means[idx], means[1 - idx]
    n_h = len(clusters[idx])
    result.n_h = n_h
    defects["h_eigenvalue"] = abs(h_val - h_target) / max(abs(h_target), 1e-300)
    # Ricci spectrum against the closed forms
    mu = scalar / n + g_fit * (n - 1) * (n - 4) / (2 * n * (n - 2))
    mu_prime = scalar / n - g_fit * (n - 1) * (n - 4) * n_h / (2 * n * (n - 2) * (n - n_h))
    result.mu, result.mu_prime = mu, mu_prime
    ric_eig = np.sort(np.linalg.eigvals(m.ginv @ ricci).real)
    expected = np.sort(np.concatenate([np.full(n_h, mu), np.full(n - n_h, mu_prime)]))
    defects["ricci_spectrum"] = scaled_defect(ric_eig - expected, expected, ric_eig)
    defects["scalar_sum"] = scaled_defect(
        n_h * mu + (n - n_h) * mu_prime - scalar, scalar, mu, mu_prime)
    # eigenprojector onto the alpha eigenspace
    den = (n - 1) * (n - 4)
    proj = (2 * (n - 2) * (n - n_h) / den) * h_mixed \
        + ((n_h * (n - 3) - 2 * (n - 2)) / den) * np.eye(n)
    result.projector = proj
    defects["projector_idempotent"] = scaled_defect(proj @ proj - proj, proj, 1.0)
    defects["projector_trace"] = abs(float(np.trace(proj)) - n_h) / max(n_h, 1)
    # quadratic relation constant
    h2 = h.h @ (m.ginv @ h.h)
    tr_h2 = float(np.einsum("ij,ij->", m.ginv, h2))
    lhs = h2 - (tr_h2 / n) * m.g
    t = h.h - m.g / n
    h_const = h_val + h_other
    defects["h_square_relation"] = scaled_defect(lhs - h_const * t, lhs, h_const * t)
    result.H = h_const
    return result


def quasi_einstein_shape_defect(ricci: np.ndarray, scalar: float, g_fit: float,
                                alpha: np.ndarray, m: metrics.MetricAtPoint) -> float:
    """Defect of traceless(Ricci) = (G/2)((n-4)/(n-2)) [alpha x alpha / alpha^2 - g/n].

    The non-degenerate-eigenvalue (n_h = 1) closed form.
    """
    n = m.n
    sq, _ = alpha_square(alpha, m)
    s = ricci - (scalar / n) * m.g
    shape = g_fit / 2 * (n - 4) / (n - 2) * (np.outer(alpha, alpha) / sq - m.g / n)
    return scaled_defect(s - shape, s, shape)


# ---------------------------------------------------------------------------
# gradient relations needing a stencil for G

def grad_g_identity_defect(dg_vec: np.ndarray, dr_vec: np.ndarray,
                           alpha: np.ndarray,
                           m: metrics.MetricAtPoint) -> tuple[float, float]:
    """Defects of the gradient relation between G and the curvature scalar.

    nabla_j G = n(n-2)^2/((n-1)^2(n-4)) [alpha_j alpha_m / alpha^2 - g_jm / n]
                nabla^m R, and the contracted form
    (n-2)^2 alpha^k nabla_k R = (n-1)(n-4) alpha^k nabla_k G.
    """
    n = m.n
    sq, scale = alpha_square(alpha, m)
    if scale == 0.0 or abs(sq) <= ALPHA_NULL_RTOL * scale:
        raise InapplicableCheck("gradient relation undefined for null recurrence")
    up = m.ginv @ alpha
    dr_up = m.ginv @ dr_vec
    coeff = n * (n - 2) ** 2 / ((n - 1) ** 2 * (n - 4))
    pred = coeff * (alpha * float(alpha @ dr_up) / sq - dr_vec / n)
    rel = scaled_defect(dg_vec - pred, dg_vec, pred)
    lhs = (n - 2) ** 2 * float(up @ dr_vec)
    rhs = (n - 1) * (n - 4) * float(up @ dg_vec)
    contracted = scaled_defect(lhs - rhs, lhs, rhs)
    return rel, contracted


def traceless_ricci_recurrence_defect(nabla_ricci: np.ndarray,
                                      dscalar: np.ndarray, ricci: np.ndarray,
                                      scalar: float, g_fit: float,
                                      dg_vec: np.ndarray,
                                      m: metrics.MetricAtPoint) -> float:
    """Defect of nabla_k traceless(Ricci) = (nabla_k G / G) traceless(Ricci)."""
    if abs(g_fit) <= 1e-300:
        raise InapplicableCheck("traceless Ricci recurrence undefined for G = 0")
    n = m.n
    lhs = nabla_ricci - np.einsum("k,ij->kij", dscalar, m.g) / n
    s = ricci - (scalar / n) * m.g
    rhs = np.einsum("k,ij->kij", dg_vec / g_fit, s)
    return scaled_defect(lhs - rhs, lhs, rhs)

"""Pointwise curvature: Christoffel, Riemann, Ricci, Weyl and one covariant
derivative of each, assembled analytically from exact metric derivatives.

Sign conventions (fixed once, recorded in reports, self-tested on the
plane-wave catalog entry at first use):

    Gamma^k_ij = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij)
    R_jkl^m    = d_j Gamma^m_kl - d_k Gamma^m_jl
                 + Gamma^p_kl Gamma^m_jp - Gamma^p_jl Gamma^m_kp
    R_jklm     = R_jkl^a g_am
    R_kl       = -R_mkl^m           (trace on first and last slot, negated)
    R          = g^{kl} R_kl

Under these conventions [nabla_j, nabla_k] w_l = -R_jkl^m w_m, and the round
space form of curvature K has R_jklm = K (g_jm g_kl - g_jl g_km), i.e.
Ricci = -(n-1) K g.

The Weyl tensor is the fully trace-free part:

    C_jkl^m = R_jkl^m + (d_j^m R_kl - d_k^m R_jl + R_j^m g_kl - R_k^m g_jl)/(n-2)
              - R (d_j^m g_kl - d_k^m g_jl) / ((n-1)(n-2))

Coordinate partials of these tensors are propagated through the same
formulas (never by finite differences), so one covariant derivative of the
Weyl tensor is exact given third metric derivatives.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import metrics
from .errors import DomainError
from .tensors import maxabs, scaled_defect

CONVENTIONS = {
    "christoffel": "Gamma^k_ij = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij)",
    "riemann": ("R_jkl^m = d_j Gamma^m_kl - d_k Gamma^m_jl "
                "+ Gamma^p_kl Gamma^m_jp - Gamma^p_jl Gamma^m_kp"),
    "ricci": "R_kl = -R_mkl^m",
    "weyl": "C = Riemann + (g o Ricci)/(n-2) - R (g o g)/((n-1)(n-2)) trace-free part",
    "commutator": "[nabla_j, nabla_k] w_l = -R_jkl^m w_m",
    "constant_curvature": "R_jklm = K (g_jm g_kl - g_jl g_km)",
}


@dataclass(frozen=True)
class ChristoffelPack:
    gamma: np.ndarray    # gamma[k, i, j] = Gamma^k_ij
    dgamma: np.ndarray   # dgamma[a, k, i, j] = d_a Gamma^k_ij
    d2gamma: np.ndarray  # d2gamma[a, b, k, i, j]
    dginv: np.ndarray    # dginv[a, i, j] = d_a g^{ij}
    d2ginv: np.ndarray


@dataclass(frozen=True)
class CurvaturePack:
    m: metrics.MetricAtPoint
    gamma: np.ndarray
    dgamma: np.ndarray
    d2gamma: np.ndarray
    riemann_mixed: np.ndarray   # R_jkl^m = rm[j, k, l, m]
    driemann_mixed: np.ndarray  # [a, j, k, l, m] coordinate partial
    riemann: np.ndarray         # all-lower R_jklm
    driemann: np.ndarray        # coordinate partials of the lowered tensor
    ricci: np.ndarray
    dricci: np.ndarray
    scalar: float
    dscalar: np.ndarray
    weyl: np.ndarray            # all-lower C_jklm
    dweyl: np.ndarray
    nabla_weyl: np.ndarray      # nabla_weyl[i, j, k, l, m] = nabla_i C_jklm
    nabla_riemann: np.ndarray
    nabla_ricci: np.ndarray

    @property
    def n(self) -> int:
        return self.m.n


def christoffel(m: metrics.MetricAtPoint) -> ChristoffelPack:
    """Christoffel symbols with first and second coordinate partials."""
    g, ginv, dg, d2g, d3g = m.g, m.ginv, m.dg, m.d2g, m.d3g
    dginv = -np.einsum("ip,apq,qj->aij", ginv, dg, ginv)
    d2ginv = -(np.einsum("aip,bpq,qj->abij", dginv, dg, ginv)
               + np.einsum("ip,abpq,qj->abij", ginv, d2g, ginv)
               + np.einsum("ip,bpq,aqj->abij", ginv, dg, dginv))
    s = (np.einsum("ijl->ijl", dg) + np.einsum("jil->ijl", dg)
         - np.einsum("lij->ijl", dg))
    ds = (np.einsum("aijl->aijl", d2g) + np.einsum("ajil->aijl", d2g)
          - np.einsum("alij->aijl", d2g))
    d2s = (np.einsum("abijl->abijl", d3g) + np.einsum("abjil->abijl", d3g)
           - np.einsum("ablij->abijl", d3g))
    gamma = 0.5 * np.einsum("kl,ijl->kij", ginv, s)
    dgamma = 0.5 * (np.einsum("akl,ijl->akij", dginv, s)
                    + np.einsum("kl,aijl->akij", ginv, ds))
    d2gamma = 0.5 * (np.einsum("abkl,ijl->abkij", d2ginv, s)
                     + np.einsum("akl,bijl->abkij", dginv, ds)
                     + np.einsum("bkl,aijl->abkij", dginv, ds)
                     + np.einsum("kl,abijl->abkij", ginv, d2s))
    return ChristoffelPack(gamma, dgamma, d2gamma, dginv, d2ginv)


def riemann(ch: ChristoffelPack) -> tuple[np.ndarray, np.ndarray]:
    """Mixed Riemann tensor R_jkl^m and its coordinate partials."""
    gamma, dgamma, d2gamma = ch.gamma, ch.dgamma, ch.d2gamma
    rm = (np.einsum("jmkl->jklm", dgamma) - np.einsum("kmjl->jklm", dgamma)
          + np.einsum("pkl,mjp->jklm", gamma, gamma)
          - np.einsum("pjl,mkp->jklm", gamma, gamma))
    drm = (np.einsum("ajmkl->ajklm", d2gamma) - np.einsum("akmjl->ajklm", d2gamma)
           + np.einsum("apkl,mjp->ajklm", dgamma, gamma)
           + np.einsum("pkl,amjp->ajklm", gamma, dgamma)
           - np.einsum("apjl,mkp->ajklm", dgamma, gamma)
           - np.einsum("pjl,amkp->ajklm", gamma, dgamma))
    return rm, drm


def ricci_scalar(rm: np.ndarray, drm: np.ndarray, m: metrics.MetricAtPoint,
                 dginv: np.ndarray):
    """Ricci tensor R_kl = -R_mkl^m and scalar R = g^{kl} R_kl, with partials."""
    ric = -np.einsum("mklm->kl", rm)
    dric = -np.einsum("amklm->akl", drm)
    scal = float(np.einsum("kl,kl->", m.ginv, ric))
    dscal = (np.einsum("akl,kl->a", dginv, ric)
             + np.einsum("kl,akl->a", m.ginv, dric))
    return ric, dric, scal, dscal


def _weyl_from_parts(g: np.ndarray, ric: np.ndarray, scal: float,
                     rlow: np.ndarray, n: int) -> np.ndarray:
    gg = np.einsum("jm,kl->jklm", g, g) - np.einsum("km,jl->jklm", g, g)
    gric = (np.einsum("jm,kl->jklm", g, ric) - np.einsum("km,jl->jklm", g, ric)
            + np.einsum("jm,kl->jklm", ric, g) - np.einsum("km,jl->jklm", ric, g))
    return rlow + gric / (n - 2) - scal * gg / ((n - 1) * (n - 2))


def weyl(rlow: np.ndarray, drlow: np.ndarray, ric: np.ndarray, dric: np.ndarray,
         scal: float, dscal: np.ndarray, m: metrics.MetricAtPoint):
    """All-lower Weyl tensor and its coordinate partials."""
    n = m.n
    if n < 4:
        raise DomainError("the trace-free conformal tensor needs n >= 4")
    g, dg = m.g, m.dg
    c = _weyl_from_parts(g, ric, scal, rlow, n)
    gg = np.einsum("jm,kl->jklm", g, g) - np.einsum("km,jl->jklm", g, g)
    dgg = (np.einsum("ajm,kl->ajklm", dg, g) + np.einsum("jm,akl->ajklm", g, dg)
           - np.einsum("akm,jl->ajklm", dg, g) - np.einsum("km,ajl->ajklm", g, dg))
    dgric = (np.einsum("ajm,kl->ajklm", dg, ric) + np.einsum("jm,akl->ajklm", g, dric)
             - np.einsum("akm,jl->ajklm", dg, ric) - np.einsum("km,ajl->ajklm", g, dric)
             + np.einsum("ajm,kl->ajklm", dric, g) + np.einsum("jm,akl->ajklm", ric, dg)
             - np.einsum("akm,jl->ajklm", dric, g) - np.einsum("km,ajl->ajklm", ric, dg))
    dc = (drlow + dgric / (n - 2)
          - (np.einsum("a,jklm->ajklm", dscal, gg) + scal * dgg) / ((n - 1) * (n - 2)))
    return c, dc


def covariant_derivative(data: np.ndarray, partials: np.ndarray, valence: str,
                         gamma: np.ndarray) -> np.ndarray:
    """nabla_a T from coordinate partials plus one connection term per slot.

    partials[a, ...] must be d_a of data[...]; the result has the derivative
    index first.
    """
    if partials.shape != (gamma.shape[0],) + data.shape:
        raise DomainError("partials shape does not match data")
    if len(valence) != data.ndim:
        raise DomainError("valence length does not match tensor rank")
    out = partials.copy()
    for slot, var in enumerate(valence):
        moved = np.moveaxis(data, slot, -1)
        if var == "d":
            corr = np.einsum("pas,...p->a...s", gamma, moved)
            out -= np.moveaxis(corr, -1, slot + 1)
        else:
            corr = np.einsum("sap,...p->a...s", gamma, moved)
            out += np.moveaxis(corr, -1, slot + 1)
    return out


_ANCHOR_STATE = {"checked": False}


def curvature_pack(m: metrics.MetricAtPoint) -> CurvaturePack:
    """All curvature data at one point, including nabla(Weyl)."""
    _check_anchor_once()
    ch = christoffel(m)
    rm, drm = riemann(ch)
    ric, dric, scal, dscal = ricci_scalar(rm, drm, m, ch.dginv)
    rlow = np.einsum("jklp,pm->jklm", rm, m.g)
    drlow = (np.einsum("ajklp,pm->ajklm", drm, m.g)
             + np.einsum("jklp,apm->ajklm", rm, m.dg))
    c, dc = weyl(rlow, drlow, ric, dric, scal, dscal, m)
    nabla_c = covariant_derivative(c, dc, "dddd", ch.gamma)
    nabla_r = covariant_derivative(rlow, drlow, "dddd", ch.gamma)
    nabla_ric = covariant_derivative(ric, dric, "dd", ch.gamma)
    return CurvaturePack(m, ch.gamma, ch.dgamma, ch.d2gamma, rm, drm,
                         rlow, drlow, ric, dric, scal, dscal, c, dc,
                         nabla_c, nabla_r, nabla_ric)


def _check_anchor_once() -> None:
    """Assert the convention anchor on the plane-wave entry at first use.

    With p = e^{x1} and q = e^{x3} the nonzero Christoffel symbols are
    Gamma^2_11 = p'q/2, Gamma^2_13 = pq'/2, Gamma^3_11 = -pq'/2, the Riemann
    component is R_1313 = pq''/2 and the only Ricci entry is R_11 = pq''/2.
    """
    if _ANCHOR_STATE["checked"]:
        return
    _ANCHOR_STATE["checked"] = True
    spec = metrics.MetricSpec("brinkmann_pq", 5, {"p": {"kind": "exp"}, "q": {"kind": "exp"}})
    x = np.array([0.3, 0.7, 0.2, 0.1, 0.4])
    pack = curvature_pack(metrics.evaluate(spec, x))
    pq = float(np.exp(x[0] + x[2]))
    errs = [
        abs(pack.gamma[1, 0, 0] - 0.5 * pq),
        abs(pack.gamma[1, 0, 2] - 0.5 * pq),
        abs(pack.gamma[2, 0, 0] + 0.5 * pq),
        abs(pack.riemann[0, 2, 0, 2] - 0.5 * pq),
        abs(pack.ricci[0, 0] - 0.5 * pq),
        abs(pack.scalar),
    ]
    if max(errs) > 1e-10:
        raise AssertionError(
            f"curvature convention anchor failed (max error {max(errs):.3e})")


# ---------------------------------------------------------------------------
# identity defects on one pack

def riemann_symmetry_defects(pack: CurvaturePack) -> dict[str, float]:
    r = pack.riemann
    return {
        "antisymmetry_first_pair": scaled_defect(r + np.swapaxes(r, 0, 1), r),
        "antisymmetry_last_pair": scaled_defect(r + np.swapaxes(r, 2, 3), r),
        "pair_exchange": scaled_defect(r - np.transpose(r, (2, 3, 0, 1)), r),
        "first_bianchi": scaled_defect(
            r + np.transpose(r, (0, 2, 3, 1)) + np.transpose(r, (0, 3, 1, 2)), r),
    }


def weyl_trace_defect(pack: CurvaturePack) -> float:
    """Largest single-trace of C_jklm against the inverse metric."""
    c, ginv = pack.weyl, pack.m.ginv
    traces = [
        np.einsum("jm,jklm->kl", ginv, c),
        np.einsum("jl,jklm->km", ginv, c),
        np.einsum("km,jklm->jl", ginv, c),
        np.einsum("kl,jklm->jm", ginv, c),
        np.einsum("jk,jklm->lm", ginv, c),
        np.einsum("lm,jklm->jk", ginv, c),
    ]
    worst = max(maxabs(t) for t in traces)
    scale = maxabs(np.einsum("jm,jklm->jklm", np.abs(ginv), np.abs(c)))
    return scaled_defect(worst, scale) if scale else worst


def nabla_metric_defect(pack: CurvaturePack) -> float:
    nabla_g = covariant_derivative(pack.m.g, pack.m.dg, "dd", pack.gamma)
    return scaled_defect(nabla_g, pack.m.dg, pack.m.g)


def second_bianchi_defect(pack: CurvaturePack) -> float:
    nr = pack.nabla_riemann
    cyc = nr + np.transpose(nr, (1, 2, 0, 3, 4)) + np.transpose(nr, (2, 0, 1, 3, 4))
    return scaled_defect(cyc, nr)


def weyl_divergence(pack: CurvaturePack) -> np.ndarray:
    """nabla^m C_jklm (derivative index contracted with the last slot)."""
    return np.einsum("am,ajklm->jkl", pack.m.ginv, pack.nabla_weyl)


def divergence_identity_defect(pack: CurvaturePack) -> float:
    """Divergence of Weyl against its Ricci-gradient expression.

    nabla^m C_jklm = -((n-3)/(n-2)) [nabla_j R_kl - nabla_k R_jl
                      - (g_kl nabla_j R - g_jl nabla_k R) / (2(n-1))]
    """
    n = pack.n
    lhs = weyl_divergence(pack)
    nric, dscal, g = pack.nabla_ricci, pack.dscalar, pack.m.g
    inner = (np.einsum("jkl->jkl", nric) - np.einsum("kjl->jkl", nric)
             - (np.einsum("kl,j->jkl", g, dscal)
                - np.einsum("jl,k->jkl", g, dscal)) / (2 * (n - 1)))
    rhs = -(n - 3) / (n - 2) * inner
    return scaled_defect(lhs - rhs, lhs, rhs)


def commutator_on_covector(pack: CurvaturePack, v: np.ndarray) -> np.ndarray:
    """[nabla_i, nabla_j] v_k evaluated algebraically as -R_ijk^m v_m."""
    return -np.einsum("ijkm,m->ijk", pack.riemann_mixed, v)


def parallel_transport_loop(spec: metrics.MetricSpec, point, i: int, j: int,
                            eps: float, v: np.ndarray,
                            steps_per_edge: int = 8) -> np.ndarray:
    """Holonomy defect of transporting covector v around a coordinate square.

    The loop runs point -> +eps e_j -> +eps e_i -> -eps e_j -> -eps e_i with
    RK4 integration of dv_l/dt = Gamma^a_{bl} xdot^b v_a along each edge.
    Returns (v_final - v) / eps^2, which converges to [nabla_i, nabla_j] v
    (equal to -R_ijl^m v_m) as eps -> 0; the edge order fixes the
    orientation.
    """
    x0 = np.asarray(point, dtype=float)

    def gamma_at(x):
        return christoffel(metrics.evaluate(spec, x)).gamma

    def rhs(x, tangent, vec):
        gm = gamma_at(x)
        return np.einsum("abl,b,a->l", gm, tangent, vec)

    v_cur = np.asarray(v, dtype=float).copy()
    x_cur = x0.copy()
    edges = [(j, +1.0), (i, +1.0), (j, -1.0), (i, -1.0)]
    h = eps / steps_per_edge
    for axis, sign in edges:
        tangent = np.zeros_like(x0)
        tangent[axis] = sign
        for _ in range(steps_per_edge):
            k1 = rhs(x_cur, tangent, v_cur)
            k2 = rhs(x_cur + 0.5 * h * tangent, tangent, v_cur + 0.5 * h * k1)
            k3 = rhs(x_cur + 0.5 * h * tangent, tangent, v_cur + 0.5 * h * k2)
            k4 = rhs(x_cur + h * tangent, tangent, v_cur + h * k3)
            v_cur = v_cur + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            x_cur = x_cur + h * tangent
    return (v_cur - np.asarray(v, dtype=float)) / eps**2


def loop_commutator_estimate(spec: metrics.MetricSpec, point, i: int, j: int,
                             eps: float, v: np.ndarray) -> np.ndarray:
    """Richardson-extrapolated loop holonomy: eliminates the O(eps) term."""
    d1 = parallel_transport_loop(spec, point, i, j, eps, v)
    d2 = parallel_transport_loop(spec, point, i, j, eps / 2.0, v)
    return 2.0 * d2 - d1

"""Recurrence covector extraction and recurrence-related identity defects.

A point is conformally recurrent when nabla_i C_jklm = alpha_i C_jklm for
some covector alpha. The extraction is a per-component least-squares fit
(robust to zero Weyl components); its residual doubles as the recurrence
test statistic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import curvature, metrics
from .errors import InapplicableCheck, StencilError
from .tensors import maxabs, scaled_defect

WEYL_FLOOR_RTOL = 1e-10   # ||C|| below this times ||Riemann|| means conformally flat
NULL_SQUARE_RTOL = 1e-10  # |C^2| below this times its cancellation-free scale


@dataclass
class RecurrenceResult:
    alpha: np.ndarray
    residual: float
    c2: float
    c2_scale: float
    alpha_sq: float
    recurrent: bool
    parallel_weyl: bool
    gradient_consistency: float | None = None
    closedness_defect: float | None = None
    flags: dict = field(default_factory=dict)

    @property
    def c2_is_null(self) -> bool:
        if self.c2_scale == 0.0:
            return True
        return abs(self.c2) <= NULL_SQUARE_RTOL * self.c2_scale


def weyl_is_zero(weyl: np.ndarray, riemann: np.ndarray) -> bool:
    scale = maxabs(riemann)
    floor = WEYL_FLOOR_RTOL * scale if scale > 0.0 else 1e-290
    return maxabs(weyl) <= floor


def extract_alpha(c: np.ndarray, nabla_c: np.ndarray, m: metrics.MetricAtPoint,
                  tol: float = 1e-8, riemann: np.ndarray | None = None) -> RecurrenceResult:
    """Least-squares recurrence covector and the scaled recurrence residual.

    alpha_i = sum(nabla_i C * C) / sum(C * C) over all components;
    residual = max |nabla C - alpha x C| / max |nabla C| (0 when nabla C = 0,
    flagged as parallel Weyl).
    """
    ref = riemann if riemann is not None else c
    if weyl_is_zero(c, ref):
        raise InapplicableCheck("conformally flat point")
    denom = float(np.sum(c * c))
    alpha = np.einsum("ijklm,jklm->i", nabla_c, c) / denom
    scale = maxabs(nabla_c)
    if scale == 0.0:
        alpha = np.zeros(m.n)
        residual = 0.0
        parallel = True
    else:
        residual = maxabs(nabla_c - np.einsum("i,jklm->ijklm", alpha, c)) / scale
        parallel = False
    from .tensors import Tensor, full_square, full_square_scale
    t = Tensor(m.n, "dddd", c)
    c2 = full_square(t, m)
    c2_scale = full_square_scale(t, m)
    alpha_sq = float(alpha @ m.ginv @ alpha)
    return RecurrenceResult(alpha=alpha, residual=residual, c2=c2,
                            c2_scale=c2_scale, alpha_sq=alpha_sq,
                            recurrent=residual <= tol, parallel_weyl=parallel)


def weyl_square_gradient(c: np.ndarray, nabla_c: np.ndarray,
                         m: metrics.MetricAtPoint) -> np.ndarray:
    """Coordinate gradient of C^2: nabla_i C^2 = 2 nabla_i C_jklm C^jklm."""
    from .tensors import raise_all
    return 2.0 * np.einsum("ijklm,jklm->i", nabla_c, raise_all(c, m))


def gradient_alpha_check(result: RecurrenceResult, dc2: np.ndarray) -> float:
    """Defect of alpha against the gradient of log |C^2|.

    Inapplicable (raises the signal) when C^2 is numerically null.
    """
    if result.c2_is_null:
        raise InapplicableCheck("null Weyl square; gradient check inapplicable")
    return float(np.max(np.abs(result.alpha - 0.5 * dc2 / result.c2)))


def closedness_from_samples(alpha_plus: np.ndarray, alpha_minus: np.ndarray,
                            h_step: float) -> float:
    """Antisymmetric part of the finite-difference gradient of alpha.

    alpha_plus[i] / alpha_minus[i] are the covectors extracted at the point
    shifted by +-h_step along coordinate i.
    """
    dalpha = (alpha_plus - alpha_minus) / (2.0 * h_step)
    return maxabs(dalpha - dalpha.T)


def closedness(spec: metrics.MetricSpec, point, h_step: float = 1e-3,
               tol: float = 1e-8) -> float:
    """Finite-difference closedness defect max |d_i alpha_j - d_j alpha_i|.

    Every stencil point must itself pass the recurrence test.
    """
    x = np.asarray(point, dtype=float)
    n = spec.n

    def alpha_at(y):
        pack = curvature.curvature_pack(metrics.evaluate(spec, y))
        res = extract_alpha(pack.weyl, pack.nabla_weyl, pack.m, tol=tol,
                            riemann=pack.riemann)
        if not res.recurrent:
            raise StencilError(
                f"stencil point {y.tolist()} fails recurrence "
                f"(residual {res.residual:.3e})")
        return res.alpha

    plus = np.empty((n, n))
    minus = np.empty((n, n))
    for i in range(n):
        shift = np.zeros(n)
        shift[i] = h_step
        try:
            plus[i] = alpha_at(x + shift)
            minus[i] = alpha_at(x - shift)
        except InapplicableCheck as exc:
            raise StencilError(f"stencil point failed: {exc.reason}") from exc
    return closedness_from_samples(plus, minus, h_step)


def semisymmetry_defect(c: np.ndarray, pack: curvature.CurvaturePack) -> float:
    """Scaled max-abs of [nabla_i, nabla_j] C_klmn evaluated algebraically.

    The commutator on each lower slot contributes -R_ijs^a C...a..., so the
    whole expression is four Riemann-times-Weyl contractions; it vanishes
    exactly when the recurrence covector is closed.
    """
    rm = pack.riemann_mixed
    t1 = np.einsum("ijka,almn->ijklmn", rm, c)
    comm = -(t1
             + np.einsum("ijla,kamn->ijklmn", rm, c)
             + np.einsum("ijma,klan->ijklmn", rm, c)
             + np.einsum("ijna,klma->ijklmn", rm, c))
    return scaled_defect(comm, t1)


def riemann_recurrence_defect(pack: curvature.CurvaturePack,
                              alpha: np.ndarray) -> float:
    """Residual of nabla_i R_jklm = alpha_i R_jklm for the given covector."""
    outer = np.einsum("i,jklm->ijklm", alpha, pack.riemann)
    return scaled_defect(pack.nabla_riemann - outer, pack.nabla_riemann, outer)


def ricci_recurrence_defect(pack: curvature.CurvaturePack,
                            alpha: np.ndarray) -> float:
    outer = np.einsum("i,jk->ijk", alpha, pack.ricci)
    return scaled_defect(pack.nabla_ricci - outer, pack.nabla_ricci, outer)


def alpha_riemann_contraction_defect(pack: curvature.CurvaturePack,
                                     result: RecurrenceResult) -> float:
    """Defect of alpha^k alpha^m R_jklm = alpha^2 R_jl."""
    up = pack.m.ginv @ result.alpha
    lhs = np.einsum("k,m,jklm->jl", up, up, pack.riemann)
    rhs = result.alpha_sq * pack.ricci
    return scaled_defect(lhs - rhs, lhs, rhs)


def ricci_eigen_relation(pack: curvature.CurvaturePack,
                         alpha: np.ndarray) -> tuple[float, float]:
    """Fit mu in R_km alpha^m = mu alpha_k; returns (mu, scaled defect)."""
    up = pack.m.ginv @ alpha
    lhs = pack.ricci @ up
    denom = float(alpha @ alpha)
    mu = float(lhs @ alpha) / denom if denom > 0.0 else 0.0
    return mu, scaled_defect(lhs - mu * alpha, lhs, mu * alpha, pack.ricci)

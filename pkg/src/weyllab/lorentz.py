"""Lorentzian classification battery.

Electric/magnetic split of the Weyl tensor relative to a time-like
observer, the purely-electric criterion, the null-alignment criterion for
algebraically special type, plane-wave trace conditions, and the
decomposability obstruction arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import curvature, metrics, weylops
from .errors import DomainError, InapplicableCheck
from .tensors import maxabs, scaled_defect

UNIT_TOL = 1e-10


@dataclass
class ClassificationFlags:
    is_lorentzian: bool
    c2_zero: bool
    has_cc_null_vector: bool | None = None
    purely_electric: bool | None = None
    purely_electric_defect: float | None = None
    type_IId_defect: float | None = None
    ppwave_trace_defect: float | None = None
    ricci_rank_one_defect: float | None = None
    extra: dict = field(default_factory=dict)


def normalize_timelike(u_up: np.ndarray, m: metrics.MetricAtPoint) -> np.ndarray:
    """Scale a time-like vector to u^2 = -1 with positive leading component."""
    u = np.asarray(u_up, dtype=float)
    sq = float(u @ m.g @ u)
    if sq >= -UNIT_TOL * max(float(np.abs(u) @ np.abs(m.g @ u)), 1e-300):
        raise DomainError(f"vector is not time-like (u^2 = {sq:.3e})")
    u = u / np.sqrt(-sq)
    if u[0] < 0:
        u = -u
    return u


def em_split(c: np.ndarray, u_up: np.ndarray, m: metrics.MetricAtPoint):
    """Electric/magnetic split of a Weyl-type tensor relative to u.

    Expands every slot against delta = theta - u x u_low with
    theta^a_b = delta^a_b + u^a u_b: terms with an even number of u factors
    form C_plus (electric), odd-count terms C_minus (magnetic). Terms with
    two u's on one antisymmetric pair vanish, so C = C_plus + C_minus is an
    identity; sum_defect measures the implementation's reconstruction.
    """
    u = normalize_timelike(u_up, m)
    u_low = m.g @ u
    n = m.n
    theta = np.eye(n) + np.outer(u, u_low)
    buu = -np.outer(u, u_low)

    def proj(c1, c2, c3, c4):
        return np.einsum("rj,sk,pl,qm,rspq->jklm", c1, c2, c3, c4, c, optimize=True)

    a, b = theta, buu
    c_minus = proj(b, a, a, a) + proj(a, b, a, a) + proj(a, a, b, a) + proj(a, a, a, b)
    c_plus = (proj(a, a, a, a) + proj(b, a, b, a) + proj(b, a, a, b)
              + proj(a, b, b, a) + proj(a, b, a, b))
    sum_defect = scaled_defect(c - c_plus - c_minus, c)
    return c_plus, c_minus, sum_defect


@dataclass(frozen=True)
class PurelyElectricResult:
    electric: bool
    defect: float
    magnetic_ratio: float
    consistent: bool


def purely_electric_test(c: np.ndarray, u_up: np.ndarray,
                         m: metrics.MetricAtPoint,
                         tol: float = 1e-9) -> PurelyElectricResult:
    """Cyclic criterion for a purely electric Weyl tensor, cross-checked
    against the magnitude of the magnetic part from the split."""
    u = normalize_timelike(u_up, m)
    u_low = m.g @ u
    defect = weylops.compatibility_defect(np.outer(u_low, u_low), c, m)
    _, c_minus, _ = em_split(c, u, m)
    magnetic_ratio = scaled_defect(c_minus, c)
    electric = defect < tol
    consistent = electric == (magnetic_ratio < tol)
    return PurelyElectricResult(electric, defect, magnetic_ratio, consistent)


@dataclass(frozen=True)
class NullAlignmentResult:
    compat_defect: float
    alignment_defect: float


def type_IId_test(c: np.ndarray, alpha: np.ndarray, m: metrics.MetricAtPoint) -> NullAlignmentResult:
    """Null-recurrence alignment criteria.

    compat_defect below tolerance means the tensor is algebraically special
    at least of the IId alignment class; alignment_defect measures the
    stronger condition alpha^m C_jklm = 0.
    """
    if not weylops.alpha_is_null(alpha, m):
        raise DomainError("alignment test requires a null covector")
    if maxabs(alpha) == 0.0:
        raise DomainError("alignment test requires a nonzero covector")
    compat = weylops.compatibility_defect(np.outer(alpha, alpha), c, m)
    up = m.ginv @ alpha
    contraction = np.einsum("m,jklm->jkl", up, c)
    alignment = scaled_defect(contraction, maxabs(c) * max(maxabs(up), 1e-300))
    return NullAlignmentResult(compat_defect=compat, alignment_defect=alignment)


@dataclass(frozen=True)
class PpwaveChecks:
    trace_defect: float
    cc_defect: float
    ricci_rank_one_defect: float
    ricci_coeff_fitted: float
    ricci_coeff_claimed: float | None
    ricci_form_defect: float | None


def ppwave_checks(pack: curvature.CurvaturePack, m: metrics.MetricAtPoint,
                  beta: np.ndarray, a_value: float | None = None,
                  coeff_claimed: float | None = None) -> PpwaveChecks:
    """Plane-wave structure checks for a supplied candidate null covector.

    trace_defect:  R_ij^pq R_pqlm = 0.
    cc_defect:     beta^2 = 0 and nabla beta = 0 (covariantly constant null).
    Ricci form:    rank-one fit Ricci = c beta x beta; when a_value is given
                   the fitted c is also compared against coeff_claimed * a(u)
                   (informational, convention-sensitive).
    """
    r = pack.riemann
    ginv = m.ginv
    r_up = np.einsum("ijab,ap,bq->ijpq", r, ginv, ginv)
    trace_tensor = np.einsum("ijpq,pqlm->ijlm", r_up, r)
    trace_defect = scaled_defect(trace_tensor, maxabs(r_up) * maxabs(r))

    beta_sq, beta_scale = weylops.alpha_square(beta, m)
    nabla_beta = -np.einsum("a,aij->ij", beta, pack.gamma)
    sq_part = abs(beta_sq) / beta_scale if beta_scale > 0.0 else 0.0
    grad_part = scaled_defect(nabla_beta, pack.gamma, 1.0)
    cc_defect = max(sq_part, grad_part)

    bb = np.outer(beta, beta)
    denom = float(np.sum(bb * bb))
    fitted = float(np.sum(pack.ricci * bb) / denom) if denom > 0.0 else 0.0
    rank_one = scaled_defect(pack.ricci - fitted * bb, pack.ricci, fitted * bb)
    form_defect = None
    if a_value is not None and coeff_claimed is not None:
        claimed = coeff_claimed * a_value
        form_defect = scaled_defect(pack.ricci - claimed * bb, pack.ricci, claimed * bb)
    return PpwaveChecks(trace_defect, cc_defect, rank_one, fitted,
                        coeff_claimed, form_defect)


def decomposability_obstruction(n: int, c2_is_null: bool) -> dict:
    """Eigenvalue-mismatch arithmetic behind the decomposability statement.

    A covariantly constant null vector would be an eigenvector of the
    parallel quadratic tensor with eigenvalue 1/n, while the recurrence
    covector has eigenvalue (n-3)/(2(n-2)); the two never agree for n >= 5,
    so a nonzero Weyl square forces the decomposable branch.
    """
    eig_recurrence = (n - 3) / (2 * (n - 2))
    eig_null = 1.0 / n
    return {
        "eigenvalue_recurrence": eig_recurrence,
        "eigenvalue_null": eig_null,
        "mismatch": abs(eig_recurrence - eig_null),
        "applicable": not c2_is_null,
        "decomposable_branch": not c2_is_null,
    }


@dataclass(frozen=True)
class RankOneRicci:
    coefficient: float
    residual: float
    antisym_defect: float


def rank_one_ricci_check(ricci: np.ndarray, alpha: np.ndarray) -> RankOneRicci:
    """Least-squares c with Ricci = c alpha x alpha, plus the antisymmetric
    combination alpha_k R_jl - alpha_j R_kl that must vanish alongside it."""
    if maxabs(alpha) == 0.0:
        raise DomainError("rank-one fit requires a nonzero covector")
    aa = np.outer(alpha, alpha)
    denom = float(np.sum(aa * aa))
    c_fit = float(np.sum(ricci * aa) / denom)
    residual = scaled_defect(ricci - c_fit * aa, ricci, c_fit * aa)
    anti = (np.einsum("k,jl->kjl", alpha, ricci)
            - np.einsum("j,kl->kjl", alpha, ricci))
    antisym = scaled_defect(anti, np.einsum("k,jl->kjl", np.abs(alpha), np.abs(ricci)))
    return RankOneRicci(coefficient=c_fit, residual=residual, antisym_defect=antisym)


def riemann_divergence_defect(pack: curvature.CurvaturePack,
                              m: metrics.MetricAtPoint) -> float:
    """Scaled max-abs of nabla^m R_jklm."""
    div = np.einsum("am,ajklm->jkl", m.ginv, pack.nabla_riemann)
    return scaled_defect(div, pack.nabla_riemann)

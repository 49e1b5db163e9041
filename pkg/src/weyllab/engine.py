"""Configuration-driven runner: evaluate the check battery at sample points,
run the synthetic batteries, and assemble a deterministic report."""

from __future__ import annotations

import concurrent.futures
import datetime
import math
from functools import cached_property

import numpy as np

from . import curvature, lorentz, metrics, recurrence, synthetic, weylops
from .errors import (DegenerateMetricError, DomainError, InapplicableCheck,
                     StencilError, WeylLabError)
from .models import (AnalysisReport, CheckResult, DefectEntry, PointRecord,
                     RunConfig, SummaryRow, VerifyResult)
from .tensors import maxabs, scaled_defect

DEFAULT_TOLERANCES: dict[str, float] = {
    "riemann_symmetry": 1e-12,
    "first_bianchi": 1e-10,
    "weyl_trace": 1e-10,
    "weyl_symmetry": 1e-12,
    "nabla_metric": 1e-11,
    "second_bianchi": 1e-9,
    "weyl_divergence_identity": 1e-9,
    "recurrence_residual": 1e-8,
    "riemann_recurrence": 1e-9,
    "ricci_recurrence": 1e-9,
    "gradient_consistency": 1e-8,
    "eigen_relation": 1e-9,
    "alpha_closed_form": 1e-8,
    "closedness": 1e-5,
    "cyclic_weyl": 1e-9,
    "alpha_compat": 1e-9,
    "ricci_riemann_compat": 1e-9,
    "semisymmetry": 1e-9,
    "alpha_riemann_contraction": 1e-9,
    "gradient_family": 1e-8,
    "reconstruction": 1e-8,
    "square_ratio": 1e-10,
    "roundtrip": 1e-11,
    "e_compat": 1e-11,
    "synthetic_trace_free": 1e-12,
    "synthetic_bianchi": 1e-12,
    "h_trace": 1e-10,
    "h_alpha_eigen": 1e-9,
    "h_ricci_commutation": 1e-9,
    "nabla_h": 1e-8,
    "grycak_residual": 1e-7,
    "grycak_recovery": 1e-9,
    "spectral": 1e-9,
    "grad_g": 1e-4,
    "purely_electric": 1e-9,
    "em_split_sum": 1e-10,
    "pe_consistency": 0.0,
    "type_IId": 1e-9,
    "alignment": 1e-9,
    "rank_one_ricci": 1e-9,
    "ppwave_trace": 1e-10,
    "constant_null": 1e-11,
    "negative_control": 0.05,
    "closedness_step": 1e-3,
}

CHECK_NAMES = [
    "signature", "invariants", "recurrence", "closedness", "identities",
    "c2", "weyl_form", "parallel_tensor", "grycak", "electric", "IId",
    "ppwave", "decomposability",
]

ENGINE_METADATA = {
    "conventions": dict(curvature.CONVENTIONS),
    "signature_convention": "lorentzian iff inertia has exactly one minus "
                            "(or one plus) eigenvalue; measured inertia reported",
    "alpha_extraction": "componentwise least squares over all Weyl entries",
    "defect_scaling": "max-abs of residual over max-abs of the dominant term",
}


def _finite(x) -> float | None:
    x = float(x)
    return x if math.isfinite(x) else None


def _entry(value, tol_key: str, tolerances: dict) -> DefectEntry:
    v = _finite(value)
    tol = tolerances.get(tol_key)
    passed = None if (v is None or tol is None) else bool(v <= tol)
    return DefectEntry(value=v, tol=tol, passed=passed)


def _info_entry(value) -> DefectEntry:
    return DefectEntry(value=_finite(value), tol=None, passed=None)


def merge_tolerances(overrides: dict[str, float]) -> dict[str, float]:
    unknown = set(overrides) - set(DEFAULT_TOLERANCES)
    if unknown:
        raise DomainError(f"unknown tolerance keys: {sorted(unknown)}")
    out = dict(DEFAULT_TOLERANCES)
    out.update(overrides)
    return out


# ---------------------------------------------------------------------------
# per-point context and checks

class PointContext:
    def __init__(self, spec: metrics.MetricSpec, point: np.ndarray,
                 tolerances: dict[str, float]):
        self.spec = spec
        self.point = np.asarray(point, dtype=float)
        self.tol = tolerances

    @cached_property
    def m(self) -> metrics.MetricAtPoint:
        return metrics.evaluate(self.spec, self.point)

    @cached_property
    def pack(self) -> curvature.CurvaturePack:
        return curvature.curvature_pack(self.m)

    @cached_property
    def weyl_zero(self) -> bool:
        return recurrence.weyl_is_zero(self.pack.weyl, self.pack.riemann)

    @cached_property
    def rec(self) -> recurrence.RecurrenceResult:
        return recurrence.extract_alpha(
            self.pack.weyl, self.pack.nabla_weyl, self.m,
            tol=self.tol["recurrence_residual"], riemann=self.pack.riemann)

    @cached_property
    def closed_form(self):
        entry = metrics.catalog_entry(self.spec.name)
        return entry.recurrence_covector(self.spec, self.point)

    @cached_property
    def nabla_alpha(self) -> np.ndarray | None:
        if self.closed_form is None:
            return None
        alpha, dalpha = self.closed_form
        return weylops.nabla_alpha_from_gradient(dalpha, alpha, self.pack.gamma)

    @cached_property
    def null_covector(self):
        entry = metrics.catalog_entry(self.spec.name)
        return entry.constant_null_covector(self.spec, self.point)


def _check_signature(ctx: PointContext) -> CheckResult:
    n_plus, n_minus = metrics.signature(ctx.m)
    info = {
        "inertia": [n_plus, n_minus],
        "is_lorentzian": bool(n_minus == 1 or n_plus == 1),
        "det": _finite(ctx.m.det),
    }
    expected = ctx.spec.params.get("signature_expectation")
    if expected is not None and list(expected) != [n_plus, n_minus]:
        return CheckResult(status="fail", reason="inertia differs from "
                           f"expectation {expected}", info=info)
    return CheckResult(status="pass", info=info)


def _check_invariants(ctx: PointContext) -> CheckResult:
    pack, tol = ctx.pack, ctx.tol
    sym = curvature.riemann_symmetry_defects(pack)
    c = pack.weyl
    weyl_sym = max(
        scaled_defect(c + np.swapaxes(c, 0, 1), c),
        scaled_defect(c + np.swapaxes(c, 2, 3), c),
        scaled_defect(c - np.transpose(c, (2, 3, 0, 1)), c),
        scaled_defect(c + np.transpose(c, (0, 2, 3, 1))
                      + np.transpose(c, (0, 3, 1, 2)), c),
    )
    defects = {
        "riemann_symmetry": _entry(max(sym["antisymmetry_first_pair"],
                                       sym["antisymmetry_last_pair"],
                                       sym["pair_exchange"]),
                                   "riemann_symmetry", tol),
        "first_bianchi": _entry(sym["first_bianchi"], "first_bianchi", tol),
        "weyl_trace": _entry(curvature.weyl_trace_defect(pack), "weyl_trace", tol),
        "weyl_symmetry": _entry(weyl_sym, "weyl_symmetry", tol),
        "nabla_metric": _entry(curvature.nabla_metric_defect(pack), "nabla_metric", tol),
        "second_bianchi": _entry(curvature.second_bianchi_defect(pack),
                                 "second_bianchi", tol),
        "weyl_divergence_identity": _entry(
            curvature.divergence_identity_defect(pack),
            "weyl_divergence_identity", tol),
    }
    info = {"weyl_divergence_norm": _finite(
        scaled_defect(curvature.weyl_divergence(pack), pack.nabla_weyl))}
    return _result_from_defects(defects, info)


def _check_recurrence(ctx: PointContext) -> CheckResult:
    tol = ctx.tol
    rec = ctx.rec  # raises InapplicableCheck on conformally flat points
    pack = ctx.pack
    defects = {
        "recurrence_residual": _entry(rec.residual, "recurrence_residual", tol),
    }
    riemann_def = recurrence.riemann_recurrence_defect(pack, rec.alpha)
    ricci_def = recurrence.ricci_recurrence_defect(pack, rec.alpha)
    if metrics.catalog_entry(ctx.spec.name).riemann_recurrent:
        defects["riemann_recurrence"] = _entry(riemann_def, "riemann_recurrence", tol)
        defects["ricci_recurrence"] = _entry(ricci_def, "ricci_recurrence", tol)
    else:
        # recurrence of the full Riemann tensor with the Weyl covector is a
        # property of specific families, not of every recurrent metric
        defects["riemann_recurrence"] = _info_entry(riemann_def)
        defects["ricci_recurrence"] = _info_entry(ricci_def)
    mu, eig_defect = recurrence.ricci_eigen_relation(pack, rec.alpha)
    defects["eigen_relation"] = _entry(eig_defect, "eigen_relation", tol)
    try:
        dc2 = recurrence.weyl_square_gradient(pack.weyl, pack.nabla_weyl, ctx.m)
        defects["gradient_consistency"] = _entry(
            recurrence.gradient_alpha_check(rec, dc2), "gradient_consistency", tol)
        gradient_note = None
    except InapplicableCheck as exc:
        gradient_note = exc.reason
    if ctx.closed_form is not None:
        alpha_ref = ctx.closed_form[0]
        defects["alpha_closed_form"] = _entry(
            scaled_defect(rec.alpha - alpha_ref, rec.alpha, alpha_ref),
            "alpha_closed_form", tol)
    info = {
        "alpha": [float(a) for a in rec.alpha],
        "alpha_sq": _finite(rec.alpha_sq),
        "alpha_null": bool(weylops.alpha_is_null(rec.alpha, ctx.m)),
        "parallel_weyl": rec.parallel_weyl,
        "recurrent": rec.recurrent,
        "ricci_eigenvalue": _finite(mu),
    }
    if gradient_note:
        info["gradient_consistency"] = gradient_note
    return _result_from_defects(defects, info)


def _check_closedness(ctx: PointContext) -> CheckResult:
    if ctx.weyl_zero:
        raise InapplicableCheck("conformally flat point")
    defect = recurrence.closedness(
        ctx.spec, ctx.point, h_step=ctx.tol["closedness_step"],
        tol=ctx.tol["recurrence_residual"])
    return _result_from_defects(
        {"closedness": _entry(defect, "closedness", ctx.tol)}, {})


def _check_identities(ctx: PointContext) -> CheckResult:
    tol = ctx.tol
    rec = ctx.rec
    pack = ctx.pack
    m = ctx.m
    alpha = rec.alpha
    defects = {
        "cyclic_weyl": _entry(
            weylops.cyclic_weyl_identity_defect(pack.weyl, alpha, m),
            "cyclic_weyl", tol),
        "alpha_compat": _entry(
            weylops.compatibility_defect(np.outer(alpha, alpha), pack.weyl, m),
            "alpha_compat", tol),
        "ricci_riemann_compat": _entry(
            weylops.compatibility_defect(pack.ricci, pack.riemann, m),
            "ricci_riemann_compat", tol),
        "semisymmetry": _entry(
            recurrence.semisymmetry_defect(pack.weyl, pack), "semisymmetry", tol),
        "alpha_riemann_contraction": _entry(
            recurrence.alpha_riemann_contraction_defect(pack, rec),
            "alpha_riemann_contraction", tol),
    }
    info = {}
    if ctx.nabla_alpha is not None:
        fam = weylops.gradient_family_defects(
            pack.weyl, pack.ricci, ctx.closed_form[0], ctx.nabla_alpha, m)
        defects["gradient_family"] = _entry(max(fam), "gradient_family", tol)
        info["gradient_family"] = [_finite(v) for v in fam]
        na = ctx.nabla_alpha
        info["alpha_closed"] = bool(
            scaled_defect(na - na.T, na, 1.0) <= 1e-10)
    else:
        info["gradient_family"] = "no closed-form recurrence gradient available"
    return _result_from_defects(defects, info)


def _check_c2(ctx: PointContext) -> CheckResult:
    if ctx.weyl_zero:
        raise InapplicableCheck("conformally flat point")
    rec = ctx.rec
    ratio = abs(rec.c2) / rec.c2_scale if rec.c2_scale > 0.0 else 0.0
    info = {
        "c2": _finite(rec.c2),
        "c2_null_ratio": _finite(ratio),
        "c2_zero": rec.c2_is_null,
    }
    return CheckResult(status="pass", info=info)


def _check_weyl_form(ctx: PointContext) -> CheckResult:
    tol = ctx.tol
    rec = ctx.rec
    pack, m = ctx.pack, ctx.m
    e = weylops.electric_tensor(pack.weyl, rec.alpha, m)
    _, defect = weylops.reconstruct_weyl(e, rec.alpha, m, c=pack.weyl)
    ratio = weylops.representation_square_ratio(e, rec.c2, m.n, m)
    defects = {
        "reconstruction": _entry(defect, "reconstruction", tol),
        "square_ratio": _entry(ratio, "square_ratio", tol),
        "e_compat": _entry(weylops.compatibility_defect(e.E, pack.weyl, m),
                           "e_compat", tol),
    }
    return _result_from_defects(defects, {"alpha_sq": _finite(e.alpha_sq)})


def _check_parallel_tensor(ctx: PointContext) -> CheckResult:
    tol = ctx.tol
    rec = ctx.rec
    pack, m = ctx.pack, ctx.m
    h = weylops.h_tensor(pack.weyl, m)
    trace = float(np.einsum("ij,ij->", m.ginv, h.h))
    defects = {
        "h_trace": _entry(abs(trace - 1.0), "h_trace", tol),
        "h_alpha_eigen": _entry(weylops.h_alpha_eigen_defect(h, rec.alpha, m),
                                "h_alpha_eigen", tol),
        "h_ricci_commutation": _entry(
            weylops.h_ricci_commutation_defect(h.h, pack.ricci, m),
            "h_ricci_commutation", tol),
        "nabla_h": _entry(weylops.parallel_h_defect(pack.weyl, pack.nabla_weyl, m),
                          "nabla_h", tol),
        "h_riemann_compat": _entry(
            weylops.compatibility_defect(h.h, pack.riemann, m), "e_compat", tol),
        "h_weyl_compat": _entry(
            weylops.compatibility_defect(h.h, pack.weyl, m), "e_compat", tol),
    }
    return _result_from_defects(defects, {"proportional_to_metric":
                                          h.proportional_to_metric})


def _check_grycak(ctx: PointContext) -> CheckResult:
    tol = ctx.tol
    rec = ctx.rec
    pack, m = ctx.pack, ctx.m
    h = weylops.h_tensor(pack.weyl, m)
    fit = weylops.grycak_fit(pack.ricci, pack.scalar, h, m)
    if fit.status == "einstein_indeterminate":
        return CheckResult(status="inapplicable",
                           reason="traceless parts vanish; G indeterminate",
                           info={"G": _finite(fit.G)})
    spectral = weylops.spectral_analysis(pack.ricci, h, pack.scalar, fit.G, m)
    defects = {"grycak_residual": _entry(fit.residual, "grycak_residual", tol)}
    for key, value in spectral.defects.items():
        defects[f"spectral_{key}"] = _entry(value, "spectral", tol)
    info = {"G": _finite(fit.G), "n_h": spectral.n_h,
            "mu": _finite(spectral.mu) if spectral.mu is not None else None,
            "mu_prime": _finite(spectral.mu_prime) if spectral.mu_prime is not None else None,
            "spectral_status": spectral.status,
            "cluster_count": spectral.cluster_count}
    result = _result_from_defects(defects, info)
    if spectral.status == "cluster_violation":
        result.status = "fail"
        result.reason = "more than two eigenvalue clusters"
    return result


def _check_electric(ctx: PointContext) -> CheckResult:
    rec = ctx.rec
    m = ctx.m
    if not metrics.is_lorentzian(m):
        raise InapplicableCheck("metric is not Lorentzian at this point")
    sq, scale = weylops.alpha_square(rec.alpha, m)
    if sq >= -weylops.ALPHA_NULL_RTOL * max(scale, 1e-300):
        raise InapplicableCheck("recurrence covector is not time-like")
    u = m.ginv @ rec.alpha
    pe = lorentz.purely_electric_test(ctx.pack.weyl, u, m,
                                      tol=ctx.tol["purely_electric"])
    defects = {
        "purely_electric": _entry(pe.defect, "purely_electric", ctx.tol),
        "magnetic_ratio": _entry(pe.magnetic_ratio, "purely_electric", ctx.tol),
    }
    return _result_from_defects(defects, {"consistent": pe.consistent})


def _check_IId(ctx: PointContext) -> CheckResult:
    rec = ctx.rec
    m = ctx.m
    if not weylops.alpha_is_null(rec.alpha, m):
        raise InapplicableCheck("recurrence covector is not null")
    res = lorentz.type_IId_test(ctx.pack.weyl, rec.alpha, m)
    rank = lorentz.rank_one_ricci_check(ctx.pack.ricci, rec.alpha)
    defects = {
        "type_IId": _entry(res.compat_defect, "type_IId", ctx.tol),
        "rank_one_ricci": _entry(rank.residual, "rank_one_ricci", ctx.tol),
        "ricci_antisym": _entry(rank.antisym_defect, "rank_one_ricci", ctx.tol),
    }
    info = {
        "alignment_defect": _finite(res.alignment_defect),
        "strong_alignment": bool(res.alignment_defect <= ctx.tol["alignment"]),
        "ricci_coefficient": _finite(rank.coefficient),
        "riemann_divergence": _finite(
            lorentz.riemann_divergence_defect(ctx.pack, m)),
    }
    return _result_from_defects(defects, info)


def _check_ppwave(ctx: PointContext) -> CheckResult:
    beta = ctx.null_covector
    if beta is None:
        raise InapplicableCheck("no candidate constant null covector for this metric")
    m = ctx.m
    a_value = None
    coeff = None
    if ctx.spec.name == "galaev":
        a_fn, _, _ = metrics.CATALOG["galaev"].parameters(ctx.spec)
        a_value = a_fn.value(ctx.point[1])
        coeff = (m.n + 2) / 2.0
    checks = lorentz.ppwave_checks(ctx.pack, m, beta, a_value=a_value,
                                   coeff_claimed=coeff)
    defects = {
        "ppwave_trace": _entry(checks.trace_defect, "ppwave_trace", ctx.tol),
        "constant_null": _entry(checks.cc_defect, "constant_null", ctx.tol),
        "rank_one_ricci": _entry(checks.ricci_rank_one_defect,
                                 "rank_one_ricci", ctx.tol),
    }
    info = {
        "ricci_coeff_fitted": _finite(checks.ricci_coeff_fitted),
        "ricci_coeff_claimed": _finite(checks.ricci_coeff_claimed)
        if checks.ricci_coeff_claimed is not None else None,
        "ricci_form_defect": _finite(checks.ricci_form_defect)
        if checks.ricci_form_defect is not None else None,
    }
    return _result_from_defects(defects, info)


def _check_decomposability(ctx: PointContext) -> CheckResult:
    if ctx.weyl_zero:
        raise InapplicableCheck("conformally flat point")
    rec = ctx.rec
    report = lorentz.decomposability_obstruction(ctx.m.n, rec.c2_is_null)
    info = {k: (_finite(v) if isinstance(v, float) else v)
            for k, v in report.items()}
    if not report["applicable"]:
        return CheckResult(status="inapplicable",
                           reason="null Weyl square: indecomposable branch "
                                  "admitted", info=info)
    return CheckResult(status="pass", info=info)


CHECKS = {
    "signature": _check_signature,
    "invariants": _check_invariants,
    "recurrence": _check_recurrence,
    "closedness": _check_closedness,
    "identities": _check_identities,
    "c2": _check_c2,
    "weyl_form": _check_weyl_form,
    "parallel_tensor": _check_parallel_tensor,
    "grycak": _check_grycak,
    "electric": _check_electric,
    "IId": _check_IId,
    "ppwave": _check_ppwave,
    "decomposability": _check_decomposability,
}


def _result_from_defects(defects: dict[str, DefectEntry], info: dict) -> CheckResult:
    failed = [k for k, d in defects.items() if d.passed is False]
    status = "fail" if failed else "pass"
    reason = f"defects over tolerance: {failed}" if failed else None
    return CheckResult(status=status, reason=reason, defects=defects, info=info)


def analyze_point(spec: metrics.MetricSpec, point, index: int,
                  tolerances: dict[str, float], checks: list[str]) -> PointRecord:
    ctx = PointContext(spec, point, tolerances)
    record = PointRecord(index=index, point=[float(x) for x in ctx.point],
                         status="ok")
    try:
        ctx.m
    except (DegenerateMetricError, DomainError) as exc:
        record.status = "metric_error"
        record.reason = str(exc)
        return record
    record.signature = list(metrics.signature(ctx.m))
    for name in checks:
        fn = CHECKS[name]
        try:
            record.checks[name] = fn(ctx)
        except InapplicableCheck as exc:
            record.checks[name] = CheckResult(status="inapplicable",
                                              reason=exc.reason)
        except (StencilError, DomainError) as exc:
            record.checks[name] = CheckResult(status="error", reason=str(exc))
    try:
        rec = ctx.rec if not ctx.weyl_zero else None
    except WeylLabError:
        rec = None
    record.flags = {
        "conformally_flat": ctx.weyl_zero,
        "recurrent": bool(rec.recurrent) if rec else None,
        "c2_zero": bool(rec.c2_is_null) if rec else None,
        "alpha_null": bool(weylops.alpha_is_null(rec.alpha, ctx.m)) if rec else None,
    }
    return record


# ---------------------------------------------------------------------------
# synthetic batteries

def representation_battery(dims: list[int], count: int, seed: int,
                           tol: dict[str, float]) -> dict:
    rng = np.random.default_rng(seed)
    records = []
    for i in range(count):
        n = dims[i % len(dims)]
        kind = "euclidean" if i % 2 == 0 else "lorentzian"
        m = synthetic.flat_point(n, kind)
        c, e0, alpha = synthetic.cr_weyl_instance(rng, m)
        et = weylops.electric_tensor(c, alpha, m)
        roundtrip = scaled_defect(et.E - e0, e0, et.E)
        from .tensors import Tensor, full_square
        c2 = full_square(Tensor(n, "dddd", c), m)
        ratio = weylops.representation_square_ratio(et, c2, n, m)
        trace_free = _weyl_trace_value(c, m)
        bianchi = scaled_defect(
            c + np.transpose(c, (0, 2, 3, 1)) + np.transpose(c, (0, 3, 1, 2)), c)
        e_compat = weylops.compatibility_defect(e0, c, m)
        a_compat = weylops.compatibility_defect(np.outer(alpha, alpha), c, m)
        cyclic = weylops.cyclic_weyl_identity_defect(c, alpha, m)
        h = weylops.h_tensor(c, m)
        h_trace = abs(float(np.einsum("ij,ij->", m.ginv, h.h)) - 1.0)
        h_eig = weylops.h_alpha_eigen_defect(h, alpha, m)
        nabla_c = np.einsum("i,jklm->ijklm", alpha, c)
        nabla_h = weylops.parallel_h_defect(c, nabla_c, m)
        records.append({
            "index": i, "n": n, "metric": kind,
            "defects": {
                "roundtrip": _finite(roundtrip),
                "square_ratio": _finite(ratio),
                "e_compat": _finite(e_compat),
                "alpha_compat": _finite(a_compat),
                "synthetic_trace_free": _finite(trace_free),
                "synthetic_bianchi": _finite(bianchi),
                "h_trace": _finite(h_trace),
                "h_alpha_eigen": _finite(h_eig),
                "nabla_h": _finite(nabla_h),
            },
            "info": {"cyclic_weyl": _finite(cyclic)},
        })
    return {"count": count, "dims": dims, "records": records}


def _weyl_trace_value(c: np.ndarray, m: metrics.MetricAtPoint) -> float:
    ginv = m.ginv
    traces = [
        np.einsum("jm,jklm->kl", ginv, c),
        np.einsum("jl,jklm->km", ginv, c),
        np.einsum("jk,jklm->lm", ginv, c),
    ]
    worst = max(maxabs(t) for t in traces)
    return scaled_defect(worst, maxabs(c) * maxabs(ginv))


def spectral_battery(dims: list[int], count: int, seed: int,
                     tol: dict[str, float]) -> dict:
    rng = np.random.default_rng(seed + 1)
    records = []
    for i in range(count):
        n = dims[i % len(dims)]
        n_h = 1 + int(rng.integers(0, n - 1))
        inst = synthetic.spectral_instance(rng, n, n_h)
        m = inst["m"]
        fit = weylops.grycak_fit(inst["ricci"], inst["scalar"], inst["h"], m)
        recovery = abs(fit.G - inst["G"]) / abs(inst["G"])
        spec_res = weylops.spectral_analysis(inst["ricci"], inst["h"],
                                             inst["scalar"], fit.G, m)
        commute = weylops.h_ricci_commutation_defect(inst["h"].h, inst["ricci"], m)
        h_eig = weylops.h_alpha_eigen_defect(inst["h"], inst["alpha"], m)
        defects = {
            "grycak_residual": _finite(fit.residual),
            "grycak_recovery": _finite(recovery),
            "h_ricci_commutation": _finite(commute),
            "h_alpha_eigen": _finite(h_eig),
        }
        for key, value in spec_res.defects.items():
            defects[f"spectral_{key}"] = _finite(value)
        rec = {
            "index": i, "n": n, "n_h": n_h,
            "defects": defects,
            "info": {"cluster_count": spec_res.cluster_count,
                     "measured_n_h": spec_res.n_h,
                     "status": spec_res.status},
        }
        if n_h == 1:
            rec["defects"]["quasi_einstein"] = _finite(
                weylops.quasi_einstein_shape_defect(
                    inst["ricci"], inst["scalar"], fit.G, inst["alpha"], m))
        records.append(rec)
    return {"count": count, "dims": dims, "records": records}


def lorentz_battery(dims: list[int], count: int, seed: int,
                    tol: dict[str, float]) -> dict:
    rng = np.random.default_rng(seed + 2)
    records = []
    inconsistent = 0
    compat_below = 0
    iid_below = 0
    for i in range(count):
        n = dims[i % len(dims)]
        m = synthetic.flat_point(n, "lorentzian")
        c_rand = synthetic.random_weyl_like(rng, m)
        u = synthetic.random_timelike_vector(rng, m)
        _, _, sum_defect = lorentz.em_split(c_rand, u, m)
        pe_rand = lorentz.purely_electric_test(c_rand, u, m,
                                               tol=tol["purely_electric"])
        alpha_t = synthetic.timelike_alpha(rng, m)
        c_pe, _, _ = synthetic.cr_weyl_instance(rng, m, alpha=alpha_t)
        u_pe = m.ginv @ alpha_t
        pe_cr = lorentz.purely_electric_test(c_pe, u_pe, m,
                                             tol=tol["purely_electric"])
        if not (pe_rand.consistent and pe_cr.consistent):
            inconsistent += 1
        s_rand = synthetic.random_symmetric(rng, n)
        compat = weylops.compatibility_defect(s_rand, c_rand, m)
        if compat <= tol["negative_control"]:
            compat_below += 1
        null_alpha = synthetic.random_null_covector(rng, m)
        iid = lorentz.type_IId_test(c_rand, null_alpha, m).compat_defect
        if iid <= tol["negative_control"]:
            iid_below += 1
        records.append({
            "index": i, "n": n,
            "defects": {
                "em_split_sum": _finite(sum_defect),
                "purely_electric": _finite(pe_cr.defect),
                "magnetic_ratio": _finite(pe_cr.magnetic_ratio),
            },
            "info": {
                "random_compat": _finite(compat),
                "random_IId": _finite(iid),
                "pe_consistent": bool(pe_rand.consistent and pe_cr.consistent),
            },
        })
    return {
        "count": count, "dims": dims, "records": records,
        "rates": {
            "pe_inconsistent_fraction": inconsistent / count if count else 0.0,
            "compat_below_threshold_fraction": compat_below / count if count else 0.0,
            "iid_below_threshold_fraction": iid_below / count if count else 0.0,
        },
    }


# ---------------------------------------------------------------------------
# run orchestration

def sample_points(config: RunConfig) -> np.ndarray:
    pts = config.points
    if pts.explicit is not None:
        arr = np.asarray(pts.explicit, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != config.n:
            raise DomainError(f"explicit points must be shaped (k, {config.n})")
        return arr
    rng = np.random.default_rng(pts.seed)
    lo, hi = pts.box
    return rng.uniform(lo, hi, size=(pts.count, config.n))


_WORKER_STATE: dict = {}


def _init_worker(config_json: str) -> None:
    _WORKER_STATE["config"] = RunConfig.model_validate_json(config_json)


def _point_worker(args) -> PointRecord:
    index, point = args
    config = _WORKER_STATE["config"]
    spec = metrics.MetricSpec(config.metric.name, config.n,
                              dict(config.metric.params))
    tol = merge_tolerances(config.tolerances)
    checks = resolve_checks(config.checks)
    return analyze_point(spec, np.asarray(point), index, tol, checks)


def resolve_checks(selection: list[str] | None) -> list[str]:
    if selection is None:
        return list(CHECK_NAMES)
    unknown = set(selection) - set(CHECK_NAMES)
    if unknown:
        raise DomainError(f"unknown checks: {sorted(unknown)}; "
                          f"available: {CHECK_NAMES}")
    return [name for name in CHECK_NAMES if name in set(selection)]


def run(config: RunConfig) -> AnalysisReport:
    spec = metrics.MetricSpec(config.metric.name, config.n,
                              dict(config.metric.params))
    tol = merge_tolerances(config.tolerances)
    checks = resolve_checks(config.checks)
    points = sample_points(config)
    if config.jobs > 1:
        payload = config.model_dump_json()
        with concurrent.futures.ProcessPoolExecutor(
                max_workers=config.jobs, initializer=_init_worker,
                initargs=(payload,)) as pool:
            records = list(pool.map(_point_worker,
                                    [(i, p.tolist()) for i, p in enumerate(points)]))
    else:
        records = [analyze_point(spec, p, i, tol, checks)
                   for i, p in enumerate(points)]

    dims = config.synthetic.dims or [5, 6, 7]
    syn_count = config.synthetic.count
    syn_seed = config.synthetic.seed
    synthetic_block = {
        "representation": representation_battery(dims, syn_count, syn_seed, tol),
        "spectral": spectral_battery(dims, max(syn_count // 2, 1), syn_seed, tol),
        "lorentz": lorentz_battery(dims, max(syn_count // 2, 1), syn_seed, tol),
    }

    arithmetic = {
        "zero_second_eigenvalue_dims": [
            list(t) for t in weylops.zero_second_eigenvalue_dims(range(5, 13))],
        "decomposability": {
            str(n): {k: (_finite(v) if isinstance(v, float) else v)
                     for k, v in lorentz.decomposability_obstruction(n, False).items()}
            for n in dims
        },
    }

    summary = summarize(records, synthetic_block, tol)
    verdict = "pass" if all(row.verdict != "fail" for row in summary) else "fail"
    report = AnalysisReport(
        config=config,
        engine=ENGINE_METADATA,
        points=records,
        synthetic=synthetic_block,
        arithmetic=arithmetic,
        checks=summary,
        verdict=verdict,
        timestamp=datetime.datetime.now(datetime.timezone.utc)
        .isoformat(timespec="seconds"),
    )
    return report


def summarize(records: list[PointRecord], synthetic_block: dict,
              tol: dict[str, float]) -> list[SummaryRow]:
    rows: dict[tuple[str, str], dict] = {}
    for record in records:
        for check_name, result in record.checks.items():
            for defect_name, entry in result.defects.items():
                key = (check_name, defect_name)
                slot = rows.setdefault(key, {"max": None, "tol": entry.tol,
                                             "count": 0, "failed": False})
                slot["count"] += 1
                if entry.value is not None:
                    slot["max"] = entry.value if slot["max"] is None \
                        else max(slot["max"], entry.value)
                if entry.passed is False:
                    slot["failed"] = True

    battery_tol_keys = {
        "roundtrip": "roundtrip", "square_ratio": "square_ratio",
        "e_compat": "e_compat", "alpha_compat": "e_compat",
        "synthetic_trace_free": "synthetic_trace_free",
        "synthetic_bianchi": "synthetic_bianchi",
        "h_trace": "h_trace", "h_alpha_eigen": "h_alpha_eigen",
        "nabla_h": "nabla_h", "grycak_residual": "grycak_residual",
        "grycak_recovery": "grycak_recovery",
        "h_ricci_commutation": "h_ricci_commutation",
        "quasi_einstein": "spectral",
        "em_split_sum": "em_split_sum", "purely_electric": "purely_electric",
        "magnetic_ratio": "purely_electric",
    }
    for battery_name, battery in synthetic_block.items():
        for record in battery["records"]:
            for defect_name, value in record["defects"].items():
                tol_key = battery_tol_keys.get(
                    defect_name,
                    "spectral" if defect_name.startswith("spectral_") else None)
                tol_value = tol.get(tol_key) if tol_key else None
                key = (f"synthetic.{battery_name}", defect_name)
                slot = rows.setdefault(key, {"max": None, "tol": tol_value,
                                             "count": 0, "failed": False})
                slot["count"] += 1
                if value is not None:
                    slot["max"] = value if slot["max"] is None \
                        else max(slot["max"], value)
                    if tol_value is not None and value > tol_value:
                        slot["failed"] = True

    lorentz_rates = synthetic_block["lorentz"]["rates"]
    rate_rows = [
        ("synthetic.lorentz", "pe_inconsistent_fraction",
         lorentz_rates["pe_inconsistent_fraction"], tol["pe_consistency"]),
        ("synthetic.lorentz", "compat_below_threshold_fraction",
         lorentz_rates["compat_below_threshold_fraction"], 0.05),
        ("synthetic.lorentz", "iid_below_threshold_fraction",
         lorentz_rates["iid_below_threshold_fraction"], 0.05),
    ]
    for check, name, value, tol_value in rate_rows:
        rows[(check, name)] = {"max": value, "tol": tol_value, "count": 1,
                               "failed": value > tol_value}

    out = []
    for (check, defect), slot in sorted(rows.items()):
        if slot["failed"]:
            verdict = "fail"
        elif slot["tol"] is None:
            verdict = "info"
        elif slot["max"] is None:
            verdict = "inapplicable"
        else:
            verdict = "pass"
        out.append(SummaryRow(check=check, defect=defect, max_value=slot["max"],
                              tolerance=slot["tol"], verdict=verdict,
                              evaluated=slot["count"]))
    return out


def exit_code(report: AnalysisReport) -> int:
    if report.points and all(p.status == "metric_error" for p in report.points):
        return 1
    return 0 if report.verdict == "pass" else 1


def render_summary(report: AnalysisReport) -> str:
    lines = [f"{'check':<28} {'defect':<32} {'max':>12} {'tol':>10} verdict"]
    for row in report.checks:
        max_s = f"{row.max_value:.3e}" if row.max_value is not None else "-"
        tol_s = f"{row.tolerance:.1e}" if row.tolerance is not None else "-"
        lines.append(f"{row.check:<28} {row.defect:<32} {max_s:>12} "
                     f"{tol_s:>10} {row.verdict}")
    lines.append(f"verdict: {report.verdict}")
    return "\n".join(lines)


def verify_report(payload: dict) -> VerifyResult:
    """Re-check a saved report's verdicts against its stored defects."""
    mismatches: list[str] = []
    report = AnalysisReport.model_validate(payload)
    for record in report.points:
        for check_name, result in record.checks.items():
            for defect_name, entry in result.defects.items():
                if entry.tol is None or entry.value is None:
                    continue
                expected = bool(entry.value <= entry.tol)
                if entry.passed is not None and entry.passed != expected:
                    mismatches.append(
                        f"point {record.index} {check_name}.{defect_name}: "
                        f"stored passed={entry.passed}, recomputed {expected}")
    tol = merge_tolerances(report.config.tolerances)
    recomputed = summarize(report.points, report.synthetic, tol)
    stored = {(r.check, r.defect): r for r in report.checks}
    for row in recomputed:
        srow = stored.get((row.check, row.defect))
        if srow is None:
            mismatches.append(f"missing summary row {row.check}.{row.defect}")
            continue
        if srow.verdict != row.verdict:
            mismatches.append(
                f"summary {row.check}.{row.defect}: stored verdict "
                f"{srow.verdict}, recomputed {row.verdict}")
        if (srow.max_value is None) != (row.max_value is None) or (
                srow.max_value is not None
                and abs(srow.max_value - row.max_value) > 0.0):
            mismatches.append(
                f"summary {row.check}.{row.defect}: stored max "
                f"{srow.max_value}, recomputed {row.max_value}")
    expected_verdict = "pass" if all(r.verdict != "fail" for r in recomputed) \
        else "fail"
    if report.verdict != expected_verdict:
        mismatches.append(f"verdict: stored {report.verdict}, "
                          f"recomputed {expected_verdict}")
    return VerifyResult(consistent=not mismatches, mismatches=mismatches)

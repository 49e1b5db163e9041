"""Analytic metric catalog, evaluated pointwise through order-3 jets.

Catalog entries build every metric component as a :class:`~weyllab.jets.Jet3`,
so the derivative stacks dg, d2g, d3g are exact (no finite differences).
Function-valued parameters are restricted to a tagged set of analytic forms
(exponential, polynomial of degree <= 4) to keep the differentiation exact
and run configurations declarative.

Coordinate conventions:
  * brinkmann_pq uses coordinates (x1, ..., xn) with g_11 = p(x1) q(x3),
    g_12 = 1 and unit transverse block (0-based indices 0..n-1).
  * galaev uses ordering (v, u, x3, ..., xn): g_vu = -1,
    g_uu = -sum_i (x_i)^2 [a(u) + F(u) lam_i], unit transverse block.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import jets
from .errors import DegenerateMetricError, DomainError

DEGENERACY_RTOL = 1e-12  # on |det g| relative to ||g||^n
EIGENVALUE_RTOL = 1e-10  # near-zero eigenvalue guard in signature()


# ---------------------------------------------------------------------------
# scalar function parameters

class ScalarFunction:
    """Analytic univariate function from a tagged config.

    kinds: {"kind": "exp"} for e^t, {"kind": "poly", "coeffs": [c0, c1, ...]}
    for c0 + c1 t + ... (degree <= 4).
    """

    def __init__(self, config: dict):
        if not isinstance(config, dict) or "kind" not in config:
            raise DomainError(f"function config must be a dict with 'kind': {config!r}")
        kind = config["kind"]
        if kind == "exp":
            self.kind = "exp"
            self.coeffs = None
        elif kind == "poly":
            coeffs = [float(c) for c in config.get("coeffs", [])]
            if not coeffs:
                raise DomainError("poly function requires nonempty 'coeffs'")
            if len(coeffs) > 5:
                raise DomainError("poly degree is limited to 4")
            self.kind = "poly"
            self.coeffs = coeffs
        else:
            raise DomainError(f"unknown function kind {kind!r}")

    def value(self, t: float) -> float:
        return self.deriv(0, t)

    def deriv(self, order: int, t: float) -> float:
        """Exact derivative of the given order (any order) at t."""
        if self.kind == "exp":
            return float(np.exp(t))
        c = self.coeffs
        acc = 0.0
        for k in range(len(c) - 1, order - 1, -1):
            fall = 1.0
            for r in range(order):
                fall *= k - r
            acc = acc * t + c[k] * fall
        return acc

    def jet(self, t: jets.Jet3) -> jets.Jet3:
        if self.kind == "exp":
            return jets.exp(t)
        acc = jets.constant(self.coeffs[-1], t.n)
        for c in reversed(self.coeffs[:-1]):
            acc = acc * t + c
        return acc

    def config(self) -> dict:
        if self.kind == "exp":
            return {"kind": "exp"}
        return {"kind": "poly", "coeffs": list(self.coeffs)}


# ---------------------------------------------------------------------------
# spec and evaluation containers

@dataclass(frozen=True)
class MetricSpec:
    name: str
    n: int
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        entry = catalog_entry(self.name)
        if self.n < entry.min_n:
            raise DomainError(
                f"metric {self.name!r} requires n >= {entry.min_n}, got {self.n}")
        entry.validate(self)


@dataclass(frozen=True)
class MetricAtPoint:
    n: int
    point: np.ndarray
    g: np.ndarray       # (n, n)
    ginv: np.ndarray    # (n, n)
    dg: np.ndarray      # dg[a, i, j] = d_a g_ij
    d2g: np.ndarray     # d2g[a, b, i, j] = d_a d_b g_ij
    d3g: np.ndarray     # d3g[a, b, c, i, j]
    det: float


def _check_nondegenerate(g: np.ndarray) -> float:
    det = float(np.linalg.det(g))
    scale = float(np.max(np.abs(g)))
    if scale == 0.0 or abs(det) < DEGENERACY_RTOL * scale ** g.shape[0]:
        raise DegenerateMetricError(
            f"metric is degenerate at this point (det={det:.3e})")
    return det


def evaluate(spec: MetricSpec, point) -> MetricAtPoint:
    """Evaluate g, g^-1 and exact derivative stacks at a point."""
    x = np.asarray(point, dtype=float)
    if x.shape != (spec.n,):
        raise DomainError(f"point has shape {x.shape}, expected ({spec.n},)")
    entry = catalog_entry(spec.name)
    comp = entry.metric_jets(spec, x)
    n = spec.n
    g = np.empty((n, n))
    dg = np.empty((n, n, n))
    d2g = np.empty((n, n, n, n))
    d3g = np.empty((n, n, n, n, n))
    for i in range(n):
        for j in range(n):
            jet = comp[i][j]
            if not jet.is_finite():
                raise DomainError(
                    f"metric component ({i},{j}) is not finite at {x.tolist()}")
            g[i, j] = jet.v
            dg[:, i, j] = jet.d1
            d2g[:, :, i, j] = jet.unpack_d2()
            d3g[:, :, :, i, j] = jet.unpack_d3()
    if not np.allclose(g, g.T, rtol=0.0, atol=1e-14 * max(1.0, np.max(np.abs(g)))):
        raise DomainError("metric evaluation produced a non-symmetric matrix")
    det = _check_nondegenerate(g)
    ginv = np.linalg.inv(g)
    resid = np.max(np.abs(ginv @ g - np.eye(n)))
    if resid > 1e-12 * max(1.0, np.max(np.abs(ginv)) * np.max(np.abs(g))):
        raise DegenerateMetricError(f"inverse check failed (residual {resid:.3e})")
    return MetricAtPoint(n, x, g, ginv, dg, d2g, d3g, det)


def signature(m: MetricAtPoint) -> tuple[int, int]:
    """Inertia (n_plus, n_minus) of g from a dense symmetric eigensolve."""
    eig = np.linalg.eigvalsh(0.5 * (m.g + m.g.T))
    scale = float(np.max(np.abs(eig)))
    if scale == 0.0 or np.min(np.abs(eig)) < EIGENVALUE_RTOL * scale:
        raise DegenerateMetricError("near-zero metric eigenvalue")
    n_plus = int(np.sum(eig > 0))
    n_minus = int(np.sum(eig < 0))
    return n_plus, n_minus


def is_lorentzian(m: MetricAtPoint) -> bool:
    """One timelike direction under either overall sign convention."""
    n_plus, n_minus = signature(m)
    return n_minus == 1 or n_plus == 1


# ---------------------------------------------------------------------------
# catalog entries

def _constant_matrix_jets(values: np.ndarray, n: int):
    return [[jets.constant(values[i, j], n) for j in range(n)] for i in range(n)]


class _FlatEntry:
    name = "flat"
    min_n = 4
    riemann_recurrent = False
    description = "Constant diagonal metric; negative control with zero curvature."
    param_schema = {
        "signature": "either 'lorentzian' (-,+,...,+), 'euclidean', or a list of +-1",
    }

    @staticmethod
    def diagonal(spec: MetricSpec) -> np.ndarray:
        sig = spec.params.get("signature", "lorentzian")
        if sig == "lorentzian":
            diag = np.ones(spec.n)
            diag[0] = -1.0
        elif sig in ("euclidean", "riemannian"):
            diag = np.ones(spec.n)
        else:
            diag = np.asarray([float(s) for s in sig])
            if diag.shape != (spec.n,) or not np.all(np.abs(diag) == 1.0):
                raise DomainError("signature list must hold n entries of +-1")
        return diag

    @classmethod
    def validate(cls, spec: MetricSpec) -> None:
        cls.diagonal(spec)

    @classmethod
    def metric_jets(cls, spec: MetricSpec, x: np.ndarray):
        return _constant_matrix_jets(np.diag(cls.diagonal(spec)), spec.n)

    @staticmethod
    def recurrence_covector(spec, x):
        return None

    @staticmethod
    def constant_null_covector(spec, x):
        return None


class _ConstCurvEntry:
    name = "constcurv"
    min_n = 4
    riemann_recurrent = False
    description = ("Riemannian space form of constant sectional curvature K "
                   "(conformally flat control: Weyl vanishes identically).")
    param_schema = {"curvature": "sectional curvature K (float, nonzero allowed 0)"}

    @staticmethod
    def validate(spec: MetricSpec) -> None:
        float(spec.params.get("curvature", 1.0))

    @staticmethod
    def metric_jets(spec: MetricSpec, x: np.ndarray):
        n = spec.n
        k = float(spec.params.get("curvature", 1.0))
        r2 = jets.constant(0.0, n)
        for i in range(n):
            s = jets.seed_variable(i, x[i], n)
            r2 = r2 + s * s
        u = 1.0 + r2 * (k / 4.0)
        if u.v == 0.0:
            raise DomainError("conformal factor singular at this point")
        phi2 = jets.pow_int(u, -2)
        zero = jets.constant(0.0, n)
        return [[phi2 if i == j else zero for j in range(n)] for i in range(n)]

    @staticmethod
    def recurrence_covector(spec, x):
        return None

    @staticmethod
    def constant_null_covector(spec, x):
        return None


class _BrinkmannEntry:
    name = "brinkmann_pq"
    min_n = 5
    riemann_recurrent = True  # whole Riemann tensor recurs with the Weyl covector
    description = ("Plane-fronted wave metric g_11 = p(x1) q(x3), g_12 = 1, unit "
                   "transverse block; conformally recurrent for analytic p, q.")
    param_schema = {
        "p": "function of x1: {'kind': 'exp'} or {'kind': 'poly', 'coeffs': [...]}",
        "q": "function of x3: same forms; a quadratic q gives a null recurrence vector",
    }

    @staticmethod
    def functions(spec: MetricSpec) -> tuple[ScalarFunction, ScalarFunction]:
        p = ScalarFunction(spec.params.get("p", {"kind": "exp"}))
        q = ScalarFunction(spec.params.get("q", {"kind": "exp"}))
        return p, q

    @classmethod
    def validate(cls, spec: MetricSpec) -> None:
        cls.functions(spec)

    @classmethod
    def metric_jets(cls, spec: MetricSpec, x: np.ndarray):
        n = spec.n
        p, q = cls.functions(spec)
        g11 = p.jet(jets.seed_variable(0, x[0], n)) * q.jet(jets.seed_variable(2, x[2], n))
        one = jets.constant(1.0, n)
        zero = jets.constant(0.0, n)
        rows = [[zero for _ in range(n)] for _ in range(n)]
        rows[0][0] = g11
        rows[0][1] = one
        rows[1][0] = one
        for i in range(2, n):
            rows[i][i] = one
        return rows

    @classmethod
    def recurrence_covector(cls, spec: MetricSpec, x: np.ndarray):
        """Closed-form recurrence covector (p'/p, 0, q'''/q'', 0, ...) and its
        coordinate gradient; None when the closed form is undefined."""
        p, q = cls.functions(spec)
        n = spec.n
        pv = p.value(x[0])
        q2 = q.deriv(2, x[2])
        if abs(pv) < 1e-12 or abs(q2) < 1e-12:
            return None
        p1, p2 = p.deriv(1, x[0]), p.deriv(2, x[0])
        q3, q4 = q.deriv(3, x[2]), q.deriv(4, x[2])
        alpha = np.zeros(n)
        alpha[0] = p1 / pv
        alpha[2] = q3 / q2
        dalpha = np.zeros((n, n))
        dalpha[0, 0] = p2 / pv - (p1 / pv) ** 2
        dalpha[2, 2] = q4 / q2 - (q3 / q2) ** 2
        return alpha, dalpha

    @staticmethod
    def constant_null_covector(spec: MetricSpec, x: np.ndarray):
        beta = np.zeros(spec.n)
        beta[0] = 1.0
        return beta


class _GalaevEntry:
    name = "galaev"
    min_n = 5
    riemann_recurrent = False  # Weyl recurs with F'/F du; Riemann only for special a, F
    description = ("pp-wave family in coordinates (v, u, x3, ..., xn): g_vu = -1, "
                   "g_uu = -sum (x_i)^2 [a(u) + F(u) lam_i], unit transverse block.")
    param_schema = {
        "a": "function of u (exp or poly)",
        "F": "function of u (exp or poly)",
        "lam": "list of n-2 reals summing to zero",
    }

    @staticmethod
    def parameters(spec: MetricSpec):
        a = ScalarFunction(spec.params.get("a", {"kind": "poly", "coeffs": [0.0, 1.0]}))
        f = ScalarFunction(spec.params.get("F", {"kind": "exp"}))
        lam = spec.params.get("lam")
        if lam is None:
            lam = [0.0] * (spec.n - 2)
            lam[0], lam[1] = 1.0, -1.0
        lam = np.asarray([float(v) for v in lam])
        if lam.shape != (spec.n - 2,):
            raise DomainError(f"lam must have n-2 = {spec.n - 2} entries")
        if abs(float(np.sum(lam))) > 1e-12:
            raise DomainError("lam entries must sum to zero")
        return a, f, lam

    @classmethod
    def validate(cls, spec: MetricSpec) -> None:
        cls.parameters(spec)

    @classmethod
    def metric_jets(cls, spec: MetricSpec, x: np.ndarray):
        n = spec.n
        a, f, lam = cls.parameters(spec)
        u = jets.seed_variable(1, x[1], n)
        au, fu = a.jet(u), f.jet(u)
        guu = jets.constant(0.0, n)
        for i in range(2, n):
            xi = jets.seed_variable(i, x[i], n)
            guu = guu + xi * xi * (au + fu * lam[i - 2])
        guu = -guu
        one = jets.constant(1.0, n)
        zero = jets.constant(0.0, n)
        rows = [[zero for _ in range(n)] for _ in range(n)]
        rows[0][1] = -one
        rows[1][0] = -one
        rows[1][1] = guu
        for i in range(2, n):
            rows[i][i] = one
        return rows

    @classmethod
    def recurrence_covector(cls, spec: MetricSpec, x: np.ndarray):
        """Closed form (0, F'/F, 0, ...): the Weyl part scales with F(u)."""
        a, f, lam = cls.parameters(spec)
        fv = f.value(x[1])
        if abs(fv) < 1e-12:
            return None
        f1, f2 = f.deriv(1, x[1]), f.deriv(2, x[1])
        alpha = np.zeros(spec.n)
        alpha[1] = f1 / fv
        dalpha = np.zeros((spec.n, spec.n))
        dalpha[1, 1] = f2 / fv - (f1 / fv) ** 2
        return alpha, dalpha

    @staticmethod
    def constant_null_covector(spec: MetricSpec, x: np.ndarray):
        beta = np.zeros(spec.n)
        beta[1] = 1.0
        return beta


CATALOG = {
    entry.name: entry
    for entry in (_FlatEntry, _ConstCurvEntry, _BrinkmannEntry, _GalaevEntry)
}


def catalog_entry(name: str):
    try:
        return CATALOG[name]
    except KeyError:
        raise DomainError(
            f"unknown metric {name!r}; catalog: {sorted(CATALOG)}") from None


def catalog_listing() -> list[dict]:
    return [
        {
            "name": e.name,
            "min_n": e.min_n,
            "description": e.description,
            "params": dict(e.param_schema),
        }
        for e in CATALOG.values()
    ]

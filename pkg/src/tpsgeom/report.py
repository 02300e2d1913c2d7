"""Verification suites, their results, and report serialization."""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import axioms, heisenberg as hh, statmech as sm
from .connections import (
    canonical_closed_form,
    d_eta_frame,
    fit_eta_einstein,
    killing_and_h_check,
    levi_civita_closed_form,
    normality_residual,
    parallelism_residuals,
    ricci_from_riemann,
)
from .errors import ConfigError
from .framecalc import FrameGeometry, ParaContactStructure
from .numerics import sample_chart_array
from .phase_space import (
    darboux_volume_basis,
    expected_volume_coefficient,
    exterior_derivative,
    heisenberg_frame,
    structure_functions_closed_form,
    top_form_coefficient,
    tps_structure,
)

SCHEMA_VERSION = 1
SUITES = ("geometry", "connections", "statmech", "heisenberg")
WORKERS_ENV = "TPSGEOM_WORKERS"


@dataclass(frozen=True)
class SuiteConfig:
    suite: str = "all"
    n: tuple[int, ...] = (1, 2, 3)
    points: int = 100
    seed: int = 42
    tol_closed: float = 1e-8
    tol_fd: float = 1e-6
    models: tuple[str, ...] = tuple(sm.BUILTIN_MODELS)
    format: str = "json"
    workers: int | None = None

    def __post_init__(self):
        if self.suite not in SUITES + ("all",):
            raise ConfigError(f"unknown suite {self.suite!r}; choose from {SUITES + ('all',)}")
        if not self.n or any(int(k) < 1 for k in self.n):
            raise ConfigError("every n must be >= 1")
        if self.points < 1:
            raise ConfigError("points must be >= 1")
        if not (self.tol_closed > 0 and self.tol_fd > 0):
            raise ConfigError("tolerances must be positive")
        if self.format not in ("json", "text"):
            raise ConfigError(f"unknown format {self.format!r}")
        if self.workers is not None and self.workers < 1:
            raise ConfigError("workers must be >= 1")
        for m in self.models:
            if m not in sm.BUILTIN_MODELS:
                raise ConfigError(f"unknown model {m!r}; built-ins: {sorted(sm.BUILTIN_MODELS)}")

    def suites(self) -> tuple[str, ...]:
        return SUITES if self.suite == "all" else (self.suite,)

    def echo(self) -> dict:
        d = asdict(self)
        d.pop("workers")
        d["n"] = list(self.n)
        d["models"] = list(self.models)
        return d


@dataclass
class CheckResult:
    check_id: str
    anchor: str
    n: int | None
    points: int
    max_residual: float
    tolerance: float
    passed: bool
    constants: dict = field(default_factory=dict)


def make_check(check_id, anchor, n, points, residual, tol, **constants) -> CheckResult:
    residual = float(residual)
    ok = bool(math.isfinite(residual) and residual <= tol)
    return CheckResult(check_id, anchor, n, int(points), residual, float(tol), ok, {k: _plain(v) for k, v in constants.items()})


def _plain(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, tuple):
        return list(v)
    return v


@dataclass
class Report:
    config: dict
    checks: list[CheckResult]
    duration_s: float = 0.0
    schema_version: int = SCHEMA_VERSION

    @property
    def summary(self) -> dict:
        passed = sum(c.passed for c in self.checks)
        return {"total": len(self.checks), "passed": passed, "failed": len(self.checks) - passed}

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "config": self.config,
            "summary": self.summary,
            "duration_s": self.duration_s,
            "checks": [asdict(c) for c in self.checks],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Report":
        checks = [CheckResult(**c) for c in d["checks"]]
        return cls(d["config"], checks, d["duration_s"], d["schema_version"])


# --- phase-space checks -----------------------------------------------------------


def _heisenberg_relations_residual(n, X) -> float:
    """[xi, Q_a] = [xi, P^a] = [P^a, P^b] = [Q_a, Q_b] = 0, [Q_a, P^b] = -delta_ab xi."""
    geom = FrameGeometry(tps_structure(n), heisenberg_frame(n))
    gam = geom.gamma(X)
    N = 2 * n + 1
    expected = np.zeros((N, N, N))
    for a in range(1, n + 1):
        expected[0, a, n + a] = -1.0
        expected[0, n + a, a] = 1.0
    return float(np.max(np.abs(gam - expected)))


def geometry_checks(n: int, X: np.ndarray, cfg: SuiteConfig, structure: ParaContactStructure | None = None) -> list[CheckResult]:
    s = structure or tps_structure(n)
    geom = FrameGeometry(s)
    pts = len(X)
    tc = cfg.tol_closed
    cid = lambda name: f"geometry.{name}.n{n}"  # noqa: E731
    out = [
        make_check(cid("structure_functions"), "canonical-frame brackets [e+, e-]", n, pts,
                   np.max(np.abs(geom.gamma(X) - structure_functions_closed_form(X))), tc),
        make_check(cid("heisenberg_relations"), "[Q_a, P^b] = -delta xi, others zero", n, pts, _heisenberg_relations_residual(n, X), tc),
    ]
    norm, dxi = axioms.reeb_residuals(geom, X)
    out.append(make_check(cid("reeb"), "eta(xi) = 1, d eta(xi, .) = 0", n, pts, max(norm, dxi), tc))
    out.append(make_check(cid("metric_reeb"), "G(xi, X) = eta(X)", n, pts, axioms.metric_reeb_residual(geom, X), tc))
    phi_tab = s.phi_table if s.phi_table is not None else geom.phi_frame(X)
    out.append(make_check(cid("phi_table"), "Phi e+ = -e-, Phi e- = -e+, Phi xi = 0", n, pts,
                          np.max(np.abs(geom.phi_frame(X) - phi_tab)), tc))
    out.append(make_check(cid("phi_squared"), "Phi^2 = I - eta (x) xi", n, pts, axioms.phi_squared_residual(geom, X), tc))
    out.append(make_check(cid("compatibility"), "G(Phi X, Phi Y) = -G(X, Y) + eta(X) eta(Y)", n, pts, axioms.compatibility_residual(geom, X), tc))
    sign, assoc = axioms.association(geom, X)
    out.append(make_check(cid("association"), "G(X, Phi Y) = s d eta(X, Y) / 2", n, pts, assoc, tc, association_sign=sign))
    out.append(make_check(cid("signature"), "metric signature (n+1, n)", n, pts, axioms.signature_residual(geom, X, (n + 1, n, 0)), 0.0))
    lie_g, h, grad = killing_and_h_check(X, s)
    out.append(make_check(cid("killing"), "L_xi G = 0, h = 0, nabla xi = -Phi", n, pts, max(lie_g, h, grad), tc))
    vol_pts = X[: min(pts, 5)]
    vol = max(
        abs(top_form_coefficient(s.contact_form(x), exterior_derivative(s.contact_form, x), darboux_volume_basis(n)) - expected_volume_coefficient(n))
        for x in vol_pts
    )
    out.append(make_check(cid("contact_volume"), "eta ^ (d eta)^n = n! volume", n, len(vol_pts), vol, tc, coefficient=expected_volume_coefficient(n)))
    return out


def connection_checks(n: int, X: np.ndarray, cfg: SuiteConfig, structure: ParaContactStructure | None = None) -> list[CheckResult]:
    s = structure or tps_structure(n)
    geom = FrameGeometry(s)
    pts = len(X)
    tc, tf = cfg.tol_closed, cfg.tol_fd
    cid = lambda name: f"connections.{name}.n{n}"  # noqa: E731
    lc = geom.levi_civita(X)
    can = geom.canonical(X)
    out = [
        make_check(cid("levi_civita_table"), "Koszul symbols vs tabulated Levi-Civita", n, pts, np.max(np.abs(lc - levi_civita_closed_form(X))), tc),
        make_check(cid("canonical_table"), "canonical symbols vs tabulated table", n, pts, np.max(np.abs(can - canonical_closed_form(X))), tc),
    ]
    R_can = geom.riemann(geom.canonical, X)
    out.append(make_check(cid("canonical_flatness"), "canonical curvature R~ = 0", n, pts, np.max(np.abs(R_can)), tf))

    ric = ricci_from_riemann(geom.riemann(geom.levi_civita, X))
    g, eta = geom.metric(X), geom.eta(X)
    lam, nu, res = fit_eta_einstein(ric, eta, g)
    lam0, nu0 = -(2.0 * n + 2.0), 2.0
    dev = max(np.max(np.abs(lam - lam0)), np.max(np.abs(nu - nu0)), np.max(res))
    out.append(make_check(cid("eta_einstein"), "Ric = lambda eta (x) eta + nu G", n, pts, dev, tf,
                          **{"lambda": float(np.mean(lam)), "nu": float(np.mean(nu)), "expected_lambda": lam0, "expected_nu": nu0}))
    pattern = np.diag(np.concatenate([[-2.0 * n], 2.0 * np.ones(n), -2.0 * np.ones(n)]))
    out.append(make_check(cid("ricci_pattern"), "Ric = diag(-2n, 2, .., -2, ..) in the canonical frame", n, pts, np.max(np.abs(ric - pattern)), tf))
    scal = np.einsum("...jl,...jl->...", np.linalg.inv(g), ric)
    out.append(make_check(cid("scalar_curvature"), "scalar curvature 2n (trace of the Ricci pattern)", n, pts,
                          max(np.max(np.abs(scal - 2.0 * n)), np.ptp(scal)), tf, scalar=float(np.mean(scal)), spread=float(np.ptp(scal))))

    d_eta, d_xi, d_phi, d_g = parallelism_residuals(X, s)
    out.append(make_check(cid("parallelism"), "nabla~ eta = nabla~ xi = nabla~ Phi = nabla~ G = 0", n, pts, max(d_eta, d_xi, d_phi, d_g), tf,
                          eta=d_eta, xi=d_xi, phi=d_phi, metric=d_g))
    T = geom.torsion(can, X)
    xi = geom.xi(X)
    deta = d_eta_frame(s, X)
    out.append(make_check(cid("torsion_law"), "T~ = d eta (x) xi", n, pts, np.max(np.abs(T - xi[..., :, None, None] * deta[..., None, :, :])), tc))
    out.append(make_check(cid("torsion_reeb"), "T~(xi, .) = 0", n, pts, np.max(np.abs(np.einsum("...i,...kij->...kj", xi, T))), tc))
    normal, horizontal = normality_residual(X, s)
    out.append(make_check(cid("normality"), "N_Phi = d eta (x) xi", n, pts, normal, 10 * tc))
    out.append(make_check(cid("normality_horizontal"), "horizontal part of N_Phi vanishes", n, pts, horizontal, tc))
    return out


# --- statistical checks ---------------------------------------------------------


def statmech_checks(model_name: str, cfg: SuiteConfig) -> list[CheckResult]:
    m = sm.get_model(model_name)
    grid = m.grid(21)
    tc, tf = cfg.tol_closed, cfg.tol_fd
    cid = lambda name: f"statmech.{name}.{model_name}"  # noqa: E731
    res = {k: 0.0 for k in ("w", "grad", "hess", "kl", "kl_neg", "ctrl", "legendre", "ds", "first_law", "moments", "eig", "det")}
    for q in grid:
        w = sm.log_partition(m, q)
        p = sm.mean_observables(m, q)
        c = sm.covariance_matrix(m, q)
        res["w"] = max(res["w"], abs(w - sm.CLOSED_FORMS[model_name](q)))
        res["grad"] = max(res["grad"], np.max(np.abs(sm.log_partition_gradient(m, q) - p)))
        res["hess"] = max(res["hess"], np.max(np.abs(sm.log_partition_hessian(m, q) - c)))
        q_to = q + 0.1
        if m.q_domain.contains(q_to):
            kl_i = sm.relative_entropy(m, q, q_to, "integral")
            kl_b = sm.relative_entropy(m, q, q_to, "bregman")
            res["kl"] = max(res["kl"], abs(kl_i - kl_b))
            res["kl_neg"] = max(res["kl_neg"], -min(kl_i, kl_b), abs(sm.relative_entropy(m, q, q)))
        G_ctrl, eta_ctrl = sm.control_pullbacks(m, q)
        res["ctrl"] = max(res["ctrl"], np.max(np.abs(G_ctrl - sm.fisher_rao_control_metric(m, q))))
        g_leg, eta_leg = sm.legendre_pullbacks(m, q)
        res["legendre"] = max(res["legendre"], np.max(np.abs(g_leg - sm.induced_metric(m, q).matrix)))
        res["first_law"] = max(res["first_law"], np.max(np.abs(eta_leg)))
        ed = sm.entropy_differential(m, q)
        res["ds"] = max(res["ds"], np.max(np.abs(eta_ctrl - ed.first_moment)))
        res["moments"] = max(res["moments"], ed.moment_identity_residual(), np.max(np.abs(ed.second_moment - sm.fisher_rao_control_metric(m, q))))
        res["eig"] = max(res["eig"], -float(np.min(np.linalg.eigvalsh(c))))
        res["det"] = max(res["det"], 0.0 if sm.invertibility_check(m, q)[1] else 1.0)
    pts = len(grid)
    out = [
        make_check(cid("log_partition"), "w = ln Z vs closed form", None, pts, res["w"], tc),
        make_check(cid("gradient"), "p = dw/dq", None, pts, res["grad"], tf),
        make_check(cid("hessian"), "covariance = Hessian of w", None, pts, res["hess"], tf),
        make_check(cid("kl_paths"), "KL integral = Bregman form", None, pts, res["kl"], tc),
        make_check(cid("kl_nonnegative"), "KL >= 0, KL(q, q) = 0", None, pts, res["kl_neg"], 1e-12),
        make_check(cid("control_pullback"), "varphi*(G) = Fisher-Rao control metric", None, pts, res["ctrl"], tc),
        make_check(cid("legendre_pullback"), "phi*(G) = Hessian metric on equilibrium states", None, pts, res["legendre"], tc),
        make_check(cid("entropy_first_moment"), "<ds> = varphi*(eta)", None, pts, res["ds"], 1e-12),
        make_check(cid("first_law"), "phi*(eta) = 0 along the Legendre embedding", None, pts, res["first_law"], 0.1 * tf),
        make_check(cid("second_moment"), "<ds^2> = Var(ds) + <ds>^2 = Fisher-Rao metric", None, pts, res["moments"], 1e-9),
        make_check(cid("covariance_psd"), "covariance positive semi-definite", None, pts, max(res["eig"], 0.0), 0.0),
        make_check(cid("invertibility"), "det Hess w != 0", None, pts, res["det"], 0.0),
    ]
    if model_name == "two_level":
        deltas = (0.1, 0.05, 0.025)
        rems = [sm.kl_quadratic_residual(m, [0.3], [d])[2] for d in deltas]
        order = sm.observed_order(deltas, rems)
        out.append(make_check(cid("kl_remainder_order"), "KL - (1/2) d.c.d = O(d^3)", None, len(deltas), abs(order - 3.0), 0.3, observed_order=order))
        spot = max(abs(sm.log_partition(m, [0.0]) - math.log(2.0)), abs(sm.relative_entropy(m, [0.0], [0.1]) - math.log(math.cosh(0.1))))
        out.append(make_check(cid("spot_values"), "w(0) = ln 2, KL(0 -> 0.1) = ln cosh 0.1", None, 2, spot, 1e-9))
    return out


# --- hyperbolic Heisenberg checks ----------------------------------------------------


def heisenberg_checks(n: int, points: int, seed: int, cfg: SuiteConfig) -> list[CheckResult]:
    tc = cfg.tol_closed
    cid = lambda name: f"heisenberg.{name}.n{n}"  # noqa: E731
    ident, inv, assoc = hh.group_axiom_residuals(n, 1000, seed)
    G = hh.sample_group_array(n, points, seed + 3)
    X = hh.to_chart(G)
    out = [
        make_check(cid("group_axioms"), "identity, inverse, associativity of the group law", n, 1000, max(ident, inv, assoc), 1e-12),
        make_check(cid("left_invariance"), "dL_g maps the frame at e to the frame at g", n, points, hh.left_invariance_residual(G), 1e-9),
    ]
    s = hh.hh_structure(n)
    geom = FrameGeometry(s, scheme=hh.HH_SCHEME)
    gam = geom.gamma(X)
    N = 2 * n + 1
    expected = np.zeros((N, N, N))
    for k in range(1, n + 1):
        expected[0, k, n + k] = 2.0
        expected[0, n + k, k] = -2.0
    out.append(make_check(cid("brackets"), "[U_k, V_k] = 2 xi, all others zero", n, points, np.max(np.abs(gam - expected)), tc))
    theta_on_frame = np.einsum("...im,...m->...i", geom.E(X), s.contact_form(X))
    dual = np.max(np.abs(theta_on_frame - np.eye(N)[0]))
    deta = axioms.d_eta(geom, X)
    duv = max(np.max(np.abs(deta[..., k, n + k] + 2.0)) for k in range(1, n + 1))
    out.append(make_check(cid("contact_form"), "Theta(xi) = 1, Theta(U) = Theta(V) = 0, d Theta(U_k, V_k) = -2", n, points, max(dual, duv), tc))
    vol = hh.contact_volume_coefficient(G[0])
    out.append(make_check(cid("contact_condition"), "Theta ^ (d Theta)^n != 0", n, 1, 0.0 if abs(vol) > 1e-6 else 1.0, 0.0, coefficient=vol))
    rep = hh.structure_checks(n, X)
    anchors = {
        "phi_table_residual": "Phi U = V, Phi V = U, Phi xi = 0",
        "metric_residual": "G diagonal (1, I, -I) in the frame",
        "signature_mismatches": "metric signature (n+1, n)",
        "reeb_residual": "Theta(xi) = 1, d Theta(xi, .) = 0",
        "phi_squared_residual": "Phi^2 = I - Theta (x) xi",
        "compatibility_residual": "G(Phi X, Phi Y) = -G(X, Y) + Theta(X) Theta(Y)",
        "association_residual": "G(X, Phi Y) = s d Theta(X, Y) / 2",
        "nijenhuis_residual": "N_Phi = d Theta (x) xi",
        "nijenhuis_horizontal": "horizontal part of N_Phi vanishes",
        "canonical_curvature": "flat canonical connection",
        "torsion_restricted": "canonical torsion purely vertical, T(xi, .) = 0",
    }
    for key, value in rep.residuals().items():
        tol = 0.0 if key == "signature_mismatches" else tc
        extra = {"association_sign": rep.association_sign} if key == "association_residual" else {}
        name = "signature" if key == "signature_mismatches" else key.replace("_residual", "")
        out.append(make_check(cid(name), anchors[key], n, points, value, tol, **extra))
    return out


# --- orchestration ------------------------------------------------------------------------


def _tasks(cfg: SuiteConfig) -> list[tuple]:
    tasks = []
    for suite in cfg.suites():
        if suite == "statmech":
            tasks += [(suite, m) for m in cfg.models]
        else:
            tasks += [(suite, n) for n in cfg.n]
    return tasks


def _run_task(task, cfg: SuiteConfig) -> list[CheckResult]:
    suite, arg = task
    if suite == "statmech":
        return statmech_checks(arg, cfg)
    n = int(arg)
    if suite == "heisenberg":
        return heisenberg_checks(n, cfg.points, cfg.seed, cfg)
    X = sample_chart_array(n, cfg.points, cfg.seed)
    return (geometry_checks if suite == "geometry" else connection_checks)(n, X, cfg)


def _run_task_star(args):
    return _run_task(*args)


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            value = int(env)
        except ValueError:
            raise ConfigError(f"{WORKERS_ENV} must be an integer, got {env!r}") from None
        if value < 1:
            raise ConfigError(f"{WORKERS_ENV} must be >= 1")
        return value
    return os.cpu_count() or 1


def run_suite(cfg: SuiteConfig) -> Report:
    """Run every check of the selected suites; results come back in task order."""
    start = time.perf_counter()
    tasks = _tasks(cfg)
    workers = min(cfg.workers or default_workers(), len(tasks)) if tasks else 1
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_task_star, [(t, cfg) for t in tasks]))
    else:
        chunks = [_run_task(t, cfg) for t in tasks]
    checks = [c for chunk in chunks for c in chunk]
    ids = [c.check_id for c in checks]
    if len(set(ids)) != len(ids):
        raise RuntimeError("duplicate check ids in report")
    return Report(cfg.echo(), checks, time.perf_counter() - start)


def serialize_report(report: Report, fmt: str = "json") -> bytes:
    if fmt == "json":
        return (json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n").encode()
    if fmt != "text":
        raise ConfigError(f"unknown format {fmt!r}")
    lines = [f"{'check':<52} {'n':>3} {'pts':>5} {'residual':>11} {'tol':>9}  result", "-" * 92]
    for c in report.checks:
        n = "-" if c.n is None else str(c.n)
        lines.append(f"{c.check_id:<52} {n:>3} {c.points:>5} {c.max_residual:>11.3e} {c.tolerance:>9.1e}  {'PASS' if c.passed else 'FAIL'}")
        if c.constants:
            consts = ", ".join(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}" for k, v in sorted(c.constants.items()))
            lines.append(f"    {c.anchor}; {consts}")
        else:
            lines.append(f"    {c.anchor}")
    s = report.summary
    lines.append("-" * 92)
    lines.append(f"{s['passed']}/{s['total']} passed, {s['failed']} failed in {report.duration_s:.1f}s")
    return ("\n".join(lines) + "\n").encode()


def parse_report(data: bytes | str) -> Report:
    return Report.from_dict(json.loads(data))

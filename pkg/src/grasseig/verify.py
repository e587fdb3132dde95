"""Numeric property suites behind the ``verify`` command.

Each check draws random instances, evaluates an identity or inequality that
the library promises, and reports the worst violation observed. Failures are
report content, not exceptions, so the command can always emit a full
machine-readable summary.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .grassmann import (
    SubspacePoint,
    bounded_curvature_gap,
    distance,
    exp,
    log,
    nonneg_curvature_gap,
    perturb_within,
    project_tangent,
    random_point,
)
from .matops import DenseOperator
from .rayleigh import (
    derive_params,
    f_value,
    grad,
    hessian_quadform,
    quadratic_growth_gap,
    weak_strong_gap,
)
from .solvers import agd_init, agd_step, alpha_solve, steepest_descent_step


@dataclass
class CheckResult:
    name: str
    samples: int
    max_violation: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.max_violation <= self.tol)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["samples"] = int(d["samples"])
        d["max_violation"] = float(d["max_violation"])
        d["tol"] = float(d["tol"])
        d["passed"] = self.passed
        return d


def _random_tangent(rng, X, spectral_cap=1.4):
    G = project_tangent(X, rng.standard_normal(X.rep.shape))
    scale = rng.uniform(0.05, 1.0) * spectral_cap / max(G.spectral_norm, 1e-300)
    return G.scaled(scale)


def _diag_instance(rng, n=20, p=3):
    lam = np.sort(rng.uniform(0.0, 4.0, size=n))[::-1]
    lam[p - 1] = lam[p] + rng.uniform(0.2, 1.0)  # keep a workable gap
    lam = np.sort(lam)[::-1]
    A = DenseOperator(np.diag(lam))
    v_alpha = SubspacePoint(np.eye(n)[:, :p])
    params = derive_params(lam, p)
    f_star = -float(lam[:p].sum())
    return A, lam, v_alpha, params, f_star


# ---------------------------------------------------------------------------
# geometry
# ---------------------------------------------------------------------------


def check_exp_log_roundtrip(samples=50, seed=0):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        n, p = rng.choice([(10, 2), (30, 5), (100, 10)])
        X = random_point(n, p, rng.integers(2**32))
        G = _random_tangent(rng, X)
        back = log(X, exp(X, G))
        err = np.linalg.norm(back.mat - G.mat) / max(1.0, G.norm)
        worst = max(worst, err)
    return CheckResult("exp_log_roundtrip", samples, worst, 1e-8)


def check_distance_equals_log_norm(samples=50, seed=1):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        X = random_point(30, 4, rng.integers(2**32))
        Y = perturb_within(X, rng.uniform(0.01, 1.4), rng.integers(2**32))
        worst = max(worst, abs(distance(X, Y) - log(X, Y).norm))
    return CheckResult("distance_equals_log_norm", samples, worst, 1e-8)


def check_unit_speed(samples=50, seed=2):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        X = random_point(25, 3, rng.integers(2**32))
        G = _random_tangent(rng, X)
        G = G.scaled(1.0 / G.norm)
        t = rng.uniform(0.0, 1.4)
        worst = max(worst, abs(distance(X, exp(X, G.scaled(t))) - t))
    return CheckResult("geodesic_unit_speed", samples, worst, 1e-8)


def check_representative_invariance(samples=50, seed=3):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        X = random_point(20, 4, rng.integers(2**32))
        Y = random_point(20, 4, rng.integers(2**32))
        Q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
        XQ = SubspacePoint(X.rep @ Q)
        worst = max(worst, abs(distance(X, Y) - distance(XQ, Y)))
        worst = max(worst, distance(X, XQ))
    return CheckResult("representative_invariance", samples, worst, 1e-10)


def check_nonneg_curvature(samples=200, seed=4):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        c = random_point(20, 3, rng.integers(2**32))
        a = perturb_within(c, rng.uniform(0, np.pi / 8), rng.integers(2**32))
        b = perturb_within(c, rng.uniform(0, np.pi / 8), rng.integers(2**32))
        worst = max(worst, -nonneg_curvature_gap(a, b, c))
    return CheckResult("nonneg_curvature_contraction", samples, worst, 1e-10)


def check_bounded_curvature(samples=200, seed=5):
    rng = np.random.default_rng(seed)
    radius = 1.0 / (4.0 * np.sqrt(2.0))
    worst = 0.0
    for _ in range(samples):
        a = random_point(20, 3, rng.integers(2**32))
        b = perturb_within(a, rng.uniform(0, 0.3), rng.integers(2**32))
        c = perturb_within(a, rng.uniform(0, radius), rng.integers(2**32))
        d = perturb_within(a, rng.uniform(0, radius), rng.integers(2**32))
        worst = max(worst, -bounded_curvature_gap(a, b, c, d, K=2.0))
    return CheckResult("bounded_curvature_comparison", samples, worst, 1e-10)


# ---------------------------------------------------------------------------
# convexity and calculus
# ---------------------------------------------------------------------------


def check_quadratic_growth(samples=50, seed=10):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        A, lam, v_alpha, params, f_star = _diag_instance(rng)
        X = perturb_within(v_alpha, rng.uniform(0.01, 1.0), rng.integers(2**32))
        worst = max(worst, -quadratic_growth_gap(A, X, v_alpha, params, f_star))
    return CheckResult("quadratic_growth", samples, worst, 1e-10)


def check_weak_strong(samples=50, seed=11):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        A, lam, v_alpha, params, f_star = _diag_instance(rng)
        X = perturb_within(v_alpha, rng.uniform(0.01, 1.0), rng.integers(2**32))
        worst = max(worst, -weak_strong_gap(A, X, v_alpha, params, f_star))
    return CheckResult("weak_strong_convexity", samples, worst, 1e-10)


def check_descent_step(samples=50, seed=12):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        A, lam, v_alpha, params, f_star = _diag_instance(rng)
        Y = random_point(A.n, 3, rng.integers(2**32))
        G, AY = grad(A, Y)
        fy = f_value(A, Y, AX=AY)
        X = exp(Y, G.scaled(-1.0 / params.gamma))
        fx = f_value(A, X)
        worst = max(worst, fx - (fy - G.norm**2 / (2.0 * params.gamma)))
    return CheckResult("gradient_step_decrease", samples, worst, 1e-10)


def check_linesearch_decrease(samples=50, seed=13):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        A, lam, v_alpha, params, f_star = _diag_instance(rng)
        Y = random_point(A.n, 3, rng.integers(2**32))
        X, info = steepest_descent_step(A, Y)
        fx = f_value(A, X)
        worst = max(worst, fx - (info.f - 0.4 * info.grad_norm**2 / params.gamma))
    return CheckResult("linesearch_step_decrease", samples, worst, 1e-10)


def check_quadratic_upper_bound(samples=50, seed=14):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        A, lam, v_alpha, params, f_star = _diag_instance(rng)
        Y = random_point(A.n, 3, rng.integers(2**32))
        X = perturb_within(Y, rng.uniform(0.01, 1.2), rng.integers(2**32))
        G, AY = grad(A, Y)
        fy = f_value(A, Y, AX=AY)
        L = log(Y, X)
        d = distance(X, Y)
        bound = fy + float(np.einsum("ij,ij->", G.mat, L.mat)) + 0.5 * params.gamma * d**2
        worst = max(worst, f_value(A, X) - bound)
    return CheckResult("quadratic_upper_bound", samples, worst, 1e-10)


def check_hessian_bound(samples=100, seed=15):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        A, lam, v_alpha, params, f_star = _diag_instance(rng)
        X = random_point(A.n, 3, rng.integers(2**32))
        G = _random_tangent(rng, X)
        q = hessian_quadform(A, X, G)
        worst = max(worst, abs(q) - params.gamma * G.norm**2)
    return CheckResult("hessian_eigenvalue_bound", samples, worst, 1e-8)


def check_gradient_fd(samples=20, seed=16):
    rng = np.random.default_rng(seed)
    h = 1e-6
    worst = 0.0
    for _ in range(samples):
        A, lam, v_alpha, params, f_star = _diag_instance(rng)
        X = random_point(A.n, 3, rng.integers(2**32))
        H = _random_tangent(rng, X)
        H = H.scaled(1.0 / H.norm)
        G, _ = grad(A, X)
        fd = (f_value(A, exp(X, H.scaled(h))) - f_value(A, exp(X, H.scaled(-h)))) / (2 * h)
        exact = float(np.einsum("ij,ij->", G.mat, H.mat))
        worst = max(worst, abs(fd - exact) / max(1.0, abs(exact)))
    return CheckResult("gradient_finite_difference", samples, worst, 1e-5)


def check_hessian_fd(samples=20, seed=17):
    rng = np.random.default_rng(seed)
    h = 1e-4
    worst = 0.0
    for _ in range(samples):
        A, lam, v_alpha, params, f_star = _diag_instance(rng)
        X = random_point(A.n, 3, rng.integers(2**32))
        G = _random_tangent(rng, X)
        G = G.scaled(1.0 / G.norm)
        f0 = f_value(A, X)
        fp = f_value(A, exp(X, G.scaled(h)))
        fm = f_value(A, exp(X, G.scaled(-h)))
        fd = (fp - 2 * f0 + fm) / h**2
        exact = hessian_quadform(A, X, G)
        worst = max(worst, abs(fd - exact) / max(1.0, abs(exact)))
    return CheckResult("hessian_finite_difference", samples, worst, 1e-4)


# ---------------------------------------------------------------------------
# solver machinery
# ---------------------------------------------------------------------------


def check_alpha_closed_form(samples=1000, seed=20):
    from scipy.optimize import brentq

    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        gamma = rng.uniform(0.5, 50.0)
        mu = gamma * rng.uniform(1e-4, 1.0)
        gamma_k = rng.uniform(mu / 2, gamma)
        a = alpha_solve(gamma_k, mu, gamma)
        root = brentq(
            lambda x: 4 * x**2 - ((1 - x) * gamma_k + x * mu) / gamma, 0.0, 1.0,
            xtol=1e-15, rtol=8.9e-16,
        )
        worst = max(worst, abs(a - root))
    return CheckResult("alpha_closed_form", samples, worst, 1e-12)


def check_gamma_floor(samples=5, seed=21, iters=60):
    rng = np.random.default_rng(seed)
    worst = 0.0
    total = 0
    for _ in range(samples):
        A, lam, v_alpha, params, f_star = _diag_instance(rng, n=30, p=3)
        X0 = perturb_within(v_alpha, 0.3, rng.integers(2**32))
        state = agd_init(X0, params, "exp")
        for _k in range(iters):
            state, _ = agd_step(state, A)
            worst = max(worst, params.mu / 2 - state.gamma_k)
            total += 1
    return CheckResult("gamma_floor", total, worst, 0.0)


SUITES = {
    "geometry": [
        check_exp_log_roundtrip,
        check_distance_equals_log_norm,
        check_unit_speed,
        check_representative_invariance,
        check_nonneg_curvature,
        check_bounded_curvature,
    ],
    "convexity": [
        check_quadratic_growth,
        check_weak_strong,
        check_descent_step,
        check_linesearch_decrease,
        check_quadratic_upper_bound,
        check_hessian_bound,
        check_gradient_fd,
        check_hessian_fd,
    ],
    "solvers": [
        check_alpha_closed_form,
        check_gamma_floor,
    ],
}


def run_suites(selector: str | None = None, samples: int | None = None, seed: int = 0) -> dict:
    """Run one suite (or all) and return a machine-readable report."""
    if selector:
        if selector not in SUITES:
            raise ValueError(f"unknown suite {selector!r}; available: {sorted(SUITES)}")
        names = [selector]
    else:
        names = list(SUITES)
    report = {"suites": {}, "passed": True}
    for name in names:
        results = []
        for offset, check in enumerate(SUITES[name]):
            kwargs = {"seed": seed + 100 * offset}
            if samples is not None:
                kwargs["samples"] = samples
            res = check(**kwargs)
            results.append(res.as_dict())
            report["passed"] = report["passed"] and res.passed
        report["suites"][name] = results
    return report

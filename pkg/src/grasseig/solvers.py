"""Subspace solvers: accelerated Riemannian gradient descent with geodesic
search and momentum, plus the classical baselines (steepest descent, subspace
iteration, Chebyshev-filtered subspace iteration, nonlinear conjugate
gradient), a scalar line-search utility, and trace recording.

The cost unit throughout is one block product A @ (n-by-p block). Each trace
row reports the counter value after the product that evaluated the row's
function value, so per-iteration budgets are directly visible in the traces:
2 per iteration for the accelerated method, 1 for steepest descent, subspace
iteration, and conjugate gradient (plus a periodic cache-refresh product),
and one per polynomial degree for the Chebyshev filter.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg

from .errors import (
    DegenerateGapError,
    DegenerateStepError,
    GeometryError,
    GrasseigError,
    ParameterError,
    SolverRunError,
)
from .grassmann import SubspacePoint, TangentVector, distance, exp, log, qf_pos
from .matops import SymmetricOperator
from .rayleigh import (
    GeodesicCoeffs,
    SpectralParams,
    eval_along,
    eval_along_deriv,
    geodesic_endpoint,
    grad,
    restrict_to_geodesic,
)

SOLVER_IDS = ("agd", "sd", "subspace", "cheb", "rcg")


# ---------------------------------------------------------------------------
# configuration and trace types
# ---------------------------------------------------------------------------


@dataclass
class LineSearchConfig:
    """Scalar search settings: golden section to ``tol`` plus derivative polish."""

    tol: float = 1e-10
    max_evals: int = 200

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("line-search tolerance must be positive")


@dataclass
class SolverConfig:
    """Stopping rules and recording cadence for :func:`run`.

    ``max_iters`` and ``grad_tol`` default from the spectral parameters when
    available (see :func:`default_max_iters`); at least one stopping rule is
    always active.
    """

    max_iters: int | None = None
    grad_tol: float | None = None
    dist_tol: float | None = None
    record_every: int = 1


@dataclass
class TraceRow:
    iter: int
    block_matvecs: int
    fval: float
    subopt: float | None
    dist: float | None
    grad_norm: float
    wall_time_s: float


@dataclass
class Reference:
    """Ground truth for monitoring: the target subspace and optimal value."""

    v_alpha: SubspacePoint
    f_star: float


CSV_COLUMNS = ("iter", "block_matvecs", "fval", "subopt", "dist", "grad_norm", "wall_time_s")


@dataclass
class SolverTrace:
    """Per-iteration records plus run metadata.

    CSV bodies are deterministic for fixed inputs and seeds except for the
    wall_time_s column; timestamps live in '#'-prefixed metadata lines.
    """

    meta: dict
    rows: list[TraceRow] = field(default_factory=list)

    def write_csv(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            for key, value in self.meta.items():
                fh.write(f"# {key}: {value}\n")
            fh.write(",".join(CSV_COLUMNS) + "\n")
            for r in self.rows:
                fh.write(
                    ",".join(
                        [
                            str(r.iter),
                            str(r.block_matvecs),
                            _fmt(r.fval),
                            _fmt(r.subopt),
                            _fmt(r.dist),
                            _fmt(r.grad_norm),
                            _fmt(r.wall_time_s),
                        ]
                    )
                    + "\n"
                )

    @staticmethod
    def read_csv(path) -> "SolverTrace":
        meta, rows = {}, []
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
        body = []
        for line in lines:
            if line.startswith("#"):
                text = line[1:].strip()
                if ":" in text:
                    k, v = text.split(":", 1)
                    meta[k.strip()] = v.strip()
            elif line.strip():
                body.append(line)
        if not body or body[0].split(",") != list(CSV_COLUMNS):
            raise ValueError(f"{path} does not carry the expected trace schema")
        for line in body[1:]:
            parts = line.split(",")
            rows.append(
                TraceRow(
                    iter=int(parts[0]),
                    block_matvecs=int(parts[1]),
                    fval=float(parts[2]),
                    subopt=float(parts[3]) if parts[3] else None,
                    dist=float(parts[4]) if parts[4] else None,
                    grad_norm=float(parts[5]),
                    wall_time_s=float(parts[6]),
                )
            )
        return SolverTrace(meta=meta, rows=rows)


def _fmt(v) -> str:
    if v is None:
        return ""
    return format(float(v), ".17g")


# ---------------------------------------------------------------------------
# scalar line search
# ---------------------------------------------------------------------------

_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0


def scalar_minimize(
    g,
    interval=(0.0, 1.0),
    tol: float = 1e-10,
    max_evals: int = 200,
    deriv=None,
    scan: int = 0,
    value_noise: float = 0.0,
) -> float:
    """Argmin of a scalar function on a closed interval.

    Golden section narrows a bracket to width ``tol``; when a derivative
    handle is supplied, the result is polished by rooting the derivative
    near the incumbent, which pins interior minimizers far below the
    sqrt(noise) resolution of value comparisons. An optional coarse pre-scan
    seeds the bracket for functions with several local minima. Both
    endpoints are always evaluated, so monotone functions return an exact
    endpoint; ties break toward the smaller argument. ``value_noise`` is the
    float-evaluation noise of g: a polished candidate may read up to that
    much above the incumbent and still be accepted (its true value is not
    worse). If the evaluation budget runs out, the best point so far is
    returned with a warning.
    """
    a0, b0 = float(interval[0]), float(interval[1])
    if b0 < a0:
        raise ValueError(f"empty interval {interval}")
    if b0 == a0:
        return a0

    state = {"evals": 0, "best_x": None, "best_f": np.inf}

    def ev(x):
        state["evals"] += 1
        fx = g(x)
        if fx < state["best_f"]:
            state["best_f"], state["best_x"] = fx, x
        return fx

    f_a0 = ev(a0)
    f_b0 = ev(b0)
    a, b = a0, b0
    if scan >= 3:
        xs = np.linspace(a0, b0, scan)
        vals = np.empty(scan)
        vals[0], vals[-1] = f_a0, f_b0
        for i in range(1, scan - 1):
            vals[i] = ev(xs[i])
        # smallest x within the noise tolerance of the best: deterministic
        # under perturbations that reshuffle near-tied local minima
        vmin = float(np.min(vals))
        i = int(np.argmax(vals <= vmin + value_noise))
        a = xs[max(i - 1, 0)]
        b = xs[min(i + 1, scan - 1)]

    x1 = b - _INVPHI * (b - a)
    x2 = a + _INVPHI * (b - a)
    f1, f2 = ev(x1), ev(x2)
    while (b - a) > tol and state["evals"] < max_evals:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INVPHI * (b - a)
            f1 = ev(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INVPHI * (b - a)
            f2 = ev(x2)
    if (b - a) > tol:
        warnings.warn(
            f"line search hit the {max_evals}-evaluation budget at bracket "
            f"width {b - a:.3e}; returning best point so far",
            RuntimeWarning,
        )

    if deriv is not None:
        root = _derivative_root_near(deriv, 0.5 * (a + b), a0, b0, tol)
        if root is not None:
            fr = ev(root)
            if fr <= state["best_f"] + value_noise:
                return float(root)

    return float(state["best_x"])


def _derivative_root_near(deriv, x: float, a0: float, b0: float, tol: float):
    """Stationary point of the objective near x, or None.

    Expands a window around x until the derivative changes sign, then roots
    it with Brent's method; the window is capped so the search cannot wander
    into a different basin.
    """
    from scipy.optimize import brentq

    span = b0 - a0
    w = max(tol, 1e-9 * span)
    while True:
        lo, hi = max(a0, x - w), min(b0, x + w)
        dlo, dhi = deriv(lo), deriv(hi)
        if not (np.isfinite(dlo) and np.isfinite(dhi)):
            return None
        if dlo == 0.0:
            return lo
        if dhi == 0.0:
            return hi
        if dlo * dhi < 0.0:
            # may bracket a maximum when the window overshoots; the caller's
            # value gate rejects that case
            return float(brentq(deriv, lo, hi, xtol=1e-15, rtol=8.9e-16))
        if lo <= a0 and hi >= b0:
            return None
        w *= 8.0


# ---------------------------------------------------------------------------
# accelerated gradient descent
# ---------------------------------------------------------------------------


@dataclass
class AgdState:
    """State of the accelerated iteration: iterate, momentum point, and the
    scalar sequence driving the momentum weights."""

    X: SubspacePoint
    V: SubspacePoint
    gamma_k: float
    shrink_beta: float
    k: int
    params: SpectralParams
    variant: str
    gamma_eff: float
    gamma0: float


@dataclass
class GeodesicSearchResult:
    beta: float
    Y: SubspacePoint
    AY: np.ndarray
    f_at_start: float
    f_at_X: float
    f_at_Y: float
    coeffs: GeodesicCoeffs | None


@dataclass
class AgdStepInfo:
    beta_k: float
    alpha_k: float
    f_x: float
    f_y: float
    grad_norm_y: float
    matvecs_after_search: int
    y: SubspacePoint


def gamma0_lower_bound(params: SpectralParams) -> float:
    """Smallest admissible initial scalar gamma_0 for the shrinkage recursion."""
    beta = 0.2 * np.sqrt(params.mu / params.gamma)
    C = np.sqrt(beta**2 + (1.0 + beta) * params.mu / params.gamma)
    return (C - beta) / (C + beta) * params.mu


def agd_init(
    X0: SubspacePoint,
    params: SpectralParams,
    variant: str = "exp",
    gamma0: float | None = None,
) -> AgdState:
    """Initial accelerated-descent state with X = V and the default gamma_0.

    The default gamma_0 over-approximates the admissible lower bound by
    substituting gamma for mu in its formula, which keeps gamma_0 <= gamma
    while guaranteeing gamma_k >= mu/2 throughout. An explicit gamma0 must
    lie in [lower bound, gamma]. The ``retr`` variant replaces gamma by
    gamma_tilde = 5/4 gamma in the step-weight equation and takes the
    gradient step by QR retraction with an exact line search.
    """
    if variant not in ("exp", "retr"):
        raise ValueError(f"unknown variant {variant!r}; use 'exp' or 'retr'")
    if params.delta <= 0.0:
        raise DegenerateGapError("spectral gap is zero; the target subspace is not unique")
    beta = 0.2 * np.sqrt(params.mu / params.gamma)
    gamma_eff = params.gamma if variant == "exp" else params.gamma_tilde
    if gamma0 is None:
        C = np.sqrt(beta**2 + beta + 1.0)
        gamma0 = (C - beta) / (C + beta) * params.gamma
    else:
        lo = gamma0_lower_bound(params)
        if not lo - 1e-12 * params.gamma <= gamma0 <= params.gamma * (1 + 1e-12):
            raise ValueError(
                f"gamma0 = {gamma0} outside the admissible range [{lo}, {params.gamma}]"
            )
    return AgdState(
        X=X0, V=X0, gamma_k=float(gamma0), shrink_beta=float(beta), k=0,
        params=params, variant=variant, gamma_eff=float(gamma_eff), gamma0=float(gamma0),
    )


def alpha_solve(gamma_k: float, mu: float, gamma_eff: float) -> float:
    """Positive root of 4 a^2 = ((1 - a) gamma_k + a mu) / gamma_eff.

    Closed form a = [ (mu - gamma_k)/(4 gamma) + sqrt((mu - gamma_k)^2 /
    (16 gamma^2) + gamma_k / gamma) ] / 2, always in (0, 1).
    """
    if gamma_k <= 0 or mu <= 0 or gamma_eff <= 0:
        raise ValueError(f"inputs must be positive, got {(gamma_k, mu, gamma_eff)}")
    if mu > gamma_eff:
        raise ValueError(f"need mu <= gamma, got mu={mu} > gamma={gamma_eff}")
    q = (mu - gamma_k) / (4.0 * gamma_eff)
    alpha = 0.5 * (q + np.sqrt(q * q + gamma_k / gamma_eff))
    if not 0.0 < alpha < 1.0:
        raise ParameterError(f"step weight left (0, 1): {alpha}")
    return float(alpha)


def geodesic_search(
    A: SymmetricOperator,
    V: SubspacePoint,
    X: SubspacePoint,
    ls: LineSearchConfig | None = None,
    AV: np.ndarray | None = None,
) -> GeodesicSearchResult:
    """Exact minimization of f over the geodesic segment from V to X.

    Builds the trigonometric restriction (two block products; one when A V
    is cached) and minimizes it over [0, 1]; the minimizer Y and the product
    A Y are reassembled without touching A again. When V and X coincide the
    search degenerates to beta = 0 and one product.
    """
    ls = ls or LineSearchConfig()
    try:
        P = log(V, X)
    except GrasseigError as e:
        raise GeometryError(
            f"no unique geodesic between the momentum point and the iterate: {e}"
        ) from e
    if P.spectral_norm < 1e-14:
        # Same subspace: canonicalize to beta = 0, one product for A X.
        AY = AV if (AV is not None and V.rep is X.rep) else A.apply_block(X.rep)
        f = -float(np.einsum("ij,ij->", X.rep, AY))
        return GeodesicSearchResult(
            beta=0.0, Y=X, AY=AY, f_at_start=f, f_at_X=f, f_at_Y=f, coeffs=None
        )
    coeffs = restrict_to_geodesic(A, V, P, AX=AV)
    beta = scalar_minimize(
        lambda e: eval_along(coeffs, e),
        (0.0, 1.0),
        tol=ls.tol,
        max_evals=ls.max_evals,
        deriv=lambda e: eval_along_deriv(coeffs, e),
        scan=33,
        value_noise=_restriction_noise(coeffs),
    )
    Y, AY = geodesic_endpoint(coeffs, beta)
    return GeodesicSearchResult(
        beta=float(beta),
        Y=Y,
        AY=AY,
        f_at_start=eval_along(coeffs, 0.0),
        f_at_X=eval_along(coeffs, 1.0),
        f_at_Y=eval_along(coeffs, beta),
        coeffs=coeffs,
    )


def _grad_noise_floor(f: float, AX: np.ndarray) -> float:
    """Gradient norms below this are roundoff of the projector arithmetic.

    Stepping on such gradients moves the iterate by line-search noise, so
    solvers treat them as an exact fixed point.
    """
    return max(1e-15 * max(1.0, abs(f)), 256.0 * np.finfo(float).eps * np.linalg.norm(AX))


def _restriction_noise(coeffs: GeodesicCoeffs) -> float:
    """Float-evaluation noise scale of the trigonometric restriction."""
    scale = float(
        np.sum(
            np.abs(coeffs.alpha_coef)
            + 2.0 * np.abs(coeffs.beta_coef)
            + np.abs(coeffs.gamma_coef)
        )
    )
    return 64.0 * np.finfo(float).eps * max(1.0, scale)


def _check_injectivity(T: TangentVector, what: str):
    sn = T.spectral_norm
    if sn >= np.pi / 2:
        raise GeometryError(
            f"{what} has spectral norm {sn:.6f} >= pi/2, outside the injectivity "
            "domain; the accelerated scheme is only locally safeguarded, so start "
            "closer to the target subspace or fall back to a baseline solver"
        )


def agd_step(
    state: AgdState,
    A: SymmetricOperator,
    ls: LineSearchConfig | None = None,
    search: GeodesicSearchResult | None = None,
):
    """One accelerated iteration: geodesic search, gradient step, momentum.

    Returns (next state, step info). Consumes two block products for the
    search ('exp' variant; the 'retr' variant pays one more for its exact
    retraction line search) and asserts the scalar-sequence floor
    gamma_{k+1} >= mu/2.
    """
    ls = ls or LineSearchConfig()
    params = state.params
    mu = params.mu
    if search is None:
        search = geodesic_search(A, state.V, state.X, ls)
    matvecs_after_search = A.matvec_count
    Y, AY = search.Y, search.AY
    Gt, _ = grad(A, Y, AX=AY)
    grad_norm = Gt.norm

    alpha = alpha_solve(state.gamma_k, mu, state.gamma_eff)
    gbar = (1.0 - alpha) * state.gamma_k + alpha * mu

    if grad_norm <= _grad_noise_floor(search.f_at_Y, AY):
        # converged to roundoff: freeze both sequences at Y
        gamma_next = gbar / (1.0 + state.shrink_beta)
        new_state = replace(state, X=Y, V=Y, gamma_k=gamma_next, k=state.k + 1)
        info = AgdStepInfo(
            beta_k=search.beta, alpha_k=alpha, f_x=search.f_at_X, f_y=search.f_at_Y,
            grad_norm_y=grad_norm, matvecs_after_search=matvecs_after_search, y=Y,
        )
        return new_state, info

    if state.variant == "exp":
        step_vec = Gt.scaled(-1.0 / params.gamma)
        _check_injectivity(step_vec, "gradient step")
        X_new = exp(Y, step_vec)
    else:
        AG = A.apply_block(Gt.mat)
        eta = _retraction_linesearch(Y.rep, Gt.mat, AY, AG, ls)
        W = Y.rep - eta * Gt.mat
        Q, R = qf_pos(W)
        d = np.abs(np.diag(R))
        if d.min() <= 1e-12 * max(d.max(), 1.0):
            raise DegenerateStepError("retraction step is numerically rank deficient")
        X_new = SubspacePoint(Q)

    Lv = log(Y, state.V)
    W_mat = ((1.0 - alpha) * state.gamma_k / gbar) * Lv.mat - (2.0 * alpha / gbar) * Gt.mat
    Wt = TangentVector(Y.rep, W_mat, _validate=False)
    _check_injectivity(Wt, "momentum update")
    V_new = exp(Y, Wt)

    gamma_next = gbar / (1.0 + state.shrink_beta)
    if gamma_next < mu / 2 - 1e-12 * mu:
        raise ParameterError(
            f"scalar sequence dropped below mu/2: gamma_{state.k + 1} = {gamma_next}"
        )

    new_state = replace(state, X=X_new, V=V_new, gamma_k=gamma_next, k=state.k + 1)
    info = AgdStepInfo(
        beta_k=search.beta,
        alpha_k=alpha,
        f_x=search.f_at_X,
        f_y=search.f_at_Y,
        grad_norm_y=grad_norm,
        matvecs_after_search=matvecs_after_search,
        y=Y,
    )
    return new_state, info


# ---------------------------------------------------------------------------
# baselines
# ---------------------------------------------------------------------------


def _retraction_linesearch(Y, Gmat, AY, AG, ls: LineSearchConfig) -> float:
    """Exact step length for eta -> f(qf(Y - eta G)) from cached products.

    Uses the normalized quotient -tr((W^T A W)(W^T W)^{-1}) with
    W = Y - eta G, whose p-by-p ingredients come from A Y and A G only.
    """
    p = Y.shape[1]
    eye = np.eye(p)
    S = Y.T @ AY
    M1 = Gmat.T @ AY
    M2 = Gmat.T @ AG
    N2 = Gmat.T @ Gmat
    M1sym = M1 + M1.T

    def val(eta):
        WAW = S - eta * M1sym + (eta * eta) * M2
        WW = eye + (eta * eta) * N2
        return -float(np.trace(scipy.linalg.solve(WW, WAW, assume_a="pos")))

    def dval(eta):
        WAW = S - eta * M1sym + (eta * eta) * M2
        WW = eye + (eta * eta) * N2
        Z = scipy.linalg.solve(WW, WAW, assume_a="pos")
        dP = -M1sym + (2.0 * eta) * M2
        first = np.trace(scipy.linalg.solve(WW, dP, assume_a="pos"))
        second = np.trace(scipy.linalg.solve(WW, (2.0 * eta) * (N2 @ Z), assume_a="pos"))
        return -float(first) + float(second)

    noise = 64.0 * np.finfo(float).eps * max(
        1.0, float(np.abs(S).sum() + np.abs(M1).sum())
    )
    b = 1.0
    f_prev, f_cur = val(b / 2), val(b)
    while f_cur < f_prev - noise and b < 2.0**40:
        b *= 2.0
        f_prev, f_cur = f_cur, val(b)
    eta = scalar_minimize(
        val,
        (0.0, b),
        tol=ls.tol * max(1.0, b),
        max_evals=ls.max_evals,
        deriv=dval,
        scan=33,
        value_noise=noise,
    )
    # a step that cannot certify a decrease beyond evaluation noise is a
    # numerical no-op; staying put keeps converged iterates exactly fixed
    if val(eta) > val(0.0) - noise:
        return 0.0
    return eta


@dataclass
class SdStepInfo:
    f: float
    grad_norm: float
    eta: float
    AX_new: np.ndarray


def steepest_descent_step(
    A: SymmetricOperator,
    X: SubspacePoint,
    ls: LineSearchConfig | None = None,
    AX: np.ndarray | None = None,
):
    """QR-retraction step along the negative gradient with exact line search.

    One block product when A X is cached (the product with the gradient);
    the product with the new iterate is carried through the triangular QR
    factor, so consecutive steps sustain one product per iteration.
    """
    ls = ls or LineSearchConfig()
    if AX is None:
        AX = A.apply_block(X.rep)
    S = X.rep.T @ AX
    Gmat = -2.0 * (AX - X.rep @ S)
    f = -float(np.trace(S))
    gn = float(np.linalg.norm(Gmat))
    if gn <= _grad_noise_floor(f, AX):
        return X, SdStepInfo(f=f, grad_norm=gn, eta=0.0, AX_new=AX)
    AG = A.apply_block(Gmat)
    eta = _retraction_linesearch(X.rep, Gmat, AX, AG, ls)
    if eta == 0.0:
        return X, SdStepInfo(f=f, grad_norm=gn, eta=0.0, AX_new=AX)
    W = X.rep - eta * Gmat
    Q, R = qf_pos(W)
    d = np.abs(np.diag(R))
    if d.min() <= 1e-12 * max(d.max(), 1.0):
        raise DegenerateStepError("descent step is numerically rank deficient")
    AX_new = scipy.linalg.solve_triangular(R.T, (AX - eta * AG).T, lower=True).T
    return SubspacePoint(Q), SdStepInfo(f=f, grad_norm=gn, eta=float(eta), AX_new=AX_new)


@dataclass
class SubspaceStepInfo:
    f: float
    grad_norm: float


def subspace_iteration_step(A: SymmetricOperator, X: SubspacePoint):
    """One block power step: the Q factor of A X; one block product."""
    AX = A.apply_block(X.rep)
    S = X.rep.T @ AX
    f = -float(np.trace(S))
    gn = float(np.linalg.norm(-2.0 * (AX - X.rep @ S)))
    Q, R = qf_pos(AX)
    d = np.abs(np.diag(R))
    if d.min() <= 1e-14 * max(d.max(), 1.0):
        raise DegenerateStepError("A X lost numerical rank; the block collapsed")
    return SubspacePoint(Q), SubspaceStepInfo(f=f, grad_norm=gn)


def chebyshev_apply(
    A: SymmetricOperator,
    M: np.ndarray,
    degree: int,
    interval,
    rescale: bool = True,
):
    """Apply the degree-d Chebyshev polynomial of A, affinely mapped so that
    ``interval`` goes to [-1, 1], to the block M via the three-term
    recurrence.

    Per-step column rescaling (applied to both recurrence levels, columns
    evolve independently) prevents overflow; the accumulated per-column
    factors are returned so absolute amplification can be reconstructed.
    Returns (filtered block, column scales, A M from the first product).
    Consumes exactly ``degree`` block products.
    """
    lo, hi = float(interval[0]), float(interval[1])
    if not lo < hi:
        raise ValueError(f"need lo < hi for the damped interval, got {(lo, hi)}")
    if degree < 1:
        raise ValueError("polynomial degree must be >= 1")
    w = 2.0 / (hi - lo)
    c = (hi + lo) / (hi - lo)
    AM = A.apply_block(M)
    T0 = M.copy()
    T1 = w * AM - c * M
    scales = np.ones(M.shape[1])
    for _ in range(2, degree + 1):
        AT1 = A.apply_block(T1)
        T2 = 2.0 * (w * AT1 - c * T1) - T0
        T0, T1 = T1, T2
        if rescale:
            s = np.linalg.norm(T1, axis=0)
            s[s == 0] = 1.0
            T1 = T1 / s
            T0 = T0 / s
            scales = scales * s
    return T1, scales, AM


@dataclass
class ChebStepInfo:
    f: float
    grad_norm: float
    column_scales: np.ndarray


def chebyshev_step(
    A: SymmetricOperator,
    X: SubspacePoint,
    degree: int,
    interval,
):
    """One filter application followed by a single re-orthonormalizing QR.

    ``interval`` should bracket the unwanted spectrum (by default the bench
    harness supplies [lambda_n, lambda_{p+1}]); a filter that reaches into
    the wanted eigenvalues damps them and is reported by the harness as a
    configuration warning.
    """
    filtered, scales, AX = chebyshev_apply(A, X.rep, degree, interval)
    S = X.rep.T @ AX
    f = -float(np.trace(S))
    gn = float(np.linalg.norm(-2.0 * (AX - X.rep @ S)))
    Q, R = qf_pos(filtered)
    d = np.abs(np.diag(R))
    if d.min() <= 1e-14 * max(d.max(), 1.0):
        raise DegenerateStepError("filtered block lost numerical rank")
    return SubspacePoint(Q), ChebStepInfo(f=f, grad_norm=gn, column_scales=scales)


@dataclass
class RcgCarry:
    """State threaded between conjugate-gradient steps: the previous search
    direction and gradient (as matrices at the previous representative) and
    the cached product A X at the current iterate."""

    AX: np.ndarray | None = None
    direction: np.ndarray | None = None
    grad_mat: np.ndarray | None = None


@dataclass
class RcgStepInfo:
    f: float
    grad_norm: float
    eta: float
    beta_pr: float
    restarted: bool


def rcg_step(
    A: SymmetricOperator,
    X: SubspacePoint,
    carry: RcgCarry | None = None,
    ls: LineSearchConfig | None = None,
):
    """Nonlinear conjugate-gradient step with exact geodesic line search.

    The direction combines the negative gradient with the projected previous
    direction, weighted by the Polak-Ribiere coefficient clamped at zero; a
    non-descent combination restarts to steepest descent. One block product
    per iteration once the A X cache is warm (the line-search restriction
    also yields A at the new iterate for free).
    """
    ls = ls or LineSearchConfig()
    carry = carry or RcgCarry()
    AX = carry.AX if carry.AX is not None else A.apply_block(X.rep)
    S = X.rep.T @ AX
    f = -float(np.trace(S))
    Gmat = -2.0 * (AX - X.rep @ S)
    gn = float(np.linalg.norm(Gmat))
    if gn <= _grad_noise_floor(f, AX):
        new_carry = RcgCarry(AX=AX, direction=None, grad_mat=Gmat)
        return X, new_carry, RcgStepInfo(f=f, grad_norm=gn, eta=0.0, beta_pr=0.0, restarted=False)

    beta_pr = 0.0
    restarted = False
    if carry.direction is None or carry.grad_mat is None:
        D = -Gmat
        restarted = True
    else:
        prev_grad_t = carry.grad_mat - X.rep @ (X.rep.T @ carry.grad_mat)
        prev_dir_t = carry.direction - X.rep @ (X.rep.T @ carry.direction)
        denom = float(np.einsum("ij,ij->", carry.grad_mat, carry.grad_mat))
        raw = float(np.einsum("ij,ij->", Gmat, Gmat - prev_grad_t)) / max(denom, 1e-300)
        beta_pr = max(raw, 0.0)
        if raw < 0.0:
            # clamped weight: fall back to plain steepest descent
            D = -Gmat
            restarted = True
        else:
            D = -Gmat + beta_pr * prev_dir_t
            if float(np.einsum("ij,ij->", D, Gmat)) >= 0.0:
                D = -Gmat
                restarted = True

    Dt = TangentVector(X.rep, D, _validate=False)
    coeffs = restrict_to_geodesic(A, X, Dt, AX=AX)
    smax = Dt.spectral_norm
    span = np.pi / smax
    noise = _restriction_noise(coeffs)
    eta = scalar_minimize(
        lambda e: eval_along(coeffs, e),
        (0.0, span),
        tol=ls.tol * span,
        max_evals=ls.max_evals,
        deriv=lambda e: eval_along_deriv(coeffs, e),
        scan=64,
        value_noise=noise,
    )
    if eta == 0.0 or eval_along(coeffs, eta) > eval_along(coeffs, 0.0) - noise:
        # no certifiable decrease: stay put instead of stepping on noise
        new_carry = RcgCarry(AX=AX, direction=D, grad_mat=Gmat)
        return X, new_carry, RcgStepInfo(
            f=f, grad_norm=gn, eta=0.0, beta_pr=beta_pr, restarted=restarted
        )
    X_new, AX_new = geodesic_endpoint(coeffs, eta)
    new_carry = RcgCarry(AX=AX_new, direction=D, grad_mat=Gmat)
    return X_new, new_carry, RcgStepInfo(
        f=f, grad_norm=gn, eta=float(eta), beta_pr=beta_pr, restarted=restarted
    )


# ---------------------------------------------------------------------------
# the run loop
# ---------------------------------------------------------------------------


def default_max_iters(params: SpectralParams | None) -> int:
    """Iteration cap scaled like sqrt(gamma/delta) log(1/tol) at tol 1e-10."""
    if params is None or params.delta <= 0:
        return 1000
    return 10 * int(np.ceil(np.sqrt(params.gamma / params.delta) * np.log(1e10)))


@dataclass
class _IterStat:
    x: SubspacePoint
    fval: float
    grad_norm: float
    matvecs: int


def _iter_agd(A, X0, params, variant, ls):
    state = agd_init(X0, params, variant)
    while True:
        search = geodesic_search(A, state.V, state.X, ls)
        snapshot = A.matvec_count
        Gt, _ = grad(A, search.Y, AX=search.AY)
        yield _IterStat(state.X, search.f_at_X, Gt.norm, snapshot)
        state, _info = agd_step(state, A, ls, search=search)


def _iter_sd(A, X0, ls, refresh_every):
    X = X0
    AX = None
    k = 0
    while True:
        if AX is None or (refresh_every and k > 0 and k % refresh_every == 0):
            AX = A.apply_block(X.rep)
        S = X.rep.T @ AX
        f = -float(np.trace(S))
        gn = float(np.linalg.norm(-2.0 * (AX - X.rep @ S)))
        yield _IterStat(X, f, gn, A.matvec_count)
        X, info = steepest_descent_step(A, X, ls=ls, AX=AX)
        AX = info.AX_new
        k += 1


def _iter_subspace(A, X0):
    X = X0
    while True:
        before = A.matvec_count
        X_new, info = subspace_iteration_step(A, X)
        yield _IterStat(X, info.f, info.grad_norm, before + 1)
        X = X_new


def _iter_cheb(A, X0, degree, interval):
    X = X0
    while True:
        before = A.matvec_count
        X_new, info = chebyshev_step(A, X, degree, interval)
        yield _IterStat(X, info.f, info.grad_norm, before + 1)
        X = X_new


def _iter_rcg(A, X0, ls, refresh_every):
    X = X0
    carry = RcgCarry()
    k = 0
    while True:
        if carry.AX is None or (refresh_every and k > 0 and k % refresh_every == 0):
            carry.AX = A.apply_block(X.rep)
        S = X.rep.T @ carry.AX
        f = -float(np.trace(S))
        gn = float(np.linalg.norm(-2.0 * (carry.AX - X.rep @ S)))
        yield _IterStat(X, f, gn, A.matvec_count)
        X, carry, _info = rcg_step(A, X, carry=carry, ls=ls)
        k += 1


def run(
    solver: str,
    A: SymmetricOperator,
    X0: SubspacePoint,
    config: SolverConfig | None = None,
    reference: Reference | None = None,
    *,
    params: SpectralParams | None = None,
    variant: str = "exp",
    cheb_degree: int = 50,
    cheb_interval=None,
    ls: LineSearchConfig | None = None,
    refresh_every: int = 50,
    meta: dict | None = None,
) -> SolverTrace:
    """Iterate a solver until a stopping rule fires, recording a trace.

    ``params`` is required for 'agd' (step sizes) and 'cheb' (default damping
    interval [lambda_n, lambda_{p+1}]); the reference enables the subopt and
    dist columns, which are left empty otherwise. Solver failures raise
    :class:`SolverRunError` carrying the partial trace.
    """
    if solver not in SOLVER_IDS:
        raise ValueError(f"unknown solver {solver!r}; expected one of {SOLVER_IDS}")
    config = config or SolverConfig()
    ls = ls or LineSearchConfig()
    grad_tol = config.grad_tol
    if grad_tol is None:
        grad_tol = 1e-8 * params.gamma if params is not None else 0.0
    max_iters = config.max_iters if config.max_iters is not None else default_max_iters(params)
    record_every = max(1, int(config.record_every))

    if solver == "agd":
        if params is None:
            raise ValueError("the accelerated solver needs spectral parameters")
        gen = _iter_agd(A, X0, params, variant, ls)
    elif solver == "sd":
        gen = _iter_sd(A, X0, ls, refresh_every)
    elif solver == "subspace":
        gen = _iter_subspace(A, X0)
    elif solver == "cheb":
        if cheb_interval is None:
            if params is None:
                raise ValueError("the Chebyshev filter needs an interval or parameters")
            cheb_interval = (params.lambda_n, params.lambda_p1)
        if params is not None and cheb_interval[1] >= params.lambda_p:
            warnings.warn(
                "Chebyshev damping interval reaches the wanted eigenvalues; "
                "the filter will suppress part of the target subspace",
                RuntimeWarning,
            )
        gen = _iter_cheb(A, X0, cheb_degree, cheb_interval)
    else:
        gen = _iter_rcg(A, X0, ls, refresh_every)

    run_meta = {
        "solver": solver,
        "n": A.n,
        "p": X0.p,
        "max_iters": max_iters,
        "grad_tol": grad_tol,
        "record_every": record_every,
    }
    if solver == "agd":
        run_meta["variant"] = variant
    if solver == "cheb":
        run_meta["cheb_degree"] = cheb_degree
        run_meta["cheb_interval"] = list(cheb_interval)
    if solver in ("sd", "rcg"):
        run_meta["refresh_every"] = refresh_every
    if meta:
        run_meta.update(meta)

    rows: list[TraceRow] = []
    t0 = time.perf_counter()
    try:
        for k, st in enumerate(gen):
            dist_val = None
            if reference is not None and (
                config.dist_tol is not None or k % record_every == 0
            ):
                dist_val = distance(st.x, reference.v_alpha)
            if k % record_every == 0:
                subopt = st.fval - reference.f_star if reference is not None else None
                rows.append(
                    TraceRow(
                        iter=k,
                        block_matvecs=st.matvecs,
                        fval=st.fval,
                        subopt=subopt,
                        dist=dist_val,
                        grad_norm=st.grad_norm,
                        wall_time_s=time.perf_counter() - t0,
                    )
                )
            if grad_tol > 0 and np.isfinite(grad_tol) and st.grad_norm <= grad_tol:
                break
            if (
                config.dist_tol is not None
                and dist_val is not None
                and dist_val <= config.dist_tol
            ):
                break
            if k + 1 >= max_iters:
                break
    except GrasseigError as e:
        failed = SolverTrace(meta={**run_meta, "failure": str(e)}, rows=rows)
        raise SolverRunError(str(e), trace=failed) from e
    run_meta["total_block_matvecs"] = A.matvec_count
    return SolverTrace(meta=run_meta, rows=rows)

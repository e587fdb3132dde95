"""Block Rayleigh quotient on Gr(n, p): values, gradient, Hessian form,
spectral constants, convexity gap evaluators, and the fast geodesic
restriction that prices a whole 1-D search at two block products.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ShapeError
from .grassmann import SubspacePoint, TangentVector, log, principal_angles, qf_pos
from .matops import DenseSpectrum, SymmetricOperator

#: Quadratic-growth constant of the block Rayleigh quotient, 4 / pi^2.
C_Q = 4.0 / np.pi**2


@dataclass(frozen=True)
class SpectralParams:
    """Spectral constants that govern step sizes and convergence rates.

    Derived from the four extreme eigenvalues lambda_1 >= lambda_p >=
    lambda_{p+1} >= lambda_n: the gap ``delta``, the strong-convexity-like
    constant ``mu = 2 c_Q delta``, the smoothness constant
    ``gamma = 2 (lambda_1 - lambda_n)``, its retraction-step counterpart
    ``gamma_tilde = 5/4 gamma``, and the condition number
    ``kappa_r = (lambda_1 - lambda_n) / delta``.
    """

    lambda1: float
    lambda_p: float
    lambda_p1: float
    lambda_n: float

    def __post_init__(self):
        lams = (self.lambda1, self.lambda_p, self.lambda_p1, self.lambda_n)
        if not all(np.isfinite(lams)):
            raise ValueError(f"eigenvalues must be finite, got {lams}")
        if not (self.lambda1 >= self.lambda_p >= self.lambda_p1 >= self.lambda_n):
            raise ValueError(f"eigenvalues must be sorted descending, got {lams}")

    @property
    def c_q(self) -> float:
        return C_Q

    @property
    def delta(self) -> float:
        return self.lambda_p - self.lambda_p1

    @property
    def mu(self) -> float:
        return 2.0 * C_Q * self.delta

    @property
    def gamma(self) -> float:
        return 2.0 * (self.lambda1 - self.lambda_n)

    @property
    def gamma_tilde(self) -> float:
        return 1.25 * self.gamma

    @property
    def kappa_r(self) -> float:
        if self.delta == 0.0:
            return np.inf
        return (self.lambda1 - self.lambda_n) / self.delta

    @property
    def degenerate(self) -> bool:
        """True when the gap vanishes and mu-dependent machinery is undefined."""
        return self.delta == 0.0

    @property
    def negative_tail(self) -> bool:
        """True when lambda_n < 0; callers are advised to shift first."""
        return self.lambda_n < 0.0

    def as_dict(self) -> dict:
        return {
            "lambda1": self.lambda1,
            "lambdaP": self.lambda_p,
            "lambdaP1": self.lambda_p1,
            "lambdaN": self.lambda_n,
            "delta": self.delta,
            "mu": self.mu,
            "gamma": self.gamma,
            "kappaR": self.kappa_r,
        }


def derive_params(spectrum, p: int) -> SpectralParams:
    """Spectral constants for subspace dimension p.

    ``spectrum`` may be a :class:`DenseSpectrum`, a descending eigenvalue
    array, or a parameter-file mapping with keys lambda1, lambdaP,
    lambdaP1, lambdaN.
    """
    if isinstance(spectrum, dict):
        return SpectralParams(
            lambda1=float(spectrum["lambda1"]),
            lambda_p=float(spectrum["lambdaP"]),
            lambda_p1=float(spectrum["lambdaP1"]),
            lambda_n=float(spectrum["lambdaN"]),
        )
    if isinstance(spectrum, DenseSpectrum):
        lam = spectrum.eigenvalues
    else:
        lam = np.asarray(spectrum, dtype=float)
    n = lam.size
    if not 1 <= p < n:
        raise ValueError(f"need 1 <= p < n = {n}, got p = {p}")
    return SpectralParams(
        lambda1=float(lam[0]),
        lambda_p=float(lam[p - 1]),
        lambda_p1=float(lam[p]),
        lambda_n=float(lam[-1]),
    )


def local_convergence_radius(params: SpectralParams) -> float:
    """Initialization radius under which the accelerated rate is certified:
    (1/8) sqrt(c_Q) (delta / gamma)^(3/4)."""
    return 0.125 * np.sqrt(C_Q) * (params.delta / params.gamma) ** 0.75


def f_value(A: SymmetricOperator, X: SubspacePoint, AX: np.ndarray | None = None) -> float:
    """Objective -trace(X^T A X); one block product unless A X is supplied."""
    if AX is None:
        AX = A.apply_block(X.rep)
    return -float(np.einsum("ij,ij->", X.rep, AX))


def grad(A: SymmetricOperator, X: SubspacePoint, AX: np.ndarray | None = None):
    """Riemannian gradient -2 (I - X X^T) A X; returns (gradient, A X).

    The product A X is returned for reuse so that a value and a gradient at
    the same point cost a single block product.
    """
    if AX is None:
        AX = A.apply_block(X.rep)
    G = -2.0 * (AX - X.rep @ (X.rep.T @ AX))
    return TangentVector(X.rep, G, _validate=False), AX


def hessian_quadform(
    A: SymmetricOperator,
    X: SubspacePoint,
    G: TangentVector,
    AX: np.ndarray | None = None,
) -> float:
    """Hessian bilinear form 2 <G, G X^T A X - A G> at X."""
    if G.mat.shape != X.rep.shape:
        raise ShapeError(f"tangent shape {G.mat.shape} != point shape {X.rep.shape}")
    if AX is None:
        AX = A.apply_block(X.rep)
    AG = A.apply_block(G.mat)
    inner = G.mat @ (X.rep.T @ AX) - AG
    return 2.0 * float(np.einsum("ij,ij->", G.mat, inner))


@dataclass(frozen=True)
class GeodesicCoeffs:
    """Trigonometric data of f restricted to a geodesic eta -> Exp_X(eta P).

    With the compact SVD P = U diag(sigma) V^T, the restriction is
    f(eta) = -sum_i [cos^2(eta sigma_i) a_i + 2 sin cos b_i + sin^2 c_i]
    with a_i = (V^T X^T A X V)_ii, b_i = (V^T X^T A U)_ii, c_i = (U^T A U)_ii.
    The cached blocks XV, U, A X V, A U reconstruct both the endpoint
    representative and its product with A without touching A again.
    """

    sigma: np.ndarray
    V: np.ndarray
    XV: np.ndarray
    U: np.ndarray
    AXV: np.ndarray
    AU: np.ndarray
    alpha_coef: np.ndarray
    beta_coef: np.ndarray
    gamma_coef: np.ndarray


def restrict_to_geodesic(
    A: SymmetricOperator,
    X: SubspacePoint,
    P: TangentVector,
    AX: np.ndarray | None = None,
) -> GeodesicCoeffs:
    """Coefficients of f along eta -> Exp_X(eta P).

    Consumes exactly two block products (A X and A U), or one when A X is
    passed in. A zero direction skips the A U product and yields a constant
    restriction.
    """
    if P.mat.shape != X.rep.shape:
        raise ShapeError(f"direction shape {P.mat.shape} != point shape {X.rep.shape}")
    U, sigma, V = P.compact_svd()
    if AX is None:
        AX = A.apply_block(X.rep)
    XV = X.rep @ V
    AXV = AX @ V
    if sigma.size and sigma[0] > 0.0:
        AU = A.apply_block(U)
    else:
        U = np.zeros_like(X.rep)
        AU = np.zeros_like(X.rep)
    alpha_coef = np.einsum("ij,ij->j", XV, AXV)
    beta_coef = np.einsum("ij,ij->j", XV, AU)
    gamma_coef = np.einsum("ij,ij->j", U, AU)
    return GeodesicCoeffs(
        sigma=sigma, V=V, XV=XV, U=U, AXV=AXV, AU=AU,
        alpha_coef=alpha_coef, beta_coef=beta_coef, gamma_coef=gamma_coef,
    )


def eval_along(coeffs: GeodesicCoeffs, eta: float) -> float:
    """Value of f at the geodesic parameter eta; no block products."""
    c = np.cos(eta * coeffs.sigma)
    s = np.sin(eta * coeffs.sigma)
    return -float(
        np.sum(c * c * coeffs.alpha_coef)
        + 2.0 * np.sum(s * c * coeffs.beta_coef)
        + np.sum(s * s * coeffs.gamma_coef)
    )


def eval_along_deriv(coeffs: GeodesicCoeffs, eta: float) -> float:
    """Derivative of :func:`eval_along` in eta (termwise); no block products."""
    two = 2.0 * eta * coeffs.sigma
    return float(
        np.sum(
            coeffs.sigma
            * (
                (coeffs.alpha_coef - coeffs.gamma_coef) * np.sin(two)
                - 2.0 * coeffs.beta_coef * np.cos(two)
            )
        )
    )


def reuse_AY(coeffs: GeodesicCoeffs, eta: float) -> np.ndarray:
    """Product of A with the raw trigonometric representative at eta.

    Counter-neutral: reassembles (A X V) cos(eta sigma) V^T +
    (A U) sin(eta sigma) V^T from the cached blocks.
    """
    c = np.cos(eta * coeffs.sigma)
    s = np.sin(eta * coeffs.sigma)
    return (coeffs.AXV * c) @ coeffs.V.T + (coeffs.AU * s) @ coeffs.V.T


def geodesic_endpoint(coeffs: GeodesicCoeffs, eta: float):
    """Point at parameter eta plus the matching A-product, counter-neutral.

    The trigonometric representative is re-orthonormalized by QR; the cached
    A-product is carried through the same triangular factor so the returned
    pair stays consistent.
    """
    c = np.cos(eta * coeffs.sigma)
    s = np.sin(eta * coeffs.sigma)
    Yt = (coeffs.XV * c) @ coeffs.V.T + (coeffs.U * s) @ coeffs.V.T
    Q, R = qf_pos(Yt)
    AYt = (coeffs.AXV * c) @ coeffs.V.T + (coeffs.AU * s) @ coeffs.V.T
    AY = scipy.linalg.solve_triangular(R.T, AYt.T, lower=True).T
    return SubspacePoint(Q), AY


def _curvature_factor(theta_p: float) -> float:
    """theta / tan(theta) with its removable singularity at zero."""
    if theta_p < 1e-8:
        return 1.0
    return theta_p / np.tan(theta_p)


def weak_strong_gap(
    A: SymmetricOperator,
    X: SubspacePoint,
    v_alpha: SubspacePoint,
    params: SpectralParams,
    f_star: float | None = None,
) -> float:
    """Slack of the weak-strong convexity inequality against the optimum.

    Returns RHS - LHS of
    f(X) - f* <= (1/a) <grad f(X), -Log_X(V)> - (mu/2) dist^2(X, V)
    where a = theta_p / tan(theta_p) from the largest principal angle.
    Nonnegative (up to roundoff) whenever all angles are below pi/2.
    """
    theta = principal_angles(X, v_alpha)
    if theta[-1] >= np.pi / 2 - 1e-12:
        raise ValueError("largest principal angle reaches pi/2; factor a(X) undefined")
    a = _curvature_factor(theta[-1])
    L = log(X, v_alpha)
    G, AX = grad(A, X)
    fx = f_value(A, X, AX=AX)
    if f_star is None:
        f_star = f_value(A, v_alpha)
    d2 = float(np.sum(theta**2))
    rhs = (1.0 / a) * float(np.einsum("ij,ij->", G.mat, -L.mat)) - 0.5 * params.mu * d2
    return rhs - (fx - f_star)


def quadratic_growth_gap(
    A: SymmetricOperator,
    X: SubspacePoint,
    v_alpha: SubspacePoint,
    params: SpectralParams,
    f_star: float | None = None,
) -> float:
    """Slack of f(X) - f* >= c_Q delta dist^2(X, V); nonnegative on valid inputs."""
    theta = principal_angles(X, v_alpha)
    fx = f_value(A, X)
    if f_star is None:
        f_star = f_value(A, v_alpha)
    return (fx - f_star) - C_Q * params.delta * float(np.sum(theta**2))

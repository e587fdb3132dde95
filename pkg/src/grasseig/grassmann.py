"""Geometry of the Grassmann manifold Gr(n, p).

Subspaces are represented by orthonormal n-by-p matrices; tangent vectors at
a representative X are n-by-p matrices G with X^T G = 0. The exponential map,
its inverse, the QR retraction, and principal-angle distances are provided as
pure functions, together with two curvature comparison gaps used by the
verification suites.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import DegenerateStepError, InjectivityError, ShapeError

ORTHO_TOL = 1e-12
HORIZONTAL_TOL = 1e-10
# Relative floor below which singular values of tangent vectors are treated
# as exact zeros (no rotation in that direction).
SV_FLOOR = 1e-14
# Smallest admissible singular value of X^T Y for the logarithm.
LOG_MIN_SV = 1e-10
# Above this cosine, angles are recomputed from sines for relative accuracy.
TINY_ANGLE_COS = 1.0 - 1e-4


def qf_pos(M: np.ndarray):
    """Thin QR factor with the sign convention diag(R) > 0; returns (Q, R)."""
    Q, R = np.linalg.qr(M)
    s = np.sign(np.diag(R)).copy()
    s[s == 0] = 1.0
    return Q * s, R * s[:, None]


@dataclass(frozen=True)
class SubspacePoint:
    """A point of Gr(n, p) stored as an orthonormal n-by-p representative."""

    rep: np.ndarray

    def __post_init__(self):
        rep = np.array(self.rep, dtype=float, copy=True)
        if rep.ndim != 2:
            raise ShapeError(f"representative must be 2-D, got shape {rep.shape}")
        n, p = rep.shape
        if not 1 <= p <= n:
            raise ShapeError(f"need 1 <= p <= n, got (n, p) = {(n, p)}")
        defect = np.linalg.norm(rep.T @ rep - np.eye(p))
        if defect > ORTHO_TOL * max(1.0, np.sqrt(p)):
            raise ShapeError(
                f"columns are not orthonormal (defect {defect:.3e}); "
                "orthonormalize the representative first"
            )
        rep.setflags(write=False)
        object.__setattr__(self, "rep", rep)

    @property
    def n(self) -> int:
        return self.rep.shape[0]

    @property
    def p(self) -> int:
        return self.rep.shape[1]


@dataclass
class TangentVector:
    """Tangent vector at a representative, with lazily cached compact SVD.

    ``base`` is the representative the vector is expressed against, ``mat``
    the n-by-p matrix. The cached SVD is the triple (U, sigma, V) with
    mat = U diag(sigma) V^T, sigma descending and floored to exact zeros
    below SV_FLOOR relative to the largest value.
    """

    base: np.ndarray
    mat: np.ndarray
    svd: tuple | None = None
    _validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        self.base = np.asarray(self.base, dtype=float)
        self.mat = np.asarray(self.mat, dtype=float)
        if self.mat.shape != self.base.shape:
            raise ShapeError(
                f"tangent shape {self.mat.shape} != base shape {self.base.shape}"
            )
        if self._validate:
            defect = np.linalg.norm(self.base.T @ self.mat)
            if defect > HORIZONTAL_TOL * max(1.0, np.linalg.norm(self.mat)):
                raise ShapeError(
                    f"matrix is not horizontal at the base point (|X^T G| = {defect:.3e})"
                )

    def compact_svd(self):
        if self.svd is None:
            U, s, Vt = np.linalg.svd(self.mat, full_matrices=False)
            floor = SV_FLOOR * (s[0] if s.size and s[0] > 0 else 1.0)
            s = np.where(s < floor, 0.0, s)
            self.svd = (U, s, Vt.T)
        return self.svd

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.mat))

    @property
    def spectral_norm(self) -> float:
        _, s, _ = self.compact_svd()
        return float(s[0]) if s.size else 0.0

    def scaled(self, c: float) -> "TangentVector":
        svd = None
        if self.svd is not None and c >= 0:
            U, s, V = self.svd
            svd = (U, c * s, V)
        return TangentVector(self.base, c * self.mat, svd=svd, _validate=False)


def random_point(n: int, p: int, seed=None) -> SubspacePoint:
    """Orthonormalized standard-Gaussian sample, deterministic per seed."""
    if not 1 <= p <= n:
        raise ShapeError(f"need 1 <= p <= n, got (n, p) = {(n, p)}")
    rng = np.random.default_rng(seed)
    Q, _ = qf_pos(rng.standard_normal((n, p)))
    return SubspacePoint(Q)


def project_tangent(X: SubspacePoint, M: np.ndarray) -> TangentVector:
    """Orthogonal projection (I - X X^T) M onto the tangent space at X."""
    M = np.asarray(M, dtype=float)
    if M.shape != X.rep.shape:
        raise ShapeError(f"array shape {M.shape} != representative {X.rep.shape}")
    G = M - X.rep @ (X.rep.T @ M)
    return TangentVector(X.rep, G, _validate=False)


def exp(X: SubspacePoint, G: TangentVector) -> SubspacePoint:
    """Geodesic endpoint reached from X along G.

    With the compact SVD G = U diag(sigma) V^T, the endpoint representative
    is X V cos(sigma) V^T + U sin(sigma) V^T, re-orthonormalized by QR to
    stop drift off the orthonormality constraint over long iterations.
    """
    U, s, V = G.compact_svd()
    if not s.size or s[0] == 0.0:
        return SubspacePoint(X.rep)
    Y = (X.rep @ V) * np.cos(s) @ V.T + (U * np.sin(s)) @ V.T
    Q, _ = qf_pos(Y)
    return SubspacePoint(Q)


def log(X: SubspacePoint, Y: SubspacePoint) -> TangentVector:
    """Tangent vector at X whose geodesic reaches Y; inverse of :func:`exp`.

    Defined when X^T Y is invertible (all principal angles < pi/2). The
    compact SVD of the result is cached on the returned vector, so geodesic
    restrictions built from it need no refactorization.
    """
    if Y.rep.shape != X.rep.shape:
        raise ShapeError(f"points live on different manifolds: {X.rep.shape} vs {Y.rep.shape}")
    XtY = X.rep.T @ Y.rep
    smin = np.linalg.svd(XtY, compute_uv=False)[-1]
    if smin < LOG_MIN_SV:
        raise InjectivityError(
            f"X^T Y is numerically singular (smallest singular value {smin:.3e}); "
            "the subspaces are too far apart for the logarithm"
        )
    M = scipy.linalg.solve(XtY.T, (Y.rep - X.rep @ XtY).T).T
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    floor = SV_FLOOR * (s[0] if s.size and s[0] > 0 else 1.0)
    theta = np.where(s < floor, 0.0, np.arctan(s))
    G = (U * theta) @ Vt
    return TangentVector(X.rep, G, svd=(U, theta, Vt.T), _validate=False)


def retract_qr(X: SubspacePoint, G: TangentVector) -> SubspacePoint:
    """First-order surrogate for :func:`exp`: the Q factor of X + G."""
    W = X.rep + G.mat
    Q, R = qf_pos(W)
    d = np.abs(np.diag(R))
    if d.min() <= 1e-12 * max(d.max(), 1.0):
        raise DegenerateStepError("X + G is numerically rank deficient")
    return SubspacePoint(Q)


def principal_angles(X: SubspacePoint, Y: SubspacePoint) -> np.ndarray:
    """Canonical angles between two subspaces, ascending, in [0, pi/2].

    Angles come from arccos of the singular values of Y^T X; values close
    to zero are recomputed as arcsin of the matching singular value of
    (I - X X^T) Y, where arccos loses relative accuracy.
    """
    cos_sv = np.linalg.svd(Y.rep.T @ X.rep, compute_uv=False)
    cos_sv = np.clip(cos_sv, 0.0, 1.0)
    theta = np.arccos(cos_sv)  # ascending: arccos reverses the descending svd order
    if cos_sv[0] > TINY_ANGLE_COS:
        sin_sv = np.linalg.svd(
            Y.rep - X.rep @ (X.rep.T @ Y.rep), compute_uv=False
        )
        sin_asc = np.clip(sin_sv[::-1], 0.0, 1.0)
        small = cos_sv > TINY_ANGLE_COS
        theta[small] = np.arcsin(sin_asc[small])
    return theta


def distance(X: SubspacePoint, Y: SubspacePoint) -> float:
    """Geodesic distance: the 2-norm of the principal angles."""
    return float(np.linalg.norm(principal_angles(X, Y)))


def perturb_within(X: SubspacePoint, r: float, seed=None) -> SubspacePoint:
    """Point at exact geodesic distance r from X in a random direction.

    Requires 0 <= r < pi/2 so that distance equals the Frobenius norm of
    the generating tangent vector.
    """
    if not 0.0 <= r < np.pi / 2:
        raise ValueError(f"radius must lie in [0, pi/2), got {r}")
    if r == 0.0:
        return SubspacePoint(X.rep)
    rng = np.random.default_rng(seed)
    M = rng.standard_normal(X.rep.shape)
    G = project_tangent(X, M)
    if G.norm <= 1e-10 * np.linalg.norm(M):
        # happens only on Gr(n, n), where every direction projects away
        raise DegenerateStepError("no usable tangent direction at this point")
    return exp(X, G.scaled(r / G.norm))


def nonneg_curvature_gap(a: SubspacePoint, b: SubspacePoint, c: SubspacePoint) -> float:
    """Slack of dist(a, b) <= |Log_c(a) - Log_c(b)| (nonnegative curvature).

    Valid when the pairwise geodesics are unique; returns RHS - LHS, which
    must be >= 0 up to roundoff.
    """
    diff = np.linalg.norm(log(c, a).mat - log(c, b).mat)
    return float(diff - distance(a, b))


def bounded_curvature_gap(
    a: SubspacePoint,
    b: SubspacePoint,
    c: SubspacePoint,
    d: SubspacePoint,
    K: float = 2.0,
) -> float:
    """Slack of the two-basepoint log comparison under curvature |K| bounds.

    For points with max(dist(c,a), dist(d,a)) <= 1/(4 sqrt(K)),
    |Log_d(a) - Log_d(b)|^2 <= (1 + 5 K m^2) |Log_c(a) - Log_c(b)|^2
    where m is that max distance. Returns RHS - LHS.
    """
    m = max(distance(c, a), distance(d, a))
    lhs = np.linalg.norm(log(d, a).mat - log(d, b).mat) ** 2
    rhs = (1.0 + 5.0 * K * m**2) * np.linalg.norm(log(c, a).mat - log(c, b).mat) ** 2
    return float(rhs - lhs)

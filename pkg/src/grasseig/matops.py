"""Symmetric linear operators, matrix ingestion, and desk-scale spectral oracles.

Operators wrap dense arrays, sparse CSR matrices, or a shifted base operator.
All of them count *block products*: one application of the operator to an
n-by-p block counts as a single product, independent of p. Solver traces are
expressed in this unit.
"""

from __future__ import annotations

import copy
import gzip
import os
import tempfile
from dataclasses import dataclass

import numpy as np
import scipy.io
import scipy.linalg
import scipy.sparse as sp

from .errors import FormatError, ShapeError, SizeError, SymmetryError

DEFAULT_ORACLE_CAP = 5000
ORACLE_CAP_ENV = "GRASSEIG_ORACLE_CAP"


class SymmetricOperator:
    """Symmetric n-by-n operator with block-product accounting.

    Subclasses implement :meth:`_apply_raw`, the uncounted product. The
    public :meth:`apply_block` increments ``matvec_count`` by exactly one per
    call regardless of the block width.

    Instances are immutable after construction except for the counter, which
    is owned by a single solver run. Use :meth:`with_fresh_counter` to share
    the underlying matrix between runs.
    """

    def __init__(self, n: int):
        self.n = int(n)
        self.matvec_count = 0

    def apply_block(self, M: np.ndarray) -> np.ndarray:
        M = np.asarray(M, dtype=float)
        if M.ndim != 2 or M.shape[0] != self.n or M.shape[1] < 1:
            raise ShapeError(
                f"expected an ({self.n}, p) block, got array of shape {M.shape}"
            )
        self.matvec_count += 1
        return self._apply_raw(M)

    def _apply_raw(self, M: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def densify(self) -> np.ndarray:
        """Dense ndarray copy of the operator (for oracles and small tests)."""
        raise NotImplementedError

    def negated(self) -> "SymmetricOperator":
        """Operator representing the negated matrix."""
        raise NotImplementedError

    def with_fresh_counter(self) -> "SymmetricOperator":
        """Share the matrix data but start an independent product counter."""
        clone = copy.copy(self)
        clone.matvec_count = 0
        return clone


class DenseOperator(SymmetricOperator):
    def __init__(self, arr: np.ndarray):
        arr = np.asarray(arr, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ShapeError(f"dense operator needs a square array, got {arr.shape}")
        super().__init__(arr.shape[0])
        self.arr = arr

    def _apply_raw(self, M):
        return self.arr @ M

    def densify(self):
        return self.arr.copy()

    def negated(self):
        return DenseOperator(-self.arr)


class SparseOperator(SymmetricOperator):
    def __init__(self, mat):
        mat = sp.csr_matrix(mat)
        if mat.shape[0] != mat.shape[1]:
            raise ShapeError(f"sparse operator needs a square matrix, got {mat.shape}")
        super().__init__(mat.shape[0])
        self.mat = mat

    @property
    def nnz_fraction(self) -> float:
        return self.mat.nnz / float(self.n) ** 2

    def _apply_raw(self, M):
        return self.mat @ M

    def densify(self):
        return self.mat.toarray()

    def negated(self):
        return SparseOperator(-self.mat)


class ShiftedOperator(SymmetricOperator):
    """Wrapper computing (A + alpha*I) M = A M + alpha M in one counted product."""

    def __init__(self, base: SymmetricOperator, alpha: float):
        super().__init__(base.n)
        self.base = base
        self.alpha = float(alpha)

    def _apply_raw(self, M):
        return self.base._apply_raw(M) + self.alpha * M

    def densify(self):
        out = self.base.densify()
        out[np.diag_indices_from(out)] += self.alpha
        return out

    def negated(self):
        return ShiftedOperator(self.base.negated(), -self.alpha)


def shift(A: SymmetricOperator, alpha: float) -> SymmetricOperator:
    """Operator for A + alpha*I; its eigenvectors equal those of A."""
    return ShiftedOperator(A, alpha)


@dataclass(frozen=True)
class Fd3dSpec:
    """Grid extents of a 3D seven-point Laplacian with Dirichlet boundaries."""

    nx: int
    ny: int
    nz: int

    def __post_init__(self):
        for m in (self.nx, self.ny, self.nz):
            if int(m) < 1:
                raise SizeError(f"grid extents must be >= 1, got {self!r}")
        if self.n > 2**31 - 1:
            raise SizeError(f"grid of {self.n} nodes overflows the index space")

    @property
    def n(self) -> int:
        return int(self.nx) * int(self.ny) * int(self.nz)


@dataclass(frozen=True)
class DenseSpectrum:
    """Full symmetric eigendecomposition, eigenvalues sorted descending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def leading_block(self, p: int) -> np.ndarray:
        return self.eigenvectors[:, :p]


def _tridiag(m: int) -> sp.spmatrix:
    d = 2.0 * np.ones(m)
    e = -np.ones(m - 1)
    return sp.diags([e, d, e], [-1, 0, 1])


def build_fd3d(spec: Fd3dSpec) -> SparseOperator:
    """Seven-point Laplacian on an nx-by-ny-by-nz grid, unit spacing.

    Diagonal entries are 6, neighbor couplings -1, Dirichlet boundaries. The
    stencil is left unscaled: both the eigenvector set and the gap ratios
    driving the solvers are invariant under a global scale.
    """
    if not isinstance(spec, Fd3dSpec):
        spec = Fd3dSpec(*spec)
    Ix, Iy, Iz = (sp.identity(m) for m in (spec.nx, spec.ny, spec.nz))
    A = (
        sp.kron(sp.kron(_tridiag(spec.nx), Iy), Iz)
        + sp.kron(sp.kron(Ix, _tridiag(spec.ny)), Iz)
        + sp.kron(sp.kron(Ix, Iy), _tridiag(spec.nz))
    )
    return SparseOperator(A)


def analytic_fd3d_eigenvalues(spec: Fd3dSpec) -> np.ndarray:
    """Closed-form spectrum of :func:`build_fd3d`, sorted descending.

    The eigenvalues are sums of the three 1D Dirichlet values
    4 sin^2(i pi / (2 (m+1))).
    """
    if not isinstance(spec, Fd3dSpec):
        spec = Fd3dSpec(*spec)

    def line(m):
        i = np.arange(1, m + 1)
        return 4.0 * np.sin(i * np.pi / (2.0 * (m + 1))) ** 2

    a, b, c = line(spec.nx), line(spec.ny), line(spec.nz)
    lam = (a[:, None, None] + b[None, :, None] + c[None, None, :]).ravel()
    return np.sort(lam)[::-1]


def _oracle_cap(cap=None) -> int:
    if cap is not None:
        return int(cap)
    env = os.environ.get(ORACLE_CAP_ENV)
    return int(env) if env else DEFAULT_ORACLE_CAP


def dense_eig_oracle(A: SymmetricOperator, cap: int | None = None) -> DenseSpectrum:
    """Full eigendecomposition of a desk-scale operator.

    Refuses matrices above the cap (default 5000, overridable via the
    GRASSEIG_ORACLE_CAP environment variable or the ``cap`` argument);
    larger problems must supply spectral parameters from a file.
    """
    limit = _oracle_cap(cap)
    if A.n > limit:
        raise SizeError(
            f"n={A.n} exceeds the dense-oracle cap {limit}; "
            "supply spectral parameters externally"
        )
    dense = A.densify()
    w, v = scipy.linalg.eigh(dense)
    return DenseSpectrum(eigenvalues=w[::-1].copy(), eigenvectors=v[:, ::-1].copy())


def symmetry_defect(A: SymmetricOperator, probes: int = 20, seed: int = 0) -> float:
    """Largest normalized asymmetry |<Au,v> - <u,Av>| over random probe pairs.

    Verification utility; uses uncounted products so the operator's budget
    accounting is unaffected.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    norm_est = 1e-300
    for _ in range(probes):
        u = rng.standard_normal((A.n, 1))
        v = rng.standard_normal((A.n, 1))
        Au = A._apply_raw(u)
        Av = A._apply_raw(v)
        norm_est = max(
            norm_est,
            np.linalg.norm(Au) / np.linalg.norm(u),
            np.linalg.norm(Av) / np.linalg.norm(v),
        )
        defect = abs((Au.T @ v).item() - (u.T @ Av).item())
        worst = max(worst, defect / (norm_est * np.linalg.norm(u) * np.linalg.norm(v)))
    return worst


_GENERAL_SYMMETRY_RTOL = 1e-12


def load_matrix_market(path) -> SymmetricOperator:
    """Read a Matrix Market file into a symmetric operator.

    Accepts coordinate and array formats with real, integer, or pattern
    fields (pattern entries become 1.0). The header must declare symmetric
    storage, or general storage whose contents are symmetric to 1e-12
    relative; explicit zeros are dropped.
    """
    # the scipy reader is only exercised through plain file paths: its
    # file-object entry point can abort the process from native code
    if isinstance(path, (str, os.PathLike)) and str(path).endswith(".gz"):
        with gzip.open(path, "rb") as fh, tempfile.NamedTemporaryFile(
            suffix=".mtx", delete=False
        ) as tmp:
            tmp.write(fh.read())
            plain_path = tmp.name
        cleanup = True
    else:
        plain_path = os.fspath(path)
        if not os.path.exists(plain_path):
            raise FileNotFoundError(f"no such matrix file: {path}")
        cleanup = False

    try:
        try:
            rows, cols, _entries, _fmt, field, symmetry = scipy.io.mminfo(plain_path)
        except ValueError as e:
            raise FormatError(f"not a readable Matrix Market header: {e}") from e
        if rows != cols:
            raise FormatError(f"matrix is {rows}x{cols}; a square matrix is required")
        if field not in ("real", "integer", "pattern"):
            raise FormatError(f"unsupported field {field!r}; real data is required")
        if symmetry not in ("symmetric", "general"):
            raise FormatError(
                f"unsupported symmetry {symmetry!r}; symmetric or general required"
            )
        try:
            raw = scipy.io.mmread(plain_path)
        except Exception as e:
            raise IOError(f"failed to parse {path}: {e}") from e
    finally:
        if cleanup:
            os.unlink(plain_path)

    if sp.issparse(raw):
        mat = raw.tocsr()
        if symmetry == "general":
            _check_general_symmetry(mat)
            mat = (mat + mat.T) * 0.5
        mat.eliminate_zeros()
        return SparseOperator(mat)
    arr = np.asarray(raw, dtype=float)
    if symmetry == "general":
        _check_general_symmetry(arr)
        arr = (arr + arr.T) * 0.5
    return DenseOperator(arr)


def _check_general_symmetry(mat):
    if sp.issparse(mat):
        defect = abs(mat - mat.T).max()
        scale = abs(mat).max()
    else:
        defect = np.abs(mat - mat.T).max()
        scale = np.abs(mat).max()
    if scale > 0 and defect > _GENERAL_SYMMETRY_RTOL * scale:
        raise SymmetryError(
            f"general matrix is asymmetric: relative mismatch {defect / scale:.3e}"
        )

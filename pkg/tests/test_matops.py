import numpy as np
import pytest

from grasseig.errors import FormatError, ShapeError, SizeError, SymmetryError
from grasseig.matops import (
    DenseOperator,
    DenseSpectrum,
    Fd3dSpec,
    SparseOperator,
    analytic_fd3d_eigenvalues,
    build_fd3d,
    dense_eig_oracle,
    load_matrix_market,
    shift,
    symmetry_defect,
)


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestLoadMatrixMarket:
    def test_symmetric_coordinate_mirrors_lower_triangle(self, tmp_path):
        path = write(
            tmp_path,
            "a.mtx",
            "%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 2.0\n2 1 1.0\n",
        )
        op = load_matrix_market(path)
        assert op.n == 2
        np.testing.assert_allclose(op.densify(), [[2.0, 1.0], [1.0, 0.0]])

    def test_non_square_rejected(self, tmp_path):
        path = write(
            tmp_path,
            "rect.mtx",
            "%%MatrixMarket matrix coordinate real general\n3 4 1\n1 1 1.0\n",
        )
        with pytest.raises(FormatError):
            load_matrix_market(path)

    def test_general_asymmetric_rejected(self, tmp_path):
        path = write(
            tmp_path,
            "asym.mtx",
            "%%MatrixMarket matrix coordinate real general\n"
            "2 2 3\n1 1 2.0\n2 1 1.0\n1 2 5.0\n",
        )
        with pytest.raises(SymmetryError):
            load_matrix_market(path)

    def test_general_symmetric_accepted(self, tmp_path):
        path = write(
            tmp_path,
            "gen.mtx",
            "%%MatrixMarket matrix array real general\n2 2\n2.0\n1.0\n1.0\n3.0\n",
        )
        op = load_matrix_market(path)
        np.testing.assert_allclose(op.densify(), [[2.0, 1.0], [1.0, 3.0]])

    def test_explicit_zeros_dropped(self, tmp_path):
        path = write(
            tmp_path,
            "z.mtx",
            "%%MatrixMarket matrix coordinate real symmetric\n"
            "3 3 3\n1 1 2.0\n2 1 0.0\n3 3 1.0\n",
        )
        op = load_matrix_market(path)
        assert op.mat.nnz == 2

    def test_pattern_becomes_ones(self, tmp_path):
        path = write(
            tmp_path,
            "p.mtx",
            "%%MatrixMarket matrix coordinate pattern symmetric\n2 2 2\n1 1\n2 1\n",
        )
        op = load_matrix_market(path)
        np.testing.assert_allclose(op.densify(), [[1.0, 1.0], [1.0, 0.0]])

    def test_complex_rejected(self, tmp_path):
        path = write(
            tmp_path,
            "c.mtx",
            "%%MatrixMarket matrix coordinate complex symmetric\n1 1 1\n1 1 2.0 1.0\n",
        )
        with pytest.raises(FormatError):
            load_matrix_market(path)

    def test_garbage_header_rejected(self, tmp_path):
        path = write(tmp_path, "g.mtx", "not a matrix at all\n")
        with pytest.raises((FormatError, IOError)):
            load_matrix_market(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            load_matrix_market(tmp_path / "missing.mtx")


class TestBuildFd3d:
    def test_single_node(self):
        op = build_fd3d(Fd3dSpec(1, 1, 1))
        np.testing.assert_allclose(op.densify(), [[6.0]])

    def test_single_interior_edge(self):
        op = build_fd3d(Fd3dSpec(2, 1, 1))
        np.testing.assert_allclose(op.densify(), [[6.0, -1.0], [-1.0, 6.0]])

    def test_spectrum_matches_analytic_oracle(self):
        # independent oracle: closed-form 1D Dirichlet values, summed
        spec = Fd3dSpec(10, 12, 8)
        op = build_fd3d(spec)
        spectrum = dense_eig_oracle(op)
        np.testing.assert_allclose(
            spectrum.eigenvalues, analytic_fd3d_eigenvalues(spec), atol=1e-8
        )

    def test_bad_extent(self):
        with pytest.raises(SizeError):
            Fd3dSpec(0, 2, 2)


class TestAnalyticFd3dEigenvalues:
    def test_single_node_is_six(self):
        np.testing.assert_allclose(analytic_fd3d_eigenvalues(Fd3dSpec(1, 1, 1)), [6.0])

    def test_two_by_one_by_one(self):
        np.testing.assert_allclose(
            analytic_fd3d_eigenvalues(Fd3dSpec(2, 1, 1)), [7.0, 5.0]
        )

    def test_sorted_descending(self):
        lam = analytic_fd3d_eigenvalues(Fd3dSpec(5, 4, 3))
        assert np.all(np.diff(lam) <= 0)
        assert lam.size == 60


class TestApplyBlock:
    def test_identity(self):
        op = DenseOperator(np.eye(4))
        M = np.arange(8.0).reshape(4, 2)
        out = op.apply_block(M)
        np.testing.assert_allclose(out, M)
        assert op.matvec_count == 1

    def test_diag_on_basis_vector(self):
        op = DenseOperator(np.diag([1.0, 2.0, 3.0]))
        e2 = np.zeros((3, 1))
        e2[1] = 1.0
        np.testing.assert_allclose(op.apply_block(e2), 2.0 * e2)

    def test_sparse_matches_dense_oracle(self):
        rng = np.random.default_rng(7)
        n = 150
        dense = rng.standard_normal((n, n)) * (rng.random((n, n)) < 0.05)
        dense = dense + dense.T
        op = SparseOperator(dense)
        M = rng.standard_normal((n, 6))
        np.testing.assert_allclose(op.apply_block(M), dense @ M, atol=1e-12)

    def test_counter_unit_is_per_block(self):
        op = DenseOperator(np.eye(5))
        op.apply_block(np.ones((5, 4)))
        op.apply_block(np.ones((5, 1)))
        assert op.matvec_count == 2

    def test_shape_errors(self):
        op = DenseOperator(np.eye(3))
        with pytest.raises(ShapeError):
            op.apply_block(np.ones(3))
        with pytest.raises(ShapeError):
            op.apply_block(np.ones((4, 2)))

    def test_fresh_counter_shares_data(self):
        op = DenseOperator(np.eye(3))
        op.apply_block(np.ones((3, 1)))
        clone = op.with_fresh_counter()
        assert clone.matvec_count == 0
        clone.apply_block(np.ones((3, 1)))
        assert op.matvec_count == 1 and clone.matvec_count == 1


class TestShift:
    def test_zero_shift_identical(self):
        rng = np.random.default_rng(0)
        base = rng.standard_normal((6, 6))
        base = base + base.T
        op = shift(DenseOperator(base), 0.0)
        M = rng.standard_normal((6, 2))
        np.testing.assert_allclose(op.apply_block(M), base @ M)

    def test_shifted_basis_vector(self):
        op = shift(DenseOperator(np.diag([1.0, 2.0])), 3.0)
        e1 = np.array([[1.0], [0.0]])
        np.testing.assert_allclose(op.apply_block(e1), 4.0 * e1)

    def test_one_counted_product(self):
        base = DenseOperator(np.eye(4))
        op = shift(base, 2.0)
        op.apply_block(np.ones((4, 2)))
        assert op.matvec_count == 1
        assert base.matvec_count == 0  # wrapper owns the accounting

    def test_spectrum_offset(self):
        rng = np.random.default_rng(3)
        base = rng.standard_normal((40, 40))
        base = base + base.T
        spec0 = dense_eig_oracle(DenseOperator(base))
        spec5 = dense_eig_oracle(shift(DenseOperator(base), 5.0))
        np.testing.assert_allclose(
            spec5.eigenvalues, spec0.eigenvalues + 5.0, atol=1e-10
        )


class TestDenseEigOracle:
    def test_diagonal(self):
        spectrum = dense_eig_oracle(DenseOperator(np.diag([3.0, 1.0, 2.0])))
        np.testing.assert_allclose(spectrum.eigenvalues, [3.0, 2.0, 1.0])
        perm = np.abs(spectrum.eigenvectors)
        np.testing.assert_allclose(perm.sum(axis=0), np.ones(3), atol=1e-12)
        assert perm.argmax(axis=0).tolist() == [0, 2, 1]

    def test_fd3d_matches_analytic(self):
        spec = Fd3dSpec(4, 4, 4)
        spectrum = dense_eig_oracle(build_fd3d(spec))
        np.testing.assert_allclose(
            spectrum.eigenvalues, analytic_fd3d_eigenvalues(spec), atol=1e-10
        )

    def test_shift_keeps_eigenvectors(self):
        rng = np.random.default_rng(11)
        base = rng.standard_normal((30, 30))
        base = base + base.T
        op = DenseOperator(base)
        s0 = dense_eig_oracle(op)
        s5 = dense_eig_oracle(shift(op, 5.0))
        # compare leading invariant subspaces, not signed vectors
        _u, sv, _v = np.linalg.svd(s0.eigenvectors[:, :4].T @ s5.eigenvectors[:, :4])
        np.testing.assert_allclose(sv, np.ones(4), atol=1e-10)

    def test_cap(self):
        op = DenseOperator(np.eye(12))
        with pytest.raises(SizeError):
            dense_eig_oracle(op, cap=10)

    def test_env_override(self, monkeypatch):
        monkeypatch.setenv("GRASSEIG_ORACLE_CAP", "5")
        with pytest.raises(SizeError):
            dense_eig_oracle(DenseOperator(np.eye(8)))
        monkeypatch.setenv("GRASSEIG_ORACLE_CAP", "9")
        dense_eig_oracle(DenseOperator(np.eye(8)))

    def test_residual_invariant(self):
        rng = np.random.default_rng(4)
        arr = rng.standard_normal((60, 60))
        arr = arr + arr.T
        spectrum = dense_eig_oracle(DenseOperator(arr))
        lam1 = spectrum.eigenvalues[0]
        res = arr @ spectrum.eigenvectors - spectrum.eigenvectors * spectrum.eigenvalues
        assert np.linalg.norm(res, axis=0).max() <= 1e-8 * max(1.0, lam1)
        ortho = spectrum.eigenvectors.T @ spectrum.eigenvectors - np.eye(60)
        assert np.abs(ortho).max() <= 1e-10


class TestSymmetryInvariant:
    @pytest.mark.parametrize("builder", ["dense", "sparse", "shifted", "fd3d"])
    def test_randomized_bilinear_probe(self, builder):
        rng = np.random.default_rng(2)
        if builder == "fd3d":
            op = build_fd3d(Fd3dSpec(4, 3, 2))
        else:
            arr = rng.standard_normal((25, 25))
            arr = arr + arr.T
            if builder == "dense":
                op = DenseOperator(arr)
            elif builder == "sparse":
                op = SparseOperator(arr * (np.abs(arr) > 1.0))
            else:
                op = shift(DenseOperator(arr), 2.5)
        assert symmetry_defect(op, probes=20) <= 1e-10


def test_dense_spectrum_leading_block():
    spectrum = DenseSpectrum(
        eigenvalues=np.array([2.0, 1.0]), eigenvectors=np.eye(2)
    )
    np.testing.assert_allclose(spectrum.leading_block(1), [[1.0], [0.0]])

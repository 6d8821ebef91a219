import numpy as np
import pytest

from fintopics.errors import DimensionMismatch, RankDeficient
from fintopics.reduction import accept_external_reduction, principal_components, reduce
from fintopics.vectors import EmbeddingMatrix, write_vectors


def matrix(data):
    data = np.asarray(data, dtype=np.float32)
    return EmbeddingMatrix(data=data, keys=[f"k{i}" for i in range(data.shape[0])])


class TestReduce:
    def test_exact_rank_two_reconstruction(self):
        rng = np.random.default_rng(0)
        basis = np.linalg.qr(rng.standard_normal((6, 2)))[0]
        coords = rng.standard_normal((200, 2))
        data = coords @ basis.T  # exactly rank 2 in 6-D
        m = matrix(data)
        reduced = reduce(m, n_components=2)
        centered = data - data.mean(axis=0)
        _, components = principal_components(data, 2)
        recon = reduced.data.astype(np.float64) @ components.T
        err = np.linalg.norm(recon - centered) / np.linalg.norm(centered)
        assert err < 1e-6

    def test_isotropic_cloud_balanced_variances(self):
        rng = np.random.default_rng(42)
        data = rng.standard_normal((10000, 12))
        vals, _ = principal_components(data, 10)
        assert vals[0] / vals[-1] < 1.2  # within 20% at 10k points

    def test_duplicated_rows_same_components(self):
        rng = np.random.default_rng(7)
        data = rng.standard_normal((50, 6))
        _, comp_once = principal_components(data, 3)
        _, comp_twice = principal_components(np.vstack([data, data]), 3)
        assert np.allclose(comp_once, comp_twice, atol=1e-8)

    def test_projected_covariance_diagonal(self):
        rng = np.random.default_rng(3)
        # anisotropic data with well-separated spectrum
        data = rng.standard_normal((500, 8)) * np.array(
            [8.0, 6.0, 4.5, 3.0, 2.0, 1.5, 1.0, 0.5]
        )
        reduced = reduce(matrix(data), n_components=4).data.astype(np.float64)
        cov = np.cov(reduced.T, bias=True)
        off_diag = cov - np.diag(np.diag(cov))
        assert np.abs(off_diag).max() < 1e-6 * np.abs(np.diag(cov)).max()

    def test_rank_deficient_rejected(self):
        rng = np.random.default_rng(1)
        m = matrix(rng.standard_normal((5, 8)))
        with pytest.raises(RankDeficient):
            reduce(m, n_components=5)

    def test_deterministic(self):
        rng = np.random.default_rng(9)
        data = rng.standard_normal((100, 16))
        a = reduce(matrix(data), 10)
        b = reduce(matrix(data), 10)
        assert a.data.tobytes() == b.data.tobytes()

    def test_sign_convention(self):
        rng = np.random.default_rng(5)
        data = rng.standard_normal((300, 6)) * np.array([5, 3, 2, 1, 0.5, 0.2])
        _, components = principal_components(data, 3)
        for j in range(3):
            pivot = np.argmax(np.abs(components[:, j]))
            assert components[pivot, j] > 0


class TestExternalReduction:
    def test_matching_dim_accepted(self, tmp_path):
        rng = np.random.default_rng(2)
        m = matrix(rng.standard_normal((20, 10)))
        p = tmp_path / "r.ftsvec"
        write_vectors(m, p)
        loaded = accept_external_reduction(p, n_components=10)
        assert loaded.dim == 10 and loaded.rows == 20

    def test_dimension_mismatch(self, tmp_path):
        rng = np.random.default_rng(2)
        m = matrix(rng.standard_normal((20, 384)))
        p = tmp_path / "r.ftsvec"
        write_vectors(m, p)
        with pytest.raises(DimensionMismatch):
            accept_external_reduction(p, n_components=10)

    def test_round_trip_of_reduced_output(self, tmp_path):
        rng = np.random.default_rng(4)
        reduced = reduce(matrix(rng.standard_normal((50, 16))), 10)
        p = tmp_path / "r.ftsvec"
        write_vectors(reduced, p)
        loaded = accept_external_reduction(p, n_components=10)
        assert loaded.data.tobytes() == reduced.data.tobytes()
        assert loaded.keys == reduced.keys

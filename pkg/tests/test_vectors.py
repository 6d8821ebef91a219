import math
import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fintopics.errors import BadMagic, NaNDetected, TruncatedFile, ZeroVector
from fintopics.vectors import (
    EmbeddingMatrix,
    cosine,
    normalize_rows,
    read_vectors,
    write_vectors,
)


def matrix(rows, keys=None):
    arr = np.asarray(rows, dtype=np.float32)
    keys = keys or [f"k{i}" for i in range(arr.shape[0])]
    return EmbeddingMatrix(data=arr, keys=keys)


class TestFormat:
    def test_file_size_arithmetic(self, tmp_path):
        p = tmp_path / "v.ftsvec"
        write_vectors(matrix([[1.0, 0.0]], keys=["a"]), p)
        # 8 magic + 4 dim + 8 rows + 8 floats + (4 + 1) key
        assert p.stat().st_size == 8 + 4 + 8 + 8 + 5

    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(5)
        m = matrix(rng.standard_normal((7, 3)).astype(np.float32))
        p = tmp_path / "v.ftsvec"
        write_vectors(m, p)
        back = read_vectors(p)
        assert back.keys == m.keys
        assert back.data.tobytes() == m.data.tobytes()

    def test_nan_rejected_before_write(self, tmp_path):
        with pytest.raises(NaNDetected):
            matrix([[np.nan, 1.0]])

    def test_bad_magic(self, tmp_path):
        p = tmp_path / "v.ftsvec"
        write_vectors(matrix([[1.0, 2.0]]), p)
        blob = bytearray(p.read_bytes())
        blob[:8] = b"NOTMAGIC"
        p.write_bytes(bytes(blob))
        with pytest.raises(BadMagic):
            read_vectors(p)

    def test_truncated_floats(self, tmp_path):
        p = tmp_path / "v.ftsvec"
        write_vectors(matrix([[1.0, 2.0], [3.0, 4.0]]), p)
        blob = p.read_bytes()
        p.write_bytes(blob[: 8 + 4 + 8 + 6])  # cut inside the float payload
        with pytest.raises(TruncatedFile):
            read_vectors(p)

    def test_truncated_keys(self, tmp_path):
        p = tmp_path / "v.ftsvec"
        write_vectors(matrix([[1.0, 2.0]], keys=["longkey"]), p)
        blob = p.read_bytes()
        p.write_bytes(blob[:-3])
        with pytest.raises(TruncatedFile):
            read_vectors(p)

    @settings(max_examples=25, deadline=None)
    @given(
        rows=st.integers(1, 6),
        dim=st.integers(1, 5),
        keys=st.lists(st.text(max_size=12), min_size=6, max_size=6),
        seed=st.integers(0, 2**16),
    )
    def test_round_trip_property(self, tmp_path_factory, rows, dim, keys, seed):
        rng = np.random.default_rng(seed)
        m = EmbeddingMatrix(
            data=rng.standard_normal((rows, dim)).astype(np.float32),
            keys=keys[:rows],
        )
        p = tmp_path_factory.mktemp("rt") / "v.ftsvec"
        write_vectors(m, p)
        back = read_vectors(p)
        assert back.keys == m.keys
        assert back.data.tobytes() == m.data.tobytes()

    def test_nan_payload_detected(self, tmp_path):
        p = tmp_path / "v.ftsvec"
        write_vectors(matrix([[1.0, 2.0]], keys=["a"]), p)
        blob = bytearray(p.read_bytes())
        blob[20:24] = struct.pack("<f", float("nan"))
        p.write_bytes(bytes(blob))
        with pytest.raises(NaNDetected):
            read_vectors(p)


class TestCosine:
    def test_self_similarity_one(self):
        v = np.array([0.3, -0.7, 2.0])
        assert cosine(v, v) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal_zero(self):
        assert cosine(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 0.0

    def test_closed_form(self):
        got = cosine(np.array([1.0, 1.0]), np.array([1.0, 0.0]))
        assert got == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-12)

    def test_symmetry_and_bound(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            a = rng.standard_normal(4)
            b = rng.standard_normal(4)
            assert cosine(a, b) == pytest.approx(cosine(b, a), abs=1e-12)
            assert abs(cosine(a, b)) <= 1.0 + 1e-7

    def test_zero_vector(self):
        with pytest.raises(ZeroVector):
            cosine(np.zeros(3), np.ones(3))


class TestNormalizeRows:
    def test_three_four_five(self):
        out = normalize_rows(matrix([[3.0, 4.0]]))
        assert np.allclose(out.data, [[0.6, 0.8]], atol=1e-7)

    def test_unit_row_unchanged(self):
        out = normalize_rows(matrix([[1.0, 0.0]]))
        assert np.allclose(out.data, [[1.0, 0.0]], atol=1e-7)

    def test_idempotent(self):
        rng = np.random.default_rng(9)
        m = matrix(rng.standard_normal((5, 4)).astype(np.float32))
        once = normalize_rows(m)
        twice = normalize_rows(once)
        assert np.allclose(once.data, twice.data, atol=1e-6)
        norms = np.linalg.norm(once.data, axis=1)
        assert np.allclose(norms, 1.0, atol=1e-6)

    def test_zero_row_rejected(self):
        with pytest.raises(ZeroVector):
            normalize_rows(matrix([[0.0, 0.0]]))

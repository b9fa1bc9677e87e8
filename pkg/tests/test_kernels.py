import math

import numpy as np
import pytest

from oracles import compute_uncompute, dense_state, two_pass_var
from qsvmbench import kernels as K
from qsvmbench.errors import DataError, DegenerateInputError, DimensionError
from qsvmbench.numerics import matmul
from qsvmbench.spectra import effective_rank
from qsvmbench.statevec import CircuitConfig


@pytest.fixture
def feats():
    return np.random.default_rng(0).uniform(-1, 1, size=(30, 3))


class TestQuantumKernel:
    def test_identical_samples(self):
        k = K.quantum_kernel(np.array([[0.4, -0.2], [0.4, -0.2]]), cfg=CircuitConfig(2))
        np.testing.assert_allclose(k.values, np.ones((2, 2)), atol=1e-15)

    def test_unit_diagonal_symmetric_psd(self, feats):
        k = K.quantum_kernel(feats, cfg=CircuitConfig(3, 2)).values
        np.testing.assert_array_equal(np.diag(k), 1.0)
        np.testing.assert_array_equal(k, k.T)
        assert np.linalg.eigvalsh(k).min() > -1e-12
        assert np.all((k >= 0) & (k <= 1 + 1e-14))

    def test_matches_dense_oracle(self):
        x = np.random.default_rng(2).uniform(-np.pi, np.pi, size=(4, 2))
        k = K.quantum_kernel(x, cfg=CircuitConfig(2)).values
        for i in range(4):
            for j in range(4):
                ov = abs(np.vdot(dense_state(x[i], 2), dense_state(x[j], 2))) ** 2
                assert abs(k[i, j] - ov) < 1e-12
                assert abs(k[i, j] - compute_uncompute(x[i], x[j], 2)) < 1e-12

    def test_cross_block(self, feats):
        cfg = CircuitConfig(3)
        full = K.quantum_kernel(feats, cfg=cfg).values
        cross = K.quantum_kernel(feats[:7], feats[7:], cfg).values
        np.testing.assert_allclose(cross, full[:7, 7:], atol=1e-15)

    @pytest.mark.parametrize("dof", [1, 3])
    def test_row_blocked_fallback_agrees(self, feats, dof):
        cfg = CircuitConfig(3, 1, dof)
        ref = K.quantum_kernel(feats, cfg=cfg)
        small = K.quantum_kernel(feats, cfg=cfg, memory_cap_bytes=8 * 16 * 2 * 5)
        assert not ref.meta["blocked"] and small.meta["blocked"]
        np.testing.assert_allclose(small.values, ref.values, rtol=0, atol=1e-14)
        cross_ref = K.quantum_kernel(feats[:11], feats[11:], cfg)
        cross = K.quantum_kernel(feats[:11], feats[11:], cfg, memory_cap_bytes=500, threads=3)
        np.testing.assert_allclose(cross.values, cross_ref.values, rtol=0, atol=1e-14)

    def test_thread_count_does_not_change_bits(self):
        x = np.random.default_rng(5).uniform(-1, 1, size=(600, 4))
        cfg = CircuitConfig(4)
        a = K.quantum_kernel(x, cfg=cfg, threads=1).values
        b = K.quantum_kernel(x, cfg=cfg, threads=4).values
        assert a.tobytes() == b.tobytes()

    def test_width_mismatch(self, feats):
        with pytest.raises(DimensionError):
            K.quantum_kernel(feats, cfg=CircuitConfig(4))


class TestClassicalKernels:
    def test_rbf_analytic(self):
        assert K.rbf_kernel([[0.0, 0.0]], [[0.0, 0.0]], 3.0).values[0, 0] == 1.0
        k = K.rbf_kernel([[0.0, 0.0]], [[2.0, 0.0]], 0.25).values[0, 0]
        assert abs(k - math.exp(-1)) < 1e-15
        k = K.rbf_kernel([[0.0]], [[math.sqrt(math.log(2))]], 1.0).values[0, 0]
        assert abs(k - 0.5) < 1e-15

    def test_rbf_formula_oracle(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=(5, 3))
        k = K.rbf_kernel(x, None, 0.7).values
        for i in range(5):
            for j in range(5):
                d2 = sum((x[i, t] - x[j, t]) ** 2 for t in range(3))
                assert abs(k[i, j] - math.exp(-0.7 * d2)) < 1e-14
        np.testing.assert_array_equal(np.diag(k), 1.0)

    def test_projected_formula_and_bounds(self):
        z = np.random.default_rng(2).uniform(-1, 1, size=(6, 3))
        k = K.projected_kernel(z, None, 2.0).values
        for i in range(6):
            for j in range(6):
                assert abs(k[i, j] - math.exp(-2.0 * np.sum((z[i] - z[j]) ** 2))) < 1e-14
        with pytest.raises(DataError):
            K.projected_kernel(np.array([[1.5, 0.0]]))

    def test_linear(self):
        np.testing.assert_array_equal(K.linear_kernel(np.eye(3)).values, np.eye(3))
        u = np.array([[0.6, 0.8]])
        assert abs(K.linear_kernel(u).values[0, 0] - 1.0) < 1e-15
        x = np.random.default_rng(3).normal(size=(6, 4))
        np.testing.assert_array_equal(K.linear_kernel(x).values, matmul(x, x.T))

    def test_scale_gamma(self):
        x = np.array([[-1.0], [1.0], [-1.0], [1.0]])
        assert K.scale_gamma(x) == 1.0
        with pytest.raises(DegenerateInputError):
            K.scale_gamma(np.full((4, 2), 3.0))
        y = np.random.default_rng(4).normal(size=(50, 4))
        _, var = two_pass_var(y.ravel())
        assert abs(K.scale_gamma(y) - 1.0 / (4 * var)) < 1e-12


class TestNormalization:
    def test_trace(self, feats):
        k = K.normalize(K.quantum_kernel(feats, cfg=CircuitConfig(3)), "trace")
        assert abs(np.trace(k.values) - 1.0) < 1e-12
        assert k.train_trace == 30.0

    def test_frobenius_analytic(self):
        k = K.normalize(K.KernelMatrix(np.eye(2), "linear"), "frobenius").values
        np.testing.assert_allclose(k, np.eye(2) / math.sqrt(2), atol=1e-16)

    def test_cosine_is_identity_on_fidelity_kernel(self, feats):
        raw = K.quantum_kernel(feats, cfg=CircuitConfig(3))
        np.testing.assert_array_equal(K.normalize(raw, "cosine").values, raw.values)

    def test_scale_invariance_of_eff_rank(self, feats):
        raw = K.quantum_kernel(feats, cfg=CircuitConfig(3))
        base = effective_rank(raw)
        for mode in ("trace", "frobenius"):
            assert abs(effective_rank(K.normalize(raw, mode)) - base) < 1e-9

    def test_test_block_uses_train_statistics(self, feats):
        cfg = CircuitConfig(3)
        raw = K.quantum_kernel(feats[:20], cfg=cfg)
        stats = K.fit_normalization(raw, "trace")
        cross = K.quantum_kernel(feats[20:], feats[:20], cfg)
        np.testing.assert_allclose(K.normalize_test(cross, stats).values, cross.values / 20.0,
                                   rtol=1e-15)

    def test_cosine_linear_test_needs_diag(self):
        x = np.random.default_rng(0).normal(size=(5, 2))
        stats = K.fit_normalization(K.linear_kernel(x[:3]), "cosine")
        with pytest.raises(DataError):
            K.normalize_test(K.linear_kernel(x[3:], x[:3]), stats)
        d = np.sum(x[3:] ** 2, axis=1)
        out = K.normalize_test(K.linear_kernel(x[3:], x[:3]), stats, d).values
        norms = np.linalg.norm(x, axis=1)
        np.testing.assert_allclose(out, (x[3:] @ x[:3].T) / np.outer(norms[3:], norms[:3]),
                                   rtol=1e-13)

    def test_zero_trace_rejected(self):
        with pytest.raises(DegenerateInputError):
            K.normalize(K.KernelMatrix(np.zeros((2, 2)), "linear"), "trace")

    def test_unknown_mode(self):
        with pytest.raises(DataError):
            K.normalize(K.KernelMatrix(np.eye(2), "linear"), "l2")


class TestKernelFiles:
    def test_roundtrip(self, tmp_path, feats):
        k = K.normalize(K.quantum_kernel(feats, cfg=CircuitConfig(3, 2)), "trace")
        path = K.save_kernel(k, tmp_path / "k.qkmx")
        raw = path.read_bytes()
        assert raw[:4] == b"QKMX" and len(raw) == 16 + 8 * 30 * 30
        back = K.load_kernel(path)
        np.testing.assert_array_equal(back.values, k.values)
        assert back.normalization == "trace" and back.train_trace == 30.0
        assert back.meta["circuit"] == {"num_qubits": 3, "reps": 2, "dof": 1}
        assert back.meta["feature_hash"] == k.meta["feature_hash"]

    def test_corrupt_files(self, tmp_path):
        bad = tmp_path / "bad.qkmx"
        bad.write_bytes(b"NOPE" + bytes(12))
        with pytest.raises(DataError):
            K.load_kernel(bad)
        k = K.save_kernel(K.KernelMatrix(np.eye(3), "linear"), tmp_path / "t.qkmx")
        k.write_bytes(k.read_bytes()[:-8])
        with pytest.raises(DataError):
            K.load_kernel(k)

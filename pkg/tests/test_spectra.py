import json
import math

import numpy as np
import pytest

from oracles import two_pass_var
from qsvmbench.errors import DataError, DegenerateInputError, UnreachableTargetError
from qsvmbench.kernels import rbf_kernel, scale_gamma
from qsvmbench.numerics import Rng
from qsvmbench.spectra import (
    REL_THRESHOLD,
    effective_rank,
    rank_match_gamma,
    spectrum,
    variance_stats,
)


def test_identity_uniform_spectrum():
    r = spectrum(np.eye(7))
    assert r.n_positive == 7 and abs(r.eff_rank - 7) < 1e-12


def test_rank_one():
    v = np.arange(1.0, 6.0)
    r = spectrum(np.outer(v, v))
    assert r.n_positive == 1 and abs(r.eff_rank - 1) < 1e-9


def test_analytic_entropy():
    assert abs(effective_rank(np.diag([2.0, 1.0, 1.0])) - 2 ** 1.5) < 1e-12


def test_threshold_is_relative():
    r = spectrum(np.diag([1e6, 1e-3, 1e-6]))
    assert r.threshold == REL_THRESHOLD * 1e6
    assert r.n_positive == 2


def test_zero_kernel_rejected():
    with pytest.raises(DegenerateInputError):
        spectrum(np.zeros((3, 3)))


def test_report_files(tmp_path):
    r = spectrum(np.diag([3.0, 2.0, 1.0]))
    r.save(tmp_path / "s.json", tmp_path / "e.csv")
    doc = json.loads((tmp_path / "s.json").read_text())
    assert doc["n_positive"] == 3 and doc["n"] == 3
    lines = (tmp_path / "e.csv").read_text().splitlines()
    assert lines[0] == "index,eigenvalue" and lines[1] == "0,3.0"


class TestVariance:
    def test_constant_kernel(self):
        v = variance_stats(np.ones((10, 10)), np.arange(10) % 2, 10)
        assert v.k_mean == 1 and v.k_std == 0 and v.within_class_mean == v.between_class_mean

    def test_block_kernel(self):
        lab = np.array([0] * 6 + [1] * 4)
        k = (lab[:, None] == lab[None, :]).astype(float)
        v = variance_stats(k, lab, 10)
        assert v.within_class_mean == 1.0 and v.between_class_mean == 0.0

    def test_two_pass_oracle(self):
        rng = np.random.default_rng(1)
        a = rng.normal(size=(60, 60))
        k = (a + a.T) / 2
        lab = (rng.uniform(size=60) < 0.3).astype(int)
        v = variance_stats(k, lab, 25, Rng(3))
        sub = k[np.ix_(v.indices, v.indices)]
        off = [sub[i, j] for i in range(25) for j in range(25) if i != j]
        mean, var = two_pass_var(off)
        assert abs(v.k_mean - mean) < 1e-12 and abs(v.k_var - var) < 1e-12
        counts = np.bincount(lab[v.indices], minlength=2)
        expected = 25 * np.bincount(lab) / 60
        assert np.all(np.abs(counts - expected) < 1)

    def test_replay(self):
        k = np.random.default_rng(0).uniform(size=(30, 30))
        k = k + k.T
        lab = np.arange(30) % 3 == 0
        a = variance_stats(k, lab, 12, Rng(9))
        b = variance_stats(k, lab, 12, Rng(9))
        np.testing.assert_array_equal(a.indices, b.indices)

    def test_bad_subsample(self):
        with pytest.raises(DataError):
            variance_stats(np.eye(4), [0, 1, 0, 1], 5)


class TestRankMatch:
    @pytest.fixture
    def x(self):
        return np.random.default_rng(0).uniform(-1, 1, size=(80, 4))

    def test_limits(self, x):
        assert effective_rank(rbf_kernel(x, None, 1e-8)) < 1.01
        assert effective_rank(rbf_kernel(x, None, 1e6)) > 79.9

    def test_monotone_on_grid(self, x):
        ranks = [effective_rank(rbf_kernel(x, None, g)) for g in np.logspace(-3, 3, 10)]
        assert np.all(np.diff(ranks) > 0)

    @pytest.mark.parametrize("g0", [0.05, 0.6, 7.0])
    def test_round_trip(self, x, g0):
        target = effective_rank(rbf_kernel(x, None, g0))
        g = rank_match_gamma(x, target, 1e-6)
        assert abs(math.log(g / g0)) < 1e-3
        assert abs(effective_rank(rbf_kernel(x, None, g)) - target) <= 1e-6 * target

    def test_starts_at_scale_gamma(self, x):
        target = effective_rank(rbf_kernel(x, None, scale_gamma(x)))
        assert rank_match_gamma(x, target) == scale_gamma(x)

    def test_unreachable(self, x):
        with pytest.raises(UnreachableTargetError):
            rank_match_gamma(x, 80.0)
        with pytest.raises(UnreachableTargetError):
            rank_match_gamma(x, 1.0)
        dup = np.vstack([x[:10], x[:10]])
        with pytest.raises(UnreachableTargetError):
            rank_match_gamma(dup, 19.5)

    def test_identical_rows(self):
        with pytest.raises(DegenerateInputError):
            rank_match_gamma(np.ones((5, 2)), 2.0)

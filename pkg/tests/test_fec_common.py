import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import binomtest

from cmsim.fec import deinterleave, interleave, interleaver_permutation, post_fec_ber
from cmsim.fec.common import DecodeResult, clopper_pearson


def result(bits, errors=None):
    return DecodeResult(np.asarray(bits, dtype=np.uint8), 1, True, bit_errors=errors)


@settings(max_examples=30, deadline=None)
@given(n=st.integers(0, 500), seed=st.integers(0, 2**31))
def test_deinterleave_inverts_interleave(n, seed):
    x = np.random.default_rng(seed).integers(0, 2, n)
    assert np.array_equal(deinterleave(interleave(x, seed), seed), x)


def test_same_seed_same_permutation():
    assert np.array_equal(interleaver_permutation(1000, 7), interleaver_permutation(1000, 7))
    assert not np.array_equal(interleaver_permutation(1000, 7), interleaver_permutation(1000, 8))
    assert sorted(interleaver_permutation(1000, 7)) == list(range(1000))


def test_mean_displacement_near_n_over_three():
    # E|pi(i) - i| = (n^2 - 1) / (3n) for a uniform permutation
    n = 5000
    means = [np.abs(interleaver_permutation(n, s) - np.arange(n)).mean() for s in range(20)]
    assert np.mean(means) == pytest.approx((n * n - 1) / (3 * n), rel=0.01)


def test_explicit_permutation_is_used():
    perm = np.array([2, 0, 1])
    assert interleave(np.array([10, 11, 12]), perm=perm).tolist() == [12, 10, 11]
    assert deinterleave(np.array([12, 10, 11]), perm=perm).tolist() == [10, 11, 12]


def test_threshold_arithmetic():
    frames = [result(np.zeros(1000), 0) for _ in range(9)] + [result(np.zeros(1000), 47)]
    out = post_fec_ber(frames)
    assert out.ber == pytest.approx(4.7e-3)
    assert out.frames == 10 and out.frame_errors == 1 and out.bits == 10_000
    assert sum(f.bit_errors for f in frames) == out.errors


def test_perfect_frames_and_scoring():
    ref = [np.ones(8, dtype=np.uint8)] * 3
    out = post_fec_ber([result(np.ones(8)) for _ in range(3)], ref)
    assert out.ber == 0.0 and out.ci[0] == 0.0
    with pytest.raises(ValueError):
        post_fec_ber([])
    with pytest.raises(ValueError):
        post_fec_ber([result(np.ones(8))])


def test_clopper_pearson_matches_scipy():
    for k, n in ((0, 100), (3, 100), (47, 10_000), (100, 100)):
        lo, hi = clopper_pearson(k, n)
        ci = binomtest(k, n).proportion_ci(0.95, method="exact")
        assert lo == pytest.approx(ci.low, abs=1e-12) and hi == pytest.approx(ci.high, abs=1e-12)


def test_decode_result_ber():
    r = result([1, 0, 1, 1]).score([1, 1, 1, 1])
    assert r.bit_errors == 1 and r.ber == 0.25
    with pytest.raises(ValueError):
        result([1]).ber
    with pytest.raises(ValueError):
        result([1, 0]).score([1])

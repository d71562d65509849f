import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmsim.constellation import get_constellation
from cmsim.demapper import LlrFrame, pre_fec_ber
from cmsim.rates import (
    estimate_gmi,
    estimate_mi_awgn,
    estimate_mi_samples,
    gmi_from_pdf,
    gmi_objective,
    golden_section_max,
    optimize_s,
    rate_row,
    symmetrized_pdf,
    write_pdf_csv,
    write_rates_csv,
)
from oracles import square_qam_mi
from util import awgn_frame, awgn_symbols

# quadrature oracle values, bits per symbol, at 0/3/6/10 dB
ORACLE_MI = {
    "4qam": [0.9718883082658705, 1.4413217773321203, 1.8237609091742386, 1.9935126559800593],
    "16qam": [0.9897413721302519, 1.5410160595161253, 2.2036335498257347, 3.1639431880506876],
}
SNR_DB = [0, 3, 6, 10]


def test_oracle_reproduces_frozen_values():
    for name, vals in ORACLE_MI.items():
        M = int(name[:-3])
        for d, v in zip(SNR_DB, vals):
            assert square_qam_mi(M, 10 ** (d / 10)) == pytest.approx(v, abs=1e-9)


def test_oracle_limits():
    assert square_qam_mi(4, 1e-4) < 1e-3
    assert square_qam_mi(16, 1e4) == pytest.approx(4.0, abs=1e-6)


@pytest.mark.parametrize("name", ["4qam", "16qam"])
def test_mi_estimate_near_oracle_small_n(name):
    c = get_constellation(name)
    for d, ref in zip(SNR_DB, ORACLE_MI[name]):
        est = estimate_mi_awgn(c, 10 ** (d / 10), 20_000, seed=d)
        assert abs(est.value - ref) <= max(4 * est.std_err, 0.01)


def test_mi_estimate_is_seeded():
    c = get_constellation("16qam")
    a = estimate_mi_awgn(c, 4.0, 5000, seed=3)
    b = estimate_mi_awgn(c, 4.0, 5000, seed=3)
    assert a.value == b.value and a.std_err == b.std_err


def test_mi_estimate_rejects_bad_input():
    c = get_constellation("4qam")
    with pytest.raises(ValueError):
        estimate_mi_awgn(c, 0.0, 5000)
    with pytest.raises(ValueError):
        estimate_mi_awgn(c, 1.0, 10)
    with pytest.raises(ValueError):
        estimate_mi_samples([1j], [0, 1], 1.0, c)


def test_mi_from_samples_matches_awgn_estimator(rng):
    c = get_constellation("16qam")
    rho = 10 ** 0.8
    _, idx, y = awgn_symbols(c, rho, 40_000, rng)
    a = estimate_mi_samples(y, idx, rho, c)
    b = estimate_mi_awgn(c, rho, 40_000, seed=1)
    assert abs(a.value - b.value) < 4 * math.hypot(a.std_err, b.std_err)


def test_mi_increases_with_snr():
    c = get_constellation("64qam")
    vals = [estimate_mi_awgn(c, 10 ** (d / 10), 4000, seed=0).value for d in (0, 5, 10, 15, 20)]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 6.0


def test_golden_section_finds_quadratic_peak():
    x, fx = golden_section_max(lambda s: -(s - 1.7) ** 2 + 3, 0.0, 10.0, 1e-8)
    assert x == pytest.approx(1.7, abs=1e-6)
    assert fx == pytest.approx(3.0)


def test_exact_gmi_uses_unit_s_and_peaks_there(rng):
    f = awgn_frame(get_constellation("16qam"), 10 ** 0.8, 20_000, rng)
    est = estimate_gmi(f)
    assert est.s_star == 1.0
    assert optimize_s(f).s_star == pytest.approx(1.0, abs=0.03)
    assert est.value == pytest.approx(gmi_objective(f, 1.0))
    assert est.per_bit_terms.shape == (4,)
    assert est.per_bit_terms.sum() == pytest.approx(est.value)


def test_maxlog_gmi_optimizes_s(rng):
    f = awgn_frame(get_constellation("64qam"), 10 ** 1.2, 10_000, rng, "maxlog")
    est = estimate_gmi(f)
    assert est.value >= gmi_objective(f, 1.0) - 1e-12
    assert est.value == pytest.approx(gmi_objective(f, est.s_star))


def test_gmi_of_uninformative_values_is_zero():
    f = LlrFrame(np.zeros((2, 100)), np.zeros((2, 100), dtype=np.uint8))
    assert estimate_gmi(f).value == pytest.approx(0.0, abs=1e-12)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        optimize_s(LlrFrame(np.zeros((2, 10)), np.zeros((2, 10)), "maxlog"))


def test_optimize_s_flags_bracket_edge():
    # perfectly reliable values push s to the upper edge
    llrs = np.full((1, 50), 10.0)
    f = LlrFrame(llrs, np.zeros((1, 50)), "maxlog")
    with pytest.warns(RuntimeWarning):
        opt = optimize_s(f)
    assert opt.at_boundary


def test_empty_frame_rejected():
    with pytest.raises(ValueError):
        estimate_gmi(LlrFrame(np.zeros((2, 0)), np.zeros((2, 0))))


@settings(max_examples=25, deadline=None)
@given(a=st.floats(0.25, 4.0))
def test_scaling_moves_s_star_inversely(a):
    f = awgn_frame(get_constellation("16qam"), 10 ** 0.7, 4000, np.random.default_rng(7), "maxlog")
    base = optimize_s(f)
    scaled = optimize_s(f.scaled(a))
    assert scaled.s_star == pytest.approx(base.s_star / a, abs=2e-3 + 1e-3 / a)
    assert scaled.value == pytest.approx(base.value, abs=1e-6)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), snr_db=st.floats(-2.0, 18.0))
def test_gmi_bounded_by_bits_per_symbol(seed, snr_db):
    c = get_constellation("16qam")
    f = awgn_frame(c, 10 ** (snr_db / 10), 300, np.random.default_rng(seed), "maxlog")
    est = estimate_gmi(f)
    assert est.value <= c.m + 1e-12


def test_symmetrized_pdf_properties(rng):
    f = awgn_frame(get_constellation("16qam"), 10 ** 0.6, 20_000, rng)
    pdf = symmetrized_pdf(f)
    assert pdf.density.size == 2001
    assert pdf.integral() == pytest.approx(1.0)
    # odd bin count puts a bin centre on zero
    assert np.min(np.abs(pdf.centers)) == pytest.approx(0.0, abs=1e-12)
    assert abs(pdf.mass_below_zero() - pre_fec_ber(f)) <= pdf.zero_bin_mass()
    with pytest.raises(ValueError):
        symmetrized_pdf(f, n_bins=1)


def test_gmi_from_pdf_matches_sample_gmi_for_exact_values(rng):
    c = get_constellation("16qam")
    f = awgn_frame(c, 10 ** 0.8, 40_000, rng)
    est = estimate_gmi(f)
    from_pdf = gmi_from_pdf(symmetrized_pdf(f), c.m)
    assert from_pdf.value == pytest.approx(est.value, abs=0.03)


def test_gmi_from_pdf_rejects_bad_pdfs(rng):
    f = awgn_frame(get_constellation("4qam"), 2.0, 2000, rng)
    pdf = symmetrized_pdf(f, n_bins=101)
    from dataclasses import replace

    with pytest.raises(ValueError):
        gmi_from_pdf(replace(pdf, bin_edges=pdf.bin_edges + 1.0), 2)
    with pytest.raises(ValueError):
        gmi_from_pdf(replace(pdf, density=pdf.density * 0), 2)


def test_rate_and_pdf_csv_output(tmp_path, rng):
    c = get_constellation("4qam")
    f = awgn_frame(c, 2.0, 2000, rng)
    est = estimate_gmi(f)
    path = tmp_path / "rates.csv"
    write_rates_csv([rate_row(est, c.name, 3.0)], path)
    lines = path.read_text().splitlines()
    assert lines[0] == "metric,constellation,rho_db,value,s_star,n,std_err"
    assert lines[1].startswith("gmi,4qam,3.0,")
    pdf_path = tmp_path / "pdf.csv"
    write_pdf_csv(symmetrized_pdf(f, n_bins=11), pdf_path)
    assert len(pdf_path.read_text().splitlines()) == 12


def test_mi_limits():
    # near zero SNR the MI of any zero-mean unit-energy input is rho * log2(e)
    lo = estimate_mi_awgn(get_constellation("4qam"), 1e-6, 10_000, seed=1)
    assert abs(lo.value - 1e-6 / math.log(2)) <= 3 * lo.std_err
    assert lo.value < 1e-5
    hi = estimate_mi_awgn(get_constellation("16qam"), 1e6, 10_000, seed=1)
    assert abs(hi.value - 4.0) <= 3 * hi.std_err + 1e-9


def test_saturated_correct_values_give_full_rate():
    bits = np.random.default_rng(0).integers(0, 2, (4, 500))
    f = LlrFrame(np.where(bits == 1, 50.0, -50.0), bits)
    assert estimate_gmi(f).value == pytest.approx(4.0, abs=1e-3)


def test_gmi_from_pdf_at_large_n(rng):
    c = get_constellation("16qam")
    f = awgn_frame(c, 10 ** 0.7, 1_000_000, rng)
    assert gmi_from_pdf(symmetrized_pdf(f), c.m).value == pytest.approx(estimate_gmi(f).value, abs=0.02)

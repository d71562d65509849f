import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cmsim.constellation import (
    ConstellationError,
    build_8qam,
    build_square_qam,
    format_constellation,
    get_constellation,
    gray_code,
    load_constellation,
    map_bits,
    map_bits_to_indices,
    parse_constellation,
)
from cmsim.demapper import hard_decide, llr_exact


@pytest.mark.parametrize("M", [4, 16, 64, 256])
def test_square_qam_invariants(M):
    c = build_square_qam(M)
    assert c.M == M and c.m == int(math.log2(M))
    assert abs(np.mean(np.abs(c.points) ** 2) - 1) < 1e-12
    for k in range(c.m):
        zero, one = set(c.subsets[k, 0]), set(c.subsets[k, 1])
        assert len(zero) == len(one) == M // 2
        assert zero | one == set(range(M)) and not zero & one
    assert len({tuple(lab) for lab in c.labels}) == M


@pytest.mark.parametrize("M", [2, 8, 32, 128, 1024])
def test_unsupported_square_sizes(M):
    with pytest.raises(ConstellationError):
        build_square_qam(M)


def test_4qam_points():
    c = build_square_qam(4)
    expected = {complex(a, b) / math.sqrt(2) for a in (-1, 1) for b in (-1, 1)}
    assert {complex(round(p.real, 12), round(p.imag, 12)) for p in c.points} == {
        complex(round(p.real, 12), round(p.imag, 12)) for p in expected
    }


def test_16qam_scale_factor():
    c = build_square_qam(16)
    # unnormalized grid {+-1, +-3}^2 has energy 10
    assert np.allclose(np.sort(np.unique(np.round(c.points.real * math.sqrt(10), 9))), [-3, -1, 1, 3])


def test_16qam_grid_neighbours_are_gray():
    c = build_square_qam(16)
    grid = {(round(p.real * math.sqrt(10)), round(p.imag * math.sqrt(10))): i for i, p in enumerate(c.points)}
    pairs = 0
    for (a, b), i in grid.items():
        for da, db in ((2, 0), (0, 2)):
            j = grid.get((a + da, b + db))
            if j is not None:
                pairs += 1
                assert np.sum(c.labels[i] != c.labels[j]) == 1
    assert pairs == 24


@pytest.mark.parametrize("M", [4, 16, 64, 256])
def test_nearest_neighbours_differ_in_one_bit(M):
    assert all(d == 1 for _, _, d in build_square_qam(M).hamming_neighbors())


def test_gray_code_sequence():
    assert gray_code(3).tolist() == [0, 1, 3, 2, 6, 7, 5, 4]


def test_8qam():
    c = build_8qam()
    assert c.M == 8 and c.m == 3
    assert abs(np.mean(np.abs(c.points) ** 2) - 1) < 1e-12
    assert all(c.subsets[k, b].size == 4 for k in range(3) for b in (0, 1))
    assert max(d for _, _, d in c.hamming_neighbors()) >= 2


def test_load_round_trip(tmp_path):
    c = build_square_qam(4)
    path = tmp_path / "q4.txt"
    path.write_text(format_constellation(c))
    d = load_constellation(path)
    assert np.array_equal(d.labels, c.labels)
    assert np.allclose(d.points, c.points, atol=1e-15)


def test_duplicate_labels_rejected():
    with pytest.raises(ConstellationError, match="distinct"):
        parse_constellation("00 1 1\n00 -1 1\n10 -1 -1\n11 1 -1\n")


@pytest.mark.parametrize(
    "text",
    [
        "00 1 1\n01 -1 1\n10 -1 -1\n",  # 3 points
        "00 1\n01 -1 1\n10 -1 -1\n11 1 -1\n",  # short row
        "0a 1 1\n01 -1 1\n10 -1 -1\n11 1 -1\n",  # bad label
        "00 1 x\n01 -1 1\n10 -1 -1\n11 1 -1\n",  # bad number
        "000 1 1\n01 -1 1\n10 -1 -1\n11 1 -1\n",  # ragged labels
        "# nothing\n",
    ],
)
def test_malformed_files(text):
    with pytest.raises(ConstellationError):
        parse_constellation(text)


def test_energy_two_is_rescaled_with_warning():
    s = 1.0  # points (+-1 +-1j) have energy 2
    text = f"00 {s} {s}\n01 {-s} {s}\n10 {-s} {-s}\n11 {s} {-s}\n"
    with pytest.warns(UserWarning, match="renormalized"):
        c = parse_constellation(text)
    assert np.allclose(np.abs(c.points), 1.0)
    assert np.isclose(c.points[0], (1 + 1j) / math.sqrt(2))


def test_unit_energy_file_does_not_warn():
    text = format_constellation(build_square_qam(16))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        parse_constellation(text)


def test_map_bits_basics():
    c = build_square_qam(4)
    assert np.array_equal(map_bits(c.labels[1], c), [c.points[1]])
    assert map_bits([], c).size == 0
    with pytest.raises(ValueError):
        map_bits([0, 1, 1], c)


def test_get_constellation_names():
    assert get_constellation("16QAM").M == 16
    assert get_constellation("8qam").M == 8
    with pytest.raises(ConstellationError):
        get_constellation("17qam")


@pytest.mark.parametrize("M", [4, 16, 64, 256])
def test_noiseless_loopback(M, rng):
    c = build_square_qam(M)
    bits = rng.integers(0, 2, 40 * c.m, dtype=np.uint8)
    L = llr_exact(map_bits(bits, c), 1e4, c)
    assert np.array_equal(hard_decide(L).T.ravel(), bits)


@given(st.sampled_from([4, 16, 64, 256, 8]), st.data())
def test_label_lookup_is_identity(M, data):
    c = build_8qam() if M == 8 else build_square_qam(M)
    i = data.draw(st.integers(0, M - 1))
    assert map_bits_to_indices(c.labels[i], c)[0] == i
    assert map_bits(c.labels[i], c)[0] == c.points[i]

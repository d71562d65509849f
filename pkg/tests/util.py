"""Small channel helpers shared by the tests."""

import math

import numpy as np

from cmsim.constellation import map_bits_to_indices
from cmsim.demapper import demap


def awgn_symbols(c, rho, n, rng):
    bits = rng.integers(0, 2, n * c.m, dtype=np.uint8)
    idx = map_bits_to_indices(bits, c)
    z = math.sqrt(0.5 / rho) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    return bits, idx, c.points[idx] + z


def awgn_frame(c, rho, n, rng, kind="exact"):
    bits, _, y = awgn_symbols(c, rho, n, rng)
    return demap(y, rho, c, bits, kind)

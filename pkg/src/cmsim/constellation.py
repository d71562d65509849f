"""QAM constellations with binary labelings.

A :class:`Constellation` holds ``M = 2**m`` unit-energy points, their
``m``-bit labels and, for every bit position ``k`` and bit value ``b``,
the indices of the points whose ``k``-th label bit equals ``b``.

Label bit ``k`` (0-based) is the ``k``-th character of the label string,
i.e. the most significant bit comes first.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

ENERGY_TOL = 1e-12
RENORM_WARN_TOL = 1e-6


class ConstellationError(ValueError):
    pass


def gray_code(nbits: int) -> np.ndarray:
    """Binary-reflected Gray code: entry ``i`` is the codeword of level ``i``."""
    i = np.arange(1 << nbits)
    return i ^ (i >> 1)


def int_to_bits(values, nbits: int) -> np.ndarray:
    values = np.asarray(values, dtype=np.int64)
    shifts = np.arange(nbits - 1, -1, -1)
    return ((values[..., None] >> shifts) & 1).astype(np.uint8)


def bits_to_int(bits) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.int64)
    weights = 1 << np.arange(bits.shape[-1] - 1, -1, -1)
    return bits @ weights


@dataclass(frozen=True, eq=False)
class Constellation:
    name: str
    points: np.ndarray
    labels: np.ndarray
    subsets: np.ndarray = field(repr=False)
    _lookup: np.ndarray = field(repr=False)

    @classmethod
    def from_arrays(cls, points, labels, name: str = "custom") -> Constellation:
        points = np.asarray(points, dtype=np.complex128).ravel().copy()
        labels = np.asarray(labels, dtype=np.uint8)
        M = points.size
        if M < 2 or M & (M - 1):
            raise ConstellationError(f"constellation size {M} is not a power of two")
        m = M.bit_length() - 1
        if labels.shape != (M, m):
            raise ConstellationError(f"labels must have shape ({M}, {m}), got {labels.shape}")
        if np.any(labels > 1):
            raise ConstellationError("labels must be binary")
        label_ints = bits_to_int(labels)
        if np.unique(label_ints).size != M:
            raise ConstellationError("labels are not distinct")
        energy = np.mean(np.abs(points) ** 2)
        if energy <= 0:
            raise ConstellationError("constellation has zero energy")
        points /= np.sqrt(energy)

        # subsets[k, b] -> indices of points with bit k equal to b
        subsets = np.empty((m, 2, M // 2), dtype=np.intp)
        for k in range(m):
            for b in (0, 1):
                subsets[k, b] = np.flatnonzero(labels[:, k] == b)
        lookup = np.empty(M, dtype=np.intp)
        lookup[label_ints] = np.arange(M)

        for arr in (points, labels, subsets, lookup):
            arr.setflags(write=False)
        return cls(name, points, labels, subsets, lookup)

    @property
    def M(self) -> int:
        return self.points.size

    @property
    def m(self) -> int:
        return self.labels.shape[1]

    def index_of_label(self, bits) -> np.ndarray:
        """Point indices for one label (length m) or a stack of labels (..., m)."""
        return self._lookup[bits_to_int(bits)]

    def hamming_neighbors(self, tol: float = 1e-9) -> list[tuple[int, int, int]]:
        """(i, j, hamming distance) for every pair at the minimum Euclidean distance."""
        d = np.abs(self.points[:, None] - self.points[None, :])
        np.fill_diagonal(d, np.inf)
        dmin = d.min()
        pairs = []
        for i, j in zip(*np.nonzero(d <= dmin + tol)):
            if i < j:
                pairs.append((int(i), int(j), int(np.sum(self.labels[i] != self.labels[j]))))
        return pairs

    def __repr__(self) -> str:
        return f"Constellation({self.name!r}, M={self.M})"


def build_square_qam(M: int) -> Constellation:
    """Gray-labeled square M-QAM, M in {4, 16, 64, 256}.

    The first m/2 label bits select the in-phase level, the rest the
    quadrature level, each through a binary-reflected Gray code. Point
    index equals the integer value of the label.
    """
    if M not in (4, 16, 64, 256):
        raise ConstellationError(f"unsupported square QAM size {M}; use 4, 16, 64 or 256")
    m = M.bit_length() - 1
    h = m // 2
    L = 1 << h
    levels = np.arange(-(L - 1), L, 2, dtype=float)
    # codeword -> amplitude
    amp_of_code = np.empty(L)
    amp_of_code[gray_code(h)] = levels

    labels = int_to_bits(np.arange(M), m)
    i_code = bits_to_int(labels[:, :h])
    q_code = bits_to_int(labels[:, h:])
    points = amp_of_code[i_code] + 1j * amp_of_code[q_code]
    return Constellation.from_arrays(points, labels, name=f"{M}qam")


def build_8qam() -> Constellation:
    """Rectangular 8QAM stand-in with a natural-binary (non-Gray) labeling.

    Geometry and labels come from the bundled ``data/8qam.txt``; use
    :func:`load_constellation` to supply a different 8-point geometry.
    """
    text = resources.files("cmsim").joinpath("data/8qam.txt").read_text()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        return parse_constellation(text, name="8qam")


def parse_constellation(text: str, name: str = "custom") -> Constellation:
    labels, points = [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ConstellationError(f"line {lineno}: expected 'label re im', got {raw!r}")
        label, re_s, im_s = parts
        if not label or set(label) - {"0", "1"}:
            raise ConstellationError(f"line {lineno}: label {label!r} is not a bit string")
        try:
            points.append(complex(float(re_s), float(im_s)))
        except ValueError as exc:
            raise ConstellationError(f"line {lineno}: bad coordinate ({exc})") from None
        labels.append([int(ch) for ch in label])

    if not points:
        raise ConstellationError("no constellation points found")
    widths = {len(lab) for lab in labels}
    if len(widths) != 1:
        raise ConstellationError("labels have inconsistent lengths")
    M = len(points)
    if M & (M - 1) or M < 2:
        raise ConstellationError(f"constellation size {M} is not a power of two")
    if widths.pop() != M.bit_length() - 1:
        raise ConstellationError(f"labels must have {M.bit_length() - 1} bits for M={M}")

    energy = np.mean(np.abs(np.asarray(points)) ** 2)
    if abs(energy - 1.0) > RENORM_WARN_TOL:
        warnings.warn(
            f"constellation energy {energy:.6g} renormalized to 1", UserWarning, stacklevel=3
        )
    return Constellation.from_arrays(points, labels, name=name)


def load_constellation(path) -> Constellation:
    path = Path(path)
    return parse_constellation(path.read_text(), name=path.stem)


def format_constellation(c: Constellation) -> str:
    lines = [f"# {c.name}: label re im"]
    for lab, x in zip(c.labels, c.points):
        lines.append(f"{''.join(map(str, lab))} {float(x.real)!r} {float(x.imag)!r}")
    return "\n".join(lines) + "\n"


def get_constellation(spec: str) -> Constellation:
    """Resolve '16qam', '8qam', 'qam64', or a path to a constellation file."""
    key = spec.lower().replace("-", "")
    if key == "8qam":
        return build_8qam()
    digits = key.replace("qam", "")
    if digits.isdigit() and "qam" in key:
        return build_square_qam(int(digits))
    if Path(spec).exists():
        return load_constellation(spec)
    raise ConstellationError(f"unknown constellation {spec!r}")


def map_bits(bits, c: Constellation) -> np.ndarray:
    """Map a flat bit vector to symbols, m consecutive bits per symbol."""
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    if bits.size % c.m:
        raise ValueError(f"bit count {bits.size} is not a multiple of m={c.m}")
    if bits.size == 0:
        return np.empty(0, dtype=np.complex128)
    idx = c.index_of_label(bits.reshape(-1, c.m))
    return c.points[idx]


def map_bits_to_indices(bits, c: Constellation) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    if bits.size % c.m:
        raise ValueError(f"bit count {bits.size} is not a multiple of m={c.m}")
    return c.index_of_label(bits.reshape(-1, c.m))

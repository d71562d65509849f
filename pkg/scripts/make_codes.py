"""Regenerate the bundled LDPC alist files."""

from pathlib import Path

from cmsim.fec.construct import count_four_cycles, degree_sequence, ira_code
from cmsim.fec.ldpc import write_alist

DATA = Path(__file__).resolve().parents[1] / "src" / "cmsim" / "data"

CODES = [
    # girth 6: two degree-3 columns use all 15 check pairs left by the accumulator
    ("toy12.alist", 12, 6, {3: 1 / 3, 2: 2 / 3}, 4),
    ("ira648_r1_2.alist", 648, 324, {8: 0.4, 3: 0.6}, 2),
    ("ira4096_r1_2.alist", 4096, 2048, {8: 0.4, 3: 0.6}, 3),
    ("ira4096_r3_4.alist", 4096, 3072, {12: 1 / 9, 3: 8 / 9}, 4),
]


def main():
    for fname, n, k, profile, seed in CODES:
        code = ira_code(n, k, degree_sequence(k, profile), seed=seed, name=fname)
        code.encode([0] * k)  # full rank check
        write_alist(code, DATA / fname)
        print(f"{fname}: n={n} k={k} 4-cycles={count_four_cycles(code)}")


if __name__ == "__main__":
    main()

"""Regenerate tests/data/golden_zeros.csv from the series oracle.

Run from the repository root: ``python3 tests/make_golden.py``.
"""

import csv
from pathlib import Path

from oracles import series_zeros

MAX_M = 20
MAX_K = 8


def main():
    path = Path(__file__).parent / "data" / "golden_zeros.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["m", "k", "j_mk"])
        for m in range(MAX_M + 1):
            for k, z in enumerate(series_zeros(m, MAX_K), start=1):
                w.writerow([m, k, f"{z:.15g}"])


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Download the three UCI benchmark datasets and write them as plain CSVs.

Output files (label in the last column, features numeric):

  data/parkinsons.csv   195 rows, 22 features, 2 classes
  data/ecoli.csv        336 rows,  7 features, 8 classes
  data/ionosphere.csv   351 rows, 34 features, 2 classes

The Parkinsons 'name' column and the Ecoli accession-name column are
identifiers, not features, and are dropped.  Needs network access; run it
once, then the benchmark suite and `pytest tests/test_acceptance.py` pick
the files up from ./data (or $DISDF_DATA_DIR).
"""

import sys
import urllib.request
from pathlib import Path

BASE = "https://archive.ics.uci.edu/ml/machine-learning-databases"

SOURCES = {
    "parkinsons": f"{BASE}/parkinsons/parkinsons.data",
    "ecoli": f"{BASE}/ecoli/ecoli.data",
    "ionosphere": f"{BASE}/ionosphere/ionosphere.data",
}


def fetch(url: str) -> list[str]:
    print(f"fetching {url}")
    with urllib.request.urlopen(url, timeout=60) as resp:
        text = resp.read().decode()
    return [line.strip() for line in text.splitlines() if line.strip()]


def prepare_parkinsons(lines: list[str]) -> list[str]:
    header = lines[0].split(",")
    name_idx = header.index("name")
    status_idx = header.index("status")
    out = []
    for line in lines[1:]:
        cells = line.split(",")
        label = cells[status_idx]
        feats = [
            c for i, c in enumerate(cells) if i not in (name_idx, status_idx)
        ]
        out.append(",".join(feats + [label]))
    return out


def prepare_ecoli(lines: list[str]) -> list[str]:
    out = []
    for line in lines:
        cells = line.split()  # whitespace-separated source file
        out.append(",".join(cells[1:-1] + [cells[-1]]))
    return out


def prepare_ionosphere(lines: list[str]) -> list[str]:
    return lines  # already feature columns plus a trailing g/b label


def main() -> int:
    out_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("data")
    out_dir.mkdir(parents=True, exist_ok=True)
    preparers = {
        "parkinsons": prepare_parkinsons,
        "ecoli": prepare_ecoli,
        "ionosphere": prepare_ionosphere,
    }
    for name, url in SOURCES.items():
        rows = preparers[name](fetch(url))
        path = out_dir / f"{name}.csv"
        path.write_text("\n".join(rows) + "\n")
        print(f"wrote {path} ({len(rows)} rows)")
    return 0


if __name__ == "__main__":
    sys.exit(main())

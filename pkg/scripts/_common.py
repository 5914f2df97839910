"""Helpers shared by the experiment scripts."""
from __future__ import annotations

import argparse
import csv
from pathlib import Path


def parser(description: str, out: str) -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(description=description)
    ap.add_argument("--out", default=out, help="output directory")
    ap.add_argument("--seed", type=int, default=0)
    return ap


def write_rows(path: Path, header, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([f"{v:.10g}" if isinstance(v, float) else v for v in row])
    print(f"wrote {path}")

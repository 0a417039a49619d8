"""Two-parameter stability map over (r0, m3) rendered as a text grid.

The second body keeps the baseline spin n3.

Runs the same evaluation as ``relequil sweep`` and prints one character per
point: ``#`` Stable, ``.`` NotCertified, blank when no circular orbit exists.
"""

import argparse
import csv
import io
import tempfile
from pathlib import Path

import numpy as np

from relequil.cli import load_sweep_spec, run_sweep, sweep_workers

SYMBOL = {"Stable": "#", "NotCertified": ".", "none": " "}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--r0", type=float, nargs=2, default=[0.005, 0.05])
    parser.add_argument("--m3", type=float, nargs=2, default=[-2e-4, 2e-4])
    parser.add_argument("--n", type=int, default=24)
    parser.add_argument("--csv", help="also write the sweep CSV here")
    args = parser.parse_args()

    with tempfile.TemporaryDirectory() as tmp:
        spec_path = Path(tmp) / "map.spec"
        spec_path.write_text(
            f"axis1 = r0, {args.r0[0]!r}, {args.r0[1]!r}, {args.n}\n"
            f"axis2 = m3, {args.m3[0]!r}, {args.m3[1]!r}, {args.n}\n"
        )
        spec = load_sweep_spec(spec_path)
        text = run_sweep(spec, sweep_workers())
    rows = list(csv.DictReader(io.StringIO(text)))
    if args.csv:
        Path(args.csv).write_text(text)

    r0 = np.unique([float(r["axis1"]) for r in rows])
    spin = np.unique([float(r["axis2"]) for r in rows])
    grid = {(float(r["axis1"]), float(r["axis2"])): r["verdict"] for r in rows}
    print("m3 (rows, top = largest) vs r0 (columns)")
    for m3 in spin[::-1]:
        line = "".join(SYMBOL.get(grid[(x, m3)], "?") for x in r0)
        print(f"{m3:9.2e} |{line}|")
    print(f"{'':9}  r0 from {r0[0]:g} to {r0[-1]:g} m")


if __name__ == "__main__":
    main()

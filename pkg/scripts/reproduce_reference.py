"""Reference orbit: force balance, multipliers, reduced Hessian blocks and verdict."""

import argparse
import json

import numpy as np

from relequil import presets
from relequil.magnet_potential import CylinderMagnetPotential
from relequil.stability import BLOCK_NAMES, certify_orbit


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--r0", type=float, default=presets.R0)
    parser.add_argument("--spin", type=float, default=presets.SPIN, help="m3 = n3")
    parser.add_argument("--json", action="store_true", help="print the full report as JSON")
    args = parser.parse_args()

    params = presets.reference_params()
    report = certify_orbit(args.r0, (args.spin, args.spin), params, CylinderMagnetPotential(params))
    if args.json:
        print(json.dumps(report.to_json(), indent=2))
        return

    np.set_printoptions(precision=4, linewidth=120)
    print(f"r0     = {report.r0:.6g} m")
    print(f"p0     = {report.p0:.10g} kg m/s   (reference {presets.P_ORB})")
    print(f"period = {report.period:.10g} s        (reference {presets.T_ORB})")
    print(f"omega  = {report.omega:.10g} 1/s")
    m = report.multipliers
    print(f"lambda = {m.lambda1:.6g}, {m.lambda2:.6g}, {m.lambda3:.6g}, {m.lambda4:.6g}")
    for name, block, minors in zip(BLOCK_NAMES, report.blocks, report.leading_minors):
        print(f"\n{name}:\n{block}\nleading minors: {', '.join(f'{v:.4e}' for v in minors)}")
    print(f"\nverdict = {report.verdict}   margin = {report.margin:.4e}")
    print(f"basis agreement = {report.basis_agreement}   eigenvalue mismatch = {report.eigen_mismatch:.1e}")
    for note in report.notes:
        print(f"note: {note}")


if __name__ == "__main__":
    main()

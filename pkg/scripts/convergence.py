"""Fixed-step global error after one period of the reference orbit."""

import argparse

from relequil import presets
from relequil.integrator import IntegratorConfig, integrate, orbit_distance_mod_rotation, state_distance
from relequil.magnet_potential import CylinderMagnetPotential
from relequil.relative_equilibria import make_relative_equilibrium


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--steps", type=int, nargs="+", default=[80, 160, 320, 640, 1280])
    args = parser.parse_args()

    params = presets.reference_params()
    pot = CylinderMagnetPotential(params)
    re = make_relative_equilibrium(presets.R0, *presets.reference_spins(), params, pot)
    print(f"{'steps':>6} {'error':>12} {'ratio':>8} {'mod-rot error':>14}")
    prev = None
    for n in args.steps:
        cfg = IntegratorConfig(fixed_step=re.period / n, record_every=re.period)
        final = integrate(re.state, re.period, params, pot, cfg).final_state
        err = state_distance(final, re.state)
        ratio = f"{prev / err:8.2f}" if prev else " " * 8
        print(f"{n:6d} {err:12.4e} {ratio} {orbit_distance_mod_rotation(final, re.state):14.4e}")
        prev = err


if __name__ == "__main__":
    main()

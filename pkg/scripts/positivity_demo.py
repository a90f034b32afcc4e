"""Minimum density for each built-in interpolation on the two-node flow and random graphs."""

import argparse

import numpy as np

from graphnce import InterpolationSpec, SolverConfig, solve_ncl
from graphnce.config import parse_config, preset
from graphnce.instances import random_instance
from graphnce.interpolation import BUILTIN_KINDS


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--horizon", type=float, default=5.0)
    parser.add_argument("--instances", type=int, default=50)
    args = parser.parse_args()

    base = parse_config(preset("two_node_upwind"))
    print(f"two-node flow v_01 = 1, r0 = (2, 0), T = {args.horizon}")
    for kind in BUILTIN_KINDS:
        phi = InterpolationSpec(kind)
        traj = solve_ncl(base.graph, phi, base.velocity, base.rho0, SolverConfig(horizon=args.horizon))
        k = int(np.argmin(traj.min_value))
        print(f"  {kind:16s} min density {traj.min_value[k]: .6f} at t = {traj.times[k]:.3f}")

    print(f"\n{args.instances} random nonnegative instances per interpolation")
    for kind in BUILTIN_KINDS:
        lows = []
        for seed in range(args.instances):
            inst = random_instance(seed, phi_kind=kind, nonnegative=True)
            lows.append(solve_ncl(inst.graph, inst.phi, inst.velocity, inst.rho0, inst.config).states.min())
        lows = np.array(lows)
        print(f"  {kind:16s} global min {lows.min(): .3e}, instances below zero: {(lows < -1e-12).sum()}")


if __name__ == "__main__":
    main()

"""Trapezoid-Picard error against the RK4 oracle under substep doubling."""

import argparse

import numpy as np

from graphnce import explicit_solve, solve_ncl
from graphnce.calculus import tv_norm
from graphnce.config import parse_config, preset
from graphnce.instances import random_instance


def study(g, phi, velocity, rho0, config, substeps):
    exact = explicit_solve(g, phi, velocity, rho0, config.horizon, 1e-4).final
    rows = []
    for s in substeps:
        config.substeps_per_window = s
        traj = solve_ncl(g, phi, velocity, rho0, config)
        rows.append((s, traj.contraction.windows, tv_norm(g, traj.final - exact)))
    return rows


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=1000)
    parser.add_argument("--substeps", type=int, nargs="+", default=[8, 16, 32, 64, 128, 256])
    args = parser.parse_args()

    cfg = parse_config(preset("two_node_upwind"))
    inst = random_instance(args.seed, n=20, phi_kind="upwind", velocity_kind="nl2ie")
    cases = {
        "two_node_upwind": (cfg.graph, cfg.interpolation, cfg.velocity, cfg.rho0, cfg.solver),
        f"random nl2ie ({inst.label})": (inst.graph, inst.phi, inst.velocity, inst.rho0, inst.config),
    }
    for name, case in cases.items():
        print(name)
        print(f"{'substeps':>9} {'windows':>8} {'TV error':>12} {'ratio':>7}")
        prev = None
        for s, w, err in study(*case, args.substeps):
            ratio = f"{prev / err:7.3f}" if prev and err > 0 else "      -"
            print(f"{s:9d} {w:8d} {err:12.4e} {ratio}")
            prev = err
        print()


if __name__ == "__main__":
    main()

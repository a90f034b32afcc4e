"""Aggregation under the quadratic interaction kernel on a random point cloud."""

import argparse
from pathlib import Path

import numpy as np

from graphnce import verify_trajectory, solve_ncl
from graphnce.config import parse_config, preset


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--horizon", type=float, default=3.0)
    parser.add_argument("--csv", type=Path, help="write the trajectory here")
    args = parser.parse_args()

    doc = preset("nl2ie_cloud50", seed=args.seed)
    doc["solver"]["horizon"] = args.horizon
    doc["initial"] = {"preset": "random"}
    cfg = parse_config(doc)
    g = cfg.graph
    traj = solve_ncl(g, cfg.interpolation, cfg.velocity, cfg.rho0, cfg.solver)
    rep = verify_trajectory(traj, g, cfg.interpolation)

    info = traj.contraction
    print(f"alpha = {info.alpha:.4f}, tau = {info.tau:.4f}, windows = {info.windows}")
    print(f"{'t':>6} {'mass':>10} {'max r':>9} {'spread':>9}")
    for k in np.linspace(0, traj.times.shape[0] - 1, 7).astype(int):
        r = traj.states[k]
        w = g.masses * r
        centre = w @ g.points / w.sum()
        spread = float(w @ np.sum((g.points - centre) ** 2, axis=1) / w.sum())
        print(f"{traj.times[k]:6.2f} {w.sum():10.6f} {r.max():9.4f} {spread:9.5f}")
    print("flags:", ", ".join(f"{k}={v}" for k, v in rep.flags.items()))
    if args.csv:
        args.csv.write_text(traj.to_csv())


if __name__ == "__main__":
    main()

"""Seeded random problem instances for property checks and experiments."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .calculus import EdgeField
from .graph_core import EtaSpec, Graph, build_graph
from .interpolation import BUILTIN_KINDS, InterpolationSpec
from .solver import SolverConfig
from .velocity import KernelSpec, PotentialSpec, VelocitySpec


@dataclass
class Instance:
    graph: Graph
    phi: InterpolationSpec
    velocity: VelocitySpec
    rho0: np.ndarray
    config: SolverConfig
    label: str


def random_graph(rng: np.random.Generator, n: int, d: int | None = None) -> Graph:
    d = d or int(rng.integers(1, 3))
    points = rng.uniform(0.0, 1.0, (n, d))
    masses = rng.uniform(0.5, 1.5, n)
    masses /= masses.sum()
    if rng.random() < 0.5:
        eta = EtaSpec.gaussian(float(rng.uniform(0.2, 0.6)))
        floor = 1e-3
    else:
        eta = EtaSpec.indicator(float(rng.uniform(0.15, 0.5)))
        floor = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return build_graph(points, masses, eta, floor)


def random_velocity(rng: np.random.Generator, g: Graph, kind: str) -> VelocitySpec:
    if kind == "static":
        return VelocitySpec.static(EdgeField.from_antisymmetric(rng.normal(0.0, 1.0, g.m)))
    if kind == "potential":
        return VelocitySpec.from_potential(PotentialSpec("table", values=rng.normal(0.0, 1.0, g.n)))
    potential = PotentialSpec()
    if rng.random() < 0.5:
        potential = PotentialSpec("linear", direction=rng.normal(0.0, 1.0, g.d))
    return VelocitySpec.nl2ie(KernelSpec("quadratic"), potential)


def random_density(rng: np.random.Generator, n: int, nonnegative: bool = True) -> np.ndarray:
    if nonnegative:
        r = rng.uniform(0.0, 2.0, n)
        r[rng.random(n) < 0.3] = 0.0
        return r
    return rng.normal(0.0, 1.0, n)


def random_instance(
    seed: int,
    n: int | None = None,
    phi_kind: str | None = None,
    velocity_kind: str | None = None,
    nonnegative: bool = True,
    horizon: float = 1.0,
    d: int | None = None,
) -> Instance:
    """Draw a graph, interpolation, velocity and initial density from ``seed``."""
    rng = np.random.default_rng(seed)
    n = n or int(rng.integers(3, 51))
    g = random_graph(rng, n, d)
    phi_kind = phi_kind or str(rng.choice(BUILTIN_KINDS))
    velocity_kind = velocity_kind or str(rng.choice(["static", "nl2ie"]))
    velocity = random_velocity(rng, g, velocity_kind)
    rho0 = random_density(rng, n, nonnegative)
    label = f"seed={seed} n={n} d={g.d} m={g.m} phi={phi_kind} v={velocity_kind}"
    return Instance(g, InterpolationSpec(phi_kind), velocity, rho0, SolverConfig(horizon=horizon), label)

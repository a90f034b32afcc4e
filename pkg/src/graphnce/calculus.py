"""Nonlocal gradient, divergence and measure norms on a finite graph.

Vertex fields are plain float arrays of length ``g.n`` holding densities
r_i with respect to the base measure (the atom at x_i is m_i r_i).  Edge
fields hold one value per directed edge, split into ``forward`` (i -> j,
i < j) and ``backward`` (j -> i) arrays aligned with ``g.edges``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .graph_core import Graph


@dataclass(frozen=True, eq=False)
class EdgeField:
    forward: np.ndarray
    backward: np.ndarray
    antisymmetric: bool = False

    def __post_init__(self) -> None:
        fwd = np.asarray(self.forward, dtype=float)
        bwd = np.asarray(self.backward, dtype=float)
        if fwd.shape != bwd.shape or fwd.ndim != 1:
            raise ValidationError("edge field slots must be 1-d arrays of equal length")
        if not (np.all(np.isfinite(fwd)) and np.all(np.isfinite(bwd))):
            raise ValidationError("edge field values must be finite")
        if self.antisymmetric and not np.array_equal(bwd, -fwd):
            raise ValidationError("edge field flagged antisymmetric but u_ji != -u_ij")
        object.__setattr__(self, "forward", fwd)
        object.__setattr__(self, "backward", bwd)

    @classmethod
    def from_antisymmetric(cls, forward) -> EdgeField:
        fwd = np.asarray(forward, dtype=float)
        return cls(fwd, -fwd, antisymmetric=True)

    @classmethod
    def zeros(cls, g: Graph) -> EdgeField:
        return cls.from_antisymmetric(np.zeros(g.m))

    @classmethod
    def from_pairs(cls, g: Graph, values: dict[tuple[int, int], float], antisymmetric: bool = True) -> EdgeField:
        """Build from ``{(i, j): u_ij}``; with ``antisymmetric`` u_ji = -u_ij is implied."""
        fwd = np.zeros(g.m)
        bwd = np.zeros(g.m)
        for (i, j), u in values.items():
            e, forward = g.edge_index(i, j)
            if forward:
                fwd[e] = u
                if antisymmetric:
                    bwd[e] = -u
            else:
                bwd[e] = u
                if antisymmetric:
                    fwd[e] = -u
        return cls(fwd, bwd, antisymmetric=antisymmetric)

    def value(self, g: Graph, i: int, j: int) -> float:
        e, forward = g.edge_index(i, j)
        return float(self.forward[e] if forward else self.backward[e])

    def is_antisymmetric(self) -> bool:
        return bool(np.array_equal(self.backward, -self.forward))

    def __len__(self) -> int:
        return self.forward.shape[0]


def vertex_field(g: Graph, values) -> np.ndarray:
    """Validate and return ``values`` as a density field on ``g``."""
    r = np.array(values, dtype=float)
    if r.shape != (g.n,):
        raise ValidationError(f"vertex field must have length {g.n}, got shape {r.shape}")
    if not np.all(np.isfinite(r)):
        raise ValidationError("vertex field values must be finite")
    return r


def _check_edges(g: Graph, J: EdgeField) -> None:
    if len(J) != g.m:
        raise ValidationError(f"edge field has {len(J)} pairs, graph has {g.m}")


def nonlocal_gradient(g: Graph, phi) -> EdgeField:
    """(grad phi)_ij = phi_j - phi_i on every stored pair."""
    phi = vertex_field(g, phi)
    i, j = g.edges[:, 0], g.edges[:, 1]
    return EdgeField.from_antisymmetric(phi[j] - phi[i])


def nonlocal_divergence(g: Graph, J: EdgeField) -> np.ndarray:
    """Density of div J with respect to mu.

    (div J)_i = 1/2 sum_j (J_ij - J_ji) eta_ij m_j, summed in ascending j.
    """
    _check_edges(g, J)
    return g.divergence_matrix() @ (J.forward - J.backward)


def divergence_antisymmetric(g: Graph, J: EdgeField) -> np.ndarray:
    """Shortcut sum_j J_ij eta_ij m_j, valid only for antisymmetric J."""
    _check_edges(g, J)
    if not J.is_antisymmetric():
        raise ValidationError("shortcut divergence requires an antisymmetric field")
    return g.row_weight_matrix() @ np.concatenate([J.forward, J.backward])


def divergence_batch(g: Graph, fwd: np.ndarray, bwd: np.ndarray) -> np.ndarray:
    """Row-wise divergence for stacked edge values of shape (B, m)."""
    return (g.divergence_matrix() @ (fwd - bwd).T).T


def row_abs_sums(g: Graph, fwd: np.ndarray, bwd: np.ndarray) -> np.ndarray:
    """sum_j |u_ij| eta_ij m_j per vertex; accepts (m,) or (B, m) inputs."""
    stacked = np.concatenate([np.abs(fwd), np.abs(bwd)], axis=-1)
    return (g.row_weight_matrix() @ stacked.T).T


def tv_norm(g: Graph, r) -> float:
    return float(np.dot(g.masses, np.abs(r)))


def tv_distance(g: Graph, a, b) -> float:
    return float(np.dot(g.masses, np.abs(np.asarray(a) - np.asarray(b))))


def field_stats(g: Graph, rho, p_list=(2.0,)) -> dict:
    """Mass, total variation, minimum and L^p(mu) norms of a density field."""
    r = vertex_field(g, rho)
    p_list = [float(p) for p in p_list]
    for p in p_list:
        if not p >= 1:
            raise ValidationError(f"L^p exponent must be >= 1, got {p}")
    mr = g.masses * r
    return {
        "mass": math.fsum(mr),
        "tv_norm": math.fsum(np.abs(mr)),
        "min_value": float(r.min()),
        "lp_norms": {p: math.fsum(g.masses * np.abs(r) ** p) ** (1.0 / p) for p in p_list},
    }

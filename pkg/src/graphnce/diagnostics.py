"""Post-hoc checks of structural properties on computed trajectories."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import PreconditionError, ValidationError
from .graph_core import Graph
from .interpolation import InterpolationSpec
from .solver import Trajectory
from .velocity import ConstantsReport


@dataclass
class Tolerances:
    mass: float = 1e-9
    positivity_floor: float = -1e-12
    gronwall: float = 1e-6
    isolated: float = 1e-14


@dataclass
class LpConstants:
    """Discrete stand-ins for the continuum L^p estimate.

    ``density_bound`` replaces the sup of the Lebesgue density of mu, and
    ``cv_p`` the translational bound on (v_-) eta.
    """

    density_bound: float
    cv_p: float


@dataclass
class DiagnosticsReport:
    mass_residual: float
    tv_bound_margin: float
    tv_bound_margin_constant: float | None
    tv_growth_factor: float
    min_density: float
    positivity_verdict: str
    lp_series: dict[str, list[float]]
    lp_bound_check: dict[str, dict]
    contraction_samples: list[float]
    picard_ratio_bound: float | None
    isolated_vertex_drift: float
    flags: dict[str, bool] = field(default_factory=dict)

    def to_json(self) -> dict:
        return asdict(self)


def check_positivity(traj: Trajectory, phi: InterpolationSpec, floor: float = -1e-12) -> dict:
    """Global minimum density; verdict "guaranteed" only for upwind."""
    if np.any(traj.states[0] < 0):
        raise PreconditionError("positivity check needs nonnegative initial data")
    min_density = float(traj.states.min())
    return {
        "min_density": min_density,
        "verdict": "guaranteed" if phi.is_upwind else "observational",
        "nonnegative": min_density >= floor,
    }


def lp_monitor(traj: Trajectory, g: Graph, p: float, density_bound: float, cv_p: float) -> dict:
    """Compare sup_t ||rho_t||_{L^p(mu)}^p with (||rho_0||^p + C T) exp(T / q).

    C = (cv_p / p) (p M density_bound)^p, q = p / (p - 1), M = TV(rho_0).
    A monitor only: the flag is empirical.
    """
    p = float(p)
    if not p > 1:
        raise ValidationError("lp_monitor needs p > 1")
    if not (density_bound > 0 and cv_p >= 0):
        raise ValidationError("density_bound must be positive and cv_p nonnegative")
    T = float(traj.times[-1] - traj.times[0])
    q = p / (p - 1.0)
    norms = np.abs(traj.states) ** p @ g.masses
    M = float(np.abs(traj.states[0]) @ g.masses)
    C = cv_p / p * (p * M * density_bound) ** p
    bound = (float(norms[0]) + C * T) * math.exp(T / q)
    sup = float(norms.max())
    return {"p": p, "sup_lp": sup, "bound_value": bound, "satisfied": bool(sup <= bound)}


def lp_translational_constant(g: Graph, traj: Trajectory, velocity, p: float, density_bound: float) -> float:
    """Discrete cv_p: int_0^T max_j sum_i ((v_ij)_- eta_ij)^p m_i / density_bound dt.

    The Lebesgue integral over the first argument is replaced by the sum
    over vertices with weight m_i / density_bound; the time integral uses the
    trajectory's grid (trapezoid).
    """
    from .velocity import velocity_batch

    v = velocity_batch(velocity, traj.times, g, traj.states)
    i, j = g.edges[:, 0], g.edges[:, 1]
    w = g.weights
    scale = g.masses / density_bound
    per_t = np.zeros(traj.times.shape[0])
    for k in range(traj.times.shape[0]):
        col = np.zeros(g.n)
        # forward slot is v_ij (first arg i), backward is v_ji (first arg j)
        np.add.at(col, j, (np.maximum(-v[k], 0.0) * w) ** p * scale[i])
        np.add.at(col, i, (np.maximum(v[k], 0.0) * w) ** p * scale[j])
        per_t[k] = col.max(initial=0.0)
    if traj.times.shape[0] == 1:
        return 0.0
    return float(_cumulative_trapezoid(per_t, traj.times)[-1])


def _cumulative_trapezoid(y: np.ndarray, t: np.ndarray) -> np.ndarray:
    out = np.zeros_like(y, dtype=float)
    if y.shape[0] > 1:
        out[1:] = np.cumsum(0.5 * np.diff(t) * (y[:-1] + y[1:]))
    return out


def verify_trajectory(
    traj: Trajectory,
    g: Graph,
    phi: InterpolationSpec,
    constants: ConstantsReport | None = None,
    p_list=(2.0,),
    tolerances: Tolerances | None = None,
    lp_constants: LpConstants | None = None,
) -> DiagnosticsReport:
    """Fill every diagnostic and pass/fail flag for ``traj``."""
    tol = tolerances or Tolerances()
    if traj.n != g.n or traj.graph_fingerprint != g.fingerprint():
        raise ValidationError("trajectory was not produced on this graph")
    if constants is None and traj.contraction is not None:
        constants = traj.contraction.constants

    mass = traj.mass
    tv = traj.tv
    scale = max(abs(mass[0]), tv[0])
    mass_residual = float(np.abs(mass - mass[0]).max() / scale) if scale > 0 else float(np.abs(mass - mass[0]).max())

    L = phi.lipschitz_constant
    kappa = phi.tv_growth_factor
    t = traj.times - traj.times[0]
    # provable envelope; the constant-C_V form below is the literal kappa = 1 statement
    envelope = tv[0] * np.exp(kappa * L * _cumulative_trapezoid(traj.row_sum_max, t))
    tv_ok = bool(np.all(tv <= envelope * (1 + tol.gronwall)))
    tv_margin = float((envelope - tv)[1:].min()) if tv.shape[0] > 1 else 0.0
    if constants is not None:
        const_env = tv[0] * np.exp(L * constants.C_V * t)
        const_margin = float((const_env - tv)[1:].min()) if tv.shape[0] > 1 else 0.0
        tv_const_ok = bool(np.all(tv <= const_env * (1 + tol.gronwall)))
    else:
        const_margin, tv_const_ok = None, True

    min_density = float(traj.states.min())
    if np.any(traj.states[0] < 0):
        verdict, pos_ok = "not_applicable", True
    else:
        pos = check_positivity(traj, phi, tol.positivity_floor)
        verdict, pos_ok = pos["verdict"], pos["nonnegative"]

    lp_series = {}
    lp_checks = {}
    for p in p_list:
        p = float(p)
        if p < 1:
            raise ValidationError(f"L^p exponent must be >= 1, got {p}")
        lp_series[repr(p)] = ((np.abs(traj.states) ** p @ g.masses) ** (1 / p)).tolist()
        if lp_constants is not None and p > 1:
            lp_checks[repr(p)] = lp_monitor(traj, g, p, lp_constants.density_bound, lp_constants.cv_p)

    samples: list[float] = []
    picard_ok = True
    ratio_bound = None
    if traj.contraction is not None and traj.windows:
        eps_q = 10.0 / traj.substeps**2
        ratio_bound = traj.contraction.alpha * traj.contraction.tau + eps_q
        for w in traj.windows:
            bound = traj.contraction.alpha * (w.t1 - w.t0) + eps_q
            ratios = w.ratios()
            samples.extend(ratios)
            picard_ok &= all(r <= bound for r in ratios)

    iso = g.isolated
    drift = float(np.abs(traj.states[:, iso] - traj.states[0, iso]).max()) if iso.size else 0.0

    flags = {
        "mass": mass_residual <= tol.mass,
        "tv_gronwall": tv_ok,
        "tv_gronwall_constant": tv_const_ok,
        "positivity": pos_ok,
        "isolated_vertices": drift <= tol.isolated,
        "picard_geometric": picard_ok,
        "lp_monitor": all(c["satisfied"] for c in lp_checks.values()),
    }
    return DiagnosticsReport(
        mass_residual=mass_residual,
        tv_bound_margin=tv_margin,
        tv_bound_margin_constant=const_margin,
        tv_growth_factor=kappa,
        min_density=min_density,
        positivity_verdict=verdict,
        lp_series=lp_series,
        lp_bound_check=lp_checks,
        contraction_samples=samples,
        picard_ratio_bound=ratio_bound,
        isolated_vertex_drift=drift,
        flags=flags,
    )

"""Windowed Picard solver for the nonlocal conservation law on a graph.

The solution map sends a candidate curve rho(.) on a window [t0, t1] to

    S(rho)(t) = rho_anchor - int_{t0}^{t} div F[rho_s, V_s(rho_s)] ds,

with the time integral evaluated by composite trapezoid on the window's
uniform sub-grid.  On a window of length tau the map contracts with factor
alpha * tau, alpha = L_Phi (M L_V + C_V); choosing tau = theta / alpha and
chaining windows gives the solution on [0, T].  ``explicit_solve`` is an
independent classical RK4 integrator over the same right-hand side.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .calculus import EdgeField, divergence_batch, row_abs_sums, vertex_field
from .errors import ConvergenceError, NumericalError, UndefinedRatioError, ValidationError
from .graph_core import Graph
from .interpolation import InterpolationSpec, flux_batch
from .velocity import ConstantsReport, VelocitySpec, compute_constants, time_sup, velocity_batch

log = logging.getLogger(__name__)

MAX_WINDOWS = 1_000_000


@dataclass
class SolverConfig:
    horizon: float = 1.0
    window_safety: float = 0.5
    substeps_per_window: int = 64
    picard_tolerance: float = 1e-10
    picard_max_iterations: int = 50

    def __post_init__(self) -> None:
        if not (math.isfinite(self.horizon) and self.horizon > 0):
            raise ValidationError("horizon must be positive and finite")
        if not 0 < self.window_safety < 1:
            raise ValidationError("window_safety must lie in (0, 1)")
        if int(self.substeps_per_window) != self.substeps_per_window or self.substeps_per_window < 2:
            raise ValidationError("substeps_per_window must be an integer >= 2")
        if not self.picard_tolerance > 0:
            raise ValidationError("picard_tolerance must be positive")
        if int(self.picard_max_iterations) < 1:
            raise ValidationError("picard_max_iterations must be >= 1")
        self.substeps_per_window = int(self.substeps_per_window)
        self.picard_max_iterations = int(self.picard_max_iterations)

    def to_json(self) -> dict:
        return {
            "horizon": self.horizon,
            "window_safety": self.window_safety,
            "substeps_per_window": self.substeps_per_window,
            "picard_tolerance": self.picard_tolerance,
            "picard_max_iterations": self.picard_max_iterations,
        }


@dataclass
class ContractionInfo:
    alpha: float
    tau: float
    windows: int
    M: float
    constants: ConstantsReport
    lipschitz_phi: float

    def to_json(self) -> dict:
        return {
            "alpha": self.alpha,
            "tau": self.tau,
            "windows": self.windows,
            "M": self.M if math.isfinite(self.M) else None,
            "lipschitz_phi": self.lipschitz_phi,
            "constants": self.constants.to_json(),
        }


@dataclass
class WindowStats:
    t0: float
    t1: float
    iterations: int
    distances: list[float]

    @property
    def residual(self) -> float:
        return self.distances[-1] if self.distances else 0.0

    def ratios(self) -> list[float]:
        d = self.distances
        return [d[k + 1] / d[k] for k in range(len(d) - 1) if d[k] > 0]


@dataclass
class Trajectory:
    """Time grid, density snapshots and per-node diagnostics of a solve."""

    times: np.ndarray
    states: np.ndarray
    masses: np.ndarray
    row_sum_max: np.ndarray
    graph_fingerprint: str
    contraction: ContractionInfo | None = None
    windows: list[WindowStats] = field(default_factory=list)
    method: str = "picard"
    substeps: int = 0

    def __post_init__(self) -> None:
        if self.states.shape[0] != self.times.shape[0]:
            raise ValidationError("snapshot count must equal grid length")
        if self.times.shape[0] > 1 and not np.all(np.diff(self.times) > 0):
            raise ValidationError("time grid must be strictly increasing")

    @property
    def n(self) -> int:
        return self.states.shape[1]

    @property
    def mass(self) -> np.ndarray:
        return self.states @ self.masses

    @property
    def tv(self) -> np.ndarray:
        return np.abs(self.states) @ self.masses

    @property
    def min_value(self) -> np.ndarray:
        return self.states.min(axis=1)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def metadata(self) -> dict:
        doc: dict = {"method": self.method, "grid_points": int(self.times.shape[0]), "substeps": self.substeps}
        if self.contraction is not None:
            doc.update(self.contraction.to_json())
        doc["per_window"] = [
            {"t0": w.t0, "t1": w.t1, "iterations": w.iterations, "residual": w.residual, "distances": w.distances}
            for w in self.windows
        ]
        return doc

    def to_csv(self) -> str:
        header = ",".join(["t"] + [f"r_{i}" for i in range(self.n)])
        lines = [header]
        for t, row in zip(self.times.tolist(), self.states.tolist()):
            lines.append(",".join(repr(x) for x in [t] + row))
        return "\n".join(lines) + "\n"


# -- right-hand side -------------------------------------------------------


def rhs_batch(g: Graph, phi: InterpolationSpec, velocity: VelocitySpec, times, states: np.ndarray):
    """dr/dt for stacked states (B, n); also returns the edge velocities (B, m)."""
    v = velocity_batch(velocity, times, g, states)
    fwd, bwd = flux_batch(g, phi, states, v)
    return -divergence_batch(g, fwd, bwd), v


def rhs(g: Graph, phi: InterpolationSpec, velocity: VelocitySpec, t: float, rho) -> np.ndarray:
    """-div F^Phi[mu; rho, V_t(rho)] as a density field."""
    r = vertex_field(g, rho)
    return rhs_batch(g, phi, velocity, [t], r[None, :])[0][0]


def _row_sum_max(g: Graph, v: np.ndarray) -> np.ndarray:
    if g.m == 0:
        return np.zeros(v.shape[0])
    return row_abs_sums(g, v, -v).max(axis=1)


def _sup_tv(g: Graph, a: np.ndarray, b: np.ndarray) -> float:
    return float((np.abs(a - b) @ g.masses).max())


# -- solution map and Picard iteration ---------------------------------------


def apply_solution_map(g, phi, velocity, window, grid, curve, anchor) -> np.ndarray:
    """One application of the solution map on a window's sub-grid.

    ``curve`` has shape (len(grid), n); returns the new snapshots.
    """
    grid = np.asarray(grid, dtype=float)
    curve = np.asarray(curve, dtype=float)
    anchor = vertex_field(g, anchor)
    t0, t1 = window
    if curve.shape != (grid.shape[0], g.n):
        raise ValidationError(f"curve must have shape {(grid.shape[0], g.n)}")
    if grid[0] != t0 or grid[-1] != t1:
        raise ValidationError("sub-grid must span the window")
    f, _ = rhs_batch(g, phi, velocity, grid, curve)
    h = np.diff(grid)[:, None]
    increments = 0.5 * h * (f[:-1] + f[1:])
    new = anchor + np.vstack([np.zeros((1, g.n)), np.cumsum(increments, axis=0)])
    bad = ~np.all(np.isfinite(new), axis=1)
    if bad.any():
        k = int(np.flatnonzero(bad)[0])
        raise NumericalError(f"non-finite density at t = {grid[k]}", time=float(grid[k]))
    return new


def picard_solve_window(g, phi, velocity, window, anchor, config: SolverConfig):
    """Iterate the solution map from the constant-in-time anchor until converged.

    Returns ``(grid, snapshots, WindowStats)``.  Raises :class:`ConvergenceError`
    with the distance history when the iteration budget is exhausted.
    """
    t0, t1 = float(window[0]), float(window[1])
    anchor = vertex_field(g, anchor)
    grid = np.linspace(t0, t1, config.substeps_per_window + 1)
    curve = np.broadcast_to(anchor, (grid.shape[0], g.n)).copy()
    distances: list[float] = []
    for _ in range(config.picard_max_iterations):
        new = apply_solution_map(g, phi, velocity, (t0, t1), grid, curve, anchor)
        distances.append(_sup_tv(g, new, curve))
        curve = new
        if distances[-1] <= config.picard_tolerance:
            return grid, curve, WindowStats(t0, t1, len(distances), distances)
    raise ConvergenceError(
        f"Picard iteration on [{t0}, {t1}] did not reach {config.picard_tolerance} "
        f"in {config.picard_max_iterations} iterations (last distance {distances[-1]:.3e})",
        distances,
    )


def contraction_info(g, phi, velocity, rho0, config: SolverConfig, times=None) -> ContractionInfo:
    """alpha, window length and window count for a solve.

    M is the Gronwall envelope TV(rho0) exp(L_Phi C_V T), bootstrapped once
    from C_V evaluated at M0 = TV(rho0).  ``times`` is the grid on which the
    sup of a time-dependent modulation is taken (default: 4097 uniform nodes).
    """
    T = config.horizon
    L_phi = phi.lipschitz_constant
    tv0 = float(np.abs(rho0) @ g.masses)
    if times is None and not velocity.time_dependence.is_constant:
        times = np.linspace(0.0, T, 4097)
    first = compute_constants(g, velocity, tv0, times)
    exponent = L_phi * first.C_V * T
    M = tv0 * math.exp(exponent) if exponent < 700 else math.inf
    if math.isfinite(M):
        constants = compute_constants(g, velocity, M, times)
    elif velocity.depends_on_state:
        raise ValidationError("TV envelope overflowed; reduce the horizon")
    else:
        # C_V and L_V = 0 do not involve M here; keep the unbounded envelope on record
        constants = first
        constants.M = M
    alpha = L_phi * ((M * constants.L_V if constants.L_V else 0.0) + constants.C_V)
    if not math.isfinite(alpha):
        raise ValidationError("contraction constant alpha is not finite")
    if alpha == 0:
        return ContractionInfo(0.0, T, 1, M, constants, L_phi)
    tau = min(T, config.window_safety / alpha)
    windows = math.ceil(T / tau - 1e-12)
    if windows > MAX_WINDOWS:
        raise ValidationError(
            f"{windows} Picard windows needed (alpha = {alpha:.3g}); increase window_safety or reduce the horizon"
        )
    return ContractionInfo(alpha, tau, windows, M, constants, L_phi)


def _window_edges(info: ContractionInfo, T: float) -> list[tuple[float, float]]:
    edges = [k * info.tau for k in range(info.windows)] + [T]
    return [(edges[k], min(edges[k + 1], T)) for k in range(info.windows)]


def solve_ncl(g: Graph, phi: InterpolationSpec, velocity: VelocitySpec, rho0, config: SolverConfig) -> Trajectory:
    """Solve on [0, T] by chaining Picard windows of length theta / alpha."""
    rho0 = vertex_field(g, rho0)
    info = contraction_info(g, phi, velocity, rho0, config)
    if not velocity.time_dependence.is_constant:
        # the sup of c(t) must also cover the actual quadrature nodes
        nodes = np.concatenate(
            [np.linspace(a, b, config.substeps_per_window + 1) for a, b in _window_edges(info, config.horizon)]
        )
        grid = np.union1d(nodes, np.linspace(0.0, config.horizon, 4097))
        if time_sup(velocity, grid) > info.constants.time_sup:
            info = contraction_info(g, phi, velocity, rho0, config, grid)
    log.debug("alpha=%.6g tau=%.6g windows=%d", info.alpha, info.tau, info.windows)

    times = [np.zeros(1)]
    states = [rho0[None, :]]
    stats: list[WindowStats] = []
    anchor = rho0
    for k, window in enumerate(_window_edges(info, config.horizon)):
        try:
            grid, snaps, ws = picard_solve_window(g, phi, velocity, window, anchor, config)
        except ConvergenceError as exc:
            exc.window = k
            raise ConvergenceError(f"window {k}: {exc}", exc.distances, k) from exc
        times.append(grid[1:])
        states.append(snaps[1:])
        stats.append(ws)
        anchor = snaps[-1]
    times_arr = np.concatenate(times)
    states_arr = np.vstack(states)
    _, v = rhs_batch(g, phi, velocity, times_arr, states_arr)
    return Trajectory(
        times_arr, states_arr, g.masses, _row_sum_max(g, v), g.fingerprint(),
        contraction=info, windows=stats, method="picard", substeps=config.substeps_per_window,
    )


# -- independent oracle ------------------------------------------------------


def explicit_solve(g, phi, velocity, rho0, T: float, dt: float, t_eval=None) -> Trajectory:
    """Classical fixed-step RK4 on dr/dt = rhs.

    With ``t_eval`` each interval between consecutive output times is split
    into ceil(length / dt) equal steps, so outputs land exactly on ``t_eval``.
    """
    if not dt > 0:
        raise ValidationError("dt must be positive")
    r = vertex_field(g, rho0).copy()
    if t_eval is None:
        steps = max(1, math.ceil(T / dt - 1e-9))
        t_eval = np.linspace(0.0, T, steps + 1)
    t_eval = np.asarray(t_eval, dtype=float)
    if t_eval[0] != 0.0:
        raise ValidationError("t_eval must start at 0")

    def f(t, y):
        return rhs_batch(g, phi, velocity, [t], y[None, :])[0][0]

    out = np.empty((t_eval.shape[0], g.n))
    out[0] = r
    t = 0.0
    for k in range(1, t_eval.shape[0]):
        span = t_eval[k] - t_eval[k - 1]
        nsub = max(1, math.ceil(span / dt - 1e-9))
        h = span / nsub
        for s in range(nsub):
            t = t_eval[k - 1] + s * h
            k1 = f(t, r)
            k2 = f(t + h / 2, r + h / 2 * k1)
            k3 = f(t + h / 2, r + h / 2 * k2)
            k4 = f(t + h, r + h * k3)
            r = r + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(r)):
            raise NumericalError(f"non-finite state at t = {t_eval[k]}", time=float(t_eval[k]))
        out[k] = r
    _, v = rhs_batch(g, phi, velocity, t_eval, out)
    return Trajectory(t_eval, out, g.masses, _row_sum_max(g, v), g.fingerprint(), method="rk4")


def measure_contraction(g, phi, velocity, rho_curve, sigma_curve, grid) -> float:
    """d(S rho, S sigma) / d(rho, sigma) with d the sup-over-grid TV distance.

    The anchor cancels in the difference, so rho_curve[0] is used for both.
    """
    grid = np.asarray(grid, dtype=float)
    rho_curve = np.asarray(rho_curve, dtype=float)
    sigma_curve = np.asarray(sigma_curve, dtype=float)
    d_in = _sup_tv(g, rho_curve, sigma_curve)
    if d_in == 0:
        raise UndefinedRatioError("curves are identical; contraction ratio undefined")
    window = (grid[0], grid[-1])
    anchor = rho_curve[0]
    a = apply_solution_map(g, phi, velocity, window, grid, rho_curve, anchor)
    b = apply_solution_map(g, phi, velocity, window, grid, sigma_curve, anchor)
    return _sup_tv(g, a, b) / d_in


def static_velocity(g: Graph, values: dict[tuple[int, int], float]) -> VelocitySpec:
    """Convenience constructor for a static antisymmetric field from ``{(i, j): v_ij}``."""
    return VelocitySpec.static(EdgeField.from_pairs(g, values))

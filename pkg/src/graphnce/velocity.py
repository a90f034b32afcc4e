"""Velocity fields and their compressibility / Lipschitz constants.

Three kinds are supported: a static antisymmetric edge field, the
potential-driven field -grad P, and the nonlocal-interaction field
-grad(K * rho) - grad P whose value depends on the current density.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .calculus import EdgeField, vertex_field
from .errors import EvaluationError, ValidationError
from .graph_core import Graph

VELOCITY_KINDS = ("static", "potential", "nl2ie")


@dataclass(frozen=True, eq=False)
class KernelSpec:
    """Interaction kernel K(x, z): quadratic |x-z|^2, gaussian exp(-|x-z|^2), constant, table or callable."""

    kind: str = "quadratic"
    value: float = 1.0
    matrix: np.ndarray | None = None
    func: Callable | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.kind not in ("quadratic", "gaussian", "constant", "table", "callable"):
            raise ValidationError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "table" and self.matrix is None:
            raise ValidationError("table kernel needs a matrix")
        if self.kind == "callable" and self.func is None:
            raise ValidationError("callable kernel needs a function")

    def matrix_on(self, g: Graph) -> np.ndarray:
        """Dense K(x_i, x_z) over the vertex cloud, memoized on the graph."""
        cache = g._cache.setdefault("kernels", {})
        hit = cache.get(id(self))
        if hit is not None and hit[0] is self:
            return hit[1]
        X = g.points
        if self.kind in ("quadratic", "gaussian"):
            diff = X[:, None, :] - X[None, :, :]
            sq = np.einsum("ijk,ijk->ij", diff, diff)
            Kmat = sq if self.kind == "quadratic" else np.exp(-sq)
        elif self.kind == "constant":
            Kmat = np.full((g.n, g.n), float(self.value))
        elif self.kind == "table":
            Kmat = np.asarray(self.matrix, dtype=float)
            if Kmat.shape != (g.n, g.n):
                raise ValidationError(f"kernel table must be {g.n}x{g.n}")
        else:
            Kmat = np.array([[self.func(x, z) for z in X] for x in X], dtype=float)
        if not np.all(np.isfinite(Kmat)):
            raise EvaluationError("interaction kernel produced a non-finite value")
        Kmat.setflags(write=False)
        cache[id(self)] = (self, Kmat)
        return Kmat

    def to_json(self) -> dict:
        if self.kind == "callable":
            raise ValidationError("callable kernels cannot be serialized")
        if self.kind == "table":
            return {"kind": "table", "matrix": np.asarray(self.matrix).tolist()}
        if self.kind == "constant":
            return {"kind": "constant", "value": self.value}
        return {"kind": self.kind}


@dataclass(frozen=True, eq=False)
class PotentialSpec:
    """External potential P: zero, per-vertex table, linear <a, x>, or callable."""

    kind: str = "zero"
    values: np.ndarray | None = None
    direction: np.ndarray | None = None
    func: Callable | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.kind not in ("zero", "table", "linear", "callable"):
            raise ValidationError(f"unknown potential kind {self.kind!r}")

    def values_on(self, g: Graph) -> np.ndarray:
        if self.kind == "zero":
            return np.zeros(g.n)
        if self.kind == "table":
            P = np.asarray(self.values, dtype=float)
            if P.shape != (g.n,):
                raise ValidationError(f"potential table must have length {g.n}")
        elif self.kind == "linear":
            P = g.points @ np.asarray(self.direction, dtype=float).reshape(g.d)
        else:
            P = np.array([self.func(x) for x in g.points], dtype=float)
        if not np.all(np.isfinite(P)):
            raise EvaluationError("potential produced a non-finite value")
        return P

    def to_json(self) -> dict:
        if self.kind == "table":
            return {"kind": "table", "values": np.asarray(self.values).tolist()}
        if self.kind == "linear":
            return {"kind": "linear", "direction": np.asarray(self.direction).tolist()}
        if self.kind == "callable":
            raise ValidationError("callable potentials cannot be serialized")
        return {"kind": "zero"}


@dataclass(frozen=True, eq=False)
class TimeModulation:
    """Scalar factor c(t) = offset + amplitude * cos(omega t), or a callable."""

    offset: float = 1.0
    amplitude: float = 0.0
    omega: float = 0.0
    func: Callable | None = field(default=None, repr=False)

    def __call__(self, t):
        if self.func is not None:
            return np.asarray(self.func(t), dtype=float)
        return self.offset + self.amplitude * np.cos(self.omega * np.asarray(t, dtype=float))

    @property
    def is_constant(self) -> bool:
        return self.func is None and (self.amplitude == 0 or self.omega == 0)

    def to_json(self) -> dict:
        if self.func is not None:
            raise ValidationError("callable time modulations cannot be serialized")
        return {"offset": self.offset, "amplitude": self.amplitude, "omega": self.omega}


@dataclass(frozen=True, eq=False)
class VelocitySpec:
    kind: str
    field: EdgeField | None = None
    potential: PotentialSpec = PotentialSpec()
    kernel: KernelSpec | None = None
    time_dependence: TimeModulation = TimeModulation()

    def __post_init__(self) -> None:
        if self.kind not in VELOCITY_KINDS:
            raise ValidationError(f"unknown velocity kind {self.kind!r}")
        if self.kind == "static":
            if self.field is None:
                raise ValidationError("static velocity needs an edge field")
            if not self.field.is_antisymmetric():
                raise ValidationError("static velocity field must be antisymmetric")
        if self.kind == "nl2ie" and self.kernel is None:
            object.__setattr__(self, "kernel", KernelSpec("quadratic"))

    @classmethod
    def static(cls, field: EdgeField, time_dependence: TimeModulation | None = None) -> VelocitySpec:
        return cls("static", field=field, time_dependence=time_dependence or TimeModulation())

    @classmethod
    def from_potential(cls, potential: PotentialSpec, time_dependence: TimeModulation | None = None) -> VelocitySpec:
        return cls("potential", potential=potential, time_dependence=time_dependence or TimeModulation())

    @classmethod
    def nl2ie(
        cls,
        kernel: KernelSpec | None = None,
        potential: PotentialSpec | None = None,
        time_dependence: TimeModulation | None = None,
    ) -> VelocitySpec:
        return cls(
            "nl2ie",
            kernel=kernel or KernelSpec("quadratic"),
            potential=potential or PotentialSpec(),
            time_dependence=time_dependence or TimeModulation(),
        )

    @property
    def depends_on_state(self) -> bool:
        return self.kind == "nl2ie"

    def to_json(self) -> dict:
        doc: dict = {"kind": self.kind, "time_dependence": self.time_dependence.to_json()}
        if self.kind == "static":
            doc["forward"] = self.field.forward.tolist()
        if self.kind in ("potential", "nl2ie"):
            doc["potential"] = self.potential.to_json()
        if self.kind == "nl2ie":
            doc["kernel"] = self.kernel.to_json()
        return doc


@dataclass
class ConstantsReport:
    C_V: float
    L_V: float
    M: float
    row_sums: np.ndarray
    time_sup: float = 1.0

    def to_json(self) -> dict:
        M = self.M if math.isfinite(self.M) else None
        return {"C_V": self.C_V, "L_V": self.L_V, "M": M, "time_sup": self.time_sup}


def convolve_kernel(g: Graph, K: KernelSpec, rho) -> np.ndarray:
    """(K * rho)_i = sum_j K(x_i, x_j) m_j r_j over all vertices, j = i included."""
    r = vertex_field(g, rho)
    return _convolve_batch(g, K, r[None, :])[0]


def _convolve_batch(g: Graph, K: KernelSpec, states: np.ndarray) -> np.ndarray:
    return (states * g.masses) @ K.matrix_on(g).T


def _base_velocity(spec: VelocitySpec, g: Graph, states: np.ndarray) -> np.ndarray:
    """Unmodulated forward slots for stacked states (B, n)."""
    B = states.shape[0]
    i, j = g.edges[:, 0], g.edges[:, 1]
    if spec.kind == "static":
        if len(spec.field) != g.m:
            raise ValidationError(f"static field has {len(spec.field)} pairs, graph has {g.m}")
        return np.broadcast_to(spec.field.forward, (B, g.m))
    U = np.broadcast_to(spec.potential.values_on(g), (B, g.n))
    if spec.kind == "nl2ie":
        U = U + _convolve_batch(g, spec.kernel, states)
    v = -(U[:, j] - U[:, i])
    if not np.all(np.isfinite(v)):
        raise EvaluationError("velocity evaluation produced a non-finite value")
    return v


def velocity_batch(spec: VelocitySpec, times: np.ndarray, g: Graph, states: np.ndarray) -> np.ndarray:
    """Forward slots v_ij (B, m) for stacked times (B,) and states (B, n)."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    c = np.broadcast_to(spec.time_dependence(times), times.shape)[:, None]
    return c * _base_velocity(spec, g, states)


def eval_velocity(spec: VelocitySpec, t: float, g: Graph, rho) -> EdgeField:
    """Antisymmetric velocity field V_t[rho]."""
    r = vertex_field(g, rho)
    return EdgeField.from_antisymmetric(velocity_batch(spec, [t], g, r[None, :])[0])


def time_sup(spec: VelocitySpec, times=None) -> float:
    """sup |c(t)| over a declared time grid."""
    if spec.time_dependence.is_constant:
        c = abs(float(spec.time_dependence(0.0)))
    else:
        if times is None:
            raise ValidationError("time-dependent velocity needs a time grid for sup |c(t)|")
        vals = np.abs(np.broadcast_to(spec.time_dependence(np.asarray(times, dtype=float)), np.shape(times)))
        c = float(vals.max())
    if not math.isfinite(c):
        raise ValidationError("time modulation c(t) is unbounded on the time grid")
    return c


def compute_constants(g: Graph, spec: VelocitySpec, M: float, times=None) -> ConstantsReport:
    """Exact finite-graph C_V and L_V by exhaustive enumeration.

    nl2ie: with D_ij = max_z |K(x_j, x_z) - K(x_i, x_z)| and dP_ij = |P_j - P_i|,
    C_V = max_i sum_j (M D_ij + dP_ij) eta_ij m_j and L_V = max_i sum_j D_ij eta_ij m_j.
    static / potential: C_V = max_i sum_j |v_ij| eta_ij m_j, L_V = 0.  Both are
    scaled by sup |c(t)| over ``times``.
    """
    if not (math.isfinite(M) and M >= 0):
        raise ValidationError("M must be a finite nonnegative real")
    c = time_sup(spec, times)
    i, j = g.edges[:, 0], g.edges[:, 1]
    R = g.row_weight_matrix()
    if spec.kind == "nl2ie":
        Kmat = spec.kernel.matrix_on(g)
        D = np.abs(Kmat[j, :] - Kmat[i, :]).max(axis=1) if g.m else np.zeros(0)
        P = spec.potential.values_on(g)
        dP = np.abs(P[j] - P[i])
        rows_C = R @ np.concatenate([M * D + dP] * 2)
        rows_L = R @ np.concatenate([D, D])
        C_V = c * float(rows_C.max(initial=0.0))
        L_V = c * float(rows_L.max(initial=0.0))
        return ConstantsReport(C_V, L_V, float(M), c * rows_C, c)
    v = _base_velocity(spec, g, np.zeros((1, g.n)))[0]
    rows = R @ np.concatenate([np.abs(v), np.abs(v)])
    return ConstantsReport(c * float(rows.max(initial=0.0)), 0.0, float(M), c * rows, c)

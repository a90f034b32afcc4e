"""Flux interpolations Phi(a, b; w) and assembly of the admissible flux.

Built-in kinds and their closed forms::

    upwind           a * w_+ - b * w_-
    arithmetic_mean  (a + b) / 2 * w
    min_mean         min(a, b) * w
    max_mean         max(a, b) * w

All four are admissible with Lipschitz constant 1 and jointly antisymmetric,
Phi(a, b; -w) = -Phi(b, a; w).  See the README for the one-line proofs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .calculus import EdgeField, vertex_field
from .errors import EvaluationError, ValidationError
from .graph_core import Graph

BUILTIN_KINDS = ("upwind", "arithmetic_mean", "min_mean", "max_mean")


@dataclass(frozen=True, eq=False)
class InterpolationSpec:
    kind: str
    lipschitz_constant: float = 1.0
    jointly_antisymmetric: bool = True
    func: Callable | None = field(default=None, repr=False)
    vectorized: bool = False

    def __post_init__(self) -> None:
        if self.kind not in BUILTIN_KINDS + ("custom",):
            raise ValidationError(f"unknown interpolation kind {self.kind!r}")
        L = float(self.lipschitz_constant)
        if not (np.isfinite(L) and L > 0):
            raise ValidationError("lipschitz_constant must be finite and positive")
        if self.kind == "custom" and self.func is None:
            raise ValidationError("custom interpolation needs a function handle")
        if self.kind != "custom" and not self.jointly_antisymmetric:
            raise ValidationError("built-in interpolations are jointly antisymmetric")
        object.__setattr__(self, "lipschitz_constant", L)

    @classmethod
    def builtin(cls, kind: str, lipschitz_constant: float = 1.0) -> InterpolationSpec:
        return cls(kind, lipschitz_constant)

    @classmethod
    def custom(
        cls,
        func: Callable,
        lipschitz_constant: float,
        jointly_antisymmetric: bool = False,
        vectorized: bool = False,
    ) -> InterpolationSpec:
        return cls("custom", lipschitz_constant, jointly_antisymmetric, func, vectorized)

    @property
    def is_upwind(self) -> bool:
        return self.kind == "upwind"

    @property
    def tv_growth_factor(self) -> float:
        """kappa with d/dt TV <= kappa L_Phi (max row sum of |v| eta m) TV on atomic mu.

        Upwind and the arithmetic mean give kappa = 1 by direct expansion of
        sum_i sgn(r_i) (div F)_i m_i.  Otherwise only |Phi(a,b;v)| <= L (|a|+|b|) |v|
        is available, and both endpoints of a pair can carry the full flux: kappa = 2.
        """
        return 1.0 if self.kind in ("upwind", "arithmetic_mean") else 2.0

    def to_json(self) -> dict:
        if self.kind == "custom":
            raise ValidationError("custom interpolations cannot be serialized")
        return {"kind": self.kind, "lipschitz_constant": self.lipschitz_constant}


def interpolation_from_json(doc: dict | str) -> InterpolationSpec:
    if isinstance(doc, str):
        doc = {"kind": doc}
    kind = doc.get("kind")
    if kind == "custom":
        raise ValidationError("custom interpolations are only available through the library API")
    return InterpolationSpec(kind, float(doc.get("lipschitz_constant", 1.0)))


def phi_array(spec: InterpolationSpec, a, b, w) -> np.ndarray:
    """Vectorized Phi over broadcastable arrays."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    w = np.asarray(w, dtype=float)
    kind = spec.kind
    if kind == "upwind":
        return a * np.maximum(w, 0.0) - b * np.maximum(-w, 0.0)
    if kind == "arithmetic_mean":
        return (a + b) / 2.0 * w
    if kind == "min_mean":
        return np.minimum(a, b) * w
    if kind == "max_mean":
        return np.maximum(a, b) * w
    if spec.vectorized:
        out = np.asarray(spec.func(a, b, w), dtype=float)
    else:
        a, b, w = np.broadcast_arrays(a, b, w)
        out = np.array([spec.func(x, y, z) for x, y, z in zip(a.ravel(), b.ravel(), w.ravel())], dtype=float)
        out = out.reshape(a.shape)
    if not np.all(np.isfinite(out)):
        raise EvaluationError("custom interpolation returned a non-finite value")
    return out


def phi_eval(spec: InterpolationSpec, a: float, b: float, w: float) -> float:
    """Scalar Phi(a, b; w)."""
    return float(phi_array(spec, a, b, w))


def assemble_flux(g: Graph, spec: InterpolationSpec, rho, v: EdgeField) -> EdgeField:
    """Admissible flux with lambda = mu x mu: J_ij = Phi(r_i, r_j; v_ij)."""
    r = vertex_field(g, rho)
    if len(v) != g.m:
        raise ValidationError(f"velocity has {len(v)} pairs, graph has {g.m}")
    if not v.is_antisymmetric():
        raise ValidationError("velocity field must be antisymmetric")
    fwd, bwd = flux_batch(g, spec, r[None, :], v.forward[None, :])
    return EdgeField(fwd[0], bwd[0], antisymmetric=spec.jointly_antisymmetric)


def flux_batch(g: Graph, spec: InterpolationSpec, states: np.ndarray, v_fwd: np.ndarray):
    """Forward/backward flux slots for stacked states (B, n) and v_ij (B, m)."""
    i, j = g.edges[:, 0], g.edges[:, 1]
    ri, rj = states[:, i], states[:, j]
    fwd = phi_array(spec, ri, rj, v_fwd)
    if spec.jointly_antisymmetric and spec.kind != "custom":
        # closed forms are exactly antisymmetric in IEEE arithmetic
        return fwd, -fwd
    bwd = phi_array(spec, rj, ri, -v_fwd)
    if spec.jointly_antisymmetric:
        scale = np.maximum(1.0, np.abs(fwd))
        if np.any(np.abs(fwd + bwd) > 1e-14 * scale):
            raise EvaluationError("interpolation declared jointly antisymmetric but J_ji != -J_ij")
        bwd = -fwd
    return fwd, bwd


@dataclass
class SamplingBox:
    """Sampling ranges for density arguments (a, b, c, d) and velocities (v, w)."""

    density: tuple[float, float] = (-10.0, 10.0)
    velocity: tuple[float, float] = (-10.0, 10.0)
    alpha_max: float = 10.0


@dataclass
class AdmissibilityReport:
    passed: bool
    sample_count: int
    seed: int
    checks: dict[str, bool]
    counterexamples: dict[str, dict]
    jointly_antisymmetric: bool

    def summary(self) -> str:
        bad = [k for k, ok in self.checks.items() if not ok]
        return "pass" if self.passed else "fail: " + ", ".join(bad)


def _sample(rng: np.random.Generator, lo: float, hi: float, size: int) -> np.ndarray:
    """Uniform draws on [lo, hi] with a quarter stratified towards zero and a few exact zeros."""
    x = rng.uniform(lo, hi, size)
    near = rng.random(size) < 0.25
    mag = 10.0 ** rng.uniform(-10, 0, size) * max(abs(lo), abs(hi))
    sign = np.where(rng.random(size) < 0.5, -1.0, 1.0)
    if lo >= 0:
        sign[:] = 1.0
    elif hi <= 0:
        sign[:] = -1.0
    x = np.where(near, np.clip(sign * mag, lo, hi), x)
    zero = (rng.random(size) < 0.05) & (lo <= 0 <= hi)
    x[zero] = 0.0
    return x


def check_admissibility(
    spec: InterpolationSpec,
    sample_count: int = 10_000,
    seed: int = 0,
    box: SamplingBox | None = None,
) -> AdmissibilityReport:
    """Randomized falsification of normalization, Lipschitz bounds and homogeneity.

    A pass means no counterexample was found; it certifies nothing for
    custom interpolations.  Deterministic given ``seed``.
    """
    if sample_count < 1:
        raise ValidationError("sample_count must be >= 1")
    box = box or SamplingBox()
    rng = np.random.default_rng(seed)
    N = int(sample_count)
    L = spec.lipschitz_constant
    dlo, dhi = box.density
    vlo, vhi = box.velocity
    a, b, c, d = (_sample(rng, dlo, dhi, N) for _ in range(4))
    # half the (c, d) draws are local perturbations of (a, b)
    local = rng.random(N) < 0.5
    eps = 10.0 ** rng.uniform(-8, 0, N)
    c = np.where(local, np.clip(a + eps * rng.standard_normal(N), dlo, dhi), c)
    d = np.where(local, np.clip(b + eps * rng.standard_normal(N), dlo, dhi), d)
    v, w = (_sample(rng, vlo, vhi, N) for _ in range(2))
    alpha = rng.uniform(0, box.alpha_max, N)
    alpha[alpha == 0] = box.alpha_max

    Phi = lambda x, y, z: phi_array(spec, x, y, z)  # noqa: E731
    tol = lambda *xs: 1e-12 * (1.0 + sum(np.abs(x) for x in xs))  # noqa: E731
    checks: dict[str, bool] = {}
    cex: dict[str, dict] = {}

    def record(name: str, bad: np.ndarray, fields: dict[str, np.ndarray]) -> None:
        checks[name] = not bad.any()
        if bad.any():
            k = int(np.flatnonzero(bad)[0])
            cex[name] = {key: float(val[k]) for key, val in fields.items()}

    zeros = np.zeros(N)
    p00 = Phi(zeros, zeros, v)
    pab0 = Phi(a, b, zeros)
    record("normalization", (np.abs(p00) > tol(v)) | (np.abs(pab0) > tol(a, b)), {"a": a, "b": b, "v": v})

    pw, pv = Phi(a, b, w), Phi(a, b, v)
    lhs = np.abs(pw - pv)
    rhs = L * (np.abs(a) + np.abs(b)) * np.abs(w - v)
    record("lipschitz_velocity", lhs > rhs + tol(pw, pv), {"a": a, "b": b, "v": v, "w": w})

    pcd = Phi(c, d, v)
    lhs = np.abs(pv - pcd)
    rhs = L * (np.abs(a - c) + np.abs(b - d)) * np.abs(v)
    record("lipschitz_density", lhs > rhs + tol(pv, pcd), {"a": a, "b": b, "c": c, "d": d, "v": v})

    ok = np.isfinite(alpha * a) & (alpha * a >= dlo) & (alpha * a <= dhi) & (alpha * b >= dlo) & (alpha * b <= dhi)
    aa, ab = np.where(ok, alpha * a, a), np.where(ok, alpha * b, b)
    scaled = Phi(aa, ab, w)
    target = np.where(ok, alpha * pw, pw)
    record("homogeneity", np.abs(scaled - target) > tol(scaled, target), {"alpha": alpha, "a": a, "b": b, "w": w})

    anti = np.abs(Phi(a, b, -v) + Phi(b, a, v)) <= tol(pv)
    jointly = bool(anti.all())
    if spec.jointly_antisymmetric:
        record("joint_antisymmetry", ~anti, {"a": a, "b": b, "v": v})

    return AdmissibilityReport(all(checks.values()), N, seed, checks, cex, jointly)

"""Run configuration: JSON documents, presets and their resolution."""

from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .calculus import EdgeField, vertex_field
from .diagnostics import LpConstants, Tolerances
from .errors import ValidationError
from .graph_core import EtaSpec, Graph, build_graph, graph_from_json, load_graph
from .interpolation import InterpolationSpec, interpolation_from_json
from .solver import SolverConfig
from .velocity import KernelSpec, PotentialSpec, TimeModulation, VelocitySpec

PRESETS = (
    "two_node_upwind",
    "two_node_arithmetic_T5",
    "ring16_upwind_lattice",
    "nl2ie_cloud50",
    "stationary_nl2ie_2node",
)


@dataclass
class DiagnosticsRequest:
    p_list: list[float] = field(default_factory=lambda: [2.0])
    tolerances: Tolerances = field(default_factory=Tolerances)
    lp_constants: LpConstants | None = None
    hard: dict[str, bool] = field(default_factory=dict)


@dataclass
class RunConfig:
    graph: Graph
    interpolation: InterpolationSpec
    velocity: VelocitySpec
    rho0: np.ndarray
    solver: SolverConfig
    diagnostics: DiagnosticsRequest
    output_dir: str | None
    document: dict[str, Any]
    name: str | None = None


def config_hash(doc: dict[str, Any]) -> str:
    """SHA-256 of the canonical JSON of every semantic field (output location excluded)."""
    semantic = {k: v for k, v in doc.items() if k not in ("output_dir", "name", "description")}
    blob = json.dumps(semantic, sort_keys=True, separators=(",", ":"), allow_nan=False)
    return hashlib.sha256(blob.encode()).hexdigest()


# -- presets ----------------------------------------------------------------


def _two_node(phi: str, horizon: float, name: str, **extra) -> dict:
    doc = {
        "name": name,
        "graph": {"points": [[0.0], [1.0]], "masses": [0.5, 0.5], "eta": {"kind": "constant", "params": {"c": 1.0}}},
        "interpolation": {"kind": phi},
        "velocity": {"kind": "static", "pairs": [[0, 1, 1.0]]},
        "initial": {"values": [2.0, 0.0]},
        # window [0, 0.5]: tau = theta / alpha with alpha = 1/2
        "solver": {"horizon": horizon, "window_safety": 0.25, "substeps_per_window": 64},
        "diagnostics": {"p_list": [2.0]},
    }
    doc.update(extra)
    return doc


def preset(name: str, seed: int | None = None) -> dict[str, Any]:
    """Fully specified run document for a named scenario."""
    if name == "two_node_upwind":
        return _two_node("upwind", 1.0, name)
    if name == "two_node_arithmetic_T5":
        doc = _two_node("arithmetic_mean", 5.0, name)
        doc["diagnostics"]["hard"] = {"positivity": True}
        return doc
    if name == "stationary_nl2ie_2node":
        doc = _two_node("upwind", 1.0, name)
        doc["velocity"] = {"kind": "nl2ie", "kernel": {"kind": "quadratic"}, "potential": {"kind": "zero"}}
        doc["solver"] = {"horizon": 1.0}
        return doc
    if name == "ring16_upwind_lattice":
        n = 16
        table = [[1.0 if (i - j) % n in (1, n - 1) else 0.0 for j in range(n)] for i in range(n)]
        x = [i / n for i in range(n)]
        return {
            "name": name,
            "graph": {
                "points": [[xi] for xi in x],
                "masses": [1.0 / n] * n,
                "eta": {"kind": "table", "params": {"matrix": table}},
            },
            "interpolation": {"kind": "upwind"},
            # unit rightward transport v_{i,i+1} = 1 around the ring
            "velocity": {"kind": "static", "pairs": [[i, (i + 1) % n, 1.0] for i in range(n)]},
            "initial": {"values": [1.0 + 0.5 * math.sin(2 * math.pi * xi) for xi in x]},
            "solver": {"horizon": 1.0},
            # density_bound = m_i / h = 1; cv_p = T max_j sum_i ((v_ij)_- eta_ij)^2 m_i = 1/16
            "diagnostics": {"p_list": [2.0], "lp": {"density_bound": 1.0, "cv_p": 1.0 / 16}},
        }
    if name == "nl2ie_cloud50":
        return {
            "name": name,
            "seed": 0 if seed is None else int(seed),
            "graph": {"preset": "cloud", "n": 50, "d": 2, "eta": {"kind": "gaussian", "params": {"sigma": 0.3}}},
            "interpolation": {"kind": "upwind"},
            "velocity": {"kind": "nl2ie", "kernel": {"kind": "quadratic"}, "potential": {"kind": "zero"}},
            "initial": {"preset": "uniform"},
            "solver": {"horizon": 1.0},
            "diagnostics": {"p_list": [2.0]},
        }
    raise ValidationError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}")


# -- parsing ----------------------------------------------------------------


def _parse_graph(doc: Any, seed: int, base_dir: Path | None) -> Graph:
    if not isinstance(doc, dict):
        raise ValidationError("graph must be an object")
    if "file" in doc:
        path = Path(doc["file"])
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        return load_graph(path)
    if "preset" in doc:
        if doc["preset"] != "cloud":
            raise ValidationError(f"unknown graph preset {doc['preset']!r}")
        rng = np.random.default_rng(seed)
        n, d = int(doc.get("n", 50)), int(doc.get("d", 2))
        points = rng.uniform(0.0, 1.0, (n, d))
        eta_doc = doc.get("eta", {"kind": "gaussian", "params": {"sigma": 0.3}})
        eta = EtaSpec(eta_doc["kind"], {k: float(v) for k, v in eta_doc.get("params", {}).items()})
        return build_graph(points, np.full(n, 1.0 / n), eta, float(doc.get("weight_floor", 0.0)))
    return graph_from_json(doc)


def _parse_modulation(doc: Any) -> TimeModulation:
    if doc is None:
        return TimeModulation()
    return TimeModulation(float(doc.get("offset", 1.0)), float(doc.get("amplitude", 0.0)), float(doc.get("omega", 0.0)))


def _parse_potential(doc: Any) -> PotentialSpec:
    if doc is None:
        return PotentialSpec()
    kind = doc.get("kind", "zero")
    if kind == "table":
        return PotentialSpec("table", values=np.asarray(doc["values"], dtype=float))
    if kind == "linear":
        return PotentialSpec("linear", direction=np.asarray(doc["direction"], dtype=float))
    if kind == "zero":
        return PotentialSpec()
    raise ValidationError(f"unknown potential kind {kind!r}")


def _parse_kernel(doc: Any) -> KernelSpec:
    if doc is None:
        return KernelSpec("quadratic")
    kind = doc.get("kind", "quadratic")
    if kind == "table":
        return KernelSpec("table", matrix=np.asarray(doc["matrix"], dtype=float))
    if kind == "constant":
        return KernelSpec("constant", value=float(doc.get("value", 1.0)))
    if kind in ("quadratic", "gaussian"):
        return KernelSpec(kind)
    raise ValidationError(f"unknown kernel kind {kind!r}")


def _parse_velocity(doc: Any, g: Graph) -> VelocitySpec:
    if not isinstance(doc, dict):
        raise ValidationError("velocity must be an object")
    kind = doc.get("kind")
    mod = _parse_modulation(doc.get("time_dependence"))
    if kind == "static":
        if "pairs" in doc:
            values = {}
            for item in doc["pairs"]:
                i, j, u = int(item[0]), int(item[1]), float(item[2])
                values[(i, j)] = u
            try:
                field_ = EdgeField.from_pairs(g, values)
            except KeyError as exc:
                raise ValidationError(f"static velocity names a non-edge: {exc}") from exc
        else:
            fwd = np.asarray(doc["forward"], dtype=float)
            if fwd.shape != (g.m,):
                raise ValidationError(f"static velocity needs {g.m} forward values")
            field_ = EdgeField.from_antisymmetric(fwd)
        return VelocitySpec.static(field_, mod)
    if kind == "potential":
        return VelocitySpec.from_potential(_parse_potential(doc.get("potential")), mod)
    if kind == "nl2ie":
        return VelocitySpec.nl2ie(_parse_kernel(doc.get("kernel")), _parse_potential(doc.get("potential")), mod)
    raise ValidationError(f"unknown velocity kind {kind!r}")


def _parse_initial(doc: Any, g: Graph, seed: int) -> np.ndarray:
    if not isinstance(doc, dict):
        raise ValidationError("initial must be an object")
    if "values" in doc:
        return vertex_field(g, doc["values"])
    kind = doc.get("preset")
    if kind == "uniform":
        return np.full(g.n, float(doc.get("value", 1.0)))
    if kind == "random":
        rng = np.random.default_rng(seed + 1)
        return rng.uniform(0.0, 2.0, g.n)
    raise ValidationError(f"unknown initial density preset {kind!r}")


def _parse_diagnostics(doc: Any, phi: InterpolationSpec) -> DiagnosticsRequest:
    doc = doc or {}
    tol = Tolerances(**{k: float(v) for k, v in doc.get("tolerances", {}).items()})
    lp = doc.get("lp")
    lp_constants = LpConstants(float(lp["density_bound"]), float(lp["cv_p"])) if lp else None
    hard = {"mass": True, "tv_gronwall": True, "positivity": phi.is_upwind}
    hard.update({k: bool(v) for k, v in doc.get("hard", {}).items()})
    p_list = [float(p) for p in doc.get("p_list", [2.0])]
    return DiagnosticsRequest(p_list, tol, lp_constants, hard)


def parse_config(doc: dict[str, Any], base_dir: Path | None = None) -> RunConfig:
    """Resolve a run document into solver-ready objects."""
    if not isinstance(doc, dict):
        raise ValidationError("configuration must be a JSON object")
    try:
        seed = int(doc.get("seed", 0))
        g = _parse_graph(doc["graph"], seed, base_dir)
        phi = interpolation_from_json(doc.get("interpolation", {"kind": "upwind"}))
        velocity = _parse_velocity(doc["velocity"], g)
        rho0 = _parse_initial(doc["initial"], g, seed)
        solver = SolverConfig(**doc.get("solver", {}))
        diagnostics = _parse_diagnostics(doc.get("diagnostics"), phi)
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"invalid configuration: {exc!r}") from exc
    return RunConfig(g, phi, velocity, rho0, solver, diagnostics, doc.get("output_dir"), copy.deepcopy(doc), doc.get("name"))


def load_config(path: str | Path) -> dict[str, Any]:
    path = Path(path)
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: malformed JSON ({exc})") from exc
    except OSError as exc:
        raise ValidationError(f"{path}: cannot read configuration ({exc})") from exc

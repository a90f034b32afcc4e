"""Finite weighted graphs built from a point cloud and a weight kernel.

A graph is the pair (mu, eta): atoms of the base measure at the vertex
coordinates, and a symmetric weight on pairs of distinct vertices.  Edges are
stored once per unordered pair ``(i, j)`` with ``i < j`` in lexicographic
order; directed edge quantities carry two values per stored pair.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import scipy.sparse as sp

from .errors import DomainError, ValidationError

ETA_KINDS = ("gaussian", "indicator", "constant", "table")


@dataclass(frozen=True, eq=False)
class EtaSpec:
    """Weight kernel eta(x, y) on the off-diagonal.

    ``gaussian``: exp(-|x-y|^2 / sigma^2).  ``indicator``: 1 if |x-y| <= epsilon.
    ``constant``: c.  ``table``: explicit symmetric matrix indexed by the
    vertices it was declared over (``points``).
    """

    kind: str
    params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in ETA_KINDS:
            raise ValidationError(f"unknown eta kind {self.kind!r}; expected one of {ETA_KINDS}")
        p = self.params
        if self.kind == "gaussian":
            _require_positive(p, "sigma")
        elif self.kind == "indicator":
            _require_positive(p, "epsilon")
        elif self.kind == "constant":
            _require_positive(p, "c")
        else:
            matrix = np.asarray(p.get("matrix"), dtype=float)
            points = np.asarray(p.get("points"), dtype=float)
            if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
                raise ValidationError("table eta needs a square matrix")
            if points.ndim != 2 or points.shape[0] != matrix.shape[0]:
                raise ValidationError("table eta needs one point per matrix row")
            if not np.all(np.isfinite(matrix)) or np.any(matrix < 0):
                raise ValidationError("table eta entries must be finite and nonnegative")
            if not np.array_equal(matrix, matrix.T):
                raise ValidationError("table eta must be symmetric")
            if np.any(np.diag(matrix) != 0):
                raise ValidationError("table eta must have a zero diagonal")
            index = {tuple(x): k for k, x in enumerate(points.tolist())}
            if len(index) != points.shape[0]:
                raise ValidationError("table eta points must be distinct")
            # frozen dataclass: stash derived lookups in params
            object.__setattr__(self, "params", {**p, "matrix": matrix, "points": points, "_index": index})

    @classmethod
    def gaussian(cls, sigma: float) -> EtaSpec:
        return cls("gaussian", {"sigma": float(sigma)})

    @classmethod
    def indicator(cls, epsilon: float) -> EtaSpec:
        return cls("indicator", {"epsilon": float(epsilon)})

    @classmethod
    def constant(cls, c: float = 1.0) -> EtaSpec:
        return cls("constant", {"c": float(c)})

    @classmethod
    def table(cls, matrix, points) -> EtaSpec:
        return cls("table", {"matrix": matrix, "points": points})

    @property
    def bound(self) -> float:
        """Declared upper bound of eta."""
        if self.kind == "constant":
            return self.params["c"]
        if self.kind == "table":
            return float(self.params["matrix"].max(initial=0.0))
        return 1.0

    def to_json(self) -> dict[str, Any]:
        if self.kind == "table":
            return {"kind": "table", "params": {"matrix": self.params["matrix"].tolist()}}
        return {"kind": self.kind, "params": dict(self.params)}

    def pairwise(self, points: np.ndarray) -> np.ndarray:
        """Dense eta matrix over ``points`` with a zero diagonal."""
        points = np.asarray(points, dtype=float)
        n = points.shape[0]
        if self.kind == "table":
            idx = np.array([self._lookup(x) for x in points], dtype=int)
            out = self.params["matrix"][np.ix_(idx, idx)].copy()
        else:
            out = self._profile(_squared_distance(points[:, None, :], points[None, :, :]))
        out[np.diag_indices(n)] = 0.0
        return out

    def _profile(self, sq: np.ndarray) -> np.ndarray:
        # shared by eval_eta and pairwise so stored weights are reproduced bit for bit
        if self.kind == "gaussian":
            return np.exp(-sq / self.params["sigma"] ** 2)
        if self.kind == "indicator":
            return (np.sqrt(sq) <= self.params["epsilon"]).astype(float)
        return np.full(np.shape(sq), float(self.params["c"]))

    def _lookup(self, x) -> int:
        key = tuple(float(c) for c in np.atleast_1d(x))
        try:
            return self.params["_index"][key]
        except KeyError:
            raise DomainError(f"point {key} is not a vertex of the eta table") from None


def _require_positive(params: dict, name: str) -> None:
    value = params.get(name)
    if value is None or not math.isfinite(value) or value <= 0:
        raise ValidationError(f"eta parameter {name!r} must be a positive finite real, got {value!r}")


def eval_eta(spec: EtaSpec, x, y) -> float:
    """Evaluate eta at a pair of distinct points.

    >>> round(eval_eta(EtaSpec.gaussian(1.0), [0.0], [1.0]), 6)
    0.367879
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.shape != y.shape:
        raise ValidationError("points must have the same dimension")
    if np.array_equal(x, y):
        raise DomainError("eta is only defined off the diagonal (x == y)")
    if spec.kind == "table":
        return float(spec.params["matrix"][spec._lookup(x), spec._lookup(y)])
    return float(spec._profile(_squared_distance(x, y)))


def _squared_distance(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """|x - y|^2 accumulated coordinate by coordinate in a fixed order."""
    diff = x - y
    sq = np.zeros(diff.shape[:-1])
    for k in range(diff.shape[-1]):
        sq = sq + diff[..., k] * diff[..., k]
    return sq


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable finite weighted graph.

    Attributes
    ----------
    points : (n, d) array of vertex coordinates
    masses : (n,) array of positive vertex masses m_i
    edges : (m, 2) int array of unordered pairs, ``i < j``, lexicographic
    weights : (m,) array of eta_ij > weight_floor
    """

    points: np.ndarray
    masses: np.ndarray
    edges: np.ndarray
    weights: np.ndarray
    eta: EtaSpec
    weight_floor: float = 0.0
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    @property
    def m(self) -> int:
        return self.edges.shape[0]

    @property
    def total_mass(self) -> float:
        return float(math.fsum(self.masses))

    @property
    def degree(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.n)

    @property
    def isolated(self) -> np.ndarray:
        """Indices of vertices without incident edges."""
        return np.flatnonzero(self.degree == 0)

    def edge_index(self, i: int, j: int) -> tuple[int, bool]:
        """Return ``(e, forward)`` for the directed pair ``(i, j)``.

        ``forward`` is True when ``i < j``, i.e. the value is stored in the
        forward slot of an :class:`EdgeField`.
        """
        lookup = self._cache.get("edge_lookup")
        if lookup is None:
            lookup = {(int(a), int(b)): e for e, (a, b) in enumerate(self.edges)}
            self._cache["edge_lookup"] = lookup
        a, b = (i, j) if i < j else (j, i)
        try:
            return lookup[(a, b)], i < j
        except KeyError:
            raise KeyError(f"({i}, {j}) is not an edge") from None

    def divergence_matrix(self) -> sp.csr_matrix:
        """Sparse (n, m) operator ``A`` with div = A @ (J_fwd - J_bwd).

        Row i holds 1/2 eta_ij m_j for both incident edge orientations, with
        columns in ascending neighbour order so row sums run in fixed order.
        """
        A = self._cache.get("div")
        if A is None:
            i, j = self.edges[:, 0], self.edges[:, 1]
            e = np.arange(self.m)
            rows = np.concatenate([i, j])
            cols = np.concatenate([e, e])
            vals = np.concatenate([0.5 * self.weights * self.masses[j], -0.5 * self.weights * self.masses[i]])
            A = sp.csr_matrix((vals, (rows, cols)), shape=(self.n, self.m))
            A.sort_indices()
            self._cache["div"] = A
        return A

    def row_weight_matrix(self) -> sp.csr_matrix:
        """Sparse (n, 2m) operator summing eta_ij m_j u_ij over directed edges out of i.

        Columns ``0..m-1`` address forward slots, ``m..2m-1`` backward slots.
        """
        R = self._cache.get("rows")
        if R is None:
            i, j = self.edges[:, 0], self.edges[:, 1]
            e = np.arange(self.m)
            rows = np.concatenate([i, j])
            cols = np.concatenate([e, e + self.m])
            vals = np.concatenate([self.weights * self.masses[j], self.weights * self.masses[i]])
            R = sp.csr_matrix((vals, (rows, cols)), shape=(self.n, 2 * self.m))
            R.sort_indices()
            self._cache["rows"] = R
        return R

    def fingerprint(self) -> str:
        import hashlib

        h = hashlib.sha256()
        for arr in (self.points, self.masses, self.edges, self.weights):
            h.update(np.ascontiguousarray(arr).tobytes())
        return h.hexdigest()[:16]

    def to_json(self) -> dict[str, Any]:
        return {
            "points": self.points.tolist(),
            "masses": self.masses.tolist(),
            "eta": self.eta.to_json(),
            "weight_floor": self.weight_floor,
        }


def build_graph(points, masses, spec: EtaSpec, weight_floor: float = 0.0) -> Graph:
    """Build the graph whose edges are all pairs with eta_ij > weight_floor."""
    points = np.array(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    masses = np.array(masses, dtype=float)
    if points.ndim != 2 or points.shape[0] == 0:
        raise ValidationError("points must be a non-empty (n, d) array")
    if masses.shape != (points.shape[0],):
        raise ValidationError(f"expected {points.shape[0]} masses, got shape {masses.shape}")
    if not np.all(np.isfinite(points)):
        raise ValidationError("coordinates must be finite")
    if not np.all(np.isfinite(masses)) or np.any(masses <= 0):
        raise ValidationError("masses must be finite and strictly positive")
    if not math.isfinite(weight_floor) or weight_floor < 0:
        raise ValidationError("weight_floor must be a nonnegative real")
    if np.unique(points, axis=0).shape[0] != points.shape[0]:
        raise ValidationError("duplicate vertex coordinates: eta is undefined on the diagonal")

    W = spec.pairwise(points)
    iu, ju = np.triu_indices(points.shape[0], k=1)
    w = W[iu, ju]
    keep = w > weight_floor
    edges = np.stack([iu[keep], ju[keep]], axis=1).astype(np.int64).reshape(-1, 2)
    weights = w[keep].astype(float)
    if not np.all(np.isfinite(weights)):
        raise ValidationError("eta produced non-finite weights")
    if edges.shape[0] == 0:
        warnings.warn("graph has no edges; dynamics are trivially constant", RuntimeWarning, stacklevel=2)

    for arr in (points, masses, edges, weights):
        arr.setflags(write=False)
    return Graph(points, masses, edges, weights, spec, float(weight_floor))


def eta_from_json(doc: dict[str, Any], points) -> EtaSpec:
    kind = doc.get("kind")
    params = dict(doc.get("params", {}))
    if kind == "table":
        matrix = params.get("matrix", doc.get("matrix"))
        return EtaSpec.table(matrix, np.atleast_2d(np.asarray(points, dtype=float).reshape(len(points), -1)))
    return EtaSpec(kind, {k: float(v) for k, v in params.items()})


def graph_from_json(doc: dict[str, Any]) -> Graph:
    try:
        points = np.asarray(doc["points"], dtype=float)
        if points.ndim == 1:
            points = points[:, None]
        eta = eta_from_json(doc["eta"], points)
        return build_graph(points, doc["masses"], eta, float(doc.get("weight_floor", 0.0)))
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed graph document: {exc}") from exc


def load_graph(path: str | Path) -> Graph:
    return graph_from_json(json.loads(Path(path).read_text()))


def save_graph(g: Graph, path: str | Path) -> None:
    Path(path).write_text(json.dumps(g.to_json(), indent=2))

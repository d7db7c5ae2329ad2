"""Polyhedral 1-currents with multiplicities in Z^m.

A current is a finite set of oriented segments between nodes in R^d, each
carrying an integer multiplicity vector.  Construction normalizes the
representation: nodes within an absolute merge tolerance become one node,
segments are re-oriented so the lexicographically smaller endpoint is the
tail (negating the multiplicity), duplicates are combined, and zero-length
or zero-multiplicity segments are dropped.  The flow convention is that a
positive component of the multiplicity flows tail to head.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .norms import AlphaNorm

MERGE_TOL = 1e-9


@dataclass(frozen=True)
class BoundaryMeasure:
    """Atomic measure with integer vector weights: sum_j p_j delta_{x_j}."""

    points: np.ndarray  # (k, d)
    weights: np.ndarray  # (k, m) integer

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def coeff_dim(self) -> int:
        return self.weights.shape[1]

    def __len__(self) -> int:
        return len(self.points)

    def mass(self, norm: AlphaNorm) -> float:
        """Boundary mass sum_j psi(p_j)."""
        if len(self) == 0:
            return 0.0
        return float(np.sum(norm.psi(self.weights.astype(float))))

    def total_weight(self) -> np.ndarray:
        """Sum of all atom weights (zero for any boundary of a current)."""
        return self.weights.sum(axis=0)

    def weight_at(self, point, tol: float = MERGE_TOL) -> np.ndarray:
        """Weight of the atom at ``point`` (zero vector when absent)."""
        point = np.asarray(point, dtype=float)
        for x, p in zip(self.points, self.weights):
            if np.linalg.norm(x - point) <= tol:
                return p.copy()
        return np.zeros(self.coeff_dim, dtype=self.weights.dtype)


@dataclass(frozen=True)
class PolyhedralCurrent:
    """Oriented segments (tail, head, multiplicity) over a shared node list."""

    points: np.ndarray  # (N, d)
    tails: np.ndarray  # (S,) int
    heads: np.ndarray  # (S,) int
    theta: np.ndarray  # (S, m) int

    def __post_init__(self):
        if self.points.ndim != 2 or self.theta.ndim != 2:
            raise ValueError("points and theta must be 2-dimensional arrays")
        if not (len(self.tails) == len(self.heads) == len(self.theta)):
            raise ValueError("segment arrays must have equal length")
        if len(self.tails) and not np.issubdtype(self.theta.dtype, np.integer):
            raise ValueError("multiplicities must be integer vectors")

    # -- basic queries ------------------------------------------------------

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def coeff_dim(self) -> int:
        return self.theta.shape[1]

    @property
    def n_segments(self) -> int:
        return len(self.tails)

    def lengths(self) -> np.ndarray:
        return np.linalg.norm(self.points[self.heads] - self.points[self.tails], axis=1)

    def tangents(self) -> np.ndarray:
        """Unit tangent per segment, tail to head."""
        delta = self.points[self.heads] - self.points[self.tails]
        return delta / np.linalg.norm(delta, axis=1, keepdims=True)

    # -- construction -------------------------------------------------------

    @classmethod
    def from_segments(
        cls,
        segments,
        *,
        dim: int | None = None,
        coeff_dim: int | None = None,
        merge_tol: float = MERGE_TOL,
        base_points=None,
    ) -> "PolyhedralCurrent":
        """Build from raw (tail point, head point, multiplicity) triples.

        ``base_points`` seeds the node list (useful to pin terminals to exact
        coordinates before nearby optimized nodes get merged onto them).
        """
        segments = list(segments)
        if segments:
            dim = len(np.atleast_1d(segments[0][0]))
            coeff_dim = len(np.atleast_1d(segments[0][2]))
        if dim is None or coeff_dim is None:
            raise ValueError("empty segment list needs explicit dim and coeff_dim")

        nodes: list[np.ndarray] = []

        def node_id(p) -> int:
            p = np.asarray(p, dtype=float)
            if p.shape != (dim,):
                raise ValueError("inconsistent point dimension")
            for k, q in enumerate(nodes):
                if np.linalg.norm(q - p) <= merge_tol:
                    return k
            nodes.append(p)
            return len(nodes) - 1

        if base_points is not None:
            for p in base_points:
                node_id(p)

        merged: dict[tuple[int, int], np.ndarray] = {}
        for p, q, th in segments:
            th = np.asarray(th)
            if th.shape != (coeff_dim,):
                raise ValueError("inconsistent multiplicity dimension")
            if not np.all(th == np.round(th)):
                raise ValueError("multiplicities must be integer vectors")
            th = np.round(th).astype(np.int64)
            i, j = node_id(p), node_id(q)
            if i == j:
                continue  # zero-length: carries no mass or boundary
            if tuple(nodes[j]) < tuple(nodes[i]):
                i, j, th = j, i, -th
            key = (i, j)
            merged[key] = merged.get(key, np.zeros(coeff_dim, dtype=np.int64)) + th

        keys = [k for k in sorted(merged) if merged[k].any()]
        used = sorted({i for k in keys for i in k})
        remap = {old: new for new, old in enumerate(used)}
        points = (
            np.array([nodes[i] for i in used], dtype=float)
            if used
            else np.zeros((0, dim))
        )
        tails = np.array([remap[i] for i, _ in keys], dtype=np.int64)
        heads = np.array([remap[j] for _, j in keys], dtype=np.int64)
        theta = (
            np.array([merged[k] for k in keys], dtype=np.int64)
            if keys
            else np.zeros((0, coeff_dim), dtype=np.int64)
        )
        return cls(points, tails, heads, theta)

    @classmethod
    def empty(cls, dim: int, coeff_dim: int) -> "PolyhedralCurrent":
        return cls(
            np.zeros((0, dim)),
            np.zeros(0, dtype=np.int64),
            np.zeros(0, dtype=np.int64),
            np.zeros((0, coeff_dim), dtype=np.int64),
        )

    # -- operations ---------------------------------------------------------

    def boundary(self) -> BoundaryMeasure:
        """Net weight per node: head gains the multiplicity, tail loses it."""
        weights = np.zeros((len(self.points), self.coeff_dim), dtype=np.int64)
        np.add.at(weights, self.heads, self.theta)
        np.subtract.at(weights, self.tails, self.theta)
        keep = weights.any(axis=1)
        return BoundaryMeasure(self.points[keep].copy(), weights[keep])

    def mass(self, norm: AlphaNorm) -> float:
        """sum over segments of psi(theta) times segment length."""
        if self.n_segments == 0:
            return 0.0
        psi = norm.psi(self.theta.astype(float))
        return float(np.dot(np.atleast_1d(psi), self.lengths()))

    def component(self, i: int) -> "PolyhedralCurrent":
        """Scalar-coefficient current of source ``i`` (1-based index)."""
        if not 1 <= i <= self.coeff_dim:
            raise IndexError(f"component index {i} out of range 1..{self.coeff_dim}")
        col = self.theta[:, i - 1 : i]
        keep = col[:, 0] != 0
        return PolyhedralCurrent.from_segments(
            [
                (self.points[t], self.points[h], th)
                for t, h, th in zip(self.tails[keep], self.heads[keep], col[keep])
            ],
            dim=self.dim,
            coeff_dim=1,
        )

    def is_acyclic(self) -> bool:
        """True when the undirected support graph contains no cycle."""
        parent = list(range(len(self.points)))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for t, h in zip(self.tails, self.heads):
            rt, rh = find(int(t)), find(int(h))
            if rt == rh:
                return False
            parent[rt] = rh
        return True

    def branch_angles(self) -> list[tuple[int, list[float]]]:
        """Pairwise angles (degrees) between edge directions at nodes of degree >= 3."""
        incident: dict[int, list[np.ndarray]] = {}
        tangents = self.tangents()
        for s, (t, h) in enumerate(zip(self.tails, self.heads)):
            incident.setdefault(int(t), []).append(tangents[s])
            incident.setdefault(int(h), []).append(-tangents[s])
        report = []
        for node in sorted(incident):
            dirs = incident[node]
            if len(dirs) < 3:
                continue
            angles = []
            for a in range(len(dirs)):
                for b in range(a + 1, len(dirs)):
                    c = float(np.clip(np.dot(dirs[a], dirs[b]), -1.0, 1.0))
                    angles.append(float(np.degrees(np.arccos(c))))
            report.append((node, angles))
        return report


# -- network file format ----------------------------------------------------


def network_to_dict(current: PolyhedralCurrent, alpha: float) -> dict:
    return {
        "dim": current.dim,
        "coeff_dim": current.coeff_dim,
        "alpha": alpha,
        "points": current.points.tolist(),
        "segments": [
            {"tail": int(t), "head": int(h), "theta": [int(x) for x in th]}
            for t, h, th in zip(current.tails, current.heads, current.theta)
        ],
    }


def network_from_dict(data: dict) -> tuple[PolyhedralCurrent, float]:
    dim = int(data["dim"])
    coeff_dim = int(data["coeff_dim"])
    alpha = float(data["alpha"])
    points = np.asarray(data["points"], dtype=float).reshape(-1, dim)
    segs = [
        (points[int(s["tail"])], points[int(s["head"])], np.asarray(s["theta"]))
        for s in data["segments"]
    ]
    current = PolyhedralCurrent.from_segments(segs, dim=dim, coeff_dim=coeff_dim)
    return current, alpha


def save_network(current: PolyhedralCurrent, alpha: float, path) -> None:
    Path(path).write_text(json.dumps(network_to_dict(current, alpha), indent=1))


def load_network(path) -> tuple[PolyhedralCurrent, float]:
    return network_from_dict(json.loads(Path(path).read_text()))

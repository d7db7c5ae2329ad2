"""Single-sink branched transport solver.

An instance is a set of sources P_1..P_k and a sink, each source shipping
one unit of mass to the sink at cost psi_alpha(theta) per unit length.
Minimizers are supported on trees, so the solver enumerates full binary
flow topologies (leaves = sources, root = sink, every internal node of
degree three), optimizes the branch point positions of each topology for
the convex cost sum_edges psi(e_I) |edge|, and keeps the best.  Degenerate
topologies arise by branch points collapsing onto neighbors, so full
binary trees suffice.

Positions are optimized by a smoothed Weiszfeld fixed point iteration:
each branch point moves to the weighted barycenter with weights w_j / d_j,
where d_j is the smoothed distance sqrt(|x - p_j|^2 + eps^2) and eps
decreases to 1e-12.  A final exact collapse pass snaps branch points onto
neighbors whenever that does not increase the cost, which resolves the
Weiszfeld singularity at terminals exactly.

``oracle_solve`` is an independent reference for small instances: per
topology it runs a coordinate grid search over a lattice followed by
Nelder-Mead polish from the best cell and from random starts.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.optimize import minimize

from .currents import PolyhedralCurrent
from .norms import AlphaNorm

TOPOLOGY_CAP = 8  # (2k-3)!! topologies; 8 sources -> 135135
_TIE_REL = 1e-9  # costs closer than this are ties, won by enumeration order
_ORACLE_EVAL_CAP = 10**8

Shape = int | tuple  # a leaf label, or a pair of sub-shapes


@dataclass(frozen=True)
class Instance:
    """Sources shipping unit mass to a single sink under exponent alpha."""

    sources: np.ndarray  # (k, d)
    sink: np.ndarray  # (d,)
    alpha: float

    def __post_init__(self):
        object.__setattr__(self, "sources", np.asarray(self.sources, dtype=float))
        object.__setattr__(self, "sink", np.asarray(self.sink, dtype=float))
        if self.sources.ndim != 2 or self.sink.ndim != 1:
            raise ValueError("sources must be (k, d), sink must be (d,)")
        if self.sources.shape[1] != len(self.sink):
            raise ValueError("sources and sink dimension mismatch")
        if self.dim < 2:
            raise ValueError("ambient dimension must be at least 2")
        pts = np.vstack([self.sources, self.sink])
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                if np.array_equal(pts[i], pts[j]):
                    raise ValueError("instance points must be distinct")

    @property
    def n_sources(self) -> int:
        return len(self.sources)

    @property
    def dim(self) -> int:
        return self.sources.shape[1]

    @property
    def norm(self) -> AlphaNorm:
        return AlphaNorm(self.alpha, self.n_sources)


@dataclass(frozen=True)
class FlowTopology:
    """Unordered full binary flow tree over 1-based source labels."""

    n_sources: int
    shape: Shape

    @property
    def key(self) -> str:
        def fmt(s: Shape) -> str:
            if isinstance(s, int):
                return str(s)
            return f"({fmt(s[0])},{fmt(s[1])})"

        return fmt(self.shape)

    @property
    def n_branch(self) -> int:
        return self.n_sources - 1

    def edges(self) -> list[tuple[tuple[str, int], tuple[str, int], tuple[int, ...]]]:
        """Edges (child ref, parent ref, sorted leaf labels below the edge).

        Node references are ("source", i) with 0-based i, ("branch", b), or
        ("sink", 0); every edge is oriented child to parent (toward the sink).
        """
        return _layout(self.shape)


def _min_leaf(s: Shape) -> int:
    return s if isinstance(s, int) else min(_min_leaf(s[0]), _min_leaf(s[1]))


def _canon(a: Shape, b: Shape) -> Shape:
    return (a, b) if _min_leaf(a) <= _min_leaf(b) else (b, a)


def _leaves(s: Shape) -> tuple[int, ...]:
    if isinstance(s, int):
        return (s,)
    return tuple(sorted(_leaves(s[0]) + _leaves(s[1])))


@lru_cache(maxsize=4096)
def _layout(shape: Shape):
    edges = []
    counter = [0]

    def walk(s: Shape, parent) -> None:
        if isinstance(s, int):
            edges.append((("source", s - 1), parent, (s,)))
            return
        b = counter[0]
        counter[0] += 1
        me = ("branch", b)
        edges.append((me, parent, _leaves(s)))
        walk(s[0], me)
        walk(s[1], me)

    walk(shape, ("sink", 0))
    return edges


def _insertions(shape: Shape, leaf: int):
    """All shapes obtained by attaching ``leaf`` on one edge (root edge included)."""
    yield _canon(shape, leaf)
    if isinstance(shape, tuple):
        a, b = shape
        for na in _insertions(a, leaf):
            yield _canon(na, b)
        for nb in _insertions(b, leaf):
            yield _canon(a, nb)


def enumerate_topologies(n_sources: int) -> list[FlowTopology]:
    """All (2k-3)!! full binary flow trees on k labeled sources."""
    if n_sources < 1:
        raise ValueError("need at least one source")
    if n_sources > TOPOLOGY_CAP:
        raise ValueError(
            f"exact enumeration capped at {TOPOLOGY_CAP} sources "
            f"((2k-3)!! trees); use heuristic mode for larger instances"
        )
    shapes: list[Shape] = [1]
    for leaf in range(2, n_sources + 1):
        shapes = [s2 for s in shapes for s2 in _insertions(s, leaf)]
    return [FlowTopology(n_sources, s) for s in shapes]


def _random_topology(n_sources: int, rng: np.random.Generator) -> FlowTopology:
    shape: Shape = 1
    for leaf in range(2, n_sources + 1):
        options = list(_insertions(shape, leaf))
        shape = options[int(rng.integers(len(options)))]
    return FlowTopology(n_sources, shape)


@dataclass(frozen=True)
class SolveOptions:
    max_iterations: int = 2000
    position_tol: float = 1e-6  # first-order residual at every free branch point
    restarts: int = 2
    seed: int = 0
    collapse_tol: float = 1e-7
    parallel: bool = False

    def __post_init__(self):
        if self.position_tol <= 0 or self.collapse_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iterations < 1 or self.restarts < 1:
            raise ValueError("max_iterations and restarts must be positive")


@dataclass(frozen=True)
class TopologyResult:
    topology: FlowTopology
    current: PolyhedralCurrent
    cost: float
    positions: np.ndarray  # (n_branch, d) before collapse merging
    iterations: int
    converged: bool


@dataclass(frozen=True)
class SolveResult:
    current: PolyhedralCurrent
    cost: float
    topology: FlowTopology
    iterations: int
    converged: bool
    exhaustive: bool  # False in heuristic mode: optimum not certified


def _edge_data(topology: FlowTopology, inst: Instance):
    """Per edge: (child ref, parent ref, weight psi(e_I), multiplicity)."""
    norm = inst.norm
    out = []
    for child, parent, leaves in topology.edges():
        mult = np.zeros(inst.n_sources, dtype=np.int64)
        mult[[l - 1 for l in leaves]] = 1
        out.append((child, parent, float(norm.psi(mult.astype(float))), mult))
    return out


def _positions_of(ref, inst: Instance, branch: np.ndarray) -> np.ndarray:
    kind, idx = ref
    if kind == "source":
        return inst.sources[idx]
    if kind == "sink":
        return inst.sink
    return branch[idx]


def _tree_cost(edge_data, inst: Instance, branch: np.ndarray) -> float:
    total = 0.0
    for child, parent, w, _ in edge_data:
        a = _positions_of(child, inst, branch)
        b = _positions_of(parent, inst, branch)
        total += w * float(np.linalg.norm(a - b))
    return total


def _neighbor_table(edge_data, n_branch: int):
    """For each branch node, the (ref, weight) pairs of its incident edges."""
    table: list[list[tuple[tuple[str, int], float]]] = [[] for _ in range(n_branch)]
    for child, parent, w, _ in edge_data:
        if child[0] == "branch":
            table[child[1]].append((parent, w))
        if parent[0] == "branch":
            table[parent[1]].append((child, w))
    return table


def _initial_positions(
    topology: FlowTopology, inst: Instance, rng: np.random.Generator | None
) -> np.ndarray:
    """Each branch point starts at the centroid of its subtree leaves and the sink."""
    pos = np.zeros((topology.n_branch, inst.dim))
    for child, _parent, leaves in topology.edges():
        if child[0] == "branch":
            pts = np.vstack([inst.sources[[l - 1 for l in leaves]], inst.sink])
            pos[child[1]] = pts.mean(axis=0)
    if rng is not None:
        scale = 0.25 * max(np.ptp(np.vstack([inst.sources, inst.sink]), axis=0).max(), 1e-6)
        pos = pos + rng.normal(0.0, scale, size=pos.shape)
    return pos


def _weiszfeld(
    edge_data, neighbor_table, inst: Instance, pos: np.ndarray, opts: SolveOptions
) -> tuple[np.ndarray, int]:
    """Cyclic smoothed Weiszfeld sweeps; returns final positions and sweep count."""
    n_branch = len(pos)
    if n_branch == 0:
        return pos, 0
    eps = 1e-3
    sweeps = 0
    while sweeps < opts.max_iterations:
        max_move = 0.0
        for b in range(n_branch):
            num = np.zeros(inst.dim)
            den = 0.0
            for ref, w in neighbor_table[b]:
                p = _positions_of(ref, inst, pos)
                d = np.sqrt(np.sum((pos[b] - p) ** 2) + eps * eps)
                num += w * p / d
                den += w / d
            new = num / den
            max_move = max(max_move, float(np.linalg.norm(new - pos[b])))
            pos[b] = new
        sweeps += 1
        if max_move < max(1e-3 * eps, 1e-15):
            if eps <= 1e-12:
                break
            eps = max(eps * 1e-3, 1e-12)
    return pos, sweeps


def _collapse_pass(edge_data, neighbor_table, inst: Instance, pos: np.ndarray) -> np.ndarray:
    """Snap branch points onto neighbors when that does not increase the cost."""
    if len(pos) == 0:
        return pos
    cost = _tree_cost(edge_data, inst, pos)
    budget = max(1.0, cost)
    for _ in range(len(pos) + 1):
        snapped = False
        for b in range(len(pos)):
            for ref, _w in neighbor_table[b]:
                target = _positions_of(ref, inst, pos).copy()
                if np.array_equal(target, pos[b]):
                    continue
                saved = pos[b].copy()
                pos[b] = target
                new_cost = _tree_cost(edge_data, inst, pos)
                if new_cost <= cost + 1e-13 * budget:
                    cost = min(cost, new_cost)
                    snapped = True
                else:
                    pos[b] = saved
        if not snapped:
            break
    return pos


def _first_order_converged(
    neighbor_table, inst: Instance, pos: np.ndarray, opts: SolveOptions
) -> bool:
    """Residual check, with the collapse exemption at coincident points."""
    for b in range(len(pos)):
        residual = np.zeros(inst.dim)
        exempt = False
        for ref, w in neighbor_table[b]:
            p = _positions_of(ref, inst, pos)
            d = float(np.linalg.norm(p - pos[b]))
            if d <= opts.collapse_tol:
                exempt = True
                break
            residual += w * (p - pos[b]) / d
        if not exempt and np.linalg.norm(residual) > opts.position_tol:
            return False
    return True


def _build_current(edge_data, inst: Instance, pos: np.ndarray, merge_tol: float) -> PolyhedralCurrent:
    segments = [
        (_positions_of(child, inst, pos), _positions_of(parent, inst, pos), mult)
        for child, parent, _w, mult in edge_data
    ]
    base = list(inst.sources) + [inst.sink]
    return PolyhedralCurrent.from_segments(
        segments,
        dim=inst.dim,
        coeff_dim=inst.n_sources,
        merge_tol=merge_tol,
        base_points=base,
    )


def optimize_positions(
    topology: FlowTopology, inst: Instance, opts: SolveOptions | None = None, *, seed=None
) -> TopologyResult:
    """Optimize branch point positions of one topology; best of ``restarts`` runs."""
    opts = opts or SolveOptions()
    if topology.n_sources != inst.n_sources:
        raise ValueError("topology does not match the instance source count")
    seq = np.random.SeedSequence(opts.seed if seed is None else seed)
    edge_data = _edge_data(topology, inst)
    table = _neighbor_table(edge_data, topology.n_branch)

    best: TopologyResult | None = None
    rngs = [None] + [np.random.default_rng(s) for s in seq.spawn(max(opts.restarts - 1, 0))]
    for rng in rngs:
        pos = _initial_positions(topology, inst, rng)
        pos, sweeps = _weiszfeld(edge_data, table, inst, pos, opts)
        pos = _collapse_pass(edge_data, table, inst, pos)
        converged = _first_order_converged(table, inst, pos, opts)
        current = _build_current(edge_data, inst, pos, opts.collapse_tol)
        cost = current.mass(inst.norm)
        cand = TopologyResult(topology, current, cost, pos.copy(), sweeps, converged)
        if best is None or cand.cost < best.cost - _TIE_REL * max(1.0, best.cost):
            best = cand
    assert best is not None
    return best


def _pick_best(results: list[TopologyResult]) -> TopologyResult:
    """Deterministic reduction: min cost, ties to the earliest enumeration index."""
    best = results[0]
    for cand in results[1:]:
        if cand.cost < best.cost - _TIE_REL * max(1.0, abs(best.cost)):
            best = cand
    return best


def solve(
    inst: Instance,
    opts: SolveOptions | None = None,
    *,
    mode: str = "exact",
    heuristic_samples: int = 64,
) -> SolveResult:
    """Minimize mass over flow trees with the boundary of the instance.

    ``mode="exact"`` enumerates every topology (source count capped);
    ``mode="heuristic"`` samples random topologies and is not certified,
    reported by ``exhaustive=False`` in the result.
    """
    opts = opts or SolveOptions()
    if mode not in ("exact", "heuristic"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "exact":
        topologies = enumerate_topologies(inst.n_sources)
        exhaustive = True
    else:
        rng = np.random.default_rng(opts.seed)
        seen: dict[str, FlowTopology] = {}
        for _ in range(heuristic_samples):
            t = _random_topology(inst.n_sources, rng)
            seen.setdefault(t.key, t)
        topologies = list(seen.values())
        exhaustive = False

    seeds = [s.generate_state(1)[0] for s in np.random.SeedSequence(opts.seed).spawn(len(topologies))]

    def run(pair):
        topology, sd = pair
        return optimize_positions(topology, inst, opts, seed=int(sd))

    jobs = list(zip(topologies, seeds))
    if opts.parallel and len(jobs) > 1:
        with ThreadPoolExecutor() as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(j) for j in jobs]

    best = _pick_best(results)
    return SolveResult(
        current=best.current,
        cost=best.cost,
        topology=best.topology,
        iterations=best.iterations,
        converged=best.converged,
        exhaustive=exhaustive,
    )


# -- independent oracle -------------------------------------------------------


@dataclass(frozen=True)
class OracleResult:
    cost: float
    current: PolyhedralCurrent
    topology: FlowTopology


def oracle_solve(
    inst: Instance,
    grid_step: float = 0.05,
    restarts: int = 8,
    seed: int = 0,
) -> OracleResult:
    """Reference solve: lattice coordinate search plus Nelder-Mead polish.

    Exhaustive over topologies; restricted to small instances (at most 4
    sources, ambient dimension at most 3) and guarded against lattices that
    would require more than 1e8 evaluations.
    """
    if inst.n_sources > 4 or inst.dim > 3:
        raise ValueError("oracle grid mode supports n_sources <= 4 and dim <= 3")
    if grid_step <= 0:
        raise ValueError("grid_step must be positive")
    terminals = np.vstack([inst.sources, inst.sink])
    lo = terminals.min(axis=0)
    hi = terminals.max(axis=0)
    span = np.maximum(hi - lo, grid_step)
    lo = lo - 0.2 * span
    hi = hi + 0.2 * span
    axes = [np.arange(lo[j], hi[j] + grid_step / 2, grid_step) for j in range(inst.dim)]
    lattice = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, inst.dim)

    n_branch = inst.n_sources - 1
    if n_branch > 0 and len(lattice) * n_branch * 30 > _ORACLE_EVAL_CAP:
        raise ValueError("lattice too fine: more than 1e8 evaluations, refuse")

    rng = np.random.default_rng(seed)
    best_cost = np.inf
    best_current = None
    best_topology = None
    for topology in enumerate_topologies(inst.n_sources):
        edge_data = _edge_data(topology, inst)
        table = _neighbor_table(edge_data, n_branch)
        pos = np.tile(terminals.mean(axis=0), (n_branch, 1))
        for _sweep in range(30):
            moved = False
            for b in range(n_branch):
                local = np.zeros(len(lattice))
                for ref, w in table[b]:
                    p = _positions_of(ref, inst, pos)
                    local += w * np.linalg.norm(lattice - p, axis=1)
                pick = lattice[int(np.argmin(local))]
                if not np.array_equal(pick, pos[b]):
                    pos[b] = pick
                    moved = True
            if not moved:
                break

        def objective(x):
            return _tree_cost(edge_data, inst, x.reshape(n_branch, inst.dim))

        candidates = [pos]
        for _ in range(restarts):
            candidates.append(rng.uniform(lo, hi, size=(n_branch, inst.dim)))
        topo_cost, topo_pos = np.inf, pos
        if n_branch == 0:
            topo_cost = _tree_cost(edge_data, inst, pos)
        else:
            for start in candidates:
                res = minimize(
                    objective,
                    start.ravel(),
                    method="Nelder-Mead",
                    options={
                        "xatol": 1e-9,
                        "fatol": 1e-12,
                        "maxiter": 4000 * n_branch * inst.dim,
                        "maxfev": 4000 * n_branch * inst.dim,
                    },
                )
                if res.fun < topo_cost:
                    topo_cost = float(res.fun)
                    topo_pos = res.x.reshape(n_branch, inst.dim)
        current = _build_current(edge_data, inst, topo_pos, merge_tol=1e-7)
        cost = current.mass(inst.norm)
        if cost < best_cost - _TIE_REL * max(1.0, abs(best_cost) if np.isfinite(best_cost) else 1.0):
            best_cost, best_current, best_topology = cost, current, topology
    assert best_current is not None and best_topology is not None
    return OracleResult(best_cost, best_current, best_topology)


# -- instance file format -----------------------------------------------------


def instance_to_dict(inst: Instance) -> dict:
    return {
        "dim": inst.dim,
        "alpha": inst.alpha,
        "sources": inst.sources.tolist(),
        "sink": inst.sink.tolist(),
    }


def instance_from_dict(data: dict) -> Instance:
    return Instance(
        np.asarray(data["sources"], dtype=float),
        np.asarray(data["sink"], dtype=float),
        float(data["alpha"]),
    )


def save_instance(inst: Instance, path) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(inst), indent=1))


def load_instance(path) -> Instance:
    return instance_from_dict(json.loads(Path(path).read_text()))

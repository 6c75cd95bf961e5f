"""Core graph and nested-partition types plus block accessors.

Vertices are dense integer labels 1..n.  Adjacency matrices are stored as
dense numpy arrays with row/column v-1 holding vertex v.  All objects are
immutable after construction and safe to share across workers.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import networkx as nx
import numpy as np
from networkx.algorithms.isomorphism import GraphMatcher, categorical_node_match


class UnknownBlockError(KeyError):
    """A (level, index) pair does not resolve inside the hierarchy."""


class ExactModeCapError(ValueError):
    """Exact automorphism search requested on a graph above the size cap."""


@dataclass(frozen=True)
class Graph:
    """Undirected weighted graph on vertices 1..n.

    The adjacency must be symmetric, hollow and entrywise non-negative;
    simple graphs use weight 1.0.
    """

    adjacency: np.ndarray
    labels: tuple = None  # optional external string ids, position v-1 -> id

    def __post_init__(self):
        a = np.asarray(self.adjacency, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("adjacency must be square")
        if not np.allclose(a, a.T):
            raise ValueError("adjacency must be symmetric")
        if np.any(np.diag(a) != 0):
            raise ValueError("adjacency must be hollow (zero diagonal)")
        if np.any(a < 0):
            raise ValueError("edge weights must be non-negative")
        a = a.copy()
        a.setflags(write=False)
        object.__setattr__(self, "adjacency", a)
        if self.labels is not None and len(self.labels) != a.shape[0]:
            raise ValueError("labels length must equal vertex count")

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def vertices(self) -> range:
        return range(1, self.n + 1)

    def induced(self, vertex_set) -> "Graph":
        """Induced subgraph on the given vertex labels (sorted order)."""
        idx = np.array(sorted(vertex_set), dtype=int) - 1
        if len(idx) and (idx.min() < 0 or idx.max() >= self.n):
            raise ValueError("vertex labels out of range")
        return Graph(self.adjacency[np.ix_(idx, idx)])

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(self.vertices)
        rows, cols = np.nonzero(np.triu(self.adjacency))
        for u, v in zip(rows, cols):
            g.add_edge(int(u) + 1, int(v) + 1, weight=float(self.adjacency[u, v]))
        return g

    @staticmethod
    def from_edges(n: int, edges, labels=None) -> "Graph":
        """Build from an iterable of (u, v) or (u, v, weight), 1-based."""
        a = np.zeros((n, n))
        for e in edges:
            u, v = e[0], e[1]
            w = float(e[2]) if len(e) > 2 else 1.0
            a[u - 1, v - 1] = w
            a[v - 1, u - 1] = w
        return Graph(a, labels=tuple(labels) if labels is not None else None)


@dataclass(frozen=True)
class BlockRef:
    """Index of one block: ``level`` in [k], ``index`` in [n_level]."""

    level: int
    index: int


@dataclass(frozen=True)
class HierarchicalFunction:
    """A k-level nested partition of [n].

    ``assignment[v-1, i-1]`` is the (1-based) block of vertex v at level i.
    """

    assignment: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.assignment, dtype=int)
        if a.ndim != 2:
            raise ValueError("assignment must be an (n, k) array")
        a = a.copy()
        a.setflags(write=False)
        object.__setattr__(self, "assignment", a)

    @property
    def n(self) -> int:
        return self.assignment.shape[0]

    @property
    def k(self) -> int:
        return self.assignment.shape[1]

    @property
    def signature(self) -> tuple:
        return tuple(int(self.assignment[:, i].max()) for i in range(self.k))

    def __call__(self, v: int, level: int) -> int:
        return int(self.assignment[v - 1, level - 1])

    def level_labels(self, level: int) -> np.ndarray:
        """1-based block labels of all vertices at the given level."""
        return self.assignment[:, level - 1].copy()

    @staticmethod
    def single_level(labels) -> "HierarchicalFunction":
        labels = np.asarray(labels, dtype=int).reshape(-1, 1)
        return HierarchicalFunction(labels)


@dataclass(frozen=True)
class InterestSet:
    """Distinct block references S paired with their resolved vertex sets T."""

    refs: tuple
    resolved: tuple = field(default=None)

    def __post_init__(self):
        refs = tuple(self.refs)
        if len(set(refs)) != len(refs):
            raise ValueError("interest refs must be distinct")
        object.__setattr__(self, "refs", refs)

    @staticmethod
    def from_refs(h: HierarchicalFunction, refs) -> "InterestSet":
        refs = tuple(BlockRef(int(r[0]), int(r[1])) if not isinstance(r, BlockRef) else r
                     for r in refs)
        resolved = tuple(block(h, r) for r in refs)
        return InterestSet(refs=refs, resolved=resolved)

    @property
    def vertex_union(self) -> frozenset:
        out = frozenset()
        for s in self.resolved:
            out |= s
        return out


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    signature: tuple
    problems: tuple

    def __bool__(self):
        return self.ok


def validate_hierarchy(h: HierarchicalFunction, n: int) -> ValidationReport:
    """Check the nested-partition conditions; violations are report entries."""
    problems = []
    a = h.assignment
    if a.shape[0] != n:
        problems.append(f"assignment has {a.shape[0]} rows, expected n={n}")
        return ValidationReport(False, (), tuple(problems))
    sig = []
    for i in range(h.k):
        col = a[:, i]
        ni = int(col.max()) if len(col) else 0
        sig.append(ni)
        if col.min() < 1:
            problems.append(f"level {i + 1}: block indices must start at 1")
            continue
        present = set(int(x) for x in np.unique(col))
        missing = set(range(1, ni + 1)) - present
        if missing:
            problems.append(f"level {i + 1}: empty block(s) {sorted(missing)}")
    for i in range(1, len(sig)):
        if sig[i] < sig[i - 1]:
            problems.append(
                f"signature not non-decreasing at level {i + 1}: "
                f"{sig[i]} < {sig[i - 1]}")
    if sig and sig[-1] > n:
        problems.append(f"signature exceeds n at the deepest level")
    # Nestedness: a level-j block must sit inside a single level-(j-1) block.
    if not problems:
        for j in range(1, h.k):
            for blk in np.unique(a[:, j]):
                parents = np.unique(a[a[:, j] == blk, j - 1])
                if len(parents) > 1:
                    problems.append(
                        f"nestedness violation: level-{j + 1} block {int(blk)} "
                        f"spans level-{j} blocks {sorted(int(p) for p in parents)}")
    return ValidationReport(len(problems) == 0, tuple(sig), tuple(problems))


def block(h: HierarchicalFunction, ref: BlockRef) -> frozenset:
    """Vertex set of the block: {v : H(v, level) = index}."""
    if not (1 <= ref.level <= h.k):
        raise UnknownBlockError(f"level {ref.level} not in [1, {h.k}]")
    members = np.nonzero(h.assignment[:, ref.level - 1] == ref.index)[0] + 1
    if len(members) == 0:
        raise UnknownBlockError(f"block {ref.index} empty at level {ref.level}")
    return frozenset(int(v) for v in members)


def parent_merge(h: HierarchicalFunction, ref: BlockRef) -> frozenset:
    """Union of the level-i blocks sharing the level-(i-1) parent of the ref.

    At level 1 there is no parent and the merge is the block itself.
    """
    b = block(h, ref)
    if ref.level == 1:
        return b
    v0 = next(iter(b))
    parent = h(v0, ref.level - 1)
    members = np.nonzero(h.assignment[:, ref.level - 2] == parent)[0] + 1
    return frozenset(int(v) for v in members)


def sibling_indices(h: HierarchicalFunction, ref: BlockRef) -> list:
    """Level-i block indices under the same level-(i-1) parent as ref.

    Level-1 blocks are all treated as siblings (implicit common root).
    """
    if ref.level == 1:
        block(h, ref)  # existence check
        return sorted(int(x) for x in np.unique(h.assignment[:, 0]))
    merge = parent_merge(h, ref)
    idx = sorted({h(v, ref.level) for v in merge})
    return idx


def _has_constrained_automorphism(g: Graph, src: frozenset, dst: frozenset) -> bool:
    """True iff some automorphism of g maps vertex set src onto dst."""
    if len(src) != len(dst):
        return False
    gx = g.to_networkx()
    g1 = gx.copy()
    g2 = gx.copy()
    for v in g1.nodes:
        g1.nodes[v]["part"] = 1 if v in src else 0
        g2.nodes[v]["part"] = 1 if v in dst else 0
    nm = categorical_node_match("part", 0)
    return GraphMatcher(g1, g2, node_match=nm).is_isomorphic()


def iso_equivalence_class(g: Graph, h: HierarchicalFunction, ref: BlockRef,
                          mode: str = "exact", exact_n_cap: int = 10) -> frozenset:
    """Sibling indices indistinguishable from ref under graph symmetry.

    Exact mode searches for whole-graph automorphisms carrying each sibling
    block onto the reference block; it refuses graphs larger than
    ``exact_n_cap``.  Heuristic mode only compares induced subgraphs for
    isomorphism, which over-merges when the surrounding structure differs.
    """
    target = block(h, ref)
    sibs = sibling_indices(h, ref)
    if mode == "exact":
        if g.n > exact_n_cap:
            raise ExactModeCapError(
                f"exact mode capped at n={exact_n_cap}, got n={g.n}")
        out = [ell for ell in sibs
               if _has_constrained_automorphism(
                   g, block(h, BlockRef(ref.level, ell)), target)]
    elif mode == "heuristic":
        gt = g.induced(target).to_networkx()
        out = []
        for ell in sibs:
            cand = g.induced(block(h, BlockRef(ref.level, ell)))
            if nx.is_isomorphic(cand.to_networkx(), gt):
                out.append(ell)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return frozenset(out)


def param_count(model) -> int:
    """Number of free parameters of an SBM or (recursive) HSBM."""
    # Imported here to avoid a models <-> graph import cycle.
    from .models import HsbmParams, SbmParams

    if isinstance(model, SbmParams):
        k = model.K
        return k * (k - 1) // 2 + k + (k - 1)
    if isinstance(model, HsbmParams):
        k1 = model.K1
        total = k1 * (k1 - 1) // 2 + (k1 - 1)
        for child in model.children:
            total += param_count(child)
        return total
    raise TypeError(f"unsupported model type {type(model).__name__}")


def write_hierarchy(path, h: HierarchicalFunction, ids=None) -> None:
    """One row per vertex: vertex_id, level_1_block, ..., level_k_block."""
    with open(path, "w") as f:
        header = ["vertex_id"] + [f"level_{i}_block" for i in range(1, h.k + 1)]
        f.write(",".join(header) + "\n")
        for v in range(1, h.n + 1):
            vid = ids[v - 1] if ids is not None else v
            row = [str(vid)] + [str(h(v, i)) for i in range(1, h.k + 1)]
            f.write(",".join(row) + "\n")


def read_hierarchy(path, id_map=None) -> HierarchicalFunction:
    """Inverse of write_hierarchy.  ``id_map`` maps external ids to 1..n."""
    rows = {}
    k = None
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            parts = [p.strip() for p in line.split(",")]
            if k is None and len(parts) > 1 and not parts[1].lstrip("-").isdigit():
                continue  # header row
            if k is None:
                k = len(parts) - 1
            elif len(parts) - 1 != k:
                raise ValueError(f"line {lineno}: expected {k} levels")
            vid = id_map[parts[0]] if id_map is not None else int(parts[0])
            rows[vid] = [int(p) for p in parts[1:]]
    n = len(rows)
    if set(rows) != set(range(1, n + 1)):
        raise ValueError("vertex ids must map onto 1..n")
    a = np.array([rows[v] for v in range(1, n + 1)], dtype=int)
    return HierarchicalFunction(a)


def enumerate_automorphism_images(g: Graph, src: frozenset):
    """Brute-force oracle: all images of src under every automorphism of g.

    Enumerates all n! vertex permutations; intended for tests on tiny graphs.
    """
    a = g.adjacency
    n = g.n
    images = set()
    src_idx = sorted(v - 1 for v in src)
    for perm in itertools.permutations(range(n)):
        p = np.array(perm)
        if np.array_equal(a[np.ix_(p, p)], a):
            # sigma(i) = p[i] preserves adjacency; the group is closed under
            # inverses so collecting forward images covers all of them
            images.add(frozenset(int(p[i]) + 1 for i in src_idx))
    return images

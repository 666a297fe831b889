"""Graph reductions tying subdeterminants to odd cycle packing.

For a node-edge incidence matrix the maximum |det| over bases equals
2**k where k is the maximum number of vertex-disjoint odd cycles: a
basis of full rank picks, per connected part of its edge set, a
spanning tree plus one extra edge closing an odd cycle, contributing a
factor 2.  The pipeline here builds the hard direction: double-subdivide
a graph (stable sets shift by exactly |E|), take the line graph plus two
extra vertices per subdivided path so triangles correspond one-to-one
to vertices, and read packings off the incidence matrix.

Brute-force solvers (stable set, triangle packing, odd cycle packing)
are exact within their guards and serve as ground truth.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import (
    DomainError,
    InstanceTooLargeError,
    InternalConsistencyError,
    CorrespondenceViolationError,
    RankError,
)
from .numerics import InstanceMatrix, log_abs_det
from . import oracle

OCP_VERTEX_GUARD = 32
TRIANGLE_VERTEX_GUARD = 64
STABLE_VERTEX_GUARD = 40
EXACT_MATCHING_GUARD = 20
CYCLE_ENUM_CAP = 10**6
LN2 = math.log(2.0)


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph; edges normalized to sorted (u, v) tuples.

    labels optionally carries per-vertex provenance through the
    reduction pipeline: ("orig", v), ("p1", u, v) / ("p2", u, v) for
    subdivision vertices of the edge {u, v}, ("line", a, b) for the
    line-graph vertex of edge {a, b}, ("w1"/"w2", u, v) for the gadget
    vertices of a subdivided path.
    """

    vertex_count: int
    edges: tuple
    labels: tuple | None = None

    def __post_init__(self):
        n = self.vertex_count
        if n < 0:
            raise DomainError("vertex count must be nonnegative")
        norm = []
        seen = set()
        for u, v in self.edges:
            u, v = int(u), int(v)
            if u == v:
                raise DomainError(f"loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise DomainError(f"edge ({u},{v}) out of range")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise DomainError(f"parallel edge {key}")
            seen.add(key)
            norm.append(key)
        object.__setattr__(self, "edges", tuple(sorted(norm)))
        if self.labels is not None:
            if len(self.labels) != n:
                raise DomainError("labels must cover every vertex")
            object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def edge_count(self):
        return len(self.edges)

    def adjacency_masks(self):
        adj = [0] * self.vertex_count
        for u, v in self.edges:
            adj[u] |= 1 << v
            adj[v] |= 1 << u
        return adj

    def adjacency_sets(self):
        adj = [set() for _ in range(self.vertex_count)]
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def degrees(self):
        deg = [0] * self.vertex_count
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def triangles(self):
        """All triangles as sorted vertex triples."""
        adj = self.adjacency_masks()
        out = []
        for u, v in self.edges:
            common = adj[u] & adj[v]
            w = common >> (v + 1) << (v + 1)  # only w > v > u counted once
            while w:
                low = w & -w
                out.append((u, v, low.bit_length() - 1))
                w ^= low
        return out


@dataclass(frozen=True)
class PackingResult:
    value: int
    witness: tuple  # vertex-disjoint cycles, each a tuple in cyclic order


def _bits(mask):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


# ---------------------------------------------------------------------------
# subdivisions and the line-graph gadget


def double_subdivide(g: Graph) -> Graph:
    """Replace every edge {u, v} by a path u, p1, p2, v.

    The result has |V| + 2|E| vertices and 3|E| edges, is triangle-free
    for simple input, and shifts the maximum stable set by exactly |E|.
    """
    labels = [("orig", v) for v in range(g.vertex_count)]
    edges = []
    nxt = g.vertex_count
    for u, v in g.edges:
        p1, p2 = nxt, nxt + 1
        nxt += 2
        labels.append(("p1", u, v))
        labels.append(("p2", u, v))
        edges += [(u, p1), (p1, p2), (p2, v)]
    return Graph(nxt, tuple(edges), tuple(labels))


@dataclass(frozen=True)
class MatchingSubdivision:
    graph: Graph
    matching: tuple


def _maximum_matching_exact(g: Graph):
    adj = g.adjacency_masks()
    memo = {}

    def f(avail):
        if avail == 0:
            return 0, ()
        if avail in memo:
            return memo[avail]
        v = (avail & -avail).bit_length() - 1
        best, best_edges = f(avail & ~(1 << v))
        for w in _bits(adj[v] & avail):
            val, sub = f(avail & ~(1 << v) & ~(1 << w))
            if val + 1 > best:
                best = val + 1
                best_edges = ((v, w),) + sub
        memo[avail] = (best, best_edges)
        return memo[avail]

    size, edges = f((1 << g.vertex_count) - 1)
    return tuple(sorted((min(u, v), max(u, v)) for u, v in edges))


def _maximum_matching_greedy(g: Graph):
    """Greedy maximal matching improved by alternating-path augmentation.

    No blossom shrinking, so the result can be suboptimal; the achieved
    size is whatever this returns.  Only used past the exact-search
    guard.
    """
    adj = g.adjacency_sets()
    mate = [-1] * g.vertex_count
    for u, v in g.edges:
        if mate[u] < 0 and mate[v] < 0:
            mate[u], mate[v] = v, u

    def augment(root):
        parent = {root: -1}
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for v in sorted(adj[u]):
                if v in parent:
                    continue
                if mate[v] < 0:
                    # augmenting path found; flip it
                    while True:
                        prev = parent[u]
                        mate[u], mate[v] = v, u
                        if prev < 0:
                            return True
                        u, v = parent[prev], prev
                else:
                    parent[v] = u
                    parent[mate[v]] = v
                    queue.append(mate[v])
        return False

    improved = True
    while improved:
        improved = False
        for v in range(g.vertex_count):
            if mate[v] < 0 and augment(v):
                improved = True
    return tuple(
        sorted((u, mate[u]) for u in range(g.vertex_count) if 0 <= u < mate[u])
    )


def maximum_matching(g: Graph):
    if g.vertex_count <= EXACT_MATCHING_GUARD:
        return _maximum_matching_exact(g)
    return _maximum_matching_greedy(g)


def matching_subdivide(g: Graph) -> MatchingSubdivision:
    """Double-subdivide only the edges outside a maximum matching.

    Requires a 3-regular graph; every vertex then keeps at most one
    untouched edge, i.e. at least two incident subdivided paths.
    """
    if any(d != 3 for d in g.degrees()):
        raise DomainError("matching subdivision needs a 3-regular graph")
    matching = maximum_matching(g)
    matched = set(matching)
    labels = [("orig", v) for v in range(g.vertex_count)]
    edges = []
    nxt = g.vertex_count
    for u, v in g.edges:
        if (u, v) in matched:
            edges.append((u, v))
            continue
        p1, p2 = nxt, nxt + 1
        nxt += 2
        labels.append(("p1", u, v))
        labels.append(("p2", u, v))
        edges += [(u, p1), (p1, p2), (p2, v)]
    return MatchingSubdivision(Graph(nxt, tuple(edges), tuple(labels)), matching)


def gadget_graph(gp: Graph) -> Graph:
    """Line graph of a subdivided graph plus two gadget vertices per path.

    For a path u, p1, p2, v the gadget adds w1 adjacent to the line
    vertices {u,p1} and {p1,p2}, and w2 adjacent to {p1,p2} and {p2,v}.
    Each triangle of the result then matches exactly one vertex of the
    input: the star of a degree-3 vertex or one of the two path
    triangles, which share only the middle line vertex {p1,p2}.
    """
    if gp.labels is None or not any(lab[0] == "p1" for lab in gp.labels):
        raise DomainError("gadget construction needs subdivision labels")
    line_index = {e: i for i, e in enumerate(gp.edges)}
    labels = [("line",) + e for e in gp.edges]
    edges = set()
    incident = [[] for _ in range(gp.vertex_count)]
    for e in gp.edges:
        for v in e:
            incident[v].append(line_index[e])
    for around in incident:
        for i, a in enumerate(around):
            for b in around[i + 1 :]:
                edges.add((min(a, b), max(a, b)))

    paths = {}
    for idx, lab in enumerate(gp.labels):
        if lab[0] in ("p1", "p2"):
            paths.setdefault((lab[1], lab[2]), {})[lab[0]] = idx
    nxt = len(gp.edges)
    for (u, v), ps in sorted(paths.items()):
        p1, p2 = ps["p1"], ps["p2"]
        try:
            first = line_index[(min(u, p1), max(u, p1))]
            middle = line_index[(min(p1, p2), max(p1, p2))]
            last = line_index[(min(p2, v), max(p2, v))]
        except KeyError:
            raise DomainError(f"labels of path {u},{v} do not match the edges")
        w1, w2 = nxt, nxt + 1
        nxt += 2
        labels.append(("w1", u, v))
        labels.append(("w2", u, v))
        edges.add((first, w1))
        edges.add((middle, w1))
        edges.add((middle, w2))
        edges.add((last, w2))
    return Graph(nxt, tuple(sorted(edges)), tuple(labels))


# ---------------------------------------------------------------------------
# incidence matrices


def _bipartite_component(g: Graph):
    """Return the vertex set of a bipartite component, or None."""
    adj = g.adjacency_sets()
    color = [-1] * g.vertex_count
    for root in range(g.vertex_count):
        if color[root] >= 0:
            continue
        color[root] = 0
        comp = [root]
        queue = deque([root])
        odd = False
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if color[v] < 0:
                    color[v] = color[u] ^ 1
                    comp.append(v)
                    queue.append(v)
                elif color[v] == color[u]:
                    odd = True
        if not odd:
            return tuple(sorted(comp))
    return None


def incidence_matrix(g: Graph) -> InstanceMatrix:
    """|V| x |E| 0/1 node-edge incidence matrix, columns in edge order.

    Requires every connected component to contain an odd cycle; that is
    exactly when the matrix has full row rank.
    """
    bad = _bipartite_component(g)
    if bad is not None:
        raise RankError(
            f"component {bad} is bipartite; incidence matrix loses rank"
        )
    a = np.zeros((g.vertex_count, g.edge_count))
    for j, (u, v) in enumerate(g.edges):
        a[u, j] = 1.0
        a[v, j] = 1.0
    return InstanceMatrix(a)


# ---------------------------------------------------------------------------
# exact packing / stable set solvers


def chordless_odd_cycles(g: Graph, cap=CYCLE_ENUM_CAP):
    """All chordless odd cycles, each once, as vertex tuples in cycle order.

    Any odd-cycle packing can be retracted onto chordless odd cycles, so
    these are sufficient for exact packing.
    """
    adj = g.adjacency_masks()
    cycles = []

    def dfs(path, mask, mid_adj):
        last = path[-1]
        root = path[0]
        for w in _bits(adj[last] & ~mask):
            if w <= root or (mid_adj >> w) & 1:
                continue
            if (adj[root] >> w) & 1:
                if len(path) >= 2 and w > path[1]:
                    if (len(path) + 1) % 2 == 1:
                        cycles.append(tuple(path) + (w,))
                        if len(cycles) > cap:
                            raise InstanceTooLargeError(
                                f"more than {cap} odd cycles"
                            )
                # extending through a root neighbor would close a chord
                continue
            dfs(path + [w], mask | (1 << w), mid_adj | adj[last])

    for r in range(g.vertex_count):
        for v1 in _bits(adj[r]):
            if v1 > r:
                dfs([r, v1], (1 << r) | (1 << v1), 0)
    return cycles


def _max_disjoint_sets(masks):
    """Exact maximum set packing over bitmask sets (memoized B&B)."""
    if not masks:
        return 0, ()
    memo = {}
    order = sorted(range(len(masks)), key=lambda i: (masks[i].bit_count(), i))

    def f(avail, cands):
        cands = [i for i in cands if masks[i] & ~avail == 0]
        union = 0
        for i in cands:
            union |= masks[i]
        avail &= union
        if not cands:
            return 0, ()
        if avail in memo:
            return memo[avail]
        counts = {}
        for i in cands:
            for v in _bits(masks[i]):
                counts[v] = counts.get(v, 0) + 1
        branch_v = min(counts, key=lambda v: (counts[v], v))
        with_v = [i for i in cands if (masks[i] >> branch_v) & 1]
        best, best_sel = f(avail & ~(1 << branch_v), cands)
        cap = avail.bit_count() // 3
        for i in with_v:
            if best >= cap:
                break
            val, sel = f(avail & ~masks[i], cands)
            if val + 1 > best:
                best = val + 1
                best_sel = (i,) + sel
        memo[avail] = (best, best_sel)
        return memo[avail]

    return f((1 << max(m.bit_length() for m in masks)) - 1, order)


def ocp_bruteforce(g: Graph) -> PackingResult:
    """Exact maximum vertex-disjoint odd cycle packing with witness."""
    if g.vertex_count > OCP_VERTEX_GUARD:
        raise InstanceTooLargeError(
            f"odd cycle packing guarded at {OCP_VERTEX_GUARD} vertices"
        )
    cycles = chordless_odd_cycles(g)
    masks = []
    for cyc in cycles:
        m = 0
        for v in cyc:
            m |= 1 << v
        masks.append(m)
    value, sel = _max_disjoint_sets(masks)
    return PackingResult(value, tuple(cycles[i] for i in sorted(sel)))


def triangle_packing_bruteforce(g: Graph) -> PackingResult:
    """Exact maximum vertex-disjoint triangle packing with witness."""
    if g.vertex_count > TRIANGLE_VERTEX_GUARD:
        raise InstanceTooLargeError(
            f"triangle packing guarded at {TRIANGLE_VERTEX_GUARD} vertices"
        )
    tris = g.triangles()
    masks = [(1 << a) | (1 << b) | (1 << c) for a, b, c in tris]
    value, sel = _max_disjoint_sets(masks)
    return PackingResult(value, tuple(tris[i] for i in sorted(sel)))


def stable_set_bruteforce(g: Graph) -> int:
    """Exact maximum stable set size."""
    if g.vertex_count > STABLE_VERTEX_GUARD:
        raise InstanceTooLargeError(
            f"stable set guarded at {STABLE_VERTEX_GUARD} vertices"
        )
    adj = g.adjacency_masks()
    memo = {}

    def f(avail):
        if avail == 0:
            return 0
        if avail in memo:
            return memo[avail]
        max_deg, max_v = -1, -1
        take = -1
        for v in _bits(avail):
            deg = (adj[v] & avail).bit_count()
            if deg <= 1:
                take = v
                break
            if deg > max_deg:
                max_deg, max_v = deg, v
        if take >= 0:  # isolated or degree-1 vertices are always safe
            val = 1 + f(avail & ~(adj[take] | (1 << take)))
        else:
            v = max_v
            val = max(f(avail & ~(1 << v)), 1 + f(avail & ~(adj[v] | (1 << v))))
        memo[avail] = val
        return val

    return f((1 << g.vertex_count) - 1)


# ---------------------------------------------------------------------------
# the determinant correspondence


def _components(g: Graph):
    adj = g.adjacency_sets()
    seen = [False] * g.vertex_count
    comps = []
    for root in range(g.vertex_count):
        if seen[root]:
            continue
        seen[root] = True
        comp = [root]
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for v in sorted(adj[u]):
                if not seen[v]:
                    seen[v] = True
                    comp.append(v)
                    queue.append(v)
        comps.append(comp)
    return comps


def cycle_rooted_basis(g: Graph, witness):
    """Column indices of an incidence basis realizing |det| = 2**len(witness).

    Takes the edges of each witness cycle plus breadth-first discovery
    edges hanging every remaining vertex off exactly one cycle; each
    connected part of the chosen edge set then contains exactly one odd
    cycle, so the determinant is a product of factors +-2.
    """
    edge_col = {e: j for j, e in enumerate(g.edges)}
    adj = g.adjacency_sets()
    in_cycle = {}
    chosen = set()
    for ci, cyc in enumerate(witness):
        for v in cyc:
            if v in in_cycle:
                raise InternalConsistencyError("witness cycles overlap")
            in_cycle[v] = ci
        for a, b in zip(cyc, cyc[1:] + (cyc[0],)):
            key = (min(a, b), max(a, b))
            if key not in edge_col:
                raise InternalConsistencyError(f"witness edge {key} missing")
            chosen.add(key)
    for comp in _components(g):
        sources = sorted(v for v in comp if v in in_cycle)
        if not sources:
            raise InternalConsistencyError(
                f"component {sorted(comp)} holds no witness cycle; "
                "the packing cannot be maximum"
            )
        seen = set(sources)
        queue = deque(sources)
        while queue:
            u = queue.popleft()
            for v in sorted(adj[u]):
                if v not in seen:
                    seen.add(v)
                    chosen.add((min(u, v), max(u, v)))
                    queue.append(v)
    if len(chosen) != g.vertex_count:
        raise InternalConsistencyError(
            f"picked {len(chosen)} edges for {g.vertex_count} vertices"
        )
    return tuple(sorted(edge_col[e] for e in chosen))


@dataclass(frozen=True)
class OcpSubdetReport:
    ocp_value: int
    witness: tuple
    log2_max_subdet: float
    basis_indices: tuple
    mode: str  # "exhaustive" or "witness"
    matches: bool
    power_of_two_samples: int


def verify_ocp_subdet(g: Graph, power_check_samples=200, seed=0) -> OcpSubdetReport:
    """Check max |subdeterminant| of the incidence matrix against 2**ocp.

    Within the oracle guards both sides are computed exhaustively.
    Beyond them the packing side stays exact while the determinant side
    is certified by the witness basis (a lower bound construction that
    meets 2**ocp) plus a sampled check that random bases only ever give
    powers of two up to that value, mirroring the structural upper
    bound on incidence minors.
    """
    packing = ocp_bruteforce(g)
    a = incidence_matrix(g)
    target = packing.value * LN2
    d, n = a.d, a.n
    exhaustive = n <= oracle.MAX_COLUMNS and math.comb(n, d) <= oracle.MAX_SUBSETS
    sampled = 0
    if exhaustive:
        best = oracle.max_subdet_bruteforce(a)
        log_max = best.log_abs_det
        basis = best.indices
        mode = "exhaustive"
    else:
        basis = cycle_rooted_basis(g, packing.witness)
        log_max, sign = log_abs_det(a.data[:, list(basis)])
        if sign == 0:
            raise CorrespondenceViolationError("witness basis is singular")
        mode = "witness"
        rng = np.random.default_rng(seed)
        for _ in range(power_check_samples):
            cols = rng.choice(n, size=d, replace=False)
            lg, sg = log_abs_det(a.data[:, sorted(cols)])
            if sg == 0:
                continue
            sampled += 1
            k = lg / LN2
            if abs(k - round(k)) > 1e-9 or round(k) > packing.value:
                raise CorrespondenceViolationError(
                    f"sampled basis has |det| = 2**{k:.6f}, "
                    f"outside the packing bound {packing.value}"
                )
    if abs(log_max - target) > 1e-9:
        raise CorrespondenceViolationError(
            f"max log|det| {log_max:.12g} does not equal "
            f"ocp * ln2 = {target:.12g}"
        )
    return OcpSubdetReport(
        ocp_value=packing.value,
        witness=packing.witness,
        log2_max_subdet=log_max / LN2,
        basis_indices=tuple(basis),
        mode=mode,
        matches=True,
        power_of_two_samples=sampled,
    )

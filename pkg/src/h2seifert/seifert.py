"""Seifert dual spanning trees and the elimination solver for integer 2-chains
with a prescribed boundary.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .chains import IntChain
from .dual import ARC_BOUNDARY, DualComplex
from .errors import CertificationError, SeifertError
from .linking import LinkingOracle, PLCycle
from .loops import r_plus

STRATEGIES = ("seifert", "strongly-seifert")


class _UnionFind:
    def __init__(self, n):
        self.parent = np.arange(n)

    def find(self, x):
        p = self.parent
        root = x
        while p[root] != root:
            root = p[root]
        while p[x] != root:
            p[x], x = root, p[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[max(ra, rb)] = min(ra, rb)
        return True


def maximal_plug_set(d: DualComplex):
    """Greedy plugs (boundary-face arcs) in face order, at most one per tet."""
    used = set()
    plugs = []
    b = d.boundary
    for j in np.argsort(b.faces, kind="stable").tolist():
        t = int(b.face_tet[j])
        if t not in used:
            used.add(t)
            plugs.append(int(b.faces[j]))
    return plugs


@dataclass(eq=False)
class SeifertTree:
    dual: DualComplex
    strategy: str
    in_tree: np.ndarray  # bool over arcs
    plugs: list
    parent_arc: np.ndarray  # per node, -1 at the root
    parent_node: np.ndarray
    depth: np.ndarray

    @property
    def arcs(self):
        return np.nonzero(self.in_tree)[0]

    @property
    def n_interior_arcs(self):
        return int(np.count_nonzero(self.in_tree[: self.dual.mesh.n_faces]))

    @property
    def expected_interior_arcs(self):
        return self.dual.mesh.n_tets + self.dual.boundary.p

    @property
    def is_seifert(self):
        return self.n_interior_arcs == self.expected_interior_arcs

    @property
    def is_strongly_seifert(self):
        if not self.is_seifert:
            return False
        plug_tets = {int(t) for t in self.dual.mesh.face_tets[self.plugs, 0]}
        b = self.dual.boundary
        # maximal: every boundary face's tet already carries a plug
        return all(self.in_tree[f] for f in self.plugs) and all(int(t) in plug_tets for t in b.face_tet)

    def component_arcs(self, i):
        """Tree arcs on boundary component ``i`` (a spanning tree of its dual graph)."""
        d, b = self.dual, self.dual.boundary
        nF = d.mesh.n_faces
        arcs = np.nonzero(self.in_tree[nF:])[0]
        return nF + arcs[b.edge_component[arcs] == i]

    def cycle_length(self, arc):
        u, v = int(self.dual.arc_tail[arc]), int(self.dual.arc_head[arc])
        du, dv = self.depth[u], self.depth[v]
        n = 1
        while du > dv:
            u, du, n = self.parent_node[u], du - 1, n + 1
        while dv > du:
            v, dv, n = self.parent_node[v], dv - 1, n + 1
        while u != v:
            u, v, n = self.parent_node[u], self.parent_node[v], n + 2
        return n


def build_seifert_tree(d: DualComplex, strategy="strongly-seifert") -> SeifertTree:
    """Spanning tree of the complete dual graph restricting to a spanning tree on
    every boundary component (optionally containing a maximal plug set)."""
    strategy = strategy.replace("_", "-")
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown tree strategy {strategy!r}")
    m, b = d.mesh, d.boundary
    T, nF = m.n_tets, m.n_faces
    n_nodes, n_arcs = d.n_nodes, d.n_arcs
    tail, head, kind = d.arc_tail, d.arc_head, d.arc_kind
    in_tree = np.zeros(n_arcs, dtype=bool)
    uf = _UnionFind(n_nodes)
    adj = d.adjacency()
    for lst in adj:
        lst.sort(key=lambda x: x[1])

    # boundary spanning trees, one BFS per component over boundary dual edges
    for comp in b.components:
        root = T + int(comp.faces.min())
        seen = {root}
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for v, a, _ in adj[u]:
                if kind[a] == ARC_BOUNDARY and v not in seen:
                    seen.add(v)
                    in_tree[a] = True
                    uf.union(u, v)
                    queue.append(v)
        if len(seen) != len(comp.faces):
            raise SeifertError(f"boundary dual graph of component {comp.index} is disconnected")

    plugs = []
    if strategy == "strongly-seifert":
        plugs = maximal_plug_set(d)
        for f in plugs:
            if not uf.union(int(tail[f]), int(head[f])):
                raise SeifertError("plug set closes a cycle")
            in_tree[f] = True

    # extend through interior arcs, breadth first from tet 0
    visited = np.zeros(n_nodes, dtype=bool)
    queue = deque()

    def flood(s):
        stack = [s]
        visited[s] = True
        while stack:
            u = stack.pop()
            queue.append(u)
            for v, a, _ in adj[u]:
                if in_tree[a] and not visited[v]:
                    visited[v] = True
                    stack.append(v)

    flood(0)
    while queue:
        u = queue.popleft()
        for v, a, _ in adj[u]:
            if a < nF and not visited[v] and not in_tree[a]:
                if not uf.union(u, v):
                    raise SeifertError("tree extension closed a cycle")
                in_tree[a] = True
                flood(v)
    if not visited.all():
        raise SeifertError("complete dual graph is disconnected")

    # root the tree at node 0
    parent_arc = np.full(n_nodes, -1, dtype=np.int64)
    parent_node = np.full(n_nodes, -1, dtype=np.int64)
    depth = np.full(n_nodes, -1, dtype=np.int64)
    depth[0] = 0
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for v, a, _ in adj[u]:
            if in_tree[a] and depth[v] < 0:
                depth[v] = depth[u] + 1
                parent_arc[v], parent_node[v] = a, u
                queue.append(v)
    tree = SeifertTree(d, strategy, in_tree, plugs, parent_arc, parent_node, depth)
    if int(in_tree.sum()) != n_nodes - 1:
        raise SeifertError("arc set is not a spanning tree")
    if not tree.is_seifert:
        raise SeifertError(f"tree has {tree.n_interior_arcs} interior arcs, expected {tree.expected_interior_arcs}")
    return tree


def tree_cycle(tree: SeifertTree, arc):
    """Fundamental cycle of a non-tree arc, as ``{arc: +-1}`` containing ``arc`` with +1."""
    if tree.in_tree[arc]:
        raise SeifertError(f"arc {arc} belongs to the tree")
    d = tree.dual
    tail, head = d.arc_tail, d.arc_head
    cyc = {int(arc): 1}
    u, v = int(head[arc]), int(tail[arc])  # walk head -> ... -> tail
    up_u, up_v = [], []
    while tree.depth[u] > tree.depth[v]:
        up_u.append(u)
        u = int(tree.parent_node[u])
    while tree.depth[v] > tree.depth[u]:
        up_v.append(v)
        v = int(tree.parent_node[v])
    while u != v:
        up_u.append(u)
        up_v.append(v)
        u, v = int(tree.parent_node[u]), int(tree.parent_node[v])
    for x in up_u:  # moving towards the root
        a = int(tree.parent_arc[x])
        cyc[a] = 1 if int(tail[a]) == x else -1
    for x in up_v:  # moving away from the root
        a = int(tree.parent_arc[x])
        cyc[a] = 1 if int(head[a]) == x else -1
    return cyc


def tree_cycle_pl(tree: SeifertTree, arc) -> PLCycle:
    return tree.dual.realize(tree_cycle(tree, arc))


def is_corner_free(chain: IntChain, boundary) -> bool:
    """No edge of the cycle borders two boundary faces of the same tet."""
    for e in chain.keys():
        k = boundary.edge_local[e]
        if k >= 0:
            fl, fr = boundary.edge_faces[k]
            if boundary.face_tet[fl] == boundary.face_tet[fr]:
                return False
    return True


@dataclass(eq=False)
class SeifertSurface:
    chain: IntChain
    sigma: IntChain
    label: tuple = ()
    first_pass: int = 0
    worklist: int = 0
    fallbacks: int = 0
    fallback_faces: list = field(default_factory=list)

    def boundary_faces_used(self, boundary):
        ids = self.chain.support()
        return int(np.count_nonzero(boundary.mesh.face_tets[ids, 1] < 0)) if len(ids) else 0


def explicit_coefficient(tree: SeifertTree, pushed: PLCycle, f, oracle: LinkingOracle, category="fallback"):
    """b_f as the linking number of the pushed cycle with the fundamental cycle of D(f)."""
    return oracle.lk(pushed, tree_cycle_pl(tree, f), category)


def eliminate(sigma: IntChain, tree: SeifertTree, oracle: LinkingOracle | None = None, label=(), edge_order=None):
    """Solve sum_f b_f d(f) = sigma with b_f = 0 on tree faces.

    Edges with a single undetermined face fix that face; the first sweep runs
    over edges by ascending id, after which edges touched by newly fixed faces
    are revisited first-in first-out.  When nothing is left to propagate the
    unresolved face with the shortest fundamental cycle is set from the
    linking-number formula.  ``edge_order`` replaces the first sweep order
    (the solution does not depend on it).
    """
    d = tree.dual
    m = d.mesh
    nF, nE = m.n_faces, m.n_edges
    oracle = oracle or LinkingOracle()
    d2 = m.d2.tocsr()
    e_ptr, e_faces, e_sign = d2.indptr, d2.indices, d2.data
    fe, fes = m.face_edges, m.face_edge_sign

    b = [0] * nF
    resolved = tree.in_tree[:nF].copy()
    rhs = sigma.to_dense(dtype=object) if nE else []
    residual = [int(x) for x in rhs]
    open_count = np.zeros(nE, dtype=np.int64)
    np.add.at(open_count, fe[~resolved].ravel(), 1)
    open_count = open_count.tolist()
    n_open = int(np.count_nonzero(~resolved))
    stats = {"first": 0, "work": 0}
    fallbacks = []
    pushed = None

    def settle(f, val, key):
        nonlocal n_open
        b[f] = val
        resolved[f] = True
        n_open -= 1
        stats[key] += 1
        touched = []
        for e, s in zip(fe[f].tolist(), fes[f].tolist()):
            residual[e] -= s * val
            open_count[e] -= 1
            touched.append(e)
        return touched

    def process(e, key):
        """Try to use edge ``e``; return edges to revisit."""
        c = open_count[e]
        if c == 0:
            if residual[e] != 0:
                raise CertificationError(f"inconsistent equation at edge {e}: residual {residual[e]}")
            return []
        if c > 1:
            return []
        lo, hi = e_ptr[e], e_ptr[e + 1]
        for f, s in zip(e_faces[lo:hi].tolist(), e_sign[lo:hi].tolist()):
            if not resolved[f]:
                return settle(f, residual[e] * s, key)  # s = +-1
        raise AssertionError("open count out of sync")

    queue = deque()
    for e in range(nE) if edge_order is None else edge_order:
        queue.extend(process(int(e), "first"))
    while True:
        while queue:
            for x in process(queue.popleft(), "work"):
                queue.append(x)
        if n_open == 0:
            break
        if pushed is None:
            pushed = r_plus(sigma, d.boundary)
        open_faces = np.nonzero(~resolved)[0]
        lengths = [tree.cycle_length(int(f)) for f in open_faces]
        f = int(open_faces[int(np.argmin(lengths))])
        val = explicit_coefficient(tree, pushed, f, oracle)
        fallbacks.append(f)
        queue.extend(settle(f, val, "work"))
        stats["work"] -= 1

    chain = IntChain(m, 2, {f: v for f, v in enumerate(b) if v})
    S = SeifertSurface(chain, sigma, label, stats["first"], stats["work"], len(fallbacks), fallbacks)
    verify(S)
    return S


def verify(S: SeifertSurface, boundary=None):
    """Exact check that the chain bounds the prescribed cycle; returns a certificate dict."""
    got = S.chain.boundary()
    if got != S.sigma:
        diff = (got - S.sigma).keys()
        raise CertificationError(f"boundary of the surface differs from the cycle on edges {diff[:20]}")
    cert = {"boundary_ok": True, "n_faces": len(S.chain)}
    if boundary is not None:
        cert["boundary_faces"] = S.boundary_faces_used(boundary)
        cert["internal"] = cert["boundary_faces"] == 0
    return cert

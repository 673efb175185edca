"""Surface loops: homology generators of the boundary components, their
interior retractions and their splitting into inside/outside bounding families.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .chains import IntChain, edge_path_chain
from .dual import DualComplex
from .errors import CertificationError, SeifertError, TopologyError
from .linking import LinkingOracle, PLCycle
from .mesh import BoundaryTriangulation
from .snf import smith_normal_form


# -- generators ----------------------------------------------------------------


def _edge_graph(b: BoundaryTriangulation, r):
    comp = b.components[r]
    adj = {int(v): [] for v in comp.vertices}
    for k in comp.edges.tolist():
        u, w = (int(x) for x in b.mesh.edges[b.edges[k]])
        adj[u].append((w, k))
        adj[w].append((u, k))
    for v in adj:
        adj[v].sort()
    return adj


def tree_cotree(b: BoundaryTriangulation, r):
    """Spanning tree of the edge graph of component ``r`` and a cotree of its faces.

    Returns ``(parent, tree_edges, cotree_edges, leftover)`` where ``parent``
    maps a vertex to ``(parent vertex, local edge)`` and ``leftover`` lists the
    local boundary edges in neither tree (sorted).
    """
    comp = b.components[r]
    adj = _edge_graph(b, r)
    root = int(comp.vertices.min())
    parent = {root: None}
    tree = set()
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for w, k in adj[v]:
            if w not in parent:
                parent[w] = (v, k)
                tree.add(k)
                queue.append(w)
    if len(parent) != len(adj):
        raise TopologyError(f"boundary component {r} is not vertex-connected")

    # cotree over faces, crossing only non-tree edges
    face_edges = b.edge_local[b.mesh.face_edges[b.faces]]
    start = int(comp.faces.min())
    seen = {start}
    cotree = set()
    queue = deque([start])
    while queue:
        j = queue.popleft()
        for k in sorted(face_edges[j].tolist()):
            if k in tree:
                continue
            left, right = b.edge_faces[k]
            nbr = int(right if left == j else left)
            if nbr not in seen:
                seen.add(nbr)
                cotree.add(k)
                queue.append(nbr)
    leftover = sorted(set(comp.edges.tolist()) - tree - cotree)
    return parent, tree, cotree, leftover


def _root_path(parent, v):
    out = [v]
    while parent[out[-1]] is not None:
        out.append(parent[out[-1]][0])
    return out


def h1_generators(b: BoundaryTriangulation, r):
    """``2 g_r`` vertex loops (closed, vertex-simple) generating H1 of component ``r``.

    Each leftover edge u -> v of the tree-cotree split is closed by the tree
    path from v back to u.
    """
    parent, _, _, leftover = tree_cotree(b, r)
    g = b.components[r].genus
    if len(leftover) != 2 * g:
        raise SeifertError(f"tree-cotree left {len(leftover)} edges on component {r}, expected {2 * g}")
    loops = []
    for k in leftover:
        u, v = (int(x) for x in b.mesh.edges[b.edges[k]])
        pu, pv = _root_path(parent, u), _root_path(parent, v)
        on_u = set(pu)
        iv = next(i for i, x in enumerate(pv) if x in on_u)
        iu = pu.index(pv[iv])
        # u -> v, up the tree to the common ancestor, down to u
        if iu == 0:
            loops.append([u] + pv[:iv])
        else:
            loops.append([u] + pv[: iv + 1] + pu[1:iu][::-1])
    return loops


def loop_chain(mesh, loop):
    return edge_path_chain(mesh, loop, closed=True)


def decompose_loops(chain: IntChain):
    """Split a 1-cycle into vertex-simple closed vertex loops (with multiplicity)."""
    if not chain.is_cycle():
        raise SeifertError("only 1-cycles can be decomposed into loops")
    m = chain.mesh
    out_edges = {}
    for e, c in chain.items():
        u, w = (int(x) for x in m.edges[e])
        if c < 0:
            u, w = w, u
        out_edges.setdefault(u, []).extend([w] * abs(c))
    for v in out_edges:
        out_edges[v].sort(reverse=True)
    loops = []
    while out_edges:
        start = min(out_edges)
        path = [start]
        pos = {start: 0}
        while True:
            v = path[-1]
            if len(path) == 1 and v not in out_edges:
                break
            w = out_edges[v].pop()
            if not out_edges[v]:
                del out_edges[v]
            if w in pos:
                i = pos[w]
                loops.append(path[i:])
                for x in path[i + 1 :]:
                    del pos[x]
                path = path[: i + 1]
            else:
                pos[w] = len(path)
                path.append(w)
    return loops


# -- interior retraction ---------------------------------------------------------


def left_edges(b: BoundaryTriangulation, loop):
    """Coefficients ``c_e`` of the boundary dual edges of the left fans along ``loop``."""
    m = b.mesh
    c = {}
    n = len(loop)
    for i, v in enumerate(loop):
        vp, vs = loop[i - 1], loop[(i + 1) % n]
        w = b.star_next.get((v, vp))
        if w is None:
            raise TopologyError(f"loop edge {vp}-{v} is not on the boundary")
        steps = 0
        while w != vs:
            e, s = m.edge_id(v, w)
            c[e] = c.get(e, 0) + s
            w = b.star_next[(v, w)]
            steps += 1
            if steps > len(b.star_next):
                raise TopologyError(f"{vs} is not in the boundary star of {v}")
    return {e: x for e, x in c.items() if x}


def retract_loop(d: DualComplex, loop):
    """Interior retraction of a vertex-simple boundary loop as an arc chain.

    The loop is first replaced by the boundary dual edges on its left, which
    are then traded for interior dual edges through the dual faces of those
    edges.  Only interior-face arcs survive.
    """
    c = left_edges(d.boundary, loop)
    if not c:
        return {}
    m = d.mesh
    ids = np.fromiter(c.keys(), dtype=np.int64)
    vals = np.fromiter(c.values(), dtype=np.int64)
    ce = np.zeros(m.n_edges, dtype=np.int64)
    ce[ids] = vals
    coef = -(m.d2.T @ ce)
    plug = d.boundary.faces
    if np.any(coef[plug] != 0):
        raise SeifertError("interior retraction left a coefficient on a boundary face")
    nz = np.nonzero(coef)[0]
    return dict(zip(nz.tolist(), coef[nz].tolist()))


def retract_chain(d: DualComplex, chain: IntChain):
    """Interior retraction of an arbitrary boundary 1-cycle (via simple loops)."""
    out = {}
    for loop in decompose_loops(chain):
        for a, x in retract_loop(d, loop).items():
            out[a] = out.get(a, 0) + x
    return {a: x for a, x in sorted(out.items()) if x}


def interior_retraction(d: DualComplex, eta):
    """``eta`` is a vertex loop (list) or a boundary 1-cycle; returns the arc chain."""
    if isinstance(eta, IntChain):
        return retract_chain(d, eta)
    return retract_loop(d, list(eta))


def r_plus(chain: IntChain, boundary: BoundaryTriangulation) -> PLCycle:
    """Push boundary edges of ``chain`` off the boundary.

    Every boundary edge [v, w] becomes [v, d_e] + [d_e, w], where d_e is the
    barycenter of v, w and the barycenter of the smallest tet incident on the
    edge; interior edges are kept.
    """
    m = chain.mesh
    items = chain.items()
    if not items:
        return PLCycle.empty()
    ids = np.array([e for e, _ in items], dtype=np.int64)
    w = np.array([c for _, c in items], dtype=np.int64)
    P = m.points
    a, bb = P[m.edges[ids, 0]], P[m.edges[ids, 1]]
    onb = boundary.edge_local[ids] >= 0
    if not onb.any():
        return PLCycle(a, bb, w)
    de = (a[onb] + bb[onb] + m.tet_barycenters[m.edge_tet[ids[onb]]]) / 3.0
    A = np.concatenate([a[~onb], a[onb], de])
    B = np.concatenate([bb[~onb], de, bb[onb]])
    W = np.concatenate([w[~onb], w[onb], w[onb]])
    return PLCycle(A, B, W)


# -- classification ----------------------------------------------------------------


def _as_object(a):
    a = np.asarray(a)
    return np.array(a.tolist(), dtype=object).reshape(a.shape)


def classify_loops(Lam, external: bool, g=None):
    """Split generators into (sigma, sigma_hat) coefficient rows from the pairing ``Lam``.

    ``Lam[i, j] = lk(gamma_i^+, gamma_j)``.  Combinations ``c`` with ``Lam c = 0``
    have zero linking with every interior push-off; on the external component
    these bound outside (sigma), on a cavity they bound inside (sigma_hat).
    Combinations ``d`` with ``d^T Lam = 0`` play the opposite role.
    """
    Lam = _as_object(Lam)
    n = Lam.shape[0]
    if n == 0:
        z = np.zeros((0, 0), dtype=object)
        return z, z
    d, U, V = smith_normal_form(Lam)
    rank = sum(1 for x in d if x)
    g = n // 2 if g is None else g
    if rank != g:
        raise CertificationError(f"linking pairing has rank {rank}, expected {g}")
    right = V[:, rank:].T  # rows c with Lam c = 0
    left = U[rank:]  # rows d with d Lam = 0
    return (right, left) if external else (left, right)


@dataclass(eq=False)
class SurfaceLoopSet:
    """Generators, classified families and interior retractions per boundary component.

    Families are stored as integer coefficient rows over the component's
    generators; global combinations use a vector over all ``2g`` generators.
    """

    dual: DualComplex
    loops: list = field(default_factory=list)  # [r] -> list of vertex loops
    plus: list = field(default_factory=list)  # [r] -> list of arc chains
    pairing: list = field(default_factory=list)  # [r] -> Lam
    sigma: list = field(default_factory=list)  # [r] -> (g_r, 2 g_r) rows
    sigma_hat: list = field(default_factory=list)

    @property
    def boundary(self):
        return self.dual.boundary

    @property
    def mesh(self):
        return self.dual.mesh

    @property
    def genera(self):
        return [len(x) // 2 for x in self.loops]

    @property
    def offsets(self):
        return np.concatenate([[0], np.cumsum([len(x) for x in self.loops])]).astype(int)

    def generator_chain(self, r, a):
        return loop_chain(self.mesh, self.loops[r][a])

    def generator_cycle(self, r, a) -> PLCycle:
        return PLCycle.from_chain(self.generator_chain(r, a))

    # global combinations: {(r, a): coefficient}
    def family_vector(self, r, s, hat=False):
        rows = self.sigma_hat[r] if hat else self.sigma[r]
        return {(r, a): int(x) for a, x in enumerate(rows[s]) if x}

    def chain(self, combo) -> IntChain:
        out = IntChain(self.mesh, 1)
        for (r, a), x in combo.items():
            out = out + self.generator_chain(r, a).scale(x)
        return out

    def plus_arcs(self, combo):
        out = {}
        for (r, a), x in combo.items():
            for arc, y in self.plus[r][a].items():
                out[arc] = out.get(arc, 0) + x * y
        return {k: v for k, v in sorted(out.items()) if v}

    def cycle(self, combo) -> PLCycle:
        return PLCycle.from_chain(self.chain(combo))

    def plus_cycle(self, combo) -> PLCycle:
        return self.dual.realize(self.plus_arcs(combo))

    def sigma_chain(self, r, s):
        return self.chain(self.family_vector(r, s))

    def sigma_hat_chain(self, r, s):
        return self.chain(self.family_vector(r, s, hat=True))


def build_surface_loops(d: DualComplex, oracle: LinkingOracle) -> SurfaceLoopSet:
    """Generators, retractions, pairing matrices and classification for every component."""
    b = d.boundary
    L = SurfaceLoopSet(d)
    for r, comp in enumerate(b.components):
        loops = h1_generators(b, r)
        plus = [retract_loop(d, lp) for lp in loops]
        n = len(loops)
        cyc = [PLCycle.from_chain(loop_chain(d.mesh, lp)) for lp in loops]
        pc = [d.realize(x) for x in plus]
        Lam = np.zeros((n, n), dtype=object)
        for i in range(n):
            for j in range(n):
                Lam[i, j] = oracle.lk(pc[i], cyc[j])
        sig, sig_hat = classify_loops(Lam, external=(r == 0), g=comp.genus)
        L.loops.append(loops)
        L.plus.append(plus)
        L.pairing.append(Lam)
        L.sigma.append(sig)
        L.sigma_hat.append(sig_hat)
    return L

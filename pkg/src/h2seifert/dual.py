"""Barycentric dual complex, boundary duals and the complete dual graph.

Node numbering of the complete dual graph: tets are nodes ``0..T-1`` and the
boundary face with local index ``j`` is node ``T + j``.  Arc ``f`` (``f < nF``)
is the dual edge D(f) of face ``f``; arc ``nF + k`` is the boundary dual edge
D_b(e) of the boundary edge with local index ``k``.  Every arc is realized as a
polyline of at most two segments through a barycenter of its primal simplex.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DegenerateGeometryError
from .linking import PLCycle
from .mesh import BoundaryTriangulation, Triangulation

ARC_FACE, ARC_PLUG, ARC_BOUNDARY = 0, 1, 2


def _signs_or_raise(values, expected, what, symbolic, tol=0.0):
    s = np.sign(values).astype(np.int64)
    s[np.abs(values) <= tol] = 0
    bad = np.nonzero(s != expected)[0]
    if len(bad) and not symbolic:
        i = int(bad[0])
        raise DegenerateGeometryError(
            f"{what}: geometric sign {int(s[i])} disagrees with combinatorial sign {int(expected[i])} "
            f"({len(bad)} offending simplices; rerun with symbolic signs to use the combinatorial ones)"
        )
    return len(bad)


@dataclass(eq=False)
class DualComplex:
    mesh: Triangulation
    boundary: BoundaryTriangulation
    symbolic: bool = False
    n_sign_overrides: int = 0

    def __post_init__(self):
        if not self.symbolic:
            self.check_geometry()

    # -- points --------------------------------------------------------------
    def dual_vertex(self, t):
        return self.mesh.tet_barycenters[t]

    @property
    def n_nodes(self):
        return self.mesh.n_tets + len(self.boundary.faces)

    @property
    def n_arcs(self):
        return self.mesh.n_faces + len(self.boundary.edges)

    @cached_property
    def node_points(self):
        return np.concatenate([self.mesh.tet_barycenters, self.mesh.face_barycenters[self.boundary.faces]])

    # -- arcs ----------------------------------------------------------------
    @cached_property
    def arcs(self):
        """(tail, head, kind, primal) arrays of the complete dual graph."""
        m, b = self.mesh, self.boundary
        nF, T = m.n_faces, m.n_tets
        tail = np.empty(self.n_arcs, dtype=np.int64)
        head = np.empty(self.n_arcs, dtype=np.int64)
        kind = np.empty(self.n_arcs, dtype=np.int8)
        primal = np.concatenate([np.arange(nF), b.edges])

        ft, fs = m.face_tets, m.face_tet_sign
        inner = ft[:, 1] >= 0
        # D(f) runs from the tet in which f is outward (sign +1) to the other one
        first_pos = fs[:, 0] > 0
        tail[:nF] = np.where(first_pos, ft[:, 0], ft[:, 1])
        head[:nF] = np.where(first_pos, ft[:, 1], ft[:, 0])
        kind[:nF] = ARC_FACE
        # plugs: tet -> boundary-face node when f is outward, reversed otherwise
        bf = b.faces
        node = T + np.arange(len(bf))
        out = b.out_sign > 0
        tail[bf] = np.where(out, b.face_tet, node)
        head[bf] = np.where(out, node, b.face_tet)
        kind[bf] = ARC_PLUG
        assert not inner[bf].any()
        # boundary dual edges: left face -> right face
        tail[nF:] = T + b.edge_faces[:, 0]
        head[nF:] = T + b.edge_faces[:, 1]
        kind[nF:] = ARC_BOUNDARY
        return tail, head, kind, primal

    @property
    def arc_tail(self):
        return self.arcs[0]

    @property
    def arc_head(self):
        return self.arcs[1]

    @property
    def arc_kind(self):
        return self.arcs[2]

    @property
    def arc_primal(self):
        return self.arcs[3]

    def is_interior_arc(self, a):
        """Arcs not contained in the boundary surface (face arcs and plugs)."""
        return np.asarray(a) < self.mesh.n_faces

    @cached_property
    def arc_points(self):
        """(n_arcs, 3, 3) polyline points; plugs repeat their last point."""
        m, b = self.mesh, self.boundary
        tail, head, kind, primal = self.arcs
        mid = np.empty((self.n_arcs, 3))
        mid[: m.n_faces] = m.face_barycenters
        mid[m.n_faces :] = m.edge_midpoints[b.edges]
        P = self.node_points
        pts = np.stack([P[tail], mid, P[head]], axis=1)
        plug = kind == ARC_PLUG
        pts[plug, 1] = pts[plug, 2]
        return pts

    def realize(self, coeffs) -> PLCycle:
        """Geometric realization of an arc chain ``{arc id: coefficient}``."""
        items = sorted((int(a), int(c)) for a, c in dict(coeffs).items() if c)
        if not items:
            return PLCycle.empty()
        ids = np.array([a for a, _ in items], dtype=np.int64)
        w = np.array([c for _, c in items], dtype=np.int64)
        pts = self.arc_points[ids]
        a = np.concatenate([pts[:, 0], pts[:, 1]])
        bb = np.concatenate([pts[:, 1], pts[:, 2]])
        ww = np.concatenate([w, w])
        keep = np.any(a != bb, axis=1)
        return PLCycle(a[keep], bb[keep], ww[keep])

    def arc_boundary(self, coeffs):
        """Node boundary (head minus tail) of an arc chain."""
        out = {}
        tail, head = self.arc_tail, self.arc_head
        for a, c in dict(coeffs).items():
            for n, s in ((int(head[a]), c), (int(tail[a]), -c)):
                v = out.get(n, 0) + s
                if v:
                    out[n] = v
                else:
                    out.pop(n, None)
        return out

    # -- primal-shaped views -------------------------------------------------
    def dual_edge(self, f) -> PLCycle:
        """D(f) as an oriented polyline (1 segment on the boundary, 2 inside)."""
        return self.realize({int(f): 1})

    def boundary_dual_edge(self, k) -> PLCycle:
        """D_b(e) for the boundary edge with local index ``k``."""
        return self.realize({self.mesh.n_faces + int(k): 1})

    def dual_face(self, e):
        """Signed triangle fan [B(e), B(f), B(t)] of the dual face D(e).

        Returns (triangles (n, 3, 3), signs (n,)).
        """
        m = self.mesh
        fs = np.nonzero(np.any(m.face_edges == e, axis=1))[0]
        tris, signs = [], []
        tau = np.diff(m.points[m.edges[e]], axis=0)[0]
        Be = m.edge_midpoints[e]
        for f in fs:
            for t in m.face_tets[f]:
                if t < 0:
                    continue
                tri = np.stack([Be, m.face_barycenters[f], m.tet_barycenters[t]])
                nu = np.cross(tri[1] - tri[0], tri[2] - tri[0])
                d = float(tau @ nu)
                if d == 0.0:
                    raise DegenerateGeometryError(f"degenerate dual triangle at edge {e}, face {f}")
                tris.append(tri)
                signs.append(1 if d > 0 else -1)
        return np.array(tris), np.array(signs, dtype=np.int64)

    def dual_face_boundary_arcs(self, e):
        """Arc chain equal to the boundary of D(e)."""
        m, b = self.mesh, self.boundary
        rows = np.nonzero(np.any(m.face_edges == e, axis=1))[0]
        out = {}
        for f in rows:
            i = int(np.nonzero(m.face_edges[f] == e)[0][0])
            out[int(f)] = int(m.face_edge_sign[f, i])
        k = b.edge_local[e]
        if k >= 0:
            out[m.n_faces + int(k)] = 1
        return out

    def boundary_vertex_fan(self, v):
        """Signed triangles [v, B(e), B(f)] of D_b(v) over boundary edges/faces at ``v``."""
        ring = self.boundary.star(v, self._star_start[v])
        return self._fan(v, ring + [ring[0]])

    def left_fan(self, v, w_prev, w_next):
        """Part of D_b(v) swept from ``w_prev`` to ``w_next`` in the star order."""
        b = self.boundary
        ring = [w_prev]
        while ring[-1] != w_next:
            ring.append(b.star_next[(v, ring[-1])])
            if len(ring) > len(b.star_next):
                raise DegenerateGeometryError(f"vertex star of {v} does not close")
        return self._fan(v, ring)

    @cached_property
    def _star_start(self):
        out = {}
        for (u, w) in self.boundary.star_next:
            out.setdefault(u, w)
        return out

    def _fan(self, v, ring):
        m, b = self.mesh, self.boundary
        P = m.points
        tris, signs = [], []
        for w0, w1 in zip(ring[:-1], ring[1:]):
            # outward face [w0, v, w1]
            f = m.face_id(v, w0, w1)
            j = b.face_local[f]
            n = b.normals[j]
            Bf = m.face_barycenters[f]
            for w in (w0, w1):
                Be = 0.5 * (P[v] + P[w])
                tri = np.stack([P[v], Be, Bf])
                d = float(n @ np.cross(tri[1] - tri[0], tri[2] - tri[0]))
                if d == 0.0:
                    raise DegenerateGeometryError(f"degenerate boundary dual triangle at vertex {v}")
                tris.append(tri)
                signs.append(1 if d > 0 else -1)
        return np.array(tris).reshape(-1, 3, 3), np.array(signs, dtype=np.int64)

    # -- geometric certification of the combinatorial orientation ------------
    def check_geometry(self):
        """Compare the combinatorial arc orientations with the geometric sign formulas."""
        m, b = self.mesh, self.boundary
        nu = m.face_normals
        Bf = m.face_barycenters
        bad = 0
        for col in range(2):
            t = m.face_tets[:, col]
            ok = t >= 0
            d = np.einsum("ij,ij->i", nu[ok], m.tet_barycenters[t[ok]] - Bf[ok])
            bad += _signs_or_raise(d, -m.face_tet_sign[ok, col], "dual edge orientation", self.symbolic)
        # left/right faces of boundary dual edges
        tau = np.diff(m.points[m.edges[b.edges]], axis=1)[:, 0]
        Be = m.edge_midpoints[b.edges]
        for col, want in ((0, 1), (1, -1)):
            j = b.edge_faces[:, col]
            d = np.einsum("ij,ij->i", np.cross(b.normals[j], tau), m.face_barycenters[b.faces[j]] - Be)
            bad += _signs_or_raise(d, np.full(len(d), want), "boundary dual edge left/right", self.symbolic)
        self.n_sign_overrides = bad
        return bad

    # -- graph ----------------------------------------------------------------
    def adjacency(self, arcs=None):
        """node -> list of (neighbour, arc id, +1 if traversed tail->head)."""
        tail, head = self.arc_tail, self.arc_head
        ids = np.arange(self.n_arcs) if arcs is None else np.asarray(arcs)
        adj = [[] for _ in range(self.n_nodes)]
        for a in ids.tolist():
            u, w = int(tail[a]), int(head[a])
            adj[u].append((w, a, 1))
            adj[w].append((u, a, -1))
        return adj

    def is_connected(self):
        import scipy.sparse as sp
        from scipy.sparse.csgraph import connected_components

        g = sp.coo_matrix(
            (np.ones(self.n_arcs), (self.arc_tail, self.arc_head)), shape=(self.n_nodes, self.n_nodes)
        )
        return connected_components(g, directed=False)[0] == 1

    def dual_graph_vtk_text(self):
        from .io import segments_vtk_text

        pl = self.realize({a: 1 for a in range(self.n_arcs)})
        return segments_vtk_text(pl.a, pl.b, pl.w, title="complete dual graph")


def build_dual(t: Triangulation, b: BoundaryTriangulation, symbolic=False) -> DualComplex:
    return DualComplex(t, b, symbolic=symbolic)


def complete_dual_graph(t, b, d=None) -> DualComplex:
    """The complete dual graph lives on the DualComplex; this returns it."""
    return d if d is not None else DualComplex(t, b)

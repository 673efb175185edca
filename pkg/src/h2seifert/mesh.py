"""Tetrahedral triangulation, its boundary surface and boundary components.

Simplices are numbered deterministically: edges and faces are the
lexicographically sorted vertex tuples, tetrahedra are ordered by their
sorted vertex tuple but stored with a positive-volume vertex order.
The canonical orientation of an edge or face is its ascending vertex order.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .errors import (
    AmbiguousExternalComponentError,
    DegenerateGeometryError,
    MeshParseError,
    NonManifoldError,
    TopologyError,
)


def _sort_parity3(tri):
    """Sort rows of an (n, 3) array; return sorted rows and the permutation sign."""
    a, b, c = tri[:, 0], tri[:, 1], tri[:, 2]
    inversions = (a > b).astype(int) + (a > c) + (b > c)
    return np.sort(tri, axis=1), np.where(inversions % 2 == 0, 1, -1)


def signed_volume6(points, tets):
    p = points[tets]
    return np.einsum(
        "ij,ij->i", np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]), p[:, 3] - p[:, 0]
    )


@dataclass(eq=False)
class Triangulation:
    """Oriented simplicial complex of a tetrahedral mesh.

    ``tets`` rows are positively oriented. ``tet_face_sign[t, i]`` is the
    coefficient of the canonical face ``tet_faces[t, i]`` in the boundary of
    tet ``t`` and ``face_edge_sign[f, i]`` the coefficient of
    ``face_edges[f, i]`` in the boundary of face ``f`` (the omega signs).
    """

    points: np.ndarray
    tets: np.ndarray
    edges: np.ndarray
    faces: np.ndarray
    tet_faces: np.ndarray
    tet_face_sign: np.ndarray
    face_edges: np.ndarray
    face_edge_sign: np.ndarray
    face_tets: np.ndarray  # (nF, 2), -1 where absent
    face_tet_sign: np.ndarray  # (nF, 2), incidence sign of the face in that tet

    @property
    def n_vertices(self):
        return len(self.points)

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def n_faces(self):
        return len(self.faces)

    @property
    def n_tets(self):
        return len(self.tets)

    def counts(self):
        return {"V": self.n_vertices, "E": self.n_edges, "F": self.n_faces, "K": self.n_tets}

    @cached_property
    def d1(self):
        """Edge -> vertex incidence, shape (nV, nE)."""
        ne = self.n_edges
        rows = self.edges.ravel()
        cols = np.repeat(np.arange(ne), 2)
        vals = np.tile([-1, 1], ne)
        return sp.csr_matrix((vals, (rows, cols)), shape=(self.n_vertices, ne), dtype=np.int64)

    @cached_property
    def d2(self):
        """Face -> edge incidence, shape (nE, nF)."""
        nf = self.n_faces
        return sp.csr_matrix(
            (self.face_edge_sign.ravel(), (self.face_edges.ravel(), np.repeat(np.arange(nf), 3))),
            shape=(self.n_edges, nf),
            dtype=np.int64,
        )

    @cached_property
    def d3(self):
        """Tet -> face incidence, shape (nF, nK)."""
        nt = self.n_tets
        return sp.csr_matrix(
            (self.tet_face_sign.ravel(), (self.tet_faces.ravel(), np.repeat(np.arange(nt), 4))),
            shape=(self.n_faces, nt),
            dtype=np.int64,
        )

    @cached_property
    def edge_tet(self):
        """Smallest tet id incident on each edge."""
        out = np.full(self.n_edges, np.iinfo(np.int64).max, dtype=np.int64)
        fe = self.face_edges
        for j in range(2):
            t = self.face_tets[:, j]
            ok = t >= 0
            for i in range(3):
                np.minimum.at(out, fe[ok, i], t[ok])
        return out

    @cached_property
    def tet_barycenters(self):
        return self.points[self.tets].mean(axis=1)

    @cached_property
    def face_barycenters(self):
        return self.points[self.faces].mean(axis=1)

    @cached_property
    def edge_midpoints(self):
        return self.points[self.edges].mean(axis=1)

    @cached_property
    def face_normals(self):
        """Unit normals of the canonically oriented faces (right-hand rule)."""
        p = self.points[self.faces]
        n = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
        return n / np.linalg.norm(n, axis=1)[:, None]

    @cached_property
    def edge_index(self):
        return {(int(a), int(b)): i for i, (a, b) in enumerate(self.edges)}

    @cached_property
    def face_index(self):
        return {tuple(f): i for i, f in enumerate(self.faces.tolist())}

    def face_id(self, a, b, c):
        return self.face_index[tuple(sorted((int(a), int(b), int(c))))]

    def edge_id(self, u, v):
        """Return (edge id, sign) of the oriented edge u -> v."""
        if u < v:
            return self.edge_index[(u, v)], 1
        return self.edge_index[(v, u)], -1

    def bbox_diagonal(self):
        return float(np.linalg.norm(self.points.max(axis=0) - self.points.min(axis=0)))


def build_triangulation(points, tets) -> Triangulation:
    """Canonicalize a tet soup into an oriented, indexed Triangulation."""
    points = np.ascontiguousarray(points, dtype=float)
    tets = np.asarray(tets, dtype=np.int64)
    if tets.ndim != 2 or tets.shape[1] != 4 or len(tets) == 0:
        raise MeshParseError("expected a non-empty (n, 4) array of tetrahedra")
    if tets.min() < 0 or tets.max() >= len(points):
        raise MeshParseError("tetrahedron references a missing vertex")

    srt = np.sort(tets, axis=1)
    if np.any(srt[:, 1:] == srt[:, :-1]):
        raise MeshParseError("tetrahedron with repeated vertex")
    order = np.lexsort(srt.T[::-1])
    srt = srt[order]
    if np.any(np.all(srt[1:] == srt[:-1], axis=1)):
        raise NonManifoldError("duplicate tetrahedron")

    vol = signed_volume6(points, srt)
    scale = max(float(np.ptp(points, axis=0).max()), 1e-300)
    if np.any(np.abs(vol) <= 1e-14 * scale**3):
        bad = int(np.argmin(np.abs(vol)))
        raise DegenerateGeometryError(f"flat tetrahedron {srt[bad].tolist()}")
    oriented = srt.copy()
    neg = vol < 0
    oriented[neg, 2], oriented[neg, 3] = srt[neg, 3], srt[neg, 2]

    nt = len(oriented)
    v0, v1, v2, v3 = oriented.T
    tri = np.stack(
        [np.stack([v1, v2, v3], 1), np.stack([v0, v2, v3], 1), np.stack([v0, v1, v3], 1), np.stack([v0, v1, v2], 1)],
        axis=1,
    ).reshape(-1, 3)
    alt = np.tile([1, -1, 1, -1], nt)
    tri_sorted, par = _sort_parity3(tri)
    faces, inv = np.unique(tri_sorted, axis=0, return_inverse=True)
    inv = inv.ravel()
    tet_faces = inv.reshape(nt, 4)
    tet_face_sign = (alt * par).reshape(nt, 4)

    nf = len(faces)
    count = np.bincount(inv, minlength=nf)
    if count.max() > 2:
        f = int(np.argmax(count))
        raise NonManifoldError(f"face {faces[f].tolist()} is shared by {count[f]} tetrahedra")
    face_tets = np.full((nf, 2), -1, dtype=np.int64)
    face_tet_sign = np.zeros((nf, 2), dtype=np.int64)
    tet_ids = np.repeat(np.arange(nt), 4)
    slot_order = np.argsort(inv, kind="stable")
    first = np.ones(len(inv), dtype=bool)
    sorted_inv = inv[slot_order]
    first[1:] = sorted_inv[1:] != sorted_inv[:-1]
    for is_first, col in ((first, 0), (~first, 1)):
        idx = slot_order[is_first]
        face_tets[inv[idx], col] = tet_ids[idx]
        face_tet_sign[inv[idx], col] = tet_face_sign.ravel()[idx]

    a, b, c = faces.T
    seg = np.stack([np.stack([b, c], 1), np.stack([a, c], 1), np.stack([a, b], 1)], axis=1).reshape(-1, 2)
    edges, einv = np.unique(seg, axis=0, return_inverse=True)
    face_edges = einv.ravel().reshape(nf, 3)
    face_edge_sign = np.tile([1, -1, 1], (nf, 1))

    return Triangulation(
        points=points,
        tets=oriented,
        edges=edges,
        faces=faces,
        tet_faces=tet_faces,
        tet_face_sign=tet_face_sign,
        face_edges=face_edges,
        face_edge_sign=face_edge_sign,
        face_tets=face_tets,
        face_tet_sign=face_tet_sign,
    )


def load_mesh(source, format=None) -> Triangulation:
    """Read a mesh file (Gmsh MSH 2.2 ASCII or TetGen .node/.ele)."""
    from .io import read_mesh_arrays

    points, tets = read_mesh_arrays(source, format)
    return build_triangulation(points, tets)


@dataclass
class Component:
    index: int
    faces: np.ndarray  # boundary-local face indices
    edges: np.ndarray  # boundary-local edge indices
    vertices: np.ndarray  # global vertex ids
    bbox: tuple
    external: bool = False
    natural_index: int = -1  # index before the external component is moved to the front

    @property
    def euler(self):
        return len(self.vertices) - len(self.edges) + len(self.faces)

    @property
    def genus(self):
        return component_genus_from_euler(self.euler)


def component_genus_from_euler(chi):
    if (2 - chi) % 2:
        raise TopologyError(f"odd 2 - chi = {2 - chi}: non-orientable or corrupted surface")
    g = (2 - chi) // 2
    if g < 0:
        raise TopologyError(f"negative genus from Euler characteristic {chi}")
    return g


@dataclass(eq=False)
class BoundaryTriangulation:
    """Boundary surface of a Triangulation.

    Arrays indexed by a *local* boundary face index ``j`` refer to the global
    face ``faces[j]``; ``out_sign[j]`` orients it outward. ``edge_faces[k]``
    holds the (left, right) local faces of the canonically oriented boundary
    edge ``edges[k]`` as seen from outside.
    """

    mesh: Triangulation
    faces: np.ndarray
    face_tet: np.ndarray
    out_sign: np.ndarray
    edges: np.ndarray
    edge_faces: np.ndarray
    vertices: np.ndarray
    face_component: np.ndarray
    edge_component: np.ndarray
    components: list
    star_next: dict = field(repr=False)

    @property
    def p(self):
        """Number of cavities (components other than the external one)."""
        return len(self.components) - 1

    @property
    def genera(self):
        return [c.genus for c in self.components]

    @property
    def genus(self):
        return sum(self.genera)

    @cached_property
    def face_local(self):
        out = np.full(self.mesh.n_faces, -1, dtype=np.int64)
        out[self.faces] = np.arange(len(self.faces))
        return out

    @cached_property
    def edge_local(self):
        out = np.full(self.mesh.n_edges, -1, dtype=np.int64)
        out[self.edges] = np.arange(len(self.edges))
        return out

    @cached_property
    def is_boundary_vertex(self):
        out = np.zeros(self.mesh.n_vertices, dtype=bool)
        out[self.vertices] = True
        return out

    @cached_property
    def vertex_component(self):
        out = np.full(self.mesh.n_vertices, -1, dtype=np.int64)
        for c in self.components:
            out[c.vertices] = c.index
        return out

    @cached_property
    def outward_faces(self):
        """Boundary faces as outward-oriented vertex triples."""
        f = self.mesh.faces[self.faces].copy()
        flip = self.out_sign < 0
        f[flip, 1], f[flip, 2] = self.mesh.faces[self.faces][flip, 2], self.mesh.faces[self.faces][flip, 1]
        return f

    @cached_property
    def normals(self):
        return self.mesh.face_normals[self.faces] * self.out_sign[:, None]

    def star(self, v, start):
        """Boundary neighbours of ``v`` in the rotation order starting at ``start``.

        Consecutive entries ``w[m-1], w[m]`` span the outward-oriented
        boundary face ``[w[m-1], v, w[m]]``.
        """
        out = [start]
        w = self.star_next[(v, start)]
        while w != start:
            out.append(w)
            w = self.star_next[(v, w)]
        return out

    def corner_tets(self):
        """Tets with two or more boundary faces."""
        cnt = np.bincount(self.face_tet, minlength=self.mesh.n_tets)
        return np.nonzero(cnt >= 2)[0]


def extract_boundary(t: Triangulation, external=None) -> BoundaryTriangulation:
    """Boundary surface, its components and the external component Gamma_0.

    ``external`` overrides detection; it indexes components in their natural
    order (ascending smallest boundary face id).
    """
    bfaces = np.nonzero(t.face_tets[:, 1] < 0)[0]
    if len(bfaces) == 0:
        raise TopologyError("mesh has no boundary")
    face_tet = t.face_tets[bfaces, 0]
    out_sign = t.face_tet_sign[bfaces, 0]
    fe = t.face_edges[bfaces]
    fes = t.face_edge_sign[bfaces]

    bedges, einv = np.unique(fe.ravel(), return_inverse=True)
    einv = einv.reshape(-1, 3)
    cnt = np.bincount(einv.ravel(), minlength=len(bedges))
    if np.any(cnt != 2):
        k = int(np.nonzero(cnt != 2)[0][0])
        raise NonManifoldError(
            f"boundary edge {t.edges[bedges[k]].tolist()} borders {cnt[k]} boundary faces"
        )
    # left face: the outward-oriented face traverses the canonical edge forwards
    edge_faces = np.full((len(bedges), 2), -1, dtype=np.int64)
    orient = (fes * out_sign[:, None]).ravel()
    loc = np.repeat(np.arange(len(bfaces)), 3)
    slot = np.where(orient > 0, 0, 1)
    ekeys = einv.ravel()
    if np.any(np.bincount(ekeys * 2 + slot, minlength=2 * len(bedges)) != 1):
        raise TopologyError("boundary surface is not coherently orientable")
    edge_faces[ekeys, slot] = loc

    # components by flood fill over shared edges
    nb = len(bfaces)
    comp = np.full(nb, -1, dtype=np.int64)
    n_comp = 0
    for s in range(nb):
        if comp[s] >= 0:
            continue
        comp[s] = n_comp
        queue = deque([s])
        while queue:
            j = queue.popleft()
            for k in einv[j]:
                for nbr in edge_faces[k]:
                    if comp[nbr] < 0:
                        comp[nbr] = n_comp
                        queue.append(nbr)
        n_comp += 1
    edge_comp = comp[edge_faces[:, 0]]

    bverts_all = t.faces[bfaces]
    comps = []
    vert_owner = {}
    for c in range(n_comp):
        cf = np.nonzero(comp == c)[0]
        ce = np.nonzero(edge_comp == c)[0]
        cv = np.unique(bverts_all[cf])
        for v in cv:
            if vert_owner.setdefault(int(v), c) != c:
                raise NonManifoldError(f"vertex {int(v)} is shared by two boundary components")
        pts = t.points[cv]
        comps.append(Component(c, cf, ce, cv, (pts.min(axis=0), pts.max(axis=0))))

    if external is None:
        external = _detect_external(comps)
    elif not 0 <= external < n_comp:
        raise TopologyError(f"external component {external} out of range 0..{n_comp - 1}")
    order = [external] + [c for c in range(n_comp) if c != external]
    remap = np.empty(n_comp, dtype=np.int64)
    remap[order] = np.arange(n_comp)
    comps = [comps[c] for c in order]
    for i, c in enumerate(comps):
        c.natural_index = c.index
        c.index = i
        c.external = i == 0
    comp = remap[comp]
    edge_comp = remap[edge_comp]

    # rotation system around boundary vertices: star_next[(v, w_prev)] = w_next
    bt = BoundaryTriangulation(
        mesh=t,
        faces=bfaces,
        face_tet=face_tet,
        out_sign=out_sign,
        edges=bedges,
        edge_faces=edge_faces,
        vertices=np.unique(bverts_all),
        face_component=comp,
        edge_component=edge_comp,
        components=comps,
        star_next={},
    )
    star = {}
    for x, y, z in bt.outward_faces.tolist():
        for v, a, b in ((y, x, z), (z, y, x), (x, z, y)):
            if (v, a) in star:
                raise NonManifoldError(f"boundary star of vertex {v} is not a disk")
            star[(v, a)] = b
    bt.star_next = star
    _check_vertex_stars(bt)
    for c in comps:
        c.genus  # raises on odd Euler characteristic
    return bt


def _check_vertex_stars(bt):
    deg = {}
    for v, _ in bt.star_next:
        deg[v] = deg.get(v, 0) + 1
    first = {}
    for v, a in bt.star_next:
        first.setdefault(v, a)
    for v, a in first.items():
        n = 1
        w = bt.star_next[(v, a)]
        while w != a:
            n += 1
            w = bt.star_next[(v, w)]
            if n > deg[v]:
                break
        if n != deg[v]:
            raise NonManifoldError(f"boundary vertex {v} has a pinched star")


def _detect_external(comps):
    if len(comps) == 1:
        return 0
    cands = []
    for i, c in enumerate(comps):
        lo, hi = c.bbox
        if all(np.all(lo <= o.bbox[0]) and np.all(hi >= o.bbox[1]) for o in comps):
            cands.append(i)
    if len(cands) != 1:
        raise AmbiguousExternalComponentError(
            f"cannot identify the external boundary component (candidates {cands}); "
            "pass it explicitly"
        )
    return cands[0]


def component_genus(b: BoundaryTriangulation, r: int) -> int:
    return b.components[r].genus

"""Voxel-built benchmark domains and small mesh utilities.

Domains are unions of unit voxels, each split into six tetrahedra along its
main diagonal (Kuhn subdivision), so neighbouring voxels always match.
Knotted cavities are tubes around closed lattice polygons.
"""

from __future__ import annotations

import itertools

import numpy as np

_KUHN = [
    [np.zeros(3, dtype=np.int64), *np.cumsum(np.eye(3, dtype=np.int64)[list(p)], axis=0)]
    for p in itertools.permutations(range(3))
]


def voxel_mesh(voxels, spacing=1.0, origin=(0.0, 0.0, 0.0)):
    """Kuhn tetrahedralization of a voxel set; returns (points, tets)."""
    vox = np.unique(np.asarray(voxels, dtype=np.int64).reshape(-1, 3), axis=0)
    corners = np.stack([np.stack(k) for k in _KUHN])  # (6, 4, 3)
    allv = (vox[:, None, None, :] + corners[None]).reshape(-1, 3)
    grid, inv = np.unique(allv, axis=0, return_inverse=True)
    tets = inv.ravel().reshape(-1, 4)
    points = grid * float(spacing) + np.asarray(origin, dtype=float)
    return points, tets


def box(lo, hi):
    """Voxels with lo <= index <= hi (inclusive) on every axis."""
    ranges = [np.arange(a, b + 1) for a, b in zip(lo, hi)]
    return np.stack(np.meshgrid(*ranges, indexing="ij"), -1).reshape(-1, 3)


def tube(path, width=0, closed=True):
    """Voxels within Chebyshev distance ``width`` of an axis-parallel lattice polygon."""
    pts = [np.asarray(p, dtype=np.int64) for p in path]
    if closed:
        pts = pts + [pts[0]]
    out = []
    for a, b in zip(pts[:-1], pts[1:]):
        if np.count_nonzero(a != b) != 1:
            raise ValueError(f"segment {a.tolist()} -> {b.tolist()} is not axis-parallel")
        out.append(box(np.minimum(a, b) - width, np.maximum(a, b) + width))
    return np.unique(np.concatenate(out), axis=0)


def subtract(a, b):
    if len(b) == 0:
        return a
    keys = {tuple(v) for v in np.asarray(b).tolist()}
    return np.array([v for v in np.asarray(a).tolist() if tuple(v) not in keys], dtype=np.int64)


def refine(voxels, k):
    """Replace every voxel by k**3 sub-voxels (same region, finer grid)."""
    if k == 1:
        return np.asarray(voxels)
    sub = box((0, 0, 0), (k - 1, k - 1, k - 1))
    return (np.asarray(voxels)[:, None, :] * k + sub[None]).reshape(-1, 3)


def square_loop(lo, hi, z=0):
    return [(lo, lo, z), (hi, lo, z), (hi, hi, z), (lo, hi, z)]


def rectangle(axis_a, axis_b, a_range, b_range, fixed):
    """Closed rectangle in the plane spanned by two axes; the third is fixed."""
    third = 3 - axis_a - axis_b
    out = []
    for a, b in [(a_range[0], b_range[0]), (a_range[1], b_range[0]), (a_range[1], b_range[1]), (a_range[0], b_range[1])]:
        p = [0, 0, 0]
        p[axis_a], p[axis_b], p[third] = a, b, fixed
        out.append(tuple(p))
    return out


def grid_diagram_path(xs, os_, scale=2, low=0, high=2):
    """Lattice polygon of a grid diagram (vertical strands pass over horizontal ones).

    ``xs[i]``/``os_[i]`` give the rows of the X and O markings in column i.
    """
    n = len(xs)
    row_x = {r: c for c, r in enumerate(xs)}
    row_o = {r: c for c, r in enumerate(os_)}
    path = []
    col = 0
    for _ in range(n):
        r0, r1 = os_[col], xs[col]
        path += [(scale * col, scale * r0, low), (scale * col, scale * r0, high),
                 (scale * col, scale * r1, high), (scale * col, scale * r1, low)]
        col = row_o[r1]
        if col == 0:
            break
    else:
        raise ValueError("grid diagram does not close up")
    if len(path) != 4 * n:
        raise ValueError("grid diagram has more than one component")
    assert all(row_x[os_[c]] != c for c in range(n))
    return path


TREFOIL_GRID = ([3, 4, 0, 1, 2], [0, 1, 2, 3, 4])


def _mesh(vox, k, spacing=1.0):
    return voxel_mesh(refine(vox, k), spacing=spacing / k)


def solid_ball(k=1):
    return _mesh(box((0, 0, 0), (2, 2, 2)), k)


def solid_torus(k=1):
    return _mesh(tube(square_loop(0, 4), width=1), k)


def thin_solid_torus(k=2):
    """One-voxel ring of eight voxels; k=2 gives 384 tetrahedra."""
    return _mesh(tube(square_loop(0, 2), width=0), k)


def torus_with_cavity(k=1):
    """Solid torus with a concentric toric cavity (p = 1, genera [1, 1])."""
    outer = tube(square_loop(0, 4), width=1)
    return _mesh(subtract(outer, tube(square_loop(0, 4), width=0)), k)


def cube_with_ring_cavity(k=1):
    """Box with an unknotted ring-shaped cavity (p = 1, genera [0, 1]); 402 tets at k=1."""
    return _mesh(subtract(box((0, 0, 0), (4, 4, 2)), tube(square_loop(1, 3, z=1))), k)


def borromean_rings(k=1):
    """Box minus three Borromean rings (p = 3, genera [0, 1, 1, 1])."""
    rings = [
        rectangle(0, 1, (-4, 4), (-2, 2), 0),
        rectangle(1, 2, (-4, 4), (-2, 2), 0),
        rectangle(2, 0, (-4, 4), (-2, 2), 0),
    ]
    cav = np.concatenate([tube(r) for r in rings])
    return _mesh(subtract(box((-6, -6, -6), (6, 6, 6)), cav), k)


def _two_torus(lo, hi, holes):
    body = box(lo, hi)
    for hx, hy in holes:
        body = subtract(body, box((hx[0], hy[0], lo[2]), (hx[1], hy[1], hi[2])))
    return body


def hopf_two_torus(k=1):
    """Genus-2 handlebody minus a Hopf link (p = 2, genera [2, 1, 1])."""
    r1 = rectangle(0, 1, (0, 8), (0, 4), 0)
    r2 = rectangle(0, 2, (4, 12), (-4, 4), 2)
    body = _two_torus((-2, -2, -6), (14, 12, 6), [((2, 4), (7, 9)), ((8, 10), (7, 9))])
    return _mesh(subtract(body, np.concatenate([tube(r1), tube(r2)])), k)


def trefoil_two_torus(k=1):
    """Genus-2 handlebody minus a knotted (trefoil) tube (p = 1, genera [2, 1])."""
    knot = grid_diagram_path(*TREFOIL_GRID)
    body = _two_torus((-2, -2, -2), (10, 16, 4), [((1, 2), (12, 13)), ((6, 7), (12, 13))])
    return _mesh(subtract(body, tube(knot)), k)


BENCHMARKS = {
    "ball": solid_ball,
    "solid_torus": solid_torus,
    "thin_solid_torus": thin_solid_torus,
    "torus_with_cavity": torus_with_cavity,
    "cube_with_ring_cavity": cube_with_ring_cavity,
    "borromean": borromean_rings,
    "trefoil": trefoil_two_torus,
    "hopf": hopf_two_torus,
}


def single_tet():
    return np.array([[0.0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]]), np.array([[0, 1, 2, 3]])


def split_corner_tets(points, tets):
    """Star-subdivide every tet that has two or more boundary faces.

    Each new tet keeps exactly one face of its parent, so afterwards no tet
    has two boundary faces; neighbouring tets are unaffected.
    """
    from .mesh import build_triangulation

    t = build_triangulation(points, tets)
    nb = np.bincount(t.face_tets[t.face_tets[:, 1] < 0, 0], minlength=t.n_tets)
    bad = nb >= 2
    if not bad.any():
        return t.points, t.tets
    centers = t.tet_barycenters[bad]
    new_ids = len(t.points) + np.arange(len(centers))
    pts = np.concatenate([t.points, centers])
    keep = t.tets[~bad]
    out = [keep]
    for tet, c in zip(t.tets[bad], new_ids):
        for i in range(4):
            q = tet.copy()
            q[i] = c
            out.append(q[None])
    return pts, np.concatenate(out)

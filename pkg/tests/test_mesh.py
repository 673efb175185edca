import numpy as np
import pytest

from h2seifert.benchmarks import single_tet
from h2seifert.errors import (
    AmbiguousExternalComponentError,
    DegenerateGeometryError,
    MeshParseError,
    NonManifoldError,
    TopologyError,
)
from h2seifert.mesh import build_triangulation, extract_boundary
from meshcache import complex_, mesh
from oracles import euler_genus, float_betti

TWO_TETS = (
    np.array([[0.0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1]]),
    np.array([[0, 1, 2, 3], [1, 2, 3, 4]]),
)


def test_single_tet_counts():
    t = mesh("single_tet")
    assert t.counts() == {"V": 4, "E": 6, "F": 4, "K": 1}
    b = extract_boundary(t)
    assert (b.p, b.genera, b.genus) == (0, [0], 0)
    assert len(b.faces) == 4 and len(b.edges) == 6


def test_two_tets_share_one_face():
    t = build_triangulation(*TWO_TETS)
    assert t.counts() == {"V": 5, "E": 9, "F": 7, "K": 2}
    inner = np.nonzero(t.face_tets[:, 1] >= 0)[0]
    assert len(inner) == 1
    f = inner[0]
    # the shared face is seen with opposite orientations
    assert t.face_tet_sign[f].sum() == 0


def test_orientation_is_positive_after_canonicalisation():
    pts, tets = single_tet()
    t = build_triangulation(pts, tets[:, [0, 2, 1, 3]])
    a, b, c, d = pts[t.tets[0]]
    assert np.linalg.det(np.stack([b - a, c - a, d - a])) > 0


@pytest.mark.parametrize("name", ["single_tet", "solid_torus", "torus_with_cavity", "cube_with_ring_cavity"])
def test_boundary_of_boundary_vanishes(name):
    t = mesh(name)
    assert (t.d1 @ t.d2).count_nonzero() == 0
    assert (t.d2 @ t.d3).count_nonzero() == 0


@pytest.mark.parametrize("name", ["single_tet", "solid_torus", "torus_with_cavity"])
def test_flux_identity(name):
    """Oriented face area vectors of every tet sum to zero and point outwards."""
    t = mesh(name)
    P = t.points
    F = t.faces
    area = 0.5 * np.cross(P[F[:, 1]] - P[F[:, 0]], P[F[:, 2]] - P[F[:, 0]])
    flux = np.einsum("tk,tkd->td", t.tet_face_sign, area[t.tet_faces])
    assert np.allclose(flux, 0, atol=1e-12)
    out = t.face_barycenters[t.tet_faces] - t.tet_barycenters[:, None]
    assert np.all(np.einsum("tk,tkd,tkd->tk", t.tet_face_sign, area[t.tet_faces], out) > 0)


def test_rejects_bad_input():
    pts, tets = single_tet()
    with pytest.raises(MeshParseError):
        build_triangulation(pts, np.array([[0, 1, 2, 7]]))
    with pytest.raises(MeshParseError):
        build_triangulation(pts, np.array([[0, 1, 1, 2]]))
    with pytest.raises(DegenerateGeometryError):
        build_triangulation(np.array([[0.0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]]), tets)


def test_three_tets_on_a_face_is_non_manifold():
    pts = np.array([[0.0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1], [0, 0, -1], [-1, -1, 0.3]])
    with pytest.raises(NonManifoldError):
        build_triangulation(pts, np.array([[0, 1, 2, 3], [0, 1, 2, 4], [0, 1, 2, 5]]))


def test_tets_touching_at_a_vertex_are_rejected():
    pts = np.array([[0.0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1], [-1, 0, 0], [0, -1, 0], [0, 0, -1]])
    t = build_triangulation(pts, np.array([[0, 1, 2, 3], [0, 4, 5, 6]]))
    with pytest.raises(TopologyError):
        extract_boundary(t)


def test_tets_touching_along_an_edge_are_rejected():
    pts = np.array([[0.0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1], [0, -1, 0], [0, 0, -1]])
    t = build_triangulation(pts, np.array([[0, 1, 2, 3], [0, 1, 4, 5]]))
    with pytest.raises(TopologyError):
        extract_boundary(t)


@pytest.mark.parametrize(
    "name,p,genera",
    [
        ("ball", 0, [0]),
        ("solid_torus", 0, [1]),
        ("torus_with_cavity", 1, [1, 1]),
        ("cube_with_ring_cavity", 1, [0, 1]),
        ("borromean", 3, [0, 1, 1, 1]),
        ("trefoil", 1, [2, 1]),
        ("hopf", 2, [2, 1, 1]),
    ],
)
def test_genus_bookkeeping(name, p, genera):
    _, b, _ = complex_(name)
    assert b.p == p
    assert b.genera == genera
    assert b.genus == sum(genera)
    for c in b.components:
        assert c.genus == euler_genus(len(c.vertices), len(c.edges), len(c.faces))


@pytest.mark.parametrize("name", ["solid_torus", "torus_with_cavity", "cube_with_ring_cavity"])
def test_genus_matches_rational_homology(name):
    t, b, _ = complex_(name)
    betti = float_betti(t)
    assert betti[1] == b.genus
    assert betti[2] == b.p


def test_external_component_contains_the_others():
    _, b, _ = complex_("borromean")
    lo, hi = b.components[0].bbox
    for c in b.components[1:]:
        assert np.all(lo <= c.bbox[0]) and np.all(hi >= c.bbox[1])


def test_external_override_and_ambiguity():
    t = mesh("torus_with_cavity")
    b = extract_boundary(t, external=1)
    assert b.components[0].natural_index == 1
    with pytest.raises(TopologyError):
        extract_boundary(t, external=5)
    # two disjoint balls: no component encloses the other
    pts, tets = single_tet()
    pts2 = np.concatenate([pts, pts + 5])
    two = build_triangulation(pts2, np.concatenate([tets, tets + 4]))
    with pytest.raises(AmbiguousExternalComponentError):
        extract_boundary(two)


def test_outward_faces_point_away_from_their_tet():
    t, b, _ = complex_("torus_with_cavity")
    out = t.face_barycenters[b.faces] - t.tet_barycenters[b.face_tet]
    assert np.all(np.einsum("ij,ij->i", b.normals, out) > 0)


def test_star_rotation_closes_around_every_boundary_vertex():
    _, b, _ = complex_("solid_torus")
    for v in b.vertices[:50].tolist():
        start = next(w for (u, w) in b.star_next if u == v)
        ring = b.star(v, start)
        assert len(set(ring)) == len(ring)
        assert b.star_next[(v, ring[-1])] == ring[0]

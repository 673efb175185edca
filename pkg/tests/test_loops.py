import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from h2seifert.chains import IntChain
from h2seifert.linking import PLCycle, lk_gauss
from h2seifert.loops import (
    classify_loops,
    decompose_loops,
    h1_generators,
    loop_chain,
    r_plus,
    retract_chain,
    retract_loop,
)
from h2seifert.snf import invariants, rank
from meshcache import complex_, retrieved
from oracles import rational_det

NAMES = ["solid_torus", "torus_with_cavity", "cube_with_ring_cavity", "trefoil"]


def surface_d2(b, r):
    """Edge-face incidence of boundary component r (local columns)."""
    m = b.mesh
    faces = b.faces[b.components[r].faces]
    return m.d2.tocsc()[:, faces].toarray()


@pytest.mark.parametrize("name", NAMES)
def test_generators_are_boundary_loops(name):
    t, b, _ = complex_(name)
    for r, comp in enumerate(b.components):
        loops = h1_generators(b, r)
        assert len(loops) == 2 * comp.genus
        comp_edges = set(b.edges[comp.edges].tolist())
        for lp in loops:
            assert len(set(lp)) == len(lp) >= 3
            c = loop_chain(t, lp)
            assert c.is_cycle()
            assert set(c.keys()) <= comp_edges


@pytest.mark.parametrize("name", NAMES)
def test_generators_span_first_homology_of_each_component(name):
    """Generators plus face boundaries form a saturated lattice of the right rank (SNF oracle)."""
    t, b, _ = complex_(name)
    for r, comp in enumerate(b.components):
        if comp.genus == 0 or len(comp.faces) > 1500:
            continue
        S = surface_d2(b, r)
        keep = np.nonzero(np.any(S, axis=1))[0]
        G = np.stack([loop_chain(t, lp).to_dense() for lp in h1_generators(b, r)], 1)
        M = np.hstack([S, G])[keep]
        inv = invariants(M)
        assert len(inv) == rank(S[keep]) + 2 * comp.genus
        assert set(inv) == {1}


@pytest.mark.parametrize("name", NAMES)
def test_retraction_uses_interior_face_arcs_only(name):
    t, b, d = complex_(name)
    for r in range(len(b.components)):
        for lp in h1_generators(b, r):
            arcs = retract_loop(d, lp)
            assert arcs
            assert all(a < t.n_faces and t.face_tets[a, 1] >= 0 for a in arcs)
            assert d.arc_boundary(arcs) == {}


def test_retraction_is_additive_up_to_homology():
    """Chains agree up to pairings at repeated vertices; linking with boundary loops agrees exactly."""
    t, b, d = complex_("torus_with_cavity")
    loops = h1_generators(b, 0)
    c = loop_chain(t, loops[0]).scale(2) - loop_chain(t, loops[1])
    combined = retract_chain(d, c)
    assert d.arc_boundary(combined) == {}
    probes = [PLCycle.from_chain(loop_chain(t, lp)) for r in range(2) for lp in h1_generators(b, r)]
    for x in probes:
        lhs = lk_gauss(d.realize(combined), x)
        rhs = 2 * lk_gauss(d.realize(retract_loop(d, loops[0])), x) - lk_gauss(d.realize(retract_loop(d, loops[1])), x)
        assert lhs == rhs


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(-3, 3), min_size=4, max_size=4))
def test_decompose_loops_reassembles(coefs):
    t, b, _ = complex_("trefoil")
    loops = h1_generators(b, 0)
    c = IntChain(t, 1)
    for lp, k in zip(loops, coefs):
        c = c + loop_chain(t, lp).scale(k)
    parts = decompose_loops(c)
    back = IntChain(t, 1)
    for lp in parts:
        assert len(set(lp)) == len(lp)
        back = back + loop_chain(t, lp)
    assert back == c


@pytest.mark.parametrize("name", ["solid_torus", "torus_with_cavity", "borromean", "trefoil", "hopf"])
def test_classification_splits_each_pairing(name):
    L, _, _, _ = retrieved(name)
    for r, g in enumerate(L.genera):
        Lam = np.asarray(L.pairing[r], dtype=object)
        sig, hat = L.sigma[r], L.sigma_hat[r]
        assert len(sig) == len(hat) == g
        if g == 0:
            continue
        assert rank(np.asarray(Lam, dtype=np.int64)) == g
        right, left = (sig, hat) if r == 0 else (hat, sig)
        assert not np.any(Lam.dot(np.asarray(right, dtype=object).T))
        assert not np.any(np.asarray(left, dtype=object).dot(Lam))
        assert abs(rational_det(np.vstack([sig, hat]))) == 1


def test_classify_rejects_wrong_rank():
    with pytest.raises(Exception):
        classify_loops(np.zeros((2, 2), dtype=int), external=True, g=1)


def test_r_plus_leaves_the_boundary():
    t, b, _ = complex_("torus_with_cavity")
    lp = h1_generators(b, 0)[0]
    c = loop_chain(t, lp)
    pushed = r_plus(c, b)
    assert pushed.is_closed()
    assert len(pushed) == 2 * len(c)
    # the detour points sit strictly inside a tet incident on their edge
    ids = np.array(c.keys())
    de = pushed.b[: len(ids)]
    for e, x in zip(ids, de):
        tet = t.tets[t.edge_tet[e]]
        A = np.vstack([t.points[tet].T, np.ones(4)])
        lam = np.linalg.solve(A, np.append(x, 1.0))
        assert np.all(lam > 1e-9)
    inner = IntChain(t, 1, {e: 1 for e in range(t.n_edges) if b.edge_local[e] < 0})
    assert r_plus(inner, b).normalized() == PLCycle.from_chain(inner).normalized()

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from h2seifert.chains import IntChain, boundary, edge_path_chain
from meshcache import mesh

T = mesh("torus_with_cavity")


def chains(dim, size):
    n = {1: T.n_edges, 2: T.n_faces, 3: T.n_tets}[dim]
    return st.dictionaries(st.integers(0, n - 1), st.integers(-5, 5), max_size=size).map(
        lambda d: IntChain(T, dim, d)
    )


@settings(max_examples=60, deadline=None)
@given(chains(2, 30), chains(2, 30), st.integers(-4, 4))
def test_boundary_is_linear(a, b, k):
    assert boundary(a + b.scale(k)) == boundary(a) + boundary(b).scale(k)


@settings(max_examples=60, deadline=None)
@given(chains(3, 20))
def test_boundary_squared_is_zero(c):
    assert not boundary(boundary(c))


@settings(max_examples=60, deadline=None)
@given(chains(2, 30))
def test_dense_round_trip_and_operator(c):
    assert IntChain.from_dense(T, 2, c.to_dense()) == c
    assert np.array_equal(T.d2 @ c.to_dense(), c.boundary().to_dense())


def test_zero_terms_are_dropped():
    c = IntChain(T, 1, {3: 2, 5: 0})
    assert c.keys() == [3]
    assert not (c - c)
    assert (c * 3)[3] == 6 and (-c)[3] == -2


def test_mixing_dimensions_fails():
    with pytest.raises((ValueError, TypeError)):
        IntChain(T, 1, {0: 1}) + IntChain(T, 2, {0: 1})


def test_closed_edge_path_is_a_cycle():
    t = mesh("single_tet")
    c = edge_path_chain(t, [0, 1, 2])
    assert c.is_cycle()
    assert len(c) == 3
    assert not edge_path_chain(t, [0, 1, 2], closed=False).is_cycle()
    # a face boundary read back as a vertex path
    f = IntChain(t, 2, {0: 1})
    a, b, cc = t.faces[0]
    assert f.boundary() == edge_path_chain(t, [a, b, cc])

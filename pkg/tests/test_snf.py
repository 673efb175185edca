import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from h2seifert.snf import (
    betti,
    integer_kernel,
    invariants,
    left_integer_kernel,
    rank,
    relative_h2_certificate,
    smith_normal_form,
)
from meshcache import complex_, mesh, pipeline
from oracles import float_betti, float_rank, rational_det

int_matrices = st.tuples(st.integers(1, 6), st.integers(1, 6)).flatmap(
    lambda s: arrays(np.int64, s, elements=st.integers(-12, 12))
)


def obj(a):
    return np.array(np.asarray(a).tolist(), dtype=object).reshape(np.shape(a))


def check_snf(m):
    d, U, V = smith_normal_form(m)
    D = obj(U).dot(obj(m)).dot(obj(V))
    k = len(d)
    assert np.array_equal(D[:k, :k], np.diag(d).astype(object)) if k else True
    assert not np.any(D[k:]) and not np.any(D[:, k:])
    assert abs(rational_det(U)) == 1 and abs(rational_det(V)) == 1
    nz = [x for x in d if x]
    assert d[: len(nz)] == nz and all(x > 0 for x in nz)
    assert all(b % a == 0 for a, b in zip(nz, nz[1:]))
    return d


def test_identity_has_unit_invariants():
    assert check_snf(np.eye(4, dtype=int)) == [1, 1, 1, 1]


def test_coprime_diagonal_normalises():
    assert check_snf(np.array([[2, 0], [0, 3]])) == [1, 6]
    assert check_snf(np.array([[4, 0], [0, 6]])) == [2, 12]


def test_triangle_loop_incidence():
    # vertices x edges of a 3-cycle: rank 2, so H0 = H1 = Z
    d1 = np.array([[-1, 0, -1], [1, -1, 0], [0, 1, 1]])
    r = rank(d1)
    assert r == 2
    assert (3 - r, 3 - r) == (1, 1)  # (b0, b1) with 3 vertices, 3 edges, no faces
    assert check_snf(d1) == [1, 1, 0]


@settings(max_examples=80, deadline=None)
@given(int_matrices)
def test_random_matrices(m):
    d = check_snf(m)
    assert sum(1 for x in d if x) == float_rank(m)


@settings(max_examples=40, deadline=None)
@given(int_matrices, st.randoms(use_true_random=False))
def test_invariants_ignore_permutations(m, rnd):
    rows = list(range(m.shape[0]))
    cols = list(range(m.shape[1]))
    rnd.shuffle(rows)
    rnd.shuffle(cols)
    assert invariants(m[rows][:, cols]) == invariants(m)


@settings(max_examples=40, deadline=None)
@given(int_matrices)
def test_kernels_are_saturated(m):
    K = integer_kernel(m)
    assert not np.any(obj(m).dot(obj(K)))
    assert K.shape[1] == m.shape[1] - rank(m)
    if K.shape[1]:
        assert invariants(K) == [1] * K.shape[1]
    C = left_integer_kernel(m)
    assert not np.any(obj(C).dot(obj(m)))


def test_big_entries_switch_to_python_integers():
    m = np.array([[2**40, 3], [5, 2**41]], dtype=object)
    check_snf(m)
    assert invariants(m) == [1, abs(2**81 - 15)]


def test_size_guard():
    with pytest.raises(ValueError):
        smith_normal_form(np.zeros((10, 3), dtype=int), max_size=5)


@pytest.mark.parametrize(
    "name,expected",
    [("single_tet", [1, 0, 0, 0]), ("solid_torus", [1, 1, 0, 0]), ("torus_with_cavity", [1, 2, 1, 0])],
)
def test_betti_numbers(name, expected):
    t = mesh(name)
    assert betti(t) == expected == float_betti(t)


@pytest.mark.parametrize("name", ["torus_with_cavity", "cube_with_ring_cavity", "thin_solid_torus"])
def test_face_kernel_rank_is_tets_plus_cavities(name):
    t, b, _ = complex_(name)
    assert t.n_faces - rank(t.d2) == t.n_tets + b.p


def test_relative_second_homology_of_torus_with_cavity():
    res = pipeline("torus_with_cavity")
    surfaces = [dict(S.chain.items()) for S in res.surfaces]
    cert = relative_h2_certificate(res.mesh, surfaces)
    assert cert == {"b2_rel": 2, "relative_cycles": True, "basis": True}
    # a surface counted twice no longer spans
    assert not relative_h2_certificate(res.mesh, [surfaces[0], surfaces[0]])["basis"]
    doubled = {f: 2 * c for f, c in surfaces[1].items()}
    assert not relative_h2_certificate(res.mesh, [surfaces[0], doubled])["basis"]

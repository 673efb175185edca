import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from h2seifert.errors import LinkingError
from h2seifert.linking import (
    RESIDUAL_TOL,
    LinkingOracle,
    PLCycle,
    certify_boundary,
    crossing_number,
    gauss_raw,
    linking_budget,
    lk_combinatorial,
    lk_gauss,
)
from oracles import circle, gauss_quadrature

X, Y, Z = np.eye(3)
N_RANDOM = 200


def poly(pts, w=1):
    return PLCycle.from_polygon(np.asarray(pts), w)


def hopf():
    return poly(circle((0, 0, 0), X, Y)), poly(circle((1, 0, 0), X, Z))


def random_frame(rng):
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    return q[0], q[1]


def random_pair(rng):
    """Two perturbed polygons around random circles; linked about half the time."""
    while True:
        u1, v1 = random_frame(rng)
        u2, v2 = random_frame(rng)
        c2 = rng.uniform(-1.2, 1.2, size=3)
        k1, k2 = rng.integers(5, 13, size=2)
        a = circle((0, 0, 0), u1, v1, n=k1) + rng.normal(scale=0.15, size=(k1, 3))
        b = circle(c2, u2, v2, n=k2) + rng.normal(scale=0.15, size=(k2, 3))
        g, e = poly(a), poly(b)
        _, dmin = gauss_raw(g, e)
        if dmin > 0.05:
            return g, e, dmin


def random_triangle_away_from(eta, rng, center):
    while True:
        tri = center + rng.normal(scale=0.6, size=(3, 3))
        _, dmin = gauss_raw(poly(tri), eta)
        if dmin > 0.05:
            return tri


@pytest.fixture(scope="module")
def random_pairs():
    rng = np.random.default_rng(7)
    return [random_pair(rng) for _ in range(N_RANDOM)]


# -- fixed configurations ----------------------------------------------------------


def test_hopf_link_is_plus_or_minus_one():
    g, e = hopf()
    assert abs(lk_gauss(g, e)) == 1
    assert lk_gauss(g, e) == -lk_gauss(-g, e)
    assert lk_combinatorial(g, e) == lk_gauss(g, e)


def test_sign_follows_the_gauss_integral():
    g, e = hopf()
    q = gauss_quadrature(g.a, g.b, e.a, e.b)
    assert round(q) == lk_gauss(g, e)
    r = lk_gauss(g, e, detail=True)
    assert abs(r.raw - q) < 1e-3


def test_split_circles_have_zero_linking():
    g = poly(circle((0, 0, 0), X, Y))
    e = poly(circle((5, 0, 0), X, Z))
    assert lk_gauss(g, e) == 0 == lk_combinatorial(g, e)
    # concentric circles in parallel planes do not link either
    assert lk_gauss(g, poly(circle((0, 0, 1), X, Y, r=0.5))) == 0


@pytest.mark.parametrize("q", [1, 2, 3])
def test_torus_curve_links_core_q_times(q):
    t = 2 * np.pi * np.arange(40 * q) / (40 * q)
    r = 0.4
    curve = np.stack([(1 + r * np.cos(q * t)) * np.cos(t), (1 + r * np.cos(q * t)) * np.sin(t), r * np.sin(q * t)], 1)
    g, core = poly(curve), poly(circle((0, 0, 0), X, Y, n=48))
    assert abs(lk_gauss(g, core)) == q
    assert lk_combinatorial(g, core) == lk_gauss(g, core)
    assert lk_gauss(g.scale(-2), core) == -2 * lk_gauss(g, core)


def test_touching_cycles_are_rejected():
    g = poly(circle((0, 0, 0), X, Y))
    e = poly(circle((1, 0, 1), X, Z))  # passes through the vertex (1, 0, 0) of g
    with pytest.raises(LinkingError):
        lk_gauss(g, e)


def test_empty_cycles_link_trivially():
    g, _ = hopf()
    assert lk_gauss(PLCycle.empty(), g) == 0 == lk_combinatorial(g, PLCycle.empty())


# -- randomized suite -----------------------------------------------------------


def test_random_pairs_symmetry_and_residual(random_pairs):
    for g, e, _ in random_pairs:
        r = lk_gauss(g, e, detail=True)
        assert r.residual < RESIDUAL_TOL
        assert lk_gauss(e, g) == r.value


def test_random_pairs_are_not_all_trivial(random_pairs):
    values = [lk_gauss(g, e) for g, e, _ in random_pairs]
    assert sum(v != 0 for v in values) >= N_RANDOM // 5
    assert sum(v == 0 for v in values) >= N_RANDOM // 5


def test_random_pairs_scale_bilinearly(random_pairs):
    ns = np.random.default_rng(3).integers(-3, 4, size=(N_RANDOM, 2))
    for (g, e, _), (n, m) in zip(random_pairs, ns):
        assert lk_gauss(g.scale(n), e.scale(m)) == n * m * lk_gauss(g, e)


def test_random_pairs_match_quadrature(random_pairs):
    compared = 0
    for g, e, dmin in random_pairs:
        if dmin < 0.1:
            continue
        q = gauss_quadrature(g.a, g.b, e.a, e.b, n=32)
        assert round(q) == lk_gauss(g, e)
        compared += 1
    assert compared >= N_RANDOM // 2


def test_random_pairs_backends_agree(random_pairs):
    for g, e, _ in random_pairs:
        assert lk_combinatorial(g, e) == lk_gauss(g, e)


def test_random_pairs_invariant_under_added_boundaries(random_pairs):
    """lk(g + dT, e) = lk(g, e) + [e . T]; zero change when e misses T."""
    rng = np.random.default_rng(11)
    unchanged = 0
    for g, e, _ in random_pairs:
        center = g.a[rng.integers(len(g.a))]
        tri = random_triangle_away_from(e, rng, center)
        through = crossing_number(e, tri[None], np.array([1]))
        assert lk_gauss(g + poly(tri), e) == lk_gauss(g, e) + through
        unchanged += through == 0
    assert unchanged >= N_RANDOM // 4


@settings(max_examples=40, deadline=None)
@given(st.tuples(*[st.floats(-5, 5) for _ in range(3)]), st.integers(-3, 3))
def test_translation_and_orientation(shift, n):
    g, e = hopf()
    d = np.array(shift)
    assert lk_gauss(g.translated(d), e.translated(d)) == lk_gauss(g, e)
    assert lk_gauss(g.scale(n), e) == n * lk_gauss(g, e)


# -- oracle bookkeeping ---------------------------------------------------------------


@pytest.mark.parametrize(
    "genera,budget",
    [([1, 1], 10), ([0, 1, 1, 1], 18), ([2, 1], 24), ([2, 1, 1], 34), ([1], 4), ([0], 0), ([3], 36)],
)
def test_linking_budget(genera, budget):
    assert linking_budget(genera) == budget


def test_oracle_counts_by_category_and_cross_checks():
    g, e = hopf()
    orc = LinkingOracle(cross_check=True)
    orc.lk(g, e)
    orc.lk(g, e, "certification")
    assert orc.counts == {"construction": 1, "certification": 1}
    assert orc.n_agree == 2 and orc.total == 2
    comb = LinkingOracle(backend="combinatorial", cross_check=True)
    assert comb.lk(g, e) == orc.lk(g, e)


def test_certify_boundary():
    g, e = hopf()
    far = poly(circle((9, 0, 0), X, Y))
    assert certify_boundary(g, [far], LinkingOracle()) == (True, [0])
    ok, values = certify_boundary(g, [e, far], LinkingOracle())
    assert not ok and abs(values[0]) == 1

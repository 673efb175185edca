"""Linking numbers of disjoint piecewise-linear 1-cycles.

Two independent backends:

* ``lk_gauss`` sums the exact solid-angle contribution of every segment pair
  (closed form of the Gauss double integral) and rounds.
* ``lk_combinatorial`` counts signed crossings of one cycle through a Seifert
  surface of the other (a cone over the cycle unless a surface is supplied),
  with exact rational predicates and a symbolic shift for degenerate cases.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DegeneracyError, LinkingError

RESIDUAL_TOL = 0.25
SEP_REL = 1e-9
_CHUNK = 1 << 20


@dataclass(eq=False)
class PLCycle:
    """Oriented segments ``a[i] -> b[i]`` with integer multiplicities ``w[i]``."""

    a: np.ndarray
    b: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        self.a = np.asarray(self.a, dtype=float).reshape(-1, 3)
        self.b = np.asarray(self.b, dtype=float).reshape(-1, 3)
        self.w = np.asarray(self.w, dtype=np.int64).reshape(-1)
        keep = (self.w != 0) & np.any(self.a != self.b, axis=1)
        if not keep.all():
            self.a, self.b, self.w = self.a[keep], self.b[keep], self.w[keep]

    @classmethod
    def empty(cls):
        return cls(np.zeros((0, 3)), np.zeros((0, 3)), np.zeros(0, dtype=np.int64))

    @classmethod
    def from_polygon(cls, pts, w=1):
        pts = np.asarray(pts, dtype=float)
        return cls(pts, np.roll(pts, -1, axis=0), np.full(len(pts), w))

    @classmethod
    def from_chain(cls, chain):
        """Realization of an edge 1-chain of a Triangulation."""
        items = chain.items()
        if not items:
            return cls.empty()
        ids = np.array([i for i, _ in items])
        e = chain.mesh.edges[ids]
        P = chain.mesh.points
        return cls(P[e[:, 0]], P[e[:, 1]], [c for _, c in items])

    def __len__(self):
        return len(self.w)

    def __add__(self, other):
        return PLCycle(
            np.concatenate([self.a, other.a]), np.concatenate([self.b, other.b]), np.concatenate([self.w, other.w])
        )

    def __neg__(self):
        return PLCycle(self.a, self.b, -self.w)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, n):
        return PLCycle(self.a, self.b, self.w * int(n))

    def translated(self, d):
        return PLCycle(self.a + d, self.b + d, self.w)

    def normalized(self, decimals=9):
        """Canonical ``{(p, q): weight}`` with p < q lexicographically; for equality tests."""
        out = {}
        ka = [tuple(r) for r in np.round(self.a, decimals).tolist()]
        kb = [tuple(r) for r in np.round(self.b, decimals).tolist()]
        for p, q, w in zip(ka, kb, self.w.tolist()):
            if q < p:
                p, q, w = q, p, -w
            v = out.get((p, q), 0) + w
            if v:
                out[(p, q)] = v
            else:
                out.pop((p, q))
        return out

    def endpoint_balance(self, decimals=9):
        bal = {}
        for pts, s in ((self.b, 1), (self.a, -1)):
            for p, w in zip(map(tuple, np.round(pts, decimals).tolist()), self.w.tolist()):
                v = bal.get(p, 0) + s * w
                if v:
                    bal[p] = v
                else:
                    bal.pop(p)
        return bal

    def is_closed(self):
        return not self.endpoint_balance()

    def points(self):
        return np.concatenate([self.a, self.b])


# -- geometry helpers --------------------------------------------------------


def _unit(v):
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    return np.divide(v, n, out=np.zeros_like(v), where=n > 0)


def _pair_solid_angle(p1, p2, p3, p4):
    """Signed Gauss integral (times 4 pi) of segment pairs p1->p2, p3->p4 (broadcast)."""
    r13, r14 = p3 - p1, p4 - p1
    r23, r24 = p3 - p2, p4 - p2
    n1 = _unit(np.cross(r13, r14))
    n2 = _unit(np.cross(r14, r24))
    n3 = _unit(np.cross(r24, r23))
    n4 = _unit(np.cross(r23, r13))

    def asin_dot(u, v):
        return np.arcsin(np.clip(np.einsum("...i,...i->...", u, v), -1.0, 1.0))

    omega = asin_dot(n1, n2) + asin_dot(n2, n3) + asin_dot(n3, n4) + asin_dot(n4, n1)
    s = np.einsum("...i,...i->...", np.cross(p4 - p3, p2 - p1), r13)
    return omega * np.sign(s)


def _segment_distance(p1, q1, p2, q2):
    """Minimum distance between segments [p1,q1] and [p2,q2] (broadcast)."""
    d1, d2, r = q1 - p1, q2 - p2, p1 - p2
    a = np.einsum("...i,...i->...", d1, d1)
    e = np.einsum("...i,...i->...", d2, d2)
    f = np.einsum("...i,...i->...", d2, r)
    c = np.einsum("...i,...i->...", d1, r)
    b = np.einsum("...i,...i->...", d1, d2)
    denom = a * e - b * b
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(denom > 1e-30 * a * e, np.clip((b * f - c * e) / denom, 0, 1), 0.0)
        t = (b * s + f) / e
        s = np.where(t < 0, np.clip(-c / a, 0, 1), np.where(t > 1, np.clip((b - c) / a, 0, 1), s))
        t = np.clip(t, 0, 1)
    diff = p1 + d1 * s[..., None] - (p2 + d2 * t[..., None])
    return np.linalg.norm(diff, axis=-1)


def bbox_diagonal(*cycles):
    pts = np.concatenate([c.points() for c in cycles if len(c)] or [np.zeros((1, 3))])
    return float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))


@dataclass
class GaussResult:
    value: int
    raw: float
    residual: float
    min_distance: float


def gauss_raw(gamma: PLCycle, eta: PLCycle, check_separation=True):
    """Unrounded Gauss integral and minimum segment distance."""
    if len(gamma) == 0 or len(eta) == 0:
        return 0.0, np.inf
    total = 0.0
    dmin = np.inf
    m = len(eta)
    step = max(1, _CHUNK // m)
    for i in range(0, len(gamma), step):
        ga, gb, gw = gamma.a[i : i + step, None], gamma.b[i : i + step, None], gamma.w[i : i + step, None]
        om = _pair_solid_angle(ga, gb, eta.a[None], eta.b[None])
        total += float(np.sum(om * gw * eta.w[None]))
        if check_separation:
            dmin = min(dmin, float(_segment_distance(ga, gb, eta.a[None], eta.b[None]).min()))
    return total / (4 * np.pi), dmin


def lk_gauss(gamma: PLCycle, eta: PLCycle, scale=None, detail=False):
    """Linking number by the closed-form Gauss integral, rounded to the nearest integer."""
    raw, dmin = gauss_raw(gamma, eta)
    scale = bbox_diagonal(gamma, eta) if scale is None else scale
    tau = SEP_REL * scale
    if dmin <= tau:
        raise LinkingError(f"cycles are not separated (distance {dmin:.3e} <= {tau:.3e})")
    value = int(round(raw))
    res = abs(raw - value)
    if res >= RESIDUAL_TOL:
        raise LinkingError(f"Gauss integral {raw:.6f} is not close to an integer")
    if detail:
        return GaussResult(value, raw, res, dmin)
    return value


# -- combinatorial backend -----------------------------------------------------


def cone_surface(eta: PLCycle, apex=None):
    """Triangles [apex, a, b] with weights w; their boundary is ``eta``."""
    if apex is None:
        apex = default_apex(eta)
    apex = np.broadcast_to(np.asarray(apex, dtype=float), eta.a.shape)
    return np.stack([apex, eta.a, eta.b], axis=1), eta.w.copy()


def default_apex(*cycles):
    pts = np.concatenate([c.points() for c in cycles if len(c)] or [np.zeros((1, 3))])
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    diag = max(float(np.linalg.norm(hi - lo)), 1.0)
    direction = np.array([0.5772156649, 0.3183098862, 0.7514080600])  # fixed, generic
    return 0.5 * (lo + hi) + 3.0 * diag * direction / np.linalg.norm(direction)


def surface_triangles(chain):
    """(triangles, weights) of a face 2-chain, canonical vertex order."""
    items = chain.items()
    ids = np.array([i for i, _ in items], dtype=np.int64)
    tri = chain.mesh.points[chain.mesh.faces[ids]] if len(ids) else np.zeros((0, 3, 3))
    return tri, np.array([c for _, c in items], dtype=np.int64)


def _det3(u, v, w):
    return np.einsum("...i,...i->...", np.cross(u, v), w)


def _fdet(u, v, w):
    return (
        u[0] * (v[1] * w[2] - v[2] * w[1])
        - u[1] * (v[0] * w[2] - v[2] * w[0])
        + u[2] * (v[0] * w[1] - v[1] * w[0])
    )


def _fcross(u, v):
    return (u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0])


def _fsub(u, v):
    return tuple(x - y for x, y in zip(u, v))


def _lex_sign(seq):
    for x in seq:
        if x:
            return 1 if x > 0 else -1
    return 0


def _exact_crossing(p, q, a, b, c):
    """Signed crossing of segment p->q (shifted by (e, e^2, e^3)) with triangle abc."""
    F = lambda x: tuple(Fraction(float(t)) for t in x)  # noqa: E731
    p, q, a, b, c = map(F, (p, q, a, b, c))
    n = _fcross(_fsub(b, a), _fsub(c, a))

    def side(x):
        return _lex_sign((_fdet(_fsub(b, a), _fsub(c, a), _fsub(x, a)), *n))

    sp, sq = side(p), side(q)
    if sp == 0 or sq == 0:
        raise DegeneracyError("segment lies in the plane of a surface triangle")
    if sp == sq:
        return 0
    d = _fsub(q, p)

    def edge(A, B):
        base = _fdet(d, _fsub(A, p), _fsub(B, p))
        return _lex_sign((base, *_fcross(_fsub(A, B), d)))

    s = [edge(a, b), edge(b, c), edge(c, a)]
    if 0 in s:
        raise DegeneracyError("segment meets a triangle edge after symbolic perturbation")
    if s[0] == s[1] == s[2]:
        return sq
    return 0


def crossing_number(gamma: PLCycle, triangles, weights, filter_rel=1e-9):
    """Weighted signed intersection number of ``gamma`` with a triangle chain."""
    if len(gamma) == 0 or len(weights) == 0:
        return 0
    A, B, C = triangles[:, 0], triangles[:, 1], triangles[:, 2]
    nrm = np.cross(B - A, C - A)
    m = len(weights)
    step = max(1, _CHUNK // m)
    total = 0
    n_exact = 0
    for i in range(0, len(gamma), step):
        p = gamma.a[i : i + step, None]
        q = gamma.b[i : i + step, None]
        gw = gamma.w[i : i + step]
        d = q - p
        op = np.einsum("...i,...i->...", nrm[None], p - A[None])
        oq = np.einsum("...i,...i->...", nrm[None], q - A[None])
        nn = np.linalg.norm(nrm, axis=-1)[None]
        tol_p = filter_rel * nn * np.linalg.norm(p - A[None], axis=-1)
        tol_q = filter_rel * nn * np.linalg.norm(q - A[None], axis=-1)
        s1 = _det3(d, A[None] - p, B[None] - p)
        s2 = _det3(d, B[None] - p, C[None] - p)
        s3 = _det3(d, C[None] - p, A[None] - p)
        dl = np.linalg.norm(d, axis=-1)

        def tol_e(X, Y):
            return filter_rel * dl * np.linalg.norm(X[None] - p, axis=-1) * np.linalg.norm(Y[None] - p, axis=-1)

        unsure_plane = (np.abs(op) <= tol_p) | (np.abs(oq) <= tol_q)
        straddle = (np.sign(op) * np.sign(oq) < 0) & ~unsure_plane
        unsure_edge = straddle & (
            (np.abs(s1) <= tol_e(A, B)) | (np.abs(s2) <= tol_e(B, C)) | (np.abs(s3) <= tol_e(C, A))
        )
        same = (np.sign(s1) == np.sign(s2)) & (np.sign(s2) == np.sign(s3))
        hit = straddle & same & ~unsure_edge
        contrib = np.where(hit, np.sign(oq).astype(np.int64), 0) * weights[None]
        total += int(np.sum(contrib.sum(axis=1) * gw))
        # possibly degenerate configurations: exact predicates
        for gi, ti in zip(*np.nonzero(unsure_plane | unsure_edge)):
            n_exact += 1
            s = _exact_crossing(gamma.a[i + gi], gamma.b[i + gi], A[ti], B[ti], C[ti])
            total += int(s) * int(weights[ti]) * int(gw[gi])
    return total


def lk_combinatorial(gamma: PLCycle, eta: PLCycle, surface=None):
    """Linking number as the signed crossing count of ``gamma`` through a Seifert surface of ``eta``.

    ``surface`` is ``(triangles, weights)`` with boundary ``eta``; a cone over
    ``eta`` with a far-away apex is used when omitted.
    """
    if surface is None:
        surface = cone_surface(eta, default_apex(gamma, eta))
    tri, w = surface
    return crossing_number(gamma, np.asarray(tri, dtype=float), np.asarray(w, dtype=np.int64))


# -- budget / certification ----------------------------------------------------


def linking_budget(genera):
    """Number of linking evaluations the construction needs: g^2 + 3 sum g_r^2."""
    genera = [int(x) for x in genera]
    if any(x < 0 for x in genera):
        raise ValueError("genera must be non-negative")
    g = sum(genera)
    return g * g + 3 * sum(x * x for x in genera)


@dataclass
class LinkingOracle:
    """Counted linking-number evaluations with optional backend cross-check.

    ``category`` separates the evaluations the construction needs from
    certification, audit and fallback work.
    """

    backend: str = "gauss"
    cross_check: bool = False
    scale: float | None = None
    counts: Counter = field(default_factory=Counter)
    max_residual: float = 0.0
    n_agree: int = 0
    n_disagree: int = 0
    n_backend_fallback: int = 0

    def __call__(self, gamma, eta, category="construction"):
        return self.lk(gamma, eta, category)

    def lk(self, gamma, eta, category="construction"):
        self.counts[category] += 1
        if self.backend == "combinatorial":
            value = lk_combinatorial(gamma, eta)
        else:
            try:
                r = lk_gauss(gamma, eta, scale=self.scale, detail=True)
                self.max_residual = max(self.max_residual, r.residual)
                value = r.value
            except LinkingError:
                self.n_backend_fallback += 1
                value = lk_combinatorial(gamma, eta)
        if self.cross_check:
            other = lk_combinatorial(gamma, eta) if self.backend != "combinatorial" else lk_gauss(gamma, eta, self.scale)
            if other == value:
                self.n_agree += 1
            else:
                self.n_disagree += 1
                raise LinkingError(f"linking backends disagree: {value} vs {other}")
        return value

    @property
    def total(self):
        return sum(self.counts.values())


def certify_boundary(sigma_plus: PLCycle, outside_basis, oracle=None):
    """True iff the (interior-retracted) cycle has zero linking with every outside cycle.

    Returns ``(ok, values)``.
    """
    oracle = oracle or LinkingOracle()
    values = [oracle.lk(sigma_plus, x, category="certification") for x in outside_basis]
    return all(v == 0 for v in values), values

"""Dense Smith normal form over the integers (oracle for ranks and Betti numbers).

Elimination pivots on the smallest-magnitude nonzero entry of the current
column/row.  Arithmetic runs in int64 while entries stay small and restarts
with Python integers (object arrays) otherwise.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

MAX_SIZE = 5000
_INT64_GUARD = 1 << 31


class _Overflow(Exception):
    pass


def _dense(m):
    if sp.issparse(m):
        m = m.toarray()
    return np.asarray(m)


def smith_normal_form(m, transforms=True, max_size=MAX_SIZE):
    """Return ``(d, U, V)`` with ``U @ m @ V`` diagonal, ``d`` the diagonal, ``d[i] | d[i+1]``.

    ``U`` and ``V`` are unimodular (``None`` when ``transforms`` is False).  ``d``
    has length ``min(rows, cols)`` and holds non-negative Python ints.
    """
    a = _dense(m)
    if a.ndim != 2:
        raise ValueError("expected a matrix")
    if max(a.shape) > max_size:
        raise ValueError(f"matrix {a.shape} exceeds the oracle size guard {max_size}")
    if a.dtype != object and np.abs(a).max(initial=0) < _INT64_GUARD:
        try:
            return _snf(a.astype(np.int64), transforms, np.int64)
        except _Overflow:
            pass
    return _snf(np.array(a.tolist(), dtype=object).reshape(a.shape), transforms, object)


def _snf(A, transforms, dtype):
    A = A.copy()
    m, n = A.shape
    guard = dtype is np.int64
    U = np.eye(m, dtype=dtype) if transforms else None
    V = np.eye(n, dtype=dtype) if transforms else None
    if dtype is object and transforms:
        U = np.array(np.eye(m, dtype=np.int64).tolist(), dtype=object).reshape(m, m)
        V = np.array(np.eye(n, dtype=np.int64).tolist(), dtype=object).reshape(n, n)

    def check(*arrs):
        if guard:
            for x in arrs:
                if x.size and np.abs(x).max() >= _INT64_GUARD:
                    raise _Overflow

    def swap_rows(i, j):
        if i != j:
            A[[i, j]] = A[[j, i]]
            if transforms:
                U[[i, j]] = U[[j, i]]

    def swap_cols(i, j):
        if i != j:
            A[:, [i, j]] = A[:, [j, i]]
            if transforms:
                V[:, [i, j]] = V[:, [j, i]]

    k = 0
    last = n  # columns >= last are known to be zero below row k
    while k < min(m, last):
        col = A[k:, k]
        nz = np.nonzero(col)[0]
        if len(nz) == 0:
            last -= 1
            swap_cols(k, last)
            continue
        while True:
            col = A[k:, k]
            nz = np.nonzero(col)[0]
            r = k + nz[np.argmin(np.abs(col[nz]))]
            swap_rows(k, r)
            p = A[k, k]
            rows = k + 1 + np.nonzero(A[k + 1 :, k])[0]
            if len(rows):
                q = A[rows, k] // p
                A[rows, k:] -= q[:, None] * A[k, k:][None, :]
                if transforms:
                    U[rows] -= q[:, None] * U[k][None, :]
                check(A[rows])
                if np.any(A[k + 1 :, k] != 0):
                    continue
            cols = k + 1 + np.nonzero(A[k, k + 1 :])[0]
            if len(cols):
                q = A[k, cols] // p
                A[k, cols] -= q * p  # column k is zero outside row k
                if transforms:
                    V[:, cols] -= V[:, k][:, None] * q[None, :]
                    check(V)
                rem = k + 1 + np.nonzero(A[k, k + 1 :])[0]
                if len(rem):
                    c = rem[np.argmin(np.abs(A[k, rem]))]
                    swap_cols(k, c)
                    continue
            break
        k += 1

    d = [int(A[i, i]) for i in range(min(m, n))]
    # divisibility chain and signs on the diagonal via 2x2 unimodular moves
    for i in range(len(d)):
        for j in range(i + 1, len(d)):
            a, b = d[i], d[j]
            if b == 0 or (a != 0 and b % a == 0):
                continue
            if a == 0:
                d[i], d[j] = b, 0
                if transforms:
                    U[[i, j]] = U[[j, i]]
                    V[:, [i, j]] = V[:, [j, i]]
                continue
            g, x, y = _xgcd(a, b)
            d[i], d[j] = g, a * b // g
            if transforms:
                ui, uj = U[i].copy(), U[j].copy()
                U[i] = x * ui + y * uj
                U[j] = (-b // g) * ui + (a // g) * uj
                vi, vj = V[:, i].copy(), V[:, j].copy()
                V[:, i] = vi + vj
                V[:, j] = (-y * b // g) * vi + (x * a // g) * vj
                check(U, V)
    for i in range(len(d)):
        if d[i] < 0:
            d[i] = -d[i]
            if transforms:
                U[i] = -U[i]
    return d, U, V


def _xgcd(a, b):
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def invariants(m, max_size=MAX_SIZE):
    d, _, _ = smith_normal_form(m, transforms=False, max_size=max_size)
    return [x for x in d if x]


def rank(m, max_size=MAX_SIZE):
    a = _dense(m)
    if a.size == 0:
        return 0
    return len(invariants(a, max_size))


def integer_kernel(m):
    """Basis (columns) of the right integer kernel of ``m``, from the SNF transform."""
    a = _dense(m)
    d, _, V = smith_normal_form(a)
    r = sum(1 for x in d if x)
    return V[:, r:]


def left_integer_kernel(m):
    """Basis (rows) of the left integer kernel of ``m``."""
    a = _dense(m)
    d, U, _ = smith_normal_form(a)
    r = sum(1 for x in d if x)
    return U[r:]


def boundary_ranks(t, max_size=MAX_SIZE):
    """Ranks of the incidence operators d1, d2, d3 of a Triangulation."""
    return [rank(t.d1, max_size), rank(t.d2, max_size), rank(t.d3, max_size)]


def betti(t, k=None, max_size=MAX_SIZE):
    """Betti number b_k of the triangulated domain (all of them if ``k`` is None)."""
    r1, r2, r3 = boundary_ranks(t, max_size)
    sizes = [t.n_vertices, t.n_edges, t.n_faces, t.n_tets]
    ranks = [0, r1, r2, r3, 0]
    b = [sizes[i] - ranks[i] - ranks[i + 1] for i in range(4)]
    return b if k is None else b[k]


def relative_operators(t):
    """Incidence operators of the pair (domain, boundary): interior simplices only."""
    inner_f = np.nonzero(t.face_tets[:, 1] >= 0)[0]
    bedge = np.zeros(t.n_edges, dtype=bool)
    bf = np.nonzero(t.face_tets[:, 1] < 0)[0]
    bedge[t.face_edges[bf].ravel()] = True
    inner_e = np.nonzero(~bedge)[0]
    d3 = t.d3.tocsr()[inner_f]
    d2 = t.d2.tocsr()[inner_e][:, inner_f]
    return inner_f, inner_e, d2, d3


def relative_h2_certificate(t, surfaces, max_size=MAX_SIZE):
    """Check that 2-chains form a basis of the relative second homology.

    Returns a dict with the relative Betti number and whether the projected
    surfaces are relative cycles that, together with the tet boundaries,
    span the relative cycle lattice.
    """
    inner_f, inner_e, d2, d3 = relative_operators(t)
    pos = np.full(t.n_faces, -1, dtype=np.int64)
    pos[inner_f] = np.arange(len(inner_f))
    S = np.zeros((len(inner_f), len(surfaces)), dtype=np.int64)
    for j, s in enumerate(surfaces):
        for f, c in s.items():
            if pos[f] >= 0:
                S[pos[f], j] = c
    r2 = rank(d2, max_size)
    r3 = rank(d3, max_size)
    b2_rel = len(inner_f) - r2 - r3
    cycles = not np.any(d2 @ S) if len(surfaces) else True
    inv = invariants(np.hstack([d3.toarray(), S]), max_size)
    spans = len(inv) == r3 + len(surfaces) and all(x == 1 for x in inv) and len(surfaces) == b2_rel
    return {"b2_rel": b2_rel, "relative_cycles": bool(cycles), "basis": bool(spans and cycles)}

"""Independent reference computations used by the tests.

None of these reuse the package's numerics: linking numbers come from brute
quadrature of the Gauss double integral, ranks from floating point SVD,
determinants from rational elimination.
"""

from fractions import Fraction

import numpy as np


def gauss_quadrature(a1, b1, a2, b2, n=24):
    """Gauss double integral of two polygons (segment arrays) by Gauss-Legendre quadrature.

    Integrand ``(x - y) . (dx x dy) / |x - y|^3 / 4pi``; accurate only for
    well separated curves.
    """
    s, w = np.polynomial.legendre.leggauss(n)
    s, w = 0.5 * (s + 1), 0.5 * w
    x = a1[:, None] + s[None, :, None] * (b1 - a1)[:, None]  # (m, n, 3)
    y = a2[:, None] + s[None, :, None] * (b2 - a2)[:, None]
    dx, dy = b1 - a1, b2 - a2
    cr = np.cross(dx[:, None], dy[None])  # (m, k, 3)
    diff = x[:, None, :, None] - y[None, :, None, :]  # (m, k, n, n, 3)
    r3 = np.linalg.norm(diff, axis=-1) ** 3
    num = np.einsum("mkijd,mkd->mkij", diff, cr)
    ww = w[:, None] * w[None, :]
    return float(np.sum(num / r3 * ww) / (4 * np.pi))


def polygon_segments(pts):
    pts = np.asarray(pts, dtype=float)
    return pts, np.roll(pts, -1, axis=0)


def circle(center, u, v, r=1.0, n=64):
    t = 2 * np.pi * np.arange(n) / n
    c, u, v = (np.asarray(x, dtype=float) for x in (center, u, v))
    return c + r * (np.cos(t)[:, None] * u + np.sin(t)[:, None] * v)


def rational_det(A):
    M = [[Fraction(int(x)) for x in row] for row in np.asarray(A, dtype=object).tolist()]
    n = len(M)
    det = Fraction(1)
    for k in range(n):
        piv = next((i for i in range(k, n) if M[i][k] != 0), None)
        if piv is None:
            return 0
        if piv != k:
            M[k], M[piv] = M[piv], M[k]
            det = -det
        det *= M[k][k]
        for i in range(k + 1, n):
            f = M[i][k] / M[k][k]
            M[i] = [x - f * y for x, y in zip(M[i], M[k])]
    return int(det)


def float_rank(m):
    a = m.toarray() if hasattr(m, "toarray") else np.asarray(m, dtype=float)
    if a.size == 0:
        return 0
    return int(np.linalg.matrix_rank(a.astype(float)))


def float_betti(t):
    """Rational Betti numbers of a triangulation (equal to the integral ones when torsion-free)."""
    r1, r2, r3 = float_rank(t.d1), float_rank(t.d2), float_rank(t.d3)
    sizes = [t.n_vertices, t.n_edges, t.n_faces, t.n_tets]
    ranks = [0, r1, r2, r3, 0]
    return [sizes[i] - ranks[i] - ranks[i + 1] for i in range(4)]


def euler_genus(n_vertices, n_edges, n_faces):
    chi = n_vertices - n_edges + n_faces
    return (2 - chi) // 2

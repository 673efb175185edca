"""Correction of the outside-bounding surface loops into 1-boundaries of the mesh.

Component 0 is the external boundary, ``1..p`` are cavities.  For the external
component the loops ``sigma_hat[0]`` are corrected by cavity loops
``sigma_hat[i]``; for a cavity ``r`` the loops ``sigma[r]`` are corrected by
``sigma[0]`` and ``sigma_hat[i]`` (``i != r``).  The coefficients solve
block-diagonal unimodular integer systems assembled from linking numbers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CertificationError, SeifertError
from .linking import LinkingOracle, certify_boundary
from .loops import SurfaceLoopSet


def _obj(a):
    a = np.asarray(a)
    return np.array(a.tolist(), dtype=object).reshape(a.shape)


def bareiss_solve(A, b=None):
    """Fraction-free Gauss-Jordan elimination.

    Returns ``(det, x)`` with ``A x = det * y`` solved exactly as ``x = y`` when
    ``|det| = 1``; for other determinants ``x`` is ``None`` unless the solution
    happens to be integral.
    """
    A = [list(map(int, row)) for row in np.asarray(A, dtype=object).tolist()]
    n = len(A)
    if n == 0:
        return 1, []
    rhs = [int(x) for x in (np.zeros(n, dtype=object) if b is None else b)]
    M = [row + [r] for row, r in zip(A, rhs)]
    sign, prev = 1, 1
    for k in range(n):
        piv = next((i for i in range(k, n) if M[i][k] != 0), None)
        if piv is None:
            return 0, None
        if piv != k:
            M[k], M[piv] = M[piv], M[k]
            sign = -sign
        pk = M[k][k]
        for i in range(n):
            if i == k:
                continue
            mik = M[i][k]
            M[i] = [(pk * M[i][j] - mik * M[k][j]) // prev if j != k else 0 for j in range(n + 1)]
        prev = pk
    det = sign * M[n - 1][n - 1]
    x = []
    for i in range(n):
        num, den = M[i][n], M[i][i]
        if num % den:
            return det, None
        x.append(num // den)
    return det, x


def block_from_pairing(Lam, left_rows, right_rows):
    """``left Lam^T right^T``: entry (l, j) = lk(right_j^+, left_l) by bilinearity."""
    if len(left_rows) == 0 or len(right_rows) == 0:
        return np.zeros((len(left_rows), len(right_rows)), dtype=object)
    return _obj(left_rows).dot(_obj(Lam).T).dot(_obj(right_rows).T)


@dataclass
class LinkingSystem:
    genera: list
    blocks: dict = field(default_factory=dict)  # k -> A_kk
    block_det: dict = field(default_factory=dict)
    beta: dict = field(default_factory=dict)  # (r, s) -> list
    alpha: dict = field(default_factory=dict)  # (r, s) -> list
    audit: dict = field(default_factory=dict)  # name -> matrix

    @property
    def p(self):
        return len(self.genera) - 1

    def layout(self, r):
        """Components whose blocks make up A_(r), in order."""
        if r == 0:
            return list(range(1, self.p + 1))
        return [0] + [k for k in range(1, self.p + 1) if k != r]

    def matrix(self, r):
        comps = [k for k in self.layout(r) if self.genera[k]]
        n = sum(self.genera[k] for k in comps)
        A = np.zeros((n, n), dtype=object)
        o = 0
        for k in comps:
            g = self.genera[k]
            A[o : o + g, o : o + g] = self.blocks[k]
            o += g
        return A

    def det(self, r):
        return bareiss_solve(self.matrix(r))[0]

    def to_json(self):
        def ints(a):
            return [[int(x) for x in row] for row in np.asarray(a, dtype=object).tolist()]

        return {
            "blocks": {str(k): ints(v) for k, v in sorted(self.blocks.items())},
            "block_det": {str(k): int(v) for k, v in sorted(self.block_det.items())},
            "det": {str(r): int(self.det(r)) for r in range(self.p + 1) if self.layout(r)},
            "systems": [
                {"r": r, "s": s, "beta": [int(x) for x in self.beta[(r, s)]], "alpha": [int(x) for x in self.alpha[(r, s)]]}
                for (r, s) in sorted(self.alpha)
            ],
            "audit": {k: ints(v) for k, v in sorted(self.audit.items())},
        }


def build_blocks(L: SurfaceLoopSet, oracle: LinkingOracle, audit=False) -> LinkingSystem:
    """Diagonal blocks from the pairing matrices and the right-hand sides from direct linking numbers.

    Off-diagonal blocks vanish for topological reasons and are only evaluated
    (and required to be zero) in audit mode.
    """
    gen = L.genera
    sysm = LinkingSystem(list(gen))
    for k, g in enumerate(gen):
        if k == 0:
            A = block_from_pairing(L.pairing[0], L.sigma_hat[0], L.sigma[0])
        else:
            A = block_from_pairing(L.pairing[k], L.sigma[k], L.sigma_hat[k])
        sysm.blocks[k] = A
        det = bareiss_solve(A)[0] if g else 1
        sysm.block_det[k] = det
        if abs(det) != 1:
            raise CertificationError(f"diagonal block A[{k},{k}] = {A.tolist()} has determinant {det}")

    P = range(1, sysm.p + 1)
    cyc = {}

    def loop(r, s, hat):
        key = (r, s, hat)
        if key not in cyc:
            cyc[key] = L.cycle(L.family_vector(r, s, hat))
        return cyc[key]

    # right-hand sides, one linking number per entry
    for s in range(gen[0]):
        beta = []
        for k in P:
            beta += [oracle.lk(loop(k, h, False), loop(0, s, True)) for h in range(gen[k])]
        sysm.beta[(0, s)] = beta
    for r in P:
        for s in range(gen[r]):
            beta = [oracle.lk(loop(0, h, True), loop(r, s, False)) for h in range(gen[0])]
            for k in P:
                if k != r:
                    beta += [oracle.lk(loop(k, h, False), loop(r, s, False)) for h in range(gen[k])]
            sysm.beta[(r, s)] = beta
    _check_beta_symmetry(sysm)

    if audit:
        _audit_blocks(L, sysm, oracle, loop)
    return sysm


def _check_beta_symmetry(sysm):
    """Entries that appear twice (by symmetry of lk) must agree."""
    gen = sysm.genera

    def entry(r, s, k, h):
        lay = [c for c in sysm.layout(r) if gen[c]]
        off = 0
        for c in lay:
            if c == k:
                return sysm.beta[(r, s)][off + h]
            off += gen[c]
        raise KeyError

    for r in range(len(gen)):
        for s in range(gen[r]):
            for k in sysm.layout(r):
                for h in range(gen[k]):
                    if entry(r, s, k, h) != entry(k, h, r, s):
                        raise CertificationError(f"asymmetric linking numbers for loops ({r},{s}) and ({k},{h})")


def _audit_blocks(L, sysm, oracle, loop):
    gen = sysm.genera
    P = range(1, sysm.p + 1)

    def mat(rows, cols, f):
        return np.array([[f(l, j) for j in range(cols)] for l in range(rows)], dtype=object).reshape(rows, cols)

    for i in P:
        sysm.audit[f"A_0_{i}"] = mat(gen[0], gen[i], lambda l, j: oracle.lk(loop(0, l, True), loop(i, j, True), "audit"))
        sysm.audit[f"A_{i}_0"] = mat(gen[i], gen[0], lambda l, j: oracle.lk(loop(i, l, False), loop(0, j, False), "audit"))
        for k in P:
            if k != i:
                sysm.audit[f"A_{k}_{i}"] = mat(
                    gen[k], gen[i], lambda l, j: oracle.lk(loop(k, l, False), loop(i, j, True), "audit")
                )
    for name, A in sysm.audit.items():
        if np.any(A != 0):
            raise CertificationError(f"off-diagonal block {name} = {A.tolist()} is not zero")
    # diagonal blocks recomputed from the retracted loops themselves
    for k in range(len(gen)):
        if k == 0:
            D = mat(gen[0], gen[0], lambda l, j: oracle.lk(L.plus_cycle(L.family_vector(0, j)), loop(0, l, True), "audit"))
        else:
            D = mat(gen[k], gen[k], lambda l, j: oracle.lk(L.plus_cycle(L.family_vector(k, j, True)), loop(k, l, False), "audit"))
        if not np.array_equal(D, sysm.blocks[k]):
            raise CertificationError(f"direct diagonal block {k} {D.tolist()} != bilinear {sysm.blocks[k].tolist()}")


def solve_alpha(sysm: LinkingSystem, r, s):
    A = sysm.matrix(r)
    beta = sysm.beta[(r, s)]
    det, x = bareiss_solve(A, beta)
    if A.shape[0] and abs(det) != 1:
        raise CertificationError(f"system A_({r}) has determinant {det}")
    if x is None:
        raise CertificationError(f"system ({r},{s}) has no integer solution")
    if A.shape[0] and np.any(A.dot(np.array(x, dtype=object)) != np.array(beta, dtype=object)):
        raise CertificationError(f"residual of system ({r},{s}) is not zero")
    sysm.alpha[(r, s)] = list(x)
    return list(x)


def assemble_sigma_prime(L: SurfaceLoopSet, sysm: LinkingSystem):
    """Corrected loops as ``(label, combination)`` pairs, ``g`` in total."""
    gen = sysm.genera
    out = []

    def add_to(acc, combo, k):
        for key, x in combo.items():
            acc[key] = acc.get(key, 0) + k * x

    for r in range(len(gen)):
        for s in range(gen[r]):
            alpha = sysm.alpha.get((r, s)) or solve_alpha(sysm, r, s)
            combo = dict(L.family_vector(r, s, hat=(r == 0)))
            o = 0
            for k in sysm.layout(r):
                for j in range(gen[k]):
                    if alpha[o]:
                        add_to(combo, L.family_vector(k, j, hat=(k != 0)), -alpha[o])
                    o += 1
            combo = {key: x for key, x in sorted(combo.items()) if x}
            out.append(((r, s), combo))
    return out


def connected_boundary_shortcut(L: SurfaceLoopSet):
    """Connected boundary: the inside-bounding loops already bound in the domain."""
    if len(L.genera) != 1:
        raise SeifertError("the shortcut only applies when the boundary is connected")
    return [((0, s), dict(L.family_vector(0, s, hat=True))) for s in range(L.genera[0])]


def outside_basis(L: SurfaceLoopSet):
    """Boundary loops whose outward push-offs span the first homology of the complement."""
    gen = L.genera
    out = [L.cycle(L.family_vector(0, s, hat=True)) for s in range(gen[0])]
    for r in range(1, len(gen)):
        out += [L.cycle(L.family_vector(r, s)) for s in range(gen[r])]
    return out


def certify_all(L: SurfaceLoopSet, combos, oracle: LinkingOracle):
    """Linking numbers of each retracted candidate with the outside basis."""
    basis = outside_basis(L)
    results = []
    for label, combo in combos:
        ok, values = certify_boundary(L.plus_cycle(combo), basis, oracle)
        results.append((label, ok, values))
    return results


def retrieve(L: SurfaceLoopSet, oracle: LinkingOracle, audit=False):
    """Full correction step; returns (system or None, [(label, combination)])."""
    if len(L.genera) == 1:
        return None, connected_boundary_shortcut(L)
    sysm = build_blocks(L, oracle, audit=audit)
    for r in range(len(L.genera)):
        for s in range(L.genera[r]):
            solve_alpha(sysm, r, s)
    return sysm, assemble_sigma_prime(L, sysm)

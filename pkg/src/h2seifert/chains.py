"""Sparse integer chains over the oriented simplices of a Triangulation."""

from __future__ import annotations

import numpy as np

_SIZES = {0: "n_vertices", 1: "n_edges", 2: "n_faces", 3: "n_tets"}


class IntChain:
    """Sparse k-chain ``{simplex id: coefficient}`` with Python-int coefficients.

    Zero coefficients are never stored; iteration is by ascending id.
    """

    __slots__ = ("mesh", "dim", "_terms")

    def __init__(self, mesh, dim, terms=None):
        if dim not in _SIZES:
            raise ValueError(f"chain dimension must be 0..3, got {dim}")
        self.mesh = mesh
        self.dim = dim
        out = {}
        if terms:
            n = getattr(mesh, _SIZES[dim])
            items = terms.items() if hasattr(terms, "items") else terms
            for i, c in items:
                i, c = int(i), int(c)
                if not 0 <= i < n:
                    raise IndexError(f"{dim}-simplex id {i} out of range")
                c += out.get(i, 0)
                if c:
                    out[i] = c
                else:
                    out.pop(i, None)
        self._terms = out

    @classmethod
    def from_dense(cls, mesh, dim, values):
        values = np.asarray(values)
        idx = np.nonzero(values)[0]
        return cls(mesh, dim, zip(idx.tolist(), values[idx].tolist()))

    def to_dense(self, dtype=np.int64):
        out = np.zeros(getattr(self.mesh, _SIZES[self.dim]), dtype=dtype)
        for i, c in self._terms.items():
            out[i] = c
        return out

    def keys(self):
        return sorted(self._terms)

    def items(self):
        return [(i, self._terms[i]) for i in sorted(self._terms)]

    def values(self):
        return [self._terms[i] for i in sorted(self._terms)]

    def __getitem__(self, i):
        return self._terms.get(i, 0)

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def __iter__(self):
        return iter(self.keys())

    def __repr__(self):
        head = ", ".join(f"{i}:{c}" for i, c in self.items()[:6])
        more = ", ..." if len(self) > 6 else ""
        return f"IntChain(dim={self.dim}, {{{head}{more}}})"

    def _check(self, other):
        if not isinstance(other, IntChain):
            return NotImplemented
        if other.mesh is not self.mesh or other.dim != self.dim:
            raise ValueError("chains live on different meshes or dimensions")
        return True

    def _combine(self, other, k):
        out = dict(self._terms)
        for i, c in other._terms.items():
            v = out.get(i, 0) + k * c
            if v:
                out[i] = v
            else:
                out.pop(i, None)
        res = IntChain(self.mesh, self.dim)
        res._terms = out
        return res

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return self._combine(other, 1)

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return self._combine(other, -1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, n):
        n = int(n)
        res = IntChain(self.mesh, self.dim)
        if n:
            res._terms = {i: n * c for i, c in self._terms.items()}
        return res

    def __mul__(self, n):
        if isinstance(n, (int, np.integer)):
            return self.scale(n)
        return NotImplemented

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, IntChain):
            return NotImplemented
        return other.mesh is self.mesh and other.dim == self.dim and other._terms == self._terms

    def __hash__(self):
        return hash((self.dim, frozenset(self._terms.items())))

    def boundary(self):
        return boundary(self)

    def is_cycle(self):
        return is_cycle(self)

    def support(self):
        return np.array(self.keys(), dtype=np.int64)


def add(a, b):
    return a + b


def scale(a, n):
    return a.scale(n)


def boundary(c: IntChain) -> IntChain:
    """Image of ``c`` under the signed incidence operator."""
    m = c.mesh
    if c.dim == 0:
        raise ValueError("0-chains have no boundary")
    if c.dim == 3:
        ids, signs = m.tet_faces, m.tet_face_sign
    elif c.dim == 2:
        ids, signs = m.face_edges, m.face_edge_sign
    else:
        ids, signs = m.edges, None
    out = {}
    for i, k in c._terms.items():
        sg = (-1, 1) if signs is None else signs[i].tolist()
        for j, s in zip(ids[i].tolist(), sg):
            v = out.get(j, 0) + s * k
            if v:
                out[j] = v
            else:
                out.pop(j, None)
    res = IntChain(m, c.dim - 1)
    res._terms = out
    return res


def is_cycle(c: IntChain) -> bool:
    return not boundary(c)


def edge_path_chain(mesh, vertices, closed=True):
    """1-chain of the polygonal path through consecutive vertex ids."""
    seq = list(vertices) + ([vertices[0]] if closed else [])
    terms = {}
    for u, v in zip(seq[:-1], seq[1:]):
        e, s = mesh.edge_id(int(u), int(v))
        terms[e] = terms.get(e, 0) + s
    return IntChain(mesh, 1, terms)

"""Mesh readers/writers, JSON chain format and legacy VTK output."""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

from .errors import MeshParseError

MSH_TET = 4


def detect_format(path):
    suffix = Path(path).suffix.lower()
    if suffix == ".msh":
        return "msh22"
    if suffix in (".node", ".ele", ""):
        return "tetgen"
    raise MeshParseError(f"cannot infer mesh format from {path!r}")


def read_mesh_arrays(source, format=None):
    """Return (points, tets) with unused vertices removed."""
    if format is None:
        format = detect_format(source)
    if format == "msh22":
        with open(source) as fh:
            points, tets = read_msh22(fh)
    elif format == "tetgen":
        points, tets = read_tetgen(source)
    else:
        raise MeshParseError(f"unknown mesh format {format!r}")
    return compact(points, tets)


def compact(points, tets):
    used = np.unique(tets)
    if len(used) == len(points):
        return points, tets
    remap = np.full(len(points), -1, dtype=np.int64)
    remap[used] = np.arange(len(used))
    return points[used], remap[tets]


def _sections(lines):
    sections = {}
    name = None
    body = []
    for raw in lines:
        line = raw.strip()
        if not line:
            continue
        if line.startswith("$End"):
            if name is None or line[4:] != name:
                raise MeshParseError(f"unbalanced section terminator {line}")
            sections[name] = body
            name, body = None, []
        elif line.startswith("$"):
            if name is not None:
                raise MeshParseError(f"section ${name} not terminated")
            name, body = line[1:], []
        elif name is not None:
            body.append(line)
    if name is not None:
        raise MeshParseError(f"section ${name} not terminated")
    return sections


def read_msh22(fh):
    """Gmsh MSH 2.2 ASCII: $Nodes and type-4 (tetrahedron) $Elements."""
    sec = _sections(fh)
    fmt = sec.get("MeshFormat")
    if not fmt:
        raise MeshParseError("missing $MeshFormat")
    head = fmt[0].split()
    if len(head) < 2 or not head[0].startswith("2.") or head[1] != "0":
        raise MeshParseError(f"unsupported MeshFormat {fmt[0]!r} (need 2.x ASCII)")
    try:
        nodes = sec["Nodes"]
        n = int(nodes[0])
        ids = np.empty(n, dtype=np.int64)
        pts = np.empty((n, 3))
        for i, line in enumerate(nodes[1 : n + 1]):
            tok = line.split()
            ids[i] = int(tok[0])
            pts[i] = [float(x) for x in tok[1:4]]
        if len(nodes) - 1 != n:
            raise MeshParseError("node count mismatch")
        elems = sec["Elements"]
        m = int(elems[0])
        if len(elems) - 1 != m:
            raise MeshParseError("element count mismatch")
        tets = []
        for line in elems[1:]:
            tok = [int(x) for x in line.split()]
            if tok[1] != MSH_TET:
                continue
            ntags = tok[2]
            conn = tok[3 + ntags :]
            if len(conn) != 4:
                raise MeshParseError(f"tetrahedron with {len(conn)} nodes")
            tets.append(conn)
    except KeyError as exc:
        raise MeshParseError(f"missing section ${exc.args[0]}") from None
    except (ValueError, IndexError) as exc:
        raise MeshParseError(f"malformed MSH data: {exc}") from None
    if not tets:
        raise MeshParseError("no tetrahedra in $Elements")
    order = np.argsort(ids)
    if np.any(ids[order][1:] == ids[order][:-1]):
        raise MeshParseError("duplicate node id")
    tets = np.asarray(tets, dtype=np.int64)
    pos = np.searchsorted(ids[order], tets)
    if np.any(pos >= n) or np.any(ids[order][np.minimum(pos, n - 1)] != tets):
        raise MeshParseError("element references an undefined node")
    return pts, order[pos]


def _tetgen_rows(path):
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                rows.append(line.split())
    if not rows:
        raise MeshParseError(f"{path} is empty")
    return rows


def read_tetgen(source):
    """TetGen ``.node``/``.ele`` pair; ``source`` may name either file or the stem."""
    stem = str(source)
    for ext in (".node", ".ele"):
        if stem.endswith(ext):
            stem = stem[: -len(ext)]
    node_path, ele_path = stem + ".node", stem + ".ele"
    for p in (node_path, ele_path):
        if not os.path.exists(p):
            raise MeshParseError(f"missing TetGen file {p}")
    try:
        rows = _tetgen_rows(node_path)
        n, dim = int(rows[0][0]), int(rows[0][1])
        if dim != 3:
            raise MeshParseError(f"TetGen .node dimension {dim} != 3")
        body = rows[1 : n + 1]
        if len(body) != n:
            raise MeshParseError("TetGen node count mismatch")
        ids = np.array([int(r[0]) for r in body])
        pts = np.array([[float(x) for x in r[1:4]] for r in body])
        base = int(ids.min())
        if base not in (0, 1) or not np.array_equal(np.sort(ids), np.arange(base, base + n)):
            raise MeshParseError("TetGen node ids must be consecutive from 0 or 1")
        rows = _tetgen_rows(ele_path)
        m, npt = int(rows[0][0]), int(rows[0][1])
        if npt not in (4, 10):
            raise MeshParseError(f"unsupported nodes-per-tet {npt}")
        body = rows[1 : m + 1]
        if len(body) != m:
            raise MeshParseError("TetGen element count mismatch")
        conn = np.array([[int(x) for x in r[1:5]] for r in body], dtype=np.int64)
    except (ValueError, IndexError) as exc:
        raise MeshParseError(f"malformed TetGen data: {exc}") from None
    pos = np.empty(n, dtype=np.int64)
    pos[ids - base] = np.arange(n)
    conn = conn - base
    if conn.min() < 0 or conn.max() >= n:
        raise MeshParseError("TetGen element references an undefined node")
    return pts, pos[conn]


def write_msh22(path, points, tets):
    with open(path, "w") as fh:
        fh.write("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n")
        fh.write(f"$Nodes\n{len(points)}\n")
        for i, (x, y, z) in enumerate(np.asarray(points, dtype=float).tolist(), 1):
            fh.write(f"{i} {x!r} {y!r} {z!r}\n")
        fh.write(f"$EndNodes\n$Elements\n{len(tets)}\n")
        for i, (a, b, c, d) in enumerate(np.asarray(tets) + 1, 1):
            fh.write(f"{i} 4 2 1 1 {a} {b} {c} {d}\n")
        fh.write("$EndElements\n")


def write_tetgen(stem, points, tets, base=1):
    with open(f"{stem}.node", "w") as fh:
        fh.write(f"{len(points)} 3 0 0\n")
        for i, (x, y, z) in enumerate(np.asarray(points, dtype=float).tolist(), base):
            fh.write(f"{i} {x!r} {y!r} {z!r}\n")
    with open(f"{stem}.ele", "w") as fh:
        fh.write(f"{len(tets)} 4 0\n")
        for i, row in enumerate(np.asarray(tets) + base, base):
            fh.write(f"{i} {' '.join(map(str, row))}\n")


# -- chains -----------------------------------------------------------------


def chain_to_json(chain):
    return {"dim": chain.dim, "terms": [[i, c] for i, c in chain.items()]}


def dumps_chain(chain):
    return json.dumps(chain_to_json(chain), separators=(",", ":")) + "\n"


def chain_from_json(data, mesh):
    from .chains import IntChain

    if isinstance(data, str):
        data = json.loads(data)
    return IntChain(mesh, int(data["dim"]), {int(i): int(c) for i, c in data["terms"]})


# -- legacy VTK -------------------------------------------------------------


def _fmt(x):
    return repr(float(x))


def vtk_polydata_text(points, cells, cell_type, scalars, title, scalar_name="coefficient"):
    """ASCII legacy VTK unstructured grid of line (3) or triangle (5) cells."""
    out = ["# vtk DataFile Version 3.0", title, "ASCII", "DATASET UNSTRUCTURED_GRID"]
    out.append(f"POINTS {len(points)} double")
    out.extend(" ".join(_fmt(x) for x in p) for p in points)
    n = len(cells)
    width = len(cells[0]) if n else 0
    out.append(f"CELLS {n} {n * (width + 1)}")
    out.extend(f"{len(c)} " + " ".join(str(int(i)) for i in c) for c in cells)
    out.append(f"CELL_TYPES {n}")
    out.extend(str(cell_type) for _ in range(n))
    out.append(f"CELL_DATA {n}")
    out.append(f"SCALARS {scalar_name} int 1")
    out.append("LOOKUP_TABLE default")
    out.extend(str(int(s)) for s in scalars)
    return "\n".join(out) + "\n"


def chain_vtk_text(chain, title="chain"):
    """Triangles (dim 2) or lines (dim 1) of a chain with coefficients as cell data."""
    mesh = chain.mesh
    ids = np.array(list(chain.keys()), dtype=np.int64)
    coeffs = list(chain.values())
    simplices = mesh.faces if chain.dim == 2 else mesh.edges
    conn = simplices[ids] if len(ids) else np.zeros((0, chain.dim + 1), dtype=np.int64)
    verts, local = np.unique(conn, return_inverse=True)
    local = local.reshape(conn.shape)
    return vtk_polydata_text(
        mesh.points[verts], local.tolist(), 5 if chain.dim == 2 else 3, coeffs, title
    )


def segments_vtk_text(a, b, w, title="segments"):
    pts = np.concatenate([a, b]) if len(a) else np.zeros((0, 3))
    n = len(a)
    cells = [[i, i + n] for i in range(n)]
    return vtk_polydata_text(pts, cells, 3, w, title, scalar_name="multiplicity")

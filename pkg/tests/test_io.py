import json

import numpy as np
import pytest

from h2seifert.benchmarks import solid_torus
from h2seifert.chains import IntChain
from h2seifert.errors import MeshParseError
from h2seifert.io import (
    chain_from_json,
    chain_vtk_text,
    detect_format,
    dumps_chain,
    read_mesh_arrays,
    write_msh22,
    write_tetgen,
)
from h2seifert.mesh import build_triangulation, load_mesh


@pytest.fixture(scope="module")
def torus():
    return solid_torus()


def same_mesh(a, b):
    return np.allclose(a.points, b.points) and np.array_equal(a.tets, b.tets)


def test_msh_round_trip(tmp_path, torus):
    p = tmp_path / "t.msh"
    write_msh22(p, *torus)
    assert same_mesh(load_mesh(p), build_triangulation(*torus))


@pytest.mark.parametrize("base", [0, 1])
def test_tetgen_round_trip(tmp_path, torus, base):
    stem = tmp_path / "t"
    write_tetgen(stem, *torus, base=base)
    t = load_mesh(f"{stem}.node", format="tetgen")
    assert same_mesh(t, build_triangulation(*torus))


def test_msh_ignores_surface_elements_and_unused_nodes(tmp_path):
    text = """$MeshFormat
2.2 0 8
$EndMeshFormat
$Nodes
6
1 0 0 0
2 1 0 0
3 0 1 0
4 0 0 1
5 9 9 9
6 1 1 1
$EndNodes
$Elements
3
1 2 2 0 1 1 2 3
2 4 2 0 1 1 2 3 4
3 4 2 0 1 2 3 4 6
$EndElements
"""
    p = tmp_path / "m.msh"
    p.write_text(text)
    pts, tets = read_mesh_arrays(p)
    assert len(pts) == 5 and len(tets) == 2


@pytest.mark.parametrize(
    "text",
    [
        "",
        "$MeshFormat\n4.1 0 8\n$EndMeshFormat\n",
        "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n1\n1 0 0\n$EndNodes\n",
        "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n1\n1 0 0 0\n$EndNodes\n$Elements\n1\n1 4 2 0 1 1 2 3 4\n$EndElements\n",
    ],
)
def test_malformed_msh(tmp_path, text):
    p = tmp_path / "bad.msh"
    p.write_text(text)
    with pytest.raises(MeshParseError):
        read_mesh_arrays(p)


def test_format_detection():
    assert detect_format("a/b.msh") == "msh22"
    assert detect_format("a/b.node") == "tetgen"
    with pytest.raises(MeshParseError):
        detect_format("mesh.vtu")


def test_chain_json_round_trip(torus):
    t = build_triangulation(*torus)
    c = IntChain(t, 2, {4: -2, 17: 1, 99: 3})
    text = dumps_chain(c)
    assert chain_from_json(text, t) == c
    assert json.loads(text) == {"dim": 2, "terms": [[4, -2], [17, 1], [99, 3]]}


def test_vtk_cell_count_matches_support(torus):
    t = build_triangulation(*torus)
    c = IntChain(t, 2, {4: -2, 17: 1, 99: 3})
    text = chain_vtk_text(c)
    assert "CELLS 3 12" in text and "CELL_TYPES 3" in text
    empty = chain_vtk_text(IntChain(t, 2))
    assert "CELLS 0 0" in empty and "POINTS 0 double" in empty

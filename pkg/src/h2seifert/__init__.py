"""Homological Seifert surfaces on tetrahedral meshes.

Boundary loops are corrected into 1-boundaries with linking-number systems and
filled in with integer 2-chains by elimination along a dual spanning tree.
"""

from .chains import IntChain
from .dual import DualComplex, build_dual
from .errors import (
    CertificationError,
    LinkingError,
    MeshParseError,
    SeifertError,
    TopologyError,
)
from .linking import LinkingOracle, PLCycle, lk_combinatorial, lk_gauss, linking_budget
from .loops import SurfaceLoopSet, build_surface_loops, r_plus
from .mesh import BoundaryTriangulation, Triangulation, build_triangulation, extract_boundary, load_mesh
from .pipeline import PipelineConfig, PipelineResult, run, run_arrays, write_outputs
from .retrieval import LinkingSystem, retrieve
from .seifert import SeifertSurface, SeifertTree, build_seifert_tree, eliminate, tree_cycle, verify

__version__ = "0.1.0"

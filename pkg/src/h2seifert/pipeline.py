"""End-to-end construction: mesh file -> certified integer surfaces + report."""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from pathlib import Path


from . import io as mio
from .dual import DualComplex
from .errors import CertificationError, SeifertError
from .linking import LinkingOracle, linking_budget
from .loops import build_surface_loops
from .mesh import Triangulation, build_triangulation, extract_boundary
from .retrieval import certify_all, retrieve
from .seifert import build_seifert_tree, eliminate, is_corner_free, verify

SCHEMA = "seifert-report/1"
ORACLE_MAX_FACES = 5000


@dataclass
class PipelineConfig:
    tree: str = "strongly-seifert"
    audit: bool = False
    oracle: bool = False  # exact homology cross-checks, small meshes only
    backend: str = "gauss"
    cross_check: bool = False  # evaluate every lk with both backends
    external_component: int | None = None
    threads: int = 1
    format: str | None = None


@dataclass
class PipelineResult:
    report: dict
    timings: dict
    surfaces: list = field(default_factory=list)  # SeifertSurface
    mesh: Triangulation | None = None
    boundary: object = None
    dual: DualComplex | None = None
    loops: object = None
    tree: object = None
    system: object = None
    oracle: LinkingOracle | None = None

    @property
    def ok(self):
        return self.report["status"] == "ok"


class _Stages:
    def __init__(self):
        self.timings = {}

    @contextmanager
    def __call__(self, name):
        t0 = time.perf_counter()
        try:
            yield
        except SeifertError as exc:
            exc.stage = getattr(exc, "stage", name)
            raise
        finally:
            self.timings[name] = self.timings.get(name, 0.0) + time.perf_counter() - t0


def _label(label):
    r, s = label
    return f"r{r}_s{s}"


def _solve_all(jobs, tree, cfg):
    """Independent eliminations; each gets its own oracle so counts merge deterministically."""

    def one(job):
        label, sigma = job
        orc = LinkingOracle(cfg.backend, cfg.cross_check)
        return eliminate(sigma, tree, orc, label), orc

    if cfg.threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(cfg.threads) as ex:
            return list(ex.map(one, jobs))
    return [one(j) for j in jobs]


def run_arrays(points, tets, cfg: PipelineConfig | None = None, source="<arrays>") -> PipelineResult:
    cfg = cfg or PipelineConfig()
    stage = _Stages()
    with stage("preprocessing"):
        t = build_triangulation(points, tets)
    return _run(t, cfg, stage, source)


def run(mesh_path, cfg: PipelineConfig | None = None) -> PipelineResult:
    cfg = cfg or PipelineConfig()
    stage = _Stages()
    with stage("preprocessing"):
        points, tets = mio.read_mesh_arrays(mesh_path, cfg.format)
        t = build_triangulation(points, tets)
    return _run(t, cfg, stage, Path(mesh_path).name)


def _run(t, cfg, stage, source):
    orc = LinkingOracle(cfg.backend, cfg.cross_check)
    with stage("preprocessing"):
        b = extract_boundary(t, external=cfg.external_component)
        d = DualComplex(t, b)
    with stage("loop_construction"):
        L = build_surface_loops(d, orc)
    with stage("boundary_retrieval"):
        sysm, combos = retrieve(L, orc, audit=cfg.audit)
        certs = certify_all(L, combos, orc)
    with stage("elimination"):
        tree = build_seifert_tree(d, cfg.tree)
        sigmas = [(label, L.chain(combo)) for label, combo in combos]
        solved = _solve_all(sigmas, tree, cfg)
    surfaces = [S for S, _ in solved]
    for _, o in solved:
        orc.counts.update(o.counts)
        orc.max_residual = max(orc.max_residual, o.max_residual)
        orc.n_agree += o.n_agree
        orc.n_disagree += o.n_disagree
        orc.n_backend_fallback += o.n_backend_fallback

    strongly = tree.is_strongly_seifert
    surf_reports = []
    for S, (label, ok, values) in zip(surfaces, certs):
        cert = verify(S, b)
        corner_free = is_corner_free(S.sigma, b)
        surf_reports.append(
            {
                "label": list(label),
                "name": _label(label),
                "certified": bool(ok),
                "outside_lk": [int(v) for v in values],
                "boundary_ok": cert["boundary_ok"],
                "cycle_edges": len(S.sigma),
                "faces": cert["n_faces"],
                "boundary_faces": cert["boundary_faces"],
                "corner_free": corner_free,
                "internal": cert["internal"],
                "internal_expected": bool(strongly and corner_free),
                "first_pass": S.first_pass,
                "worklist": S.worklist,
                "fallbacks": S.fallbacks,
            }
        )

    budget = linking_budget(b.genera)
    counts = {k: int(v) for k, v in sorted(orc.counts.items())}
    report = {
        "schema": SCHEMA,
        "source": source,
        "config": {k: v for k, v in asdict(cfg).items() if k not in ("threads", "format")},
        "mesh": {
            "n_vertices": t.n_vertices,
            "n_edges": t.n_edges,
            "n_faces": t.n_faces,
            "n_tets": t.n_tets,
            "p": b.p,
            "genera": [int(x) for x in b.genera],
            "g": int(b.genus),
            "external_component": int(b.components[0].natural_index),
            "detected_external": cfg.external_component is None,
            "corner_tets": int(len(b.corner_tets())),
        },
        "tree": {
            "strategy": tree.strategy,
            "interior_arcs": tree.n_interior_arcs,
            "expected_interior_arcs": tree.expected_interior_arcs,
            "is_seifert": tree.is_seifert,
            "is_strongly_seifert": strongly,
            "plugs": len(tree.plugs),
        },
        "linking": {
            "backend": cfg.backend,
            "budget": budget,
            "construction": counts.get("construction", 0),
            "counts": counts,
            "within_budget": counts.get("construction", 0) == budget,
            "max_residual": float(f"{orc.max_residual:.3e}"),
            "backend_fallbacks": orc.n_backend_fallback,
            "cross_checked": orc.n_agree if cfg.cross_check else None,
        },
        "retrieval": sysm.to_json() if sysm is not None else None,
        "surfaces": surf_reports,
    }
    if cfg.oracle:
        with stage("oracle"):
            report["oracle"] = homology_oracle(t, b, surfaces)

    failures = [s["name"] for s in surf_reports if not (s["certified"] and s["boundary_ok"])]
    if cfg.oracle and report["oracle"].get("checked") and not report["oracle"]["ok"]:
        failures.append("oracle")
    report["status"] = "ok" if not failures else "failed"
    report["failures"] = failures
    timings = {k: round(v, 6) for k, v in stage.timings.items()}
    return PipelineResult(report, timings, surfaces, t, b, d, L, tree, sysm, orc)


def homology_oracle(t, b, surfaces, max_faces=ORACLE_MAX_FACES):
    """Exact cross-checks against the Smith normal form (small meshes only)."""
    from .snf import betti, rank, relative_h2_certificate

    if t.n_faces > max_faces:
        return {"checked": False, "reason": f"{t.n_faces} faces exceed the oracle limit {max_faces}"}
    bn = betti(t)
    kernel = t.n_faces - rank(t.d2)
    rel = relative_h2_certificate(t, [dict(S.chain.items()) for S in surfaces])
    ok = bn[1] == b.genus and kernel == t.n_tets + b.p and rel["basis"] and rel["b2_rel"] == b.genus
    return {"checked": True, "betti": [int(x) for x in bn], "face_kernel_rank": int(kernel), "relative_h2": rel, "ok": bool(ok)}


def dumps_report(report):
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def write_outputs(result: PipelineResult, out):
    """Report, timings and one JSON + VTK file per surface; returns the written paths."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    paths = []

    def put(name, text):
        p = out / name
        p.write_text(text)
        paths.append(p)

    put("report.json", dumps_report(result.report))
    put("timings.json", json.dumps(result.timings, indent=2, sort_keys=True) + "\n")
    for S in result.surfaces:
        name = _label(S.label)
        put(f"surface_{name}.json", mio.dumps_chain(S.chain))
        put(f"surface_{name}.vtk", mio.chain_vtk_text(S.chain, f"surface {name}"))
        put(f"cycle_{name}.json", mio.dumps_chain(S.sigma))
    return paths


def export_surface(S, path, format="json"):
    path = Path(path)
    if format == "json":
        path.write_text(mio.dumps_chain(S.chain))
    elif format == "vtk":
        path.write_text(mio.chain_vtk_text(S.chain, f"surface {_label(S.label) if S.label else ''}".strip()))
    else:
        raise ValueError(f"unknown surface format {format!r}")
    return path


def require_success(result: PipelineResult):
    if not result.ok:
        raise CertificationError(f"certification failed for {', '.join(result.report['failures'])}")
    return result

"""Command line entry point: ``h2seifert --mesh domain.msh --out results/``."""

from __future__ import annotations

import argparse
import logging
import sys

from .errors import SeifertError
from .pipeline import PipelineConfig, require_success, run, write_outputs

log = logging.getLogger("h2seifert")


def build_parser():
    ap = argparse.ArgumentParser(
        prog="h2seifert",
        description="Integer Seifert surfaces spanning a basis of relative second homology of a tetrahedral mesh.",
    )
    ap.add_argument("--mesh", required=True, help="Gmsh 2.2 .msh file or TetGen .node/.ele stem")
    ap.add_argument("--format", choices=["msh22", "tetgen"], default=None, help="mesh format (default: from suffix)")
    ap.add_argument("--tree", choices=["seifert", "strongly-seifert"], default="strongly-seifert")
    ap.add_argument("--audit", action="store_true", help="evaluate and assert the vanishing off-diagonal lk blocks")
    ap.add_argument("--oracle", action="store_true", help="Smith normal form cross-checks (small meshes)")
    ap.add_argument("--backend", choices=["gauss", "combinatorial"], default="gauss", help="linking number backend")
    ap.add_argument("--cross-check", action="store_true", help="evaluate every linking number with both backends")
    ap.add_argument("--out", default=None, help="output directory for report and surfaces")
    ap.add_argument("--external-component", type=int, default=None, help="boundary component id of the outer surface")
    ap.add_argument("--threads", type=int, default=1, help="parallel elimination solves")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    cfg = PipelineConfig(
        tree=args.tree,
        audit=args.audit,
        oracle=args.oracle,
        backend=args.backend,
        cross_check=args.cross_check,
        external_component=args.external_component,
        threads=max(1, args.threads),
        format=args.format,
    )
    try:
        result = run(args.mesh, cfg)
        if args.out:
            write_outputs(result, args.out)
        require_success(result)
    except SeifertError as exc:
        stage = getattr(exc, "stage", "pipeline")
        print(f"h2seifert: {stage}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"h2seifert: input: {exc}", file=sys.stderr)
        return 2
    rep = result.report
    m, lk = rep["mesh"], rep["linking"]
    print(
        f"{rep['source']}: {m['n_tets']} tets, p={m['p']}, genera={m['genera']}, g={m['g']}; "
        f"lk {lk['construction']}/{lk['budget']}; {len(rep['surfaces'])} surfaces certified"
    )
    for k, v in result.timings.items():
        log.info("  %-20s %.3f s", k, v)
    return 0


if __name__ == "__main__":
    sys.exit(main())

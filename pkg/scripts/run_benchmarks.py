"""Run the full pipeline on every benchmark and print a summary table."""

import argparse
import time
from pathlib import Path

from h2seifert.benchmarks import BENCHMARKS
from h2seifert.pipeline import PipelineConfig, run_arrays, write_outputs


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=None, help="write reports and surfaces under this directory")
    ap.add_argument("--tree", default="strongly-seifert", choices=["seifert", "strongly-seifert"])
    ap.add_argument("--audit", action="store_true")
    ap.add_argument("--cross-check", action="store_true")
    ap.add_argument("names", nargs="*")
    args = ap.parse_args()
    cfg = PipelineConfig(tree=args.tree, audit=args.audit, cross_check=args.cross_check)
    hdr = f"{'mesh':24s} {'tets':>7s} {'p':>2s} {'genera':12s} {'lk':>9s} {'faces':>18s} {'fb':>3s} {'time':>7s}  status"
    print(hdr)
    for name in args.names or sorted(BENCHMARKS):
        t0 = time.perf_counter()
        res = run_arrays(*BENCHMARKS[name](), cfg, source=name)
        dt = time.perf_counter() - t0
        rep = res.report
        m, lk = rep["mesh"], rep["linking"]
        faces = ",".join(str(s["faces"]) for s in rep["surfaces"]) or "-"
        fb = sum(s["fallbacks"] for s in rep["surfaces"])
        print(
            f"{name:24s} {m['n_tets']:7d} {m['p']:2d} {str(m['genera']):12s} "
            f"{lk['construction']:4d}/{lk['budget']:<4d} {faces:>18s} {fb:3d} {dt:7.2f}  {rep['status']}"
        )
        if args.out:
            write_outputs(res, Path(args.out) / name)


if __name__ == "__main__":
    main()

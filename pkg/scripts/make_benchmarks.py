"""Write the voxel benchmark meshes as Gmsh 2.2 files."""

import argparse
from pathlib import Path

from h2seifert.benchmarks import BENCHMARKS
from h2seifert.io import write_msh22


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="meshes")
    ap.add_argument("names", nargs="*", help="subset of benchmarks (default: all)")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name in args.names or sorted(BENCHMARKS):
        points, tets = BENCHMARKS[name]()
        write_msh22(out / f"{name}.msh", points, tets)
        print(f"{name:24s} {len(points):7d} vertices {len(tets):7d} tets")


if __name__ == "__main__":
    main()

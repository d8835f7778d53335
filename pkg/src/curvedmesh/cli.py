"""Command-line interface: sample, assemble, solve, benchmark.

Exit codes: 0 success, 2 usage or argument validation, 3 numerical failure
(degenerate geometry, indefinite mass, non-convergence), 4 file I/O.
"""

import argparse
import sys

import numpy as np

from . import __version__
from .bench import run_benchmark
from .config import load_config
from .errors import CurvedMeshError
from .io import read_pencil, write_eigenvalues_csv, write_json, write_pencil
from .pipeline import build_pencil
from .sampling import add_radial_noise, load_csv, sample_sphere, sample_torus, save_csv
from .eigensolve import solve_smallest

USAGE_EXIT = 2
NUMERICAL_EXIT = 3
IO_EXIT = 4


def _cmd_sample(args) -> int:
    if args.manifold == "sphere":
        cloud = sample_sphere(args.n, args.seed)
        if args.noise > 0.0:
            cloud = add_radial_noise(cloud, args.noise, args.seed + 1)
    else:
        if args.noise > 0.0:
            raise ValueError("`--noise` is only supported on the sphere")
        cloud = sample_torus(args.n, args.seed)
    save_csv(cloud, args.out, header=args.header)
    print(f"wrote {cloud.n_points} points ({cloud.provenance}) to {args.out}")
    return 0


def _cmd_assemble(args) -> int:
    cloud = load_csv(args.cloud)
    pencil, geometry = build_pencil(
        args.operator, cloud,
        k=args.k,
        frame_mode=args.frame_mode,
        metric_mode=args.metric_mode,
        stiffness_rule=args.quadrature,
        mass_rule=args.mass_quadrature,
    )
    paths = write_pencil(args.out_prefix, pencil)
    stats = pencil.stats
    print(f"assembled {args.operator}: dim={pencil.dim}, "
          f"nnz(A)={pencil.stiffness.nnz}, "
          f"dropped={stats.dropped_fraction:.4%}, "
          f"failed_points={geometry.n_failed}")
    for name in ("A", "B", "S", "M", "stats"):
        print(f"  {paths[name]}")
    return 0


def _cmd_solve(args) -> int:
    pencil = read_pencil(args.pencil_prefix)
    result = solve_smallest(pencil.stiffness, pencil.mass, args.num_modes,
                            tol=args.tol, sigma=args.sigma)
    meta = {
        "operator": pencil.operator,
        "dim": pencil.dim,
        "sigma": result.sigma,
        "method": result.method,
    }
    write_eigenvalues_csv(args.out, result.eigenvalues, result.residuals, meta)
    manifest_path = args.manifest or (args.out + ".manifest.json")
    write_json(manifest_path, {
        "pencil_prefix": args.pencil_prefix,
        "operator": pencil.operator,
        "dim": pencil.dim,
        "num_modes": args.num_modes,
        "tol": args.tol,
        "sigma": result.sigma,
        "method": result.method,
        "converged": result.converged,
        "max_residual": float(result.residuals.max()),
        "version": __version__,
    })
    np.set_printoptions(precision=6, suppress=True)
    print(f"smallest {args.num_modes} eigenvalues ({result.method}):")
    print(f"  {result.eigenvalues}")
    print(f"wrote {args.out} and {manifest_path}")
    return 0


def _cmd_benchmark(args) -> int:
    cfg = load_config(args.config)

    def progress(outcome):
        if outcome.failure:
            print(f"n={outcome.n} trial={outcome.trial} failed: {outcome.failure}",
                  flush=True)
            return
        vec = ("" if not np.isfinite(outcome.eigenvector_error)
               else f" vec_err={outcome.eigenvector_error:.3e}")
        total = (outcome.geometry_seconds + outcome.assemble_seconds
                 + outcome.solve_seconds)
        print(f"n={outcome.n} trial={outcome.trial} "
              f"err={outcome.eigenvalue_error:.3e}{vec} ({total:.1f}s)",
              flush=True)

    sweep, paths = run_benchmark(cfg, progress=progress)
    rate = ("not fit" if sweep.eigenvalue_rate is None
            else f"{sweep.eigenvalue_rate['rate']:+.3f}")
    print(f"sweep finished in {sweep.total_seconds:.1f}s; eigenvalue rate {rate}")
    for row in sweep.summary_rows:
        print(f"  N={row[0]:>6} failed={row[2]} mean_err={row[3]:.4e} stderr={row[4]:.1e}")
    for name, path in paths.items():
        print(f"  {name}: {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="curvedmesh",
        description="weak-form Laplacians on point-cloud surfaces via local curved meshes",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw a point cloud and write it as CSV")
    p.add_argument("--manifold", required=True, choices=("sphere", "torus"))
    p.add_argument("--n", required=True, type=int, help="number of points")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise", type=float, default=0.0,
                   help="radial noise amplitude eta (sphere only)")
    p.add_argument("--header", action="store_true",
                   help="emit the '# n=<dim>' comment line")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_sample)

    p = sub.add_parser("assemble", help="build and store the (A, B) pencil of a cloud")
    p.add_argument("--cloud", required=True, help="point-cloud CSV")
    p.add_argument("--operator", required=True,
                   choices=("laplace_beltrami", "bochner", "hodge"))
    p.add_argument("--k", type=int, default=None,
                   help="neighborhood size (default: max(12, ceil(2 log2 N)))")
    p.add_argument("--quadrature", choices=("vertex", "midpoint"), default="vertex",
                   help="stiffness quadrature rule")
    p.add_argument("--mass-quadrature", choices=("vertex", "midpoint"),
                   default="midpoint")
    p.add_argument("--frame-mode", choices=("full", "reduced"), default="full")
    p.add_argument("--metric-mode", choices=("curved", "linear"), default="curved")
    p.add_argument("--out-prefix", required=True,
                   help="writes <prefix>.{A,B,S,M}.mtx and <prefix>.stats.json")
    p.set_defaults(fn=_cmd_assemble)

    p = sub.add_parser("solve", help="smallest eigenpairs of a stored pencil")
    p.add_argument("--pencil-prefix", required=True)
    p.add_argument("--num-modes", required=True, type=int)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--sigma", type=float, default=None,
                   help="shift for shift-invert (default: automatic)")
    p.add_argument("--out", required=True, help="eigenvalue CSV path")
    p.add_argument("--manifest", default=None,
                   help="manifest JSON path (default: <out>.manifest.json)")
    p.set_defaults(fn=_cmd_solve)

    p = sub.add_parser("benchmark", help="run the N-sweep experiment of a config file")
    p.add_argument("--config", required=True, help="flat TOML run configuration")
    p.set_defaults(fn=_cmd_benchmark)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    except CurvedMeshError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return NUMERICAL_EXIT
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return IO_EXIT


if __name__ == "__main__":
    sys.exit(main())

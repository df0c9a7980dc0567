"""gridknn command line interface.

Subcommands: gen (synthesize a point file), knn (neighbour search on a point
file), verify (binned-vs-brute oracle sweep), bench (benchmark grid),
ochelper (association matrices from an association file).

Exit codes: 0 success, 1 usage error, 2 verification failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import sys

from .. import _kernels
from ..binning import BinningConfig, build_bin_index
from ..errors import FileFormatError, GridKnnError, VerificationFailedError
from ..knn import KnnOptions, binned_select_knn, brute_force_knn
from ..ocgraph import oc_helper
from . import bench as bench_mod
from . import fileio
from . import verify as verify_mod
from .datasets import generate_dataset

__all__ = ["main", "build_parser"]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _int_list(text: str):
    try:
        return [int(tok) for tok in text.split(",") if tok != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated ints, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gridknn",
                     description="Exact kNN for batched low-dimensional point clouds")
    sub = parser.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="generate a random point file")
    p.add_argument("--n", type=int, required=True, help="number of vertices")
    p.add_argument("--dim", type=int, required=True, help="coordinate dimensions")
    p.add_argument("--splits", type=int, default=1, help="row splits (default 1)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--distribution", choices=("uniform", "clusters"),
                   default="uniform")
    p.add_argument("--out", required=True, help="output path (.csv for text)")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("knn", help="run kNN on a point file")
    p.add_argument("input", help="point file (FGC1 or .csv)")
    p.add_argument("--k", type=int, required=True,
                   help="neighbours per vertex, the vertex itself included")
    p.add_argument("--dims-bin", type=int, default=None,
                   help="dimensions to bin on (default min(n_c, 5))")
    p.add_argument("--n-bins", type=int, default=None,
                   help="override bins per dimension")
    p.add_argument("--method", choices=("binned", "brute"), default="binned")
    p.add_argument("--max-radius2", type=float, default=None,
                   help="squared-distance cutoff")
    p.add_argument("--threads", type=int, default=0, help="0 = all cores")
    p.add_argument("--backend", choices=("auto", "compiled", "python"),
                   default="auto")
    p.add_argument("--exhaustive-rings", action="store_true",
                   help="disable the ring early stop (diagnostics)")
    p.add_argument("--out", required=True, help="neighbour output file (FGN1)")
    p.set_defaults(func=_cmd_knn)

    p = sub.add_parser("verify", help="binned vs brute oracle sweep")
    p.add_argument("--dims", type=_int_list, default=None,
                   help="comma-separated d values (default 2..10)")
    p.add_argument("--sizes", type=_int_list, default=None,
                   help="comma-separated n values (default 100,1000,10000)")
    p.add_argument("--ks", type=_int_list, default=None,
                   help="comma-separated K values (default 1,10,40)")
    p.add_argument("--splits-list", type=_int_list, default=None,
                   help="comma-separated split counts (default 1,4)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rtol", type=float, default=1e-5)
    p.add_argument("--distribution", choices=("uniform", "clusters"),
                   default="uniform")
    p.add_argument("--threads", type=int, default=0)
    p.add_argument("--backend", choices=("auto", "compiled", "python"),
                   default="auto")
    p.add_argument("--out", default=None, help="write the per-cell report here")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("bench", help="benchmark binned vs brute")
    p.add_argument("--sizes", type=_int_list, default=[1000, 10000])
    p.add_argument("--dims", type=_int_list, default=[3])
    p.add_argument("--ks", type=_int_list, default=[10])
    p.add_argument("--splits", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--methods", default="binned,brute",
                   help="comma-separated subset of binned,brute")
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.add_argument("--distribution", choices=("uniform", "clusters"),
                   default="uniform")
    p.add_argument("--threads", type=int, default=0)
    p.add_argument("--backend", choices=("auto", "compiled", "python"),
                   default="auto")
    p.add_argument("--no-warmup", action="store_true")
    p.add_argument("--no-mem", action="store_true")
    p.add_argument("--out", default=None, help="default: stdout")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("ochelper", help="association matrices from a file")
    p.add_argument("input", help="association file (FGA1)")
    p.add_argument("--n-maxuq", type=int, default=None,
                   help="M capacity (default: largest object)")
    p.add_argument("--n-maxrs", type=int, default=None,
                   help="scan window cap (default: largest row)")
    p.add_argument("--no-m-not", action="store_true", help="skip M-not")
    p.add_argument("--out", required=True, help="output file (FGM1)")
    p.set_defaults(func=_cmd_ochelper)

    return parser


def _backend_arg(name: str):
    return None if name == "auto" else name


def _cmd_gen(args) -> int:
    cloud = generate_dataset(args.n, args.dim, splits=args.splits,
                             seed=args.seed, distribution=args.distribution)
    fileio.write_point_cloud(args.out, cloud)
    print(f"wrote {args.out}: n={cloud.n_vertices} d={cloud.n_coords} "
          f"splits={cloud.row_splits.n_splits}")
    return 0


def _cmd_knn(args) -> int:
    cloud = fileio.read_point_cloud(args.input)
    opts = KnnOptions(k=args.k, max_radius2=args.max_radius2)
    backend = _backend_arg(args.backend)
    if args.method == "brute":
        result = brute_force_knn(cloud, opts, threads=args.threads,
                                 backend=backend)
    else:
        config = BinningConfig(k_target=args.k, d_bin=args.dims_bin,
                               n_bins=args.n_bins)
        index = build_bin_index(cloud, config, backend=backend)
        result = binned_select_knn(cloud, index, opts, threads=args.threads,
                                   backend=backend,
                                   exhaustive_rings=args.exhaustive_rings)
    fileio.write_neighbors(args.out, result)
    print(f"wrote {args.out}: n={result.n_vertices} k={result.k} "
          f"method={args.method}")
    return 0


def _cmd_verify(args) -> int:
    cells, all_ok = verify_mod.run_verification_sweep(
        args.dims, args.sizes, args.ks, args.splits_list,
        seed=args.seed, threads=args.threads,
        backend=_backend_arg(args.backend), rtol=args.rtol,
        distribution=args.distribution,
        progress=None if args.quiet else _verify_progress)
    if args.out:
        with open(args.out, "w", encoding="ascii") as f:
            f.write(verify_mod.format_report(cells))
    n_bad = sum(1 for c in cells if not c.ok)
    print(f"verify: {len(cells) - n_bad}/{len(cells)} instances passed")
    verify_mod.raise_on_failure(cells, all_ok)
    return 0


def _verify_progress(cell) -> None:
    status = "ok" if cell.ok else "MISMATCH"
    print(f"  d={cell.d} n={cell.n} k={cell.k} splits={cell.splits}: {status}",
          file=sys.stderr)


def _cmd_bench(args) -> int:
    methods = tuple(m for m in args.methods.split(",") if m)
    plan = bench_mod.BenchPlan(
        dims=tuple(args.dims), sizes=tuple(args.sizes), ks=tuple(args.ks),
        splits=args.splits, seed=args.seed, repeats=args.repeats,
        methods=methods, distribution=args.distribution,
        warmup=not args.no_warmup, measure_mem=not args.no_mem)
    records = bench_mod.run_bench(plan, threads=args.threads,
                                  backend=_backend_arg(args.backend))
    text = bench_mod.emit_results(records, args.format)
    if args.out:
        with open(args.out, "w", encoding="ascii") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_ochelper(args) -> int:
    assoc = fileio.read_associations(args.input)
    matrices = oc_helper(assoc, n_maxuq=args.n_maxuq, n_maxrs=args.n_maxrs,
                         calc_m_not=not args.no_m_not)
    fileio.write_assoc_matrices(args.out, matrices)
    shape_not = "none" if matrices.m_not is None else matrices.m_not.shape
    print(f"wrote {args.out}: objects={matrices.unique.n_unique} "
          f"m={matrices.m.shape} m_not={shape_not} visits={matrices.visit_count}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except VerificationFailedError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return 2
    except FileFormatError as exc:
        print(f"file error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3
    except GridKnnError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

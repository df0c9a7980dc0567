"""Compare the compiled kernels against the pure Python fallback.

Runs the same workloads through both backends, checks that the distance
checksums agree, and prints a speedup table. The Python fallback is slow
by design, so the default workloads are small; pass --sizes to push it.

Usage:
    python benchmarks/compare_backends.py
    python benchmarks/compare_backends.py --sizes 1000,20000 --ks 5,20
    python benchmarks/compare_backends.py --out backends.csv
"""

import argparse
import sys

from gridknn._kernels import HAVE_COMPILED, backend_names
from gridknn.harness.bench import BenchPlan, emit_results, run_bench


def parse_int_list(text):
    return tuple(int(t) for t in text.split(",") if t.strip())


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dims", type=parse_int_list, default=(2, 3, 5),
                    help="comma separated coordinate counts")
    ap.add_argument("--sizes", type=parse_int_list, default=(1000, 5000),
                    help="comma separated vertex counts")
    ap.add_argument("--ks", type=parse_int_list, default=(10,),
                    help="comma separated neighbor counts")
    ap.add_argument("--splits", type=int, default=1)
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--methods", default="binned,brute",
                    help="comma separated subset of binned,brute")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=0)
    ap.add_argument("--out", default=None,
                    help="also write per-backend records as CSV")
    args = ap.parse_args(argv)

    names = backend_names()
    if "compiled" not in names:
        print("compiled backend unavailable, nothing to compare",
              file=sys.stderr)
        return 1
    assert HAVE_COMPILED

    methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    plan = BenchPlan(dims=args.dims, sizes=args.sizes, ks=args.ks,
                     splits=args.splits, seed=args.seed,
                     repeats=args.repeats, methods=methods,
                     measure_mem=False)

    results = {}
    for backend in ("compiled", "python"):
        print(f"running {backend} backend ...", flush=True)
        results[backend] = run_bench(plan, threads=args.threads,
                                     backend=backend)

    mismatches = 0
    header = (f"{'method':>7} {'n':>7} {'d':>3} {'k':>4} "
              f"{'compiled qps':>13} {'python qps':>12} {'speedup':>8}")
    print()
    print(header)
    print("-" * len(header))
    for rc, rp in zip(results["compiled"], results["python"]):
        key = (rc.method, rc.n, rc.d, rc.k, rc.splits)
        assert key == (rp.method, rp.n, rp.d, rp.k, rp.splits)
        same = rc.checksum == rp.checksum
        if not same:
            mismatches += 1
        flag = "" if same else "  CHECKSUM MISMATCH"
        print(f"{rc.method:>7} {rc.n:>7} {rc.d:>3} {rc.k:>4} "
              f"{rc.qps:>13.0f} {rp.qps:>12.0f} "
              f"{rc.qps / rp.qps:>7.1f}x{flag}")

    if args.out:
        tagged = []
        for backend in ("compiled", "python"):
            for r in results[backend]:
                r = type(r)(method=f"{backend}:{r.method}", n=r.n, d=r.d,
                            k=r.k, splits=r.splits, time_s=r.time_s,
                            qps=r.qps, mem_bytes=r.mem_bytes,
                            checksum=r.checksum)
                tagged.append(r)
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(emit_results(tagged, fmt="csv"))
        print(f"\nwrote {args.out}")

    if mismatches:
        print(f"\n{mismatches} checksum mismatches", file=sys.stderr)
        return 2
    print("\nall checksums agree across backends")
    return 0


if __name__ == "__main__":
    sys.exit(main())

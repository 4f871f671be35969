"""Pattern-search evidence for the maximal number of zeros, n = 3..6.

For each n: the downward scan (with combinatorial pruning) to the first
feasible zero count, then an unpruned optimizer run over every pattern with
one more zero.  Writes one JSON report per n.

    python scripts/zero_count_evidence.py --out-dir results/zeros --restarts 200
"""
import argparse
import json
import time
from pathlib import Path

from qgvertex.families import max_zeros_bound
from qgvertex.patterns import max_zeros, search_zero_count


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[3, 4, 5, 6])
    ap.add_argument("--restarts", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=None)
    ap.add_argument("--out-dir", default="results/zeros")
    args = ap.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for n in args.n:
        t0 = time.perf_counter()
        res = max_zeros(n, restarts=args.restarts, seed=args.seed, workers=args.workers)
        extra = search_zero_count(n, res.max_zeros + 1, restarts=args.restarts, seed=args.seed,
                                  prune=False, workers=args.workers)
        report = res.to_dict()
        report["bound"] = max_zeros_bound(n)
        report["one_more_unpruned"] = extra.to_dict()
        report["seconds"] = round(time.perf_counter() - t0, 1)
        (out / f"zeros_n{n}.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
        print(f"n={n}: max zeros {res.max_zeros} (bound {max_zeros_bound(n)}), "
              f"+1: {extra.patterns} patterns, feasible {extra.feasible}, undecided {extra.undecided}, "
              f"min residual {extra.best.residual:.2e}, {report['seconds']} s", flush=True)


if __name__ == "__main__":
    main()

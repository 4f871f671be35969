"""Which delta strengths make the n = 9 blueprint converge?

Builds the compiled graph twice: with strengths from diag((2I - J)R)/d and
with the bipartite-sum shortcut 1 - sum|T| (which sets v4 = v5 = 0).  Only
the former approaches the target S as d -> 0.

    python scripts/n9_strength_check.py
"""
import argparse

import numpy as np

from qgvertex.couplings import build_s_from_t, recover_t_from_s
from qgvertex.families import KappaFamilySpec, build_family
from qgvertex.realization import RealizationBlueprint, bipartite_strengths, compile_coupling
from qgvertex.solver import MetricGraph, halving_schedule, scatter_retry


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=9)
    ap.add_argument("--k", type=float, default=1.0)
    args = ap.parse_args()
    c, _ = recover_t_from_s(build_family(KappaFamilySpec.default(args.n)))
    target = build_s_from_t(c).entries
    general = compile_coupling(c, d=1.0)
    shortcut = RealizationBlueprint(n=general.n, d=1.0, ratios=general.ratios, phases=general.phases,
                                    strengths=bipartite_strengths(c.t), m=general.m)
    print("strengths (general): ", np.round(general.strengths, 6).tolist())
    print("strengths (shortcut):", np.round(shortcut.strengths, 6).tolist())
    print(f"{'d':>10} {'general':>12} {'shortcut':>12}")
    for d in halving_schedule(0.1, 6):
        errs = []
        for b in (general, shortcut):
            s, _ = scatter_retry(MetricGraph.from_blueprint(b.with_scale(d)), args.k)
            errs.append(np.max(np.abs(s - target)))
        print(f"{d:10.6f} {errs[0]:12.4e} {errs[1]:12.4e}")


if __name__ == "__main__":
    main()

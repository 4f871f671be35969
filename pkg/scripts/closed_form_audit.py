"""Compare the typeset closed forms with the general potential formula.

Reports, per odd degree, which first-column rows of the typeset display and
of the corrected display deviate from the general formula, and the
probability sums of the two f2 variants.

    python scripts/closed_form_audit.py --n 3 5 7 9 11
"""
import argparse
import json

import numpy as np

from qgvertex.families import KappaFamilySpec
from qgvertex.potentials import f1, f2, f2_printed, first_column_report


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[3, 5, 7, 9, 11])
    ap.add_argument("--u", type=float, default=1.0)
    ap.add_argument("--kappa1", type=complex, default=1.0)
    args = ap.parse_args()
    energies = np.linspace(0.1, 3.0, 20)
    for n in args.n:
        q = (n - 1) // 2
        spec = KappaFamilySpec.default(n, kappas=[args.kappa1] + [1.0] * (q - 1))
        rep = first_column_report(spec, args.u, energies)
        print(json.dumps({k: rep[k] for k in ("n", "printed_discrepant_rows", "corrected_discrepant_rows")}))
    for e in (1.5, 2.0, 4.0):
        a = abs(f1(e, args.u)) ** 2
        print(f"E={e}: |f1|^2+|f2|^2 = {a + abs(f2(e, args.u)) ** 2:.15f} (fourth root), "
              f"{a + abs(f2_printed(e, args.u)) ** 2:.15f} (square root)")


if __name__ == "__main__":
    main()

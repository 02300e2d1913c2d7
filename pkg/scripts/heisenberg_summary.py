"""Structure residuals of the hyperbolic Heisenberg group next to the phase space."""

import argparse

from tpsgeom import heisenberg as hh
from tpsgeom.report import SuiteConfig, connection_checks
from tpsgeom.numerics import sample_chart_array


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, nargs="+", default=[1, 2, 3])
    ap.add_argument("--points", type=int, default=30)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()

    for n in args.n:
        rep = hh.structure_checks(n, hh.to_chart(hh.sample_group_array(n, args.points, args.seed)))
        tps = {c.check_id.split(".")[1]: c.max_residual for c in connection_checks(n, sample_chart_array(n, args.points, args.seed), SuiteConfig())}
        print(f"n={n}  association sign (group) {rep.association_sign:+.0f}")
        print(f"  canonical curvature  group {rep.canonical_curvature:.2e}   phase space {tps['canonical_flatness']:.2e}")
        print(f"  Nijenhuis vertical   group {rep.nijenhuis_residual:.2e}   phase space {tps['normality']:.2e}")
        print(f"  Nijenhuis horizontal group {rep.nijenhuis_horizontal:.2e}   phase space {tps['normality_horizontal']:.2e}")


if __name__ == "__main__":
    main()

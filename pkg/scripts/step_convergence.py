"""How finite-difference step size affects the curvature residuals.

Sweeps base step and Richardson depth, printing max |R~| for the canonical
connection and the spread of the Levi-Civita scalar curvature.
"""

import argparse

import numpy as np

from tpsgeom.connections import ricci_from_riemann
from tpsgeom.framecalc import FrameGeometry
from tpsgeom.numerics import StepScheme, sample_chart_array
from tpsgeom.phase_space import tps_structure


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=1)
    ap.add_argument("--points", type=int, default=20)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()

    X = sample_chart_array(args.n, args.points, args.seed)
    print(f"{'step':>8} {'levels':>6} {'max|R~|':>11} {'scalar-2n':>11}")
    for step in (1e-2, 3e-3, 1e-3, 3e-4, 1e-4):
        for levels in (1, 2, 3):
            geom = FrameGeometry(tps_structure(args.n), scheme=StepScheme(step, levels))
            flat = np.max(np.abs(geom.riemann(geom.canonical, X)))
            ric = ricci_from_riemann(geom.riemann(geom.levi_civita, X))
            scal = np.einsum("...jl,...jl->...", np.linalg.inv(geom.metric(X)), ric)
            print(f"{step:8.0e} {levels:6d} {flat:11.3e} {np.max(np.abs(scal - 2 * args.n)):11.3e}")


if __name__ == "__main__":
    main()

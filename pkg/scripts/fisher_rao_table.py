"""Tabulate w, p, covariance and the control metric along a model's grid."""

import argparse

import numpy as np

from tpsgeom import statmech as sm


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--model", default="gaussian_quadratic")
    ap.add_argument("--points", type=int, default=11)
    args = ap.parse_args()

    m = sm.get_model(args.model)
    np.set_printoptions(precision=6, suppress=True)
    for q in m.grid(args.points):
        st = sm.equilibrium_state(m, q)
        det, ok = sm.invertibility_check(m, q)
        print(f"q={np.round(q, 4).tolist()} w={st.w:.8f} p={np.round(st.p, 8).tolist()} det={det:.4e} ok={ok}")
        print("  control metric:", sm.fisher_rao_control_metric(m, q).tolist())


if __name__ == "__main__":
    main()

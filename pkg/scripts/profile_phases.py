"""Share of wall time per search phase as the instance grows."""

import argparse

import numpy as np

from qapfn.cli import profile_fractions
from qapfn.instance_io import load_instance
from qapfn.qubo_model import build_q_operator
from qapfn.search import PHASES, SearchConfig, run_search


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("instances", nargs="*", default=["had12", "nug20", "tai50a"])
    ap.add_argument("--iters", type=int, default=10_000)
    ap.add_argument("--gradient", default="approximate", choices=["approximate", "exact"])
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()
    print(f"{'instance':8s} {'n':>3} {'us/iter':>8} " + " ".join(f"{p:>21s}" for p in PHASES))
    for name in args.instances:
        inst = load_instance(name)
        Q = build_q_operator(inst)
        fracs, per_iter = [], []
        for seed in range(args.repeats):
            r = run_search(inst, SearchConfig(i_max=args.iters, gradient_mode=args.gradient),
                           seed=seed, Q=Q)
            f = profile_fractions(r.timing_breakdown)
            fracs.append([f[p] for p in PHASES])
            per_iter.append(1e6 * r.wall_time / max(r.iterations, 1))
        med = np.median(fracs, axis=0)
        print(f"{name:8s} {inst.n:3d} {np.median(per_iter):8.1f} "
              + " ".join(f"{v:21.3f}" for v in med))


if __name__ == "__main__":
    main()

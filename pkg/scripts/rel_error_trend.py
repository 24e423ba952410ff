"""Mean relative error of the approximate gradient along a search, per instance size."""

import argparse

import numpy as np

from qapfn.instance_io import load_instance
from qapfn.qubo_model import build_q_operator
from qapfn.search import SearchConfig, run_search


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("instances", nargs="*", default=["tai12a", "tai25a", "tai50a"])
    ap.add_argument("--iters", type=int, default=1000)
    ap.add_argument("--seeds", type=int, default=5)
    args = ap.parse_args()
    print("instance  n    " + "  ".join(f"seed{s}" for s in range(args.seeds)))
    for name in args.instances:
        inst = load_instance(name)
        Q = build_q_operator(inst)
        means = []
        for seed in range(args.seeds):
            r = run_search(inst, SearchConfig(i_max=args.iters, record_rel_error=True),
                           seed=seed, Q=Q)
            means.append(np.mean(r.rel_errors))
        print(f"{name:8s} {inst.n:3d}  " + "  ".join(f"{m:.4f}" for m in means))


if __name__ == "__main__":
    main()

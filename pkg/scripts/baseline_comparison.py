"""Native tabu vs penalty-QUBO single-flip tabu vs random permutations, several seeds."""

import argparse

from qapfn.cli import compare_baseline
from qapfn.gradient import EXACT
from qapfn.instance_io import best_known, load_instance


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("instance", nargs="?", default="chr12a")
    ap.add_argument("--iters", type=int, default=1000)
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--alpha", type=float, default=1.0)
    args = ap.parse_args()
    inst = load_instance(args.instance)
    f_star = best_known(args.instance)
    print(f"{'seed':>4} {'solver':16s} {'feasible':>8} {'final gap':>10}")
    for seed in range(args.seeds):
        _, stats = compare_baseline(inst, args.iters, seed, args.alpha, f_star, EXACT)
        for label, s in stats.items():
            gap = "n/a" if s["final_gap"] is None else f"{s['final_gap']:.4f}"
            print(f"{seed:>4} {label:16s} {s['feasible_visits']:>8} {gap:>10}")


if __name__ == "__main__":
    main()

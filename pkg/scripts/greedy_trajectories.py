"""Objective trajectory of Greedy from the identity start, exact vs approximate gradient."""

import argparse

from qapfn.gradient import APPROXIMATE, EXACT
from qapfn.heuristics import HeuristicConfig
from qapfn.instance_io import load_instance
from qapfn.search import SearchConfig, run_search


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("instance", nargs="?", default="chr12a")
    ap.add_argument("--iters", type=int, default=12)
    args = ap.parse_args()
    inst = load_instance(args.instance)
    runs = {}
    for mode in (EXACT, APPROXIMATE):
        cfg = SearchConfig(i_max=args.iters, gradient_mode=mode, start="identity", trace=True,
                           heuristic=HeuristicConfig("greedy"))
        runs[mode] = run_search(inst, cfg).trace
    print(f"{'k':>3} {'exact':>10} {'approximate':>12}")
    for (k, fe, *_), (_, fa, *_) in zip(runs[EXACT], runs[APPROXIMATE]):
        print(f"{k:>3} {fe:>10.0f} {fa:>12.0f}")


if __name__ == "__main__":
    main()

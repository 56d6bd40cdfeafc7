"""GRAPE and Krotov on a 25-step Toffoli grid stall far from the target.

Runs a few seeds for 100 iterations each and prints the final phase-sensitive
infidelity ``1 - Re Tr(G^dag U) / 24`` of both methods.
"""

import argparse

import numpy as np

from eoqubit import optimizers as opt
from eoqubit.eo_model import default_model, toffoli_target


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seeds", type=int, default=3)
    parser.add_argument("--iterations", type=int, default=100)
    args = parser.parse_args(argv)
    model = default_model()
    target = toffoli_target(model)
    grape, krotov = [], []
    for seed in range(args.seeds):
        g = opt.grape_optimize(model, target, L=25, lr=0.02, iterations=args.iterations, seed=seed)
        k = opt.krotov_optimize(model, target, opt.random_initial_grid(25, 0.5, seed),
                                opt.KrotovConfig(max_iterations=args.iterations))
        grape.append(g.final_jtre)
        krotov.append(k.final_jtre)
        print(f"seed {seed}: GRAPE {g.final_jtre:.3f}, Krotov {k.final_jtre:.3f}")
    print(f"median: GRAPE {np.median(grape):.3f}, Krotov {np.median(krotov):.3f}")


if __name__ == "__main__":
    main()

"""Charge and crosstalk noise sweeps of the bundled 92-pulse Toffoli.

At the smallest strengths the infidelity sits at the sequence's intrinsic
floor; well above the floor it grows quadratically with the mean strength.
"""

import argparse

from eoqubit import noise_lab as nl
from eoqubit import pulse_sequence as ps
from eoqubit.eo_model import default_model, toffoli_target


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--samples", type=int, default=20)
    args = parser.parse_args(argv)
    model = default_model()
    target = toffoli_target(model)
    seq = ps.load_bundled("toffoli_jk_92")
    grid = nl.log_grid(1e-8, 1e-1, 8)
    cfg = nl.NoiseConfig(samples=args.samples, seed=0)
    print(f"intrinsic floor {nl.infidelity_at(seq, target, model):.3e}")
    for kind in nl.KINDS:
        res = nl.noise_sweep(seq, model, target, kind, grid, cfg)
        print(kind)
        for row in res.rows:
            print(f"  {row.mean:8.0e}  {row.mean_infidelity:.3e} +- {row.stderr:.1e}")
        print(f"  log-log slope on 1e-4..1e-2: {nl.loglog_slope(grid[4:7], res.infidelities[4:7]):.3f}")


if __name__ == "__main__":
    main()

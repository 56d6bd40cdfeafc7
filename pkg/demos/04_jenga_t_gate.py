"""Jenga-Krotov pruning on a small problem.

A random 10-step grid restricted to qubit A's two exchange pairs is driven
to the T gate with Krotov, then pruned pulse by pulse.  The result has the
same length as the closed-form four-pulse T sequence.
"""

from eoqubit import optimizers as opt
from eoqubit import pulse_sequence as ps
from eoqubit.eo_model import default_model, target_by_name


def main(seed=0):
    model = default_model()
    target = target_by_name("t-gate:A", model)
    mask = opt.structural_mask(10, "odd", excluded_pairs=(3, 4, 5, 6, 7, 8))
    kcfg = opt.KrotovConfig(lambda_l=0.5, max_iterations=3000)
    start = opt.krotov_optimize(model, target, opt.random_initial_grid(10, 0.5, seed, mask), kcfg)
    print(f"Krotov: {start.iterations} iterations, J_T,re = {start.final_jtre:.2e}, "
          f"{start.grid.pulse_count()} pulses")
    res = opt.jenga_prune(model, target, start.grid, opt.JengaConfig(kcfg), seed=seed,
                          progress=lambda r: print(f"  attempt {r['attempt']}: step {r['step']} "
                                                   f"{'removed' if r['accepted'] else 'kept'}"))
    print(f"pruned: {ps.count_pulses(res.sequence)} (pulses, steps), J_T,re = {res.final_jtre:.2e}")
    print(ps.sequence_to_text(res.sequence))


if __name__ == "__main__":
    main()

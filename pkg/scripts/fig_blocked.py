"""Completed flows and system throughput against the number of blocked flows, all schemes."""
from _common import parser, run_and_print

from backhaul_sched.harness import SweepSpec

if __name__ == "__main__":
    args = parser(__doc__, "fig_blocked.csv").parse_args()
    spec = SweepSpec(blocked_counts=tuple(range(11)), sigma_values=(0.01,), beta_values=(0.53,),
                     repetitions=args.reps, master_seed=args.seed)
    run_and_print(spec, args.out, "blocked")

"""RAQS against the relay-selection threshold beta at 5 blocked flows."""
from _common import parser, run_and_print

from backhaul_sched.harness import DEFAULT_BETAS, SweepSpec

if __name__ == "__main__":
    args = parser(__doc__, "fig_beta.csv").parse_args()
    spec = SweepSpec(schemes=("raqs",), blocked_counts=(5,), sigma_values=(0.01,),
                     beta_values=DEFAULT_BETAS, repetitions=args.reps, master_seed=args.seed)
    run_and_print(spec, args.out, "beta")

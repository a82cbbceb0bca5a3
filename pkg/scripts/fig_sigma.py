"""RAQS and MQIS against the interference threshold sigma (mW) at 5 blocked flows."""
from _common import parser, run_and_print

from backhaul_sched.harness import DEFAULT_SIGMAS, SweepSpec

if __name__ == "__main__":
    args = parser(__doc__, "fig_sigma.csv").parse_args()
    spec = SweepSpec(schemes=("raqs", "mqis"), blocked_counts=(5,), sigma_values=DEFAULT_SIGMAS,
                     beta_values=(0.53,), repetitions=args.reps, master_seed=args.seed)
    run_and_print(spec, args.out, "sigma")

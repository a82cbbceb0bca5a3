"""Heuristic against the exhaustive optimum on tiny instances."""
import argparse
import json

from backhaul_sched.oracle import gap_summary, oracle_gap

if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--instances", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    recs = oracle_gap(args.instances, args.seed)
    print(json.dumps(gap_summary(recs), indent=2))
    for r in recs:
        if r.gap:
            print(f"seed {r.seed}: flows {r.n_flows}, slots {r.n_slots}, "
                  f"oracle {r.oracle_completed}, heuristic {r.heuristic_completed}")

import argparse

from backhaul_sched.harness import aggregate, run_experiment, write_outputs


def parser(doc, out):
    p = argparse.ArgumentParser(description=doc)
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=out)
    return p


def run_and_print(spec, out, axis):
    rows = run_experiment(spec)
    paths = write_outputs(rows, out)
    print(f"{'scheme':8} {axis:>8} {'completed':>10} {'stderr':>7} {'Gbps':>7}")
    for a in aggregate(rows):
        print(f"{a['scheme']:8} {a[axis]:>8g} {a['completed_mean']:>10.2f} "
              f"{a['completed_stderr']:>7.2f} {a['throughput_mean'] / 1e9:>7.2f}")
    print("wrote", *paths)

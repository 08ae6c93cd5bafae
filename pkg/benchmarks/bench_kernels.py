"""Compare the compiled and pure-Python round kernels.

    python benchmarks/bench_kernels.py --rounds 1000000 --repeat 5
"""
import argparse
import time

import numpy as np

from lm05sim import kernels
from lm05sim._layout import N_UNIFORMS
from lm05sim.channel_noise import AttackSpec, NoiseModel
from lm05sim.protocol import kernel_params
from lm05sim.quantum_core import Basis


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rounds", type=int, default=1_000_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    noise = NoiseModel(attack=AttackSpec(Basis.Z, 0.7, 0.4), delta=0.015, xi=0.03)
    params = kernel_params(noise, 0.5)
    u = np.random.default_rng(1).random((args.rounds, N_UNIFORMS))

    results = {}
    for name, sim in kernels.BACKENDS.items():
        rec = sim(u, params)
        tally = kernels.TALLIES[name]
        t_sim = best_of(lambda: sim(u, params), args.repeat)
        t_tally = best_of(lambda: tally(rec), args.repeat)
        results[name] = (rec, t_sim, t_tally)
        print(f"{name:>9}: simulate {1e9 * t_sim / args.rounds:7.1f} ns/round   "
              f"tally {1e9 * t_tally / args.rounds:6.1f} ns/round")

    if len(results) == 2:
        (rec_c, sim_c, tal_c), (rec_p, sim_p, tal_p) = results["compiled"], results["python"]
        assert np.array_equal(rec_c, rec_p), "backends disagree"
        print(f"speed-up: simulate x{sim_p / sim_c:.1f}, tally x{tal_p / tal_c:.1f} (records identical)")
    else:
        print("compiled extension not built; only the Python backend was timed")


if __name__ == "__main__":
    main()

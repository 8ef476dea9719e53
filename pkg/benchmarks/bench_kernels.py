"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py --sizes 300 3000 --repeat 5

Each kernel is run on the same rank-1 model under both backends; the
table lists the best wall time of ``--repeat`` runs and the largest
absolute difference between the two results.
"""
import argparse
import time

import numpy as np

from qcdecay import kernels
from qcdecay.model import rank1_model
from qcdecay.resolvent import default_epsilon, eigensystem


def _cases(n):
    m = rank1_model(n, 20.0, gamma=1.41, kind="poisson", seed=0)
    es = eigensystem(m, method="secular")
    eps = default_epsilon(m)
    x = np.linspace(-10.0, 10.0, 2001)
    t = np.linspace(0.0, 5.0, 801)
    e, c = m.spectrum.energies, m.couplings.strengths
    return {
        "secular_roots": lambda: kernels.secular_roots(e, c, m.level_energy),
        "resolvent_sums": lambda: kernels.resolvent_sums(x, e, c, eps),
        "lorentz_sum": lambda: kernels.lorentz_sum(x, es.eigenvalues, es.weights, eps),
        "survival_sum": lambda: kernels.survival_sum(t, es.eigenvalues, es.weights),
    }


def _best(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, np.concatenate([np.ravel(a) for a in (out if isinstance(out, tuple) else (out,))])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[300, 3000])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args(argv)
    backends = kernels.available_backends()
    if "compiled" not in backends:
        print("compiled kernels not built; only the numpy fallback is timed")
    kernels.set_num_threads(args.threads)
    print(f"{'kernel':<16}{'N_B':>7}" + "".join(f"{b + ' [ms]':>16}" for b in backends)
          + f"{'speedup':>10}{'max |diff|':>13}")
    for n in args.sizes:
        for name, fn in _cases(n).items():
            times, outs = [], []
            for b in backends:
                kernels.use_backend(b)
                dt, out = _best(fn, args.repeat)
                times.append(dt)
                outs.append(out)
            row = f"{name:<16}{n:>7}" + "".join(f"{1e3 * dt:>16.3f}" for dt in times)
            if len(times) == 2:
                row += f"{times[1] / times[0]:>10.1f}{np.max(np.abs(outs[0] - outs[1])):>13.2e}"
            print(row)
    kernels.use_backend("auto")


if __name__ == "__main__":
    main()

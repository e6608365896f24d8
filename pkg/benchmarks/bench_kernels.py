"""Compare the numba and numpy kernel paths.

Part one times each kernel on inputs shaped like the fuzzing workload
(small m, many calls) and like the experiments (m = 10..12, n = 101).
Part two times a whole fuzz run in two subprocesses, one per path, since
the path is chosen once at import time.

    python3 benchmarks/bench_kernels.py [--repeats N] [--skip-end-to-end]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from alliancevote import _kernels
from alliancevote.cultures import CultureSpec, derive_seed, sample


def _inputs(m, n, seed):
    e = sample(CultureSpec("ic", m, n, 2, seed))
    active = np.ones(m, dtype=np.bool_)
    return {
        "ballots": e.ballots,
        "counts": e.counts,
        "pos": e.pos,
        "pref": e.pref,
        "active": active,
        "alliance_of": e.alliance_of,
        "n": e.n,
        "strength": _kernels.NUMPY_KERNELS["widest_paths"](e.pref, active, active),
    }


CALLS = {
    "positions": lambda k, x: k(x["ballots"]),
    "pref_matrix": lambda k, x: k(x["pos"], x["counts"]),
    "top_counts": lambda k, x: k(x["ballots"], x["counts"], x["active"]),
    "prefix_counts": lambda k, x: k(x["ballots"], x["counts"], x["active"], x["alliance_of"]),
    "widest_paths": lambda k, x: k(x["pref"], x["active"], x["active"]),
    "restricted_strengths": lambda k, x: k(x["pref"], x["active"], x["alliance_of"]),
    "maximin_scores": lambda k, x: k(x["pref"], x["active"], x["alliance_of"], True, x["n"]),
    "beatpath_scores": lambda k, x: k(x["strength"], x["active"], x["alliance_of"], True),
}


def time_kernels(m, n, repeats):
    inputs = [_inputs(m, n, derive_seed(99, i)) for i in range(64)]
    rows = []
    for name, call in CALLS.items():
        timings = {}
        for label, table in (("numpy", _kernels.NUMPY_KERNELS), ("numba", _kernels.NUMBA_KERNELS)):
            if table is None:
                continue
            fn = table[name]
            call(fn, inputs[0])  # compile / warm up
            start = time.perf_counter()
            for _ in range(repeats):
                for x in inputs:
                    call(fn, x)
            timings[label] = (time.perf_counter() - start) / (repeats * len(inputs)) * 1e6
        rows.append((name, timings))
    return rows


FUZZ_SNIPPET = (
    "import time;from alliancevote.axioms import fuzz;"
    "fuzz('iw-maximin','alliance-monotonicity','ic:m=3..6,n=3..15,k=2..3',50,0);"
    "t=time.perf_counter();"
    "fuzz('iw-maximin','alliance-monotonicity','ic:m=3..6,n=3..15,k=2..3',1000,1);"
    "print(time.perf_counter()-t)"
)


def time_end_to_end():
    out = {}
    for label, flag in (("numba", "0"), ("numpy", "1")):
        env = dict(os.environ, ALLIANCEVOTE_DISABLE_NUMBA=flag)
        res = subprocess.run([sys.executable, "-c", FUZZ_SNIPPET], env=env, capture_output=True, text=True, check=True)
        out[label] = float(res.stdout.strip())
    return out


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=20)
    parser.add_argument("--skip-end-to-end", action="store_true")
    args = parser.parse_args()

    if _kernels.NUMBA_KERNELS is None:
        print("numba is not installed; only the numpy path is timed")
    for m, n in ((5, 12), (10, 101)):
        print(f"\nkernel timings, m={m}, n={n} (microseconds per call)")
        print(f"{'kernel':<22}{'numpy':>10}{'numba':>10}{'speedup':>10}")
        for name, t in time_kernels(m, n, args.repeats):
            speed = t["numpy"] / t["numba"] if "numba" in t else float("nan")
            print(f"{name:<22}{t['numpy']:>10.2f}{t.get('numba', float('nan')):>10.2f}{speed:>9.1f}x")

    if not args.skip_end_to_end:
        e2e = time_end_to_end()
        print("\nfuzz iw-maximin / alliance-monotonicity, 1000 trials (seconds)")
        for label, secs in e2e.items():
            print(f"  {label:<6}{secs:8.2f}")


if __name__ == "__main__":
    main()

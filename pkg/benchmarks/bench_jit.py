#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Run directly to time the current mode (honoring RNGTS_JIT), or with
--compare to spawn one subprocess per mode and print a side-by-side
table with speedups.  Result p-values are carried along and checked for
equality across modes, so the table doubles as a quick bit-identity
smoke test.

Usage:
    python3 benchmarks/bench_jit.py [--repeats N] [--json]
    python3 benchmarks/bench_jit.py --compare [--repeats N]
"""

import argparse
import json
import os
import subprocess
import sys
import time


def _cases():
    from rngts.battery import (
        BinaryRankTest,
        ChisqrUniformityTest,
        CrapsTest,
        GcdTest,
        MaurersUniversalTest,
        MinimumDistanceTest,
        ParkingLotTest,
        SqueezeTest,
    )
    from rngts.battery.uniformity import RunsTest

    return [
        ("chisqr 1e5 (numpy only)", lambda: ChisqrUniformityTest()),
        ("squeeze 1e5 games", lambda: SqueezeTest()),
        ("craps 1e5 games", lambda: CrapsTest(games=100000)),
        ("binary rank 4000x32x32", lambda: BinaryRankTest()),
        ("parking 12000 attempts", lambda: ParkingLotTest()),
        ("min distance 8000 pts", lambda: MinimumDistanceTest()),
        ("runs 1e4", lambda: RunsTest()),
        ("gcd 1e5 pairs", lambda: GcdTest()),
        ("maurer L=8", lambda: MaurersUniversalTest()),
    ]


def measure(repeats: int) -> dict:
    from rngts._jit import JIT_ENABLED
    from rngts.genkit import Mt19937

    rows = {}
    for label, factory in _cases():
        factory().execute(Mt19937(1), (0.05,))  # warmup pays compilation
        best = float("inf")
        p = None
        for _ in range(repeats):
            case = factory()
            t0 = time.perf_counter()
            out = case.execute(Mt19937(1), (0.05,))
            best = min(best, time.perf_counter() - t0)
            p = next(iter(out.results[0].p_values.values()))
        rows[label] = {"seconds": best, "p": p}
    return {"jit": JIT_ENABLED, "results": rows}


def compare(repeats: int) -> int:
    script = os.path.abspath(__file__)
    timings = {}
    for flag in ("0", "1"):
        env = dict(os.environ, RNGTS_JIT=flag)
        proc = subprocess.run(
            [sys.executable, script, "--json", "--repeats", str(repeats)],
            env=env, capture_output=True, text=True,
        )
        if proc.returncode != 0:
            sys.stderr.write(proc.stderr)
            return proc.returncode
        timings[flag] = json.loads(proc.stdout)
    if timings["1"]["jit"] is not True:
        sys.stderr.write("warning: JIT unavailable; comparing fallback "
                         "against itself\n")
    print(f"{'case':<26} {'fallback':>10} {'jit':>10} {'speedup':>9}  match")
    for label in timings["0"]["results"]:
        slow = timings["0"]["results"][label]
        fast = timings["1"]["results"][label]
        same = "yes" if slow["p"] == fast["p"] else "NO"
        print(f"{label:<26} {slow['seconds']:>9.3f}s {fast['seconds']:>9.3f}s "
              f"{slow['seconds'] / fast['seconds']:>8.1f}x  {same}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=3,
                        help="timed repetitions per case; best is kept")
    parser.add_argument("--json", action="store_true",
                        help="emit machine-readable timings")
    parser.add_argument("--compare", action="store_true",
                        help="run both modes in subprocesses and tabulate")
    args = parser.parse_args(argv)
    if args.compare:
        return compare(args.repeats)
    data = measure(args.repeats)
    if args.json:
        json.dump(data, sys.stdout)
        return 0
    mode = "jit" if data["jit"] else "fallback"
    print(f"mode: {mode}")
    for label, row in data["results"].items():
        print(f"{label:<26} {row['seconds']:>9.3f}s  p={row['p']:.6g}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Sweep the gain threshold and report the optimal operating point.

Prints one line per threshold plus the locations of the reflectivity
maximum and the fidelity minimum.
"""

import argparse
import time

import numpy as np

from stochamp.optimizer import sweep


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--g-min", type=float, default=1.01)
    ap.add_argument("--g-max", type=float, default=1.99)
    ap.add_argument("--step", type=float, default=0.01)
    ap.add_argument("--starts", type=int, default=4)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    count = int(round((args.g_max - args.g_min) / args.step)) + 1
    gs = [round(args.g_min + k * args.step, 10) for k in range(count)]
    t0 = time.perf_counter()
    results = sweep(gs, multistart_count=args.starts, seed=args.seed)
    elapsed = time.perf_counter() - t0

    print(f"{'g_min':>6} {'P_opt':>11} {'alpha':>7} {'r':>7} {'F':>7}")
    ok = [(g, res) for g, res in zip(gs, results) if res is not None]
    for g, res in ok:
        print(f"{g:6.3f} {res.p_opt:11.4e} {res.alpha_opt:7.4f} {res.r_mean:7.4f} {res.f_opt:7.4f}")
    r = np.array([res.r_mean for _, res in ok])
    f = np.array([res.f_opt for _, res in ok])
    print(f"max r = {r.max():.4f} at g_min = {ok[int(r.argmax())][0]:.3f}")
    print(f"min F = {f.min():.4f} at g_min = {ok[int(f.argmin())][0]:.3f}")
    print(f"{len(gs)} thresholds in {elapsed:.1f} s, {len(gs) - len(ok)} failed")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Recompute results.csv of a run directory from samples.csv and compare.

Success and NormDist are averaged per seed, then mean and sample standard
deviation are taken across seeds.
"""
import argparse
import csv
import statistics
import sys
from collections import OrderedDict, defaultdict
from pathlib import Path


def aggregate(samples):
    groups = OrderedDict()
    for row in samples:
        key = (row["task"], row["variant"])
        groups.setdefault(key, defaultdict(list))[int(row["seed"])].append(row)
    out = {}
    for key, by_seed in groups.items():
        succ = [statistics.fmean(float(r["success"]) for r in rows) for rows in by_seed.values()]
        nd = [statistics.fmean(float(r["norm_dist"]) for r in rows) for rows in by_seed.values()]
        sd = statistics.stdev if len(by_seed) > 1 else (lambda _: 0.0)
        out[key] = {
            "success_mean": statistics.fmean(succ),
            "success_std": sd(succ),
            "norm_dist_mean": statistics.fmean(nd),
            "norm_dist_std": sd(nd),
            "seeds": len(by_seed),
            "trajectories": sum(len(rows) for rows in by_seed.values()),
        }
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("run_dir", type=Path)
    ap.add_argument("--tol", type=float, default=1e-9)
    args = ap.parse_args()

    with open(args.run_dir / "samples.csv", newline="") as f:
        expected = aggregate(list(csv.DictReader(f)))
    with open(args.run_dir / "results.csv", newline="") as f:
        reported = {(r["task"], r["variant"]): r for r in csv.DictReader(f)}

    errors = []
    if set(expected) != set(reported):
        errors.append(f"rows differ: {sorted(set(expected) ^ set(reported))}")
    for key in expected.keys() & reported.keys():
        for field, want in expected[key].items():
            got = float(reported[key][field])
            if abs(got - want) > args.tol:
                errors.append(f"{key[0]}/{key[1]} {field}: results.csv {got!r}, recomputed {want!r}")
    for e in errors:
        print(e)
    print(f"{len(expected)} rows checked, {len(errors)} mismatches")
    return 1 if errors else 0


if __name__ == "__main__":
    sys.exit(main())

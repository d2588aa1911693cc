#!/usr/bin/env python3
"""Ratio searches for every verified estimate across torus scales and
lattice sizes, plus the inadmissible negative control."""

import sys

from hokdv.cli import main

RUNS = [
    # the resolution-space product estimate at the threshold regularity
    *[
        ["estimate-search", "--set", "estimate = 3.1", "--set", f"j = {j}",
         "--set", f"s = {-j + 0.5}", "--set", f"lam = {lam}",
         "--set", f"k_max = {k}", "--set", "trials = 500"]
        for j in (2, 3)
        for lam in (1, 2, 4)
        for k in (32, 64, 128)
    ],
    # dyadic-shell bilinear baseline and a high-shell sweep point
    ["estimate-search", "--set", "estimate = 2.1", "--set", "l1 = 0", "--set", "l2 = 0"],
    ["estimate-search", "--set", "estimate = 2.1", "--set", "l1 = 0", "--set", "l2 = 8"],
    # admissible product exponents and the unweighted negative control
    ["estimate-search", "--set", "estimate = 2.2", "--set", "a = 0.3", "--set", "b = 0.3"],
    ["estimate-search", "--set", "estimate = 2.2", "--set", "a = 0", "--set", "b = 0",
     "--set", "generator = fixed-tau", "--set", "trials = 3"],
    # embedding directions
    ["estimate-search", "--set", "estimate = 2.5", "--set", "trials = 1000"],
]

if __name__ == "__main__":
    worst = 0
    for argv in RUNS:
        worst = max(worst, main(argv))
    sys.exit(worst)

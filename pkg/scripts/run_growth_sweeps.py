#!/usr/bin/env python3
"""Third-iterate growth exponents across regularities for j = 2 and j = 3.

Reproduces the ill-posedness dichotomy table: the fitted exponent matches
-2s - (2j - 1) and crosses zero exactly at the threshold s = -j + 1/2.
"""

import sys

from hokdv.cli import main

SWEEPS = [
    ("2", "-1.5, -1.625, -1.75, -1.875, -2"),
    ("3", "-2.5, -2.75, -3"),
]

if __name__ == "__main__":
    worst = 0
    for j, s_list in SWEEPS:
        code = main(
            [
                "illposed-sweep",
                "--set", f"j = {j}",
                "--set", f"s_list = {s_list}",
                "--set", "N_list = 8, 16, 32, 64, 128",
                "--set", "t = 1.0",
            ]
        )
        worst = max(worst, code)
    sys.exit(worst)

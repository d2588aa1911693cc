#!/usr/bin/env python3
"""Full exact-arithmetic audit of the resonance lower bound, j = 1..4."""

import sys

from hokdv.cli import main

if __name__ == "__main__":
    sys.exit(
        main(
            [
                "resonance-audit",
                "--set", "j_list = 1, 2, 3, 4",
                "--set", "kmax = 200",
            ]
        )
    )

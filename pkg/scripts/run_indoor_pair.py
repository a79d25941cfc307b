#!/usr/bin/env python3
"""Reproduce the two-quadrotor relative-localization benchmark.

Runs the indoor-pair scenario once (writing CSV logs) and then the
10-trial modified/classical/RLS RMSE comparison.
"""

import sys

from circumnav.cli import main

if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else "runs/indoor-pair"
    main(["run", "--scenario", "indoor-pair", "--out", out])
    sys.exit(main(["compare-estimators", "--scenario", "indoor-pair", "--trials", "10", "--out", out]))

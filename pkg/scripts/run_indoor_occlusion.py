#!/usr/bin/env python3
"""Run the occlusion scenario: one agent loses sight of the target for
~10 s behind a wall while the other keeps it covered."""

import sys

from circumnav.cli import main

if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else "runs/indoor-occlusion"
    sys.exit(main(["run", "--scenario", "indoor-occlusion", "--out", out]))

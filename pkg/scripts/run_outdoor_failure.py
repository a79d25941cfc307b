#!/usr/bin/env python3
"""Run the three-agent moving-target scenario with a mid-mission agent
failure; the surviving pair reorganizes to antipodal slots."""

import sys

from circumnav.cli import main

if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else "runs/outdoor-three-failure"
    sys.exit(main(["run", "--scenario", "outdoor-three-failure", "--out", out]))

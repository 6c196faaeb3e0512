#!/usr/bin/env python3
"""Run the prime-variance lower-bound experiment with default parameters.

Usage: python scripts/run_theorem1.py [--N 1e5] [--Q-exp 0.75] ...
Accepts every flag of `apvar experiment theorem1`.
"""

import sys

from apvar.cli import main

if __name__ == "__main__":
    sys.exit(main(["experiment", "theorem1", *sys.argv[1:]]))

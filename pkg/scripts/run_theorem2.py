#!/usr/bin/env python3
"""Run the divisor-function lower-bound experiment (either ending).

Usage: python scripts/run_theorem2.py [--k 2] [--ending second] [--N 1e5] ...
Accepts every flag of `apvar experiment theorem2`.
"""

import sys

from apvar.cli import main

if __name__ == "__main__":
    sys.exit(main(["experiment", "theorem2", *sys.argv[1:]]))

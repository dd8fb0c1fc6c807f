#!/usr/bin/env python3
"""Run the torus pipeline and print the report plus the emitted documents.

Equivalent to ``novtorsion torus-example``; kept as a script so the
experiment is runnable straight from a checkout:

    python3 scripts/run_torus_example.py --b 1/5
"""

import sys

from novtorsion.cli import main

if __name__ == "__main__":
    sys.exit(main(["torus-example"] + sys.argv[1:]))

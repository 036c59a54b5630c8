#!/usr/bin/env python3
"""
modlie Manager - command-line tool for the modlie verification drivers

Usage:
    python modlie_manager.py verify L3
    python modlie_manager.py verify L3 --eps 2 --delta 1 --rho 0
    python modlie_manager.py verify eq-new --p 3 --m 1 --s 1
    python modlie_manager.py verify k31-jacobi
    python modlie_manager.py verify fixture:br2-eps1:0
    python modlie_manager.py pmap data/fixtures/br2-eps1/algebra.json h2
    python modlie_manager.py fingerprint sp4
    python modlie_manager.py check-file data/fixtures/br2-eps1/algebra.json
    python modlie_manager.py --help
"""
import sys

from modlie.cli import main

if __name__ == "__main__":
    sys.exit(main())

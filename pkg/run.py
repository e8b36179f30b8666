#!/usr/bin/env python3
"""
Simple script to run the bellbound command line.
"""
import sys

from bellbound.cli import main

if __name__ == "__main__":
    sys.exit(main())

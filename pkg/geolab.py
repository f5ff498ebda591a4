#!/usr/bin/env python3
"""
Command-line entry point
"""
import sys

from cli_reports import main

if __name__ == "__main__":
    sys.exit(main())

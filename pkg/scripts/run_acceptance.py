#!/usr/bin/env python3
"""Run the numbered acceptance criteria and print one verdict line each."""

import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]

if __name__ == "__main__":
    args = [str(ROOT / "tests" / "test_acceptance.py"), "-q", "-s", "-p", "no:cacheprovider", *sys.argv[1:]]
    sys.exit(pytest.main(args))

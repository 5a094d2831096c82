"""Allow running the CLI as ``python -m mtrls``."""

import sys

from mtrls.cli import main

if __name__ == "__main__":
    sys.exit(main())

"""Allow running the CLI as ``python -m rlsplot``."""

import sys

from rlsplot.cli import main

if __name__ == "__main__":
    sys.exit(main())

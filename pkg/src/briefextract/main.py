"""Main entry point for BriefExtract."""

import sys
from typing import Optional, Sequence

from .ui.cli import CLI


def main(argv: Optional[Sequence[str]] = None):
    """Main entry point."""
    cli = CLI()
    try:
        sys.exit(cli.run(argv))
    except KeyboardInterrupt:
        print("\nInterrupted.")
        sys.exit(130)


if __name__ == "__main__":
    main()

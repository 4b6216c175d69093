"""Command-line interface: python scripts/css_cli.py <verb> [--preset NAME | --config FILE] ..."""
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.pipeline.cli import main


if __name__ == "__main__":
    sys.exit(main())

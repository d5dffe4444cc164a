"""
Command-line entry point for hydrotwin.
Run this file from the project root directory.
"""
import sys
from pathlib import Path

# Add the project root to Python path
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

from hydrotwin.cli import main  # noqa: E402


if __name__ == "__main__":
    sys.exit(main())

"""
markov-zo command-line entry point

Usage:
    python scripts/mzo.py grid config/experiment.yaml
    python scripts/mzo.py grid config/experiment.yaml --full
    python scripts/mzo.py run config/run_quadratic.yaml --seed 3
    python scripts/mzo.py verify all
    python scripts/mzo.py tune --epsilon 1e-4 --mu 1 --L 1 --dim 8 --B 4
"""

import sys
from pathlib import Path

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.cli.commands import main

if __name__ == '__main__':
    sys.exit(main())

#!/usr/bin/env python
"""
RAQ-DOA - Command Launcher
===========================
Runs the raq-doa command surface from a source checkout.

Usage:
    python raq_doa.py sweep <power|sensors|targets|samples|doa|phase> [--config FILE] [--out DIR]
                      [--seed N] [--trials N] [--workers N] [--plot] [--verbose]
    python raq_doa.py physics [--config FILE] [--out DIR]

Examples:
    python raq_doa.py sweep power --config ../config/default.json --plot
    python raq_doa.py sweep power --config ../config/fold_ratio.json --out fold
    python raq_doa.py sweep power --config results/manifest.json     # exact replay
"""
import sys
from pathlib import Path

# Make the repository root importable so 'src' resolves as a package
sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from src.cli.main import main  # noqa: E402

if __name__ == '__main__':
    sys.exit(main())

#!/usr/bin/env python3
"""
Multi-Frame Quality Enhancement - Main Application Entry Point

Command-line front end for detecting peak quality frames in compressed
video, training the detector and the MF-CNN, enhancing sequences and
reporting the results. Run ``python app.py --help`` for the subcommands.
"""

import logging
import os
import sys

from dotenv import load_dotenv

from mfqe.cli import cli_dispatch

# Load environment variables
load_dotenv()

# Configure logging
logging.basicConfig(
    level=os.environ.get('MFQE_LOG_LEVEL', 'WARNING').upper(),
    format='%(asctime)s %(levelname)s %(name)s: %(message)s',
    stream=sys.stderr,
)
logger = logging.getLogger(__name__)


def main(argv=None) -> int:
    """Run one command and return its exit code."""
    return cli_dispatch(argv)


if __name__ == '__main__':
    sys.exit(main())

#!/usr/bin/env python3
"""
Main entry point for the peridynamic wave laboratory
"""

import logging
import os
import sys

from cli import main as cli_main


def configure_logging():
    """Log to stderr at PERIWAVE_LOG_LEVEL (INFO by default)"""
    level = os.environ.get('PERIWAVE_LOG_LEVEL', 'INFO').upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr
    )


def main(argv=None):
    configure_logging()
    return cli_main(argv)


if __name__ == "__main__":
    sys.exit(main())

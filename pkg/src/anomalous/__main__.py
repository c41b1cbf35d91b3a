"""Run the command-line interface with python -m anomalous."""

import sys

from .cli import main

sys.exit(main())

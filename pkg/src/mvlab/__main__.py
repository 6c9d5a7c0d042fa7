"""Module entry point: python -m mvlab."""

import sys

from .cli import main

sys.exit(main())

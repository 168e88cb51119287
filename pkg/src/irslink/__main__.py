"""Module entry point: python -m irslink."""

import sys

from .cli import main

sys.exit(main())

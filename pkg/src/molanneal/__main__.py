import sys

from molanneal.cli import main

sys.exit(main())

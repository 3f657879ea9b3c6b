import sys

from helmpy.cli import main

sys.exit(main())

import sys

from bonkl.cli import main

sys.exit(main())

import sys

from fixedpoint_search.cli import main

sys.exit(main())

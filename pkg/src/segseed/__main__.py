import sys

from segseed.cli import main

sys.exit(main())

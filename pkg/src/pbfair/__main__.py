import sys

from pbfair.cli import main

sys.exit(main())

import sys

from floorbound.cli import main

sys.exit(main())

import sys

from alpgame.cli import main

sys.exit(main())

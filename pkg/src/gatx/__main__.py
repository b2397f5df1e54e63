import sys

from gatx.cli import main

sys.exit(main())

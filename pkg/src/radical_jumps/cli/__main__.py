import sys

from radical_jumps.cli import main

sys.exit(main())

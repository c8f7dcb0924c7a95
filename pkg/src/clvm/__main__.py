import sys

from clvm.cli import main

sys.exit(main())

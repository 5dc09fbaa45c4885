import sys

from rankdep.cli import main

sys.exit(main())

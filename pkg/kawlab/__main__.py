import sys

from kawlab.cli import main

sys.exit(main())

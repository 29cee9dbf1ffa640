import sys

from fluidtag.cli import main

sys.exit(main())

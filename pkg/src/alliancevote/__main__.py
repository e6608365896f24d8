import sys

from alliancevote.cli import main

sys.exit(main())

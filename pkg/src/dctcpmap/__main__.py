import sys

from dctcpmap.cli import main

sys.exit(main())

import sys

from attnet.cli import main

sys.exit(main())

import sys

from machstiff.cli import main

sys.exit(main())

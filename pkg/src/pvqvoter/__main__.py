import sys

from pvqvoter.harness.cli import main

sys.exit(main())

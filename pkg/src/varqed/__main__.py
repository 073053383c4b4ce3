import sys

from varqed.cli import main

sys.exit(main())

import sys

from qswap.main import main

sys.exit(main())

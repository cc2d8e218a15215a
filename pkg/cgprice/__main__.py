import sys

from .cgprice import main

sys.exit(main())

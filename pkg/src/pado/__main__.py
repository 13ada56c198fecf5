import sys

from pado.cli import main

sys.exit(main())

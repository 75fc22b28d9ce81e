import sys

from pydlista.cli import main

sys.exit(main())

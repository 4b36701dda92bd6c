import sys

from dctfusion.cli import main

sys.exit(main())

import sys

from waterspin.cli import main

sys.exit(main())

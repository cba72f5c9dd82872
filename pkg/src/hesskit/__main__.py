import sys

from hesskit.cli import main

sys.exit(main())

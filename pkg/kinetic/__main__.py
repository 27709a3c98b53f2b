import sys

from kinetic.main import main

sys.exit(main())

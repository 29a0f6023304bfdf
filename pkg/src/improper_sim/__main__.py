import sys

from improper_sim.cli import main

sys.exit(main())

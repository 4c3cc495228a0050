"""Run the graph-rkhs command line with ``python -m graph_rkhs``."""

from .cli import main

raise SystemExit(main())

"""Allow `python -m lamerecon`."""

from .cli import main

raise SystemExit(main())

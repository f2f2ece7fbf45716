"""Module entry point: ``python -m torsionlab`` runs the CLI."""

from .cli import main

raise SystemExit(main())

"""Allow `python -m starforge` as an alias for the console script."""

from .cli_frontend import main

main()

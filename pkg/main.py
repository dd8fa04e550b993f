"""Repository entry point; forwards to the qganfinance command line."""

from qganfinance.cli import main

if __name__ == "__main__":
    raise SystemExit(main())

import sys

from torpers.cli import main

if __name__ == "__main__":
    sys.exit(main())

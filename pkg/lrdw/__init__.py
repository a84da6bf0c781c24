from .settings import VERSION
from .utils.cli import main

__version__ = VERSION

if __name__ == "__main__":
    main()

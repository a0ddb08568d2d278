import sys

from nlica.main import main

sys.exit(main())

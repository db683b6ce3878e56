import sys

from .io.manage_quantization import main

sys.exit(main())

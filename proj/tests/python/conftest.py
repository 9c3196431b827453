import os
import sys

# prefer an in-tree build when the package is not installed
here = os.path.dirname(os.path.abspath(__file__))
tree = os.path.join(here, "..", "..", "build", "python")
try:
    import crossbound  # noqa: F401
except ImportError:
    sys.path.insert(0, os.path.abspath(tree))

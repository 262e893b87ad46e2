from sketchloop._core import *  # noqa: F401,F403
from sketchloop import _core

__version__ = _core.__version__

from graphfilt._core import *  # noqa: F401,F403
from graphfilt._core import __doc__  # noqa: F401

"""Conservative pseudo-spectral solver for the regularized logarithmic
Schrodinger equation on periodic 1-D/2-D domains.

The heavy lifting lives in the compiled extension ``_rlogse``; this package
re-exports its public surface.
"""

from ._rlogse import *  # noqa: F401,F403
from ._rlogse import __version__  # noqa: F401

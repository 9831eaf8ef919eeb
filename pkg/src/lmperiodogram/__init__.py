"""Tapered periodograms, log-periodogram regression and Edgeworth expansions for
long-memory linear processes."""

from .errors import (
    DegenerateDataError,
    LmPeriodogramError,
    ModelError,
    NumericalDegeneracyError,
    ResourceError,
    SingularityError,
)
from .filtermodel import *  # noqa: F401,F403
from .simulate import *  # noqa: F401,F403
from .spectral import *  # noqa: F401,F403
from .gph import *  # noqa: F401,F403
from .functionals import *  # noqa: F401,F403
from .edgeworth import *  # noqa: F401,F403
from .harness import *  # noqa: F401,F403

__version__ = "0.1.0"

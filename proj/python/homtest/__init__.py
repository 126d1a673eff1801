"""HOM indistinguishability test toolkit.

Closed-form weak-coherent-pulse interference math, a Monte-Carlo simulator of
the coincidence-scan experiment, and the statistical certification pipeline
(weighted dip fits, likelihood-ratio test, dip-position analysis of variance,
power analysis).
"""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401

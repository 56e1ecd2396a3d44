"""Wiener-cascade decoding and wavelet periodicity analysis.

Thin package wrapper around the pybind11 extension; everything public lives
in the compiled module.
"""

from ._trendcast import *  # noqa: F401,F403
from ._trendcast import __doc__ as _core_doc  # noqa: F401

__version__ = "0.1.0"

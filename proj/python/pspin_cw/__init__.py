"""Exact finite-N computation, marginal maximum-likelihood estimation and limit
laws for the p-spin Curie-Weiss model."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401

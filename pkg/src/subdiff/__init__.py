"""Simulation and validation laboratory for symmetric subordinate diffusions
with diffusive components killed outside smooth open sets.

Modules: bernstein (Laplace exponents and scaling witnesses), geometry
(domains with exact boundary distance), envelope (closed-form heat-kernel
and Green bounds), sampler (subordinators and killed paths), estimator
(Monte Carlo and comparability fitting), oracle (independent references),
cli (batch experiment runner).
"""

__version__ = "0.1.0"

from . import bernstein, envelope, estimator, geometry, oracle, sampler  # noqa: F401

"""Exact rational and rogue-wave solutions of nonlocal Davey-Stewartson systems.

Modules
-------
exppoly      symbolic exponential-polynomial kernel and jets
spectra      eigenfunctions of the auxiliary linear system on a constant background
dt_ds1       determinant-form transformations for the alpha^2 = +1 system
dt_ds2       integral-form (binary) transformations for the alpha^2 = -1 system
catalog      hard-coded closed-form solution families
verify       independent finite-difference residual checks
singularity  critical times, blow-up loci, singular intervals, ridge lines
cli          command-line interface
"""

from .exppoly import ExpPoly, Jet
from .spectra import GlobalParams, SpectralParams

__all__ = ["ExpPoly", "Jet", "GlobalParams", "SpectralParams"]

__version__ = "0.1.0"

"""optoresp: optical response of superconducting nanowire microwave resonators.

Modules
-------
resonator       hanger-type S21/S11 models, bandwidths, photon number
tls             single-TLS physics, loss tangent, permittivity, saturation
meanfield       ODE steady-state oracle for the TLS-cavity closed forms
ensemble        analytic bath integrals and the optical-response slopes
montecarlo      stochastic TLS-ensemble simulation of the response curves
superconductor  penetration depth, kinetic inductance, quasiparticle shifts
fitkit          Levenberg-Marquardt engine and the spectroscopy fit models
cli             command-line entry point (``optoresp ...``)
"""

__version__ = "0.1.0"

from . import (cli, constants, digamma, ensemble, fitkit, io, meanfield,
               montecarlo, resonator, superconductor, tls)

__all__ = ["cli", "constants", "digamma", "ensemble", "fitkit", "io",
           "meanfield", "montecarlo", "resonator", "superconductor", "tls",
           "__version__"]

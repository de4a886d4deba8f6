"""Physical constants (CODATA 2018) and unit-boundary helpers.

Internal convention: every rate and frequency inside the library is angular
(rad/s).  Hz, GHz, MHz and dBm appear only at the I/O boundary; conversion
happens here and nowhere else.
"""

import numpy as np

HBAR = 1.054571817e-34   # J s
K_B = 1.380649e-23       # J/K
PLANCK = 6.62607015e-34  # J s
MU_0 = 1.25663706212e-6  # H/m
EPS_0 = 8.8541878128e-12  # F/m

TWO_PI = 2.0 * np.pi


def dbm_to_watts(p_dbm):
    """P[W] = 10^((P[dBm] - 30)/10)."""
    return 10.0 ** ((np.asarray(p_dbm, dtype=float) - 30.0) / 10.0)


def watts_to_dbm(p_watts):
    """Inverse of :func:`dbm_to_watts`; requires P > 0."""
    p = np.asarray(p_watts, dtype=float)
    if np.any(p <= 0):
        raise ValueError("power must be positive to express in dBm")
    return 10.0 * np.log10(p) + 30.0


def hz_to_angular(f):
    """Ordinary frequency (Hz) to angular frequency (rad/s)."""
    return TWO_PI * np.asarray(f, dtype=float)


def angular_to_hz(omega):
    """Angular frequency (rad/s) to ordinary frequency (Hz)."""
    return np.asarray(omega, dtype=float) / TWO_PI

"""Hanger-type (notch) resonator transmission models and photon-number budget.

A resonator side-coupled to a feedline produces a dip in S21:

    S21(f) = 1 - (Q_tot/Q_ext) / (1 + 2i Q_tot (f - f_r)/f_r)

with 1/Q_tot = 1/Q_int + 1/Q_ext.  The full line model multiplies this by an
amplitude/delay/phase prefactor and allows a complex external Q that encodes
the circuit-asymmetry rotation of the resonance circle.

Decay rates are angular throughout: kappa_x = omega_r / Q_x in rad/s.  Note
that device tables are often labeled "kappa/2pi (MHz)" while carrying values
that are numerically omega_r/Q in units of 1e6 rad/s; the photon-number
formula below only closes on the tabulated cavity photon numbers under the
rad/s reading, which is the one used here.
"""

from dataclasses import dataclass

import numpy as np

from .constants import HBAR, TWO_PI


class UndercoupledBandwidthError(ValueError):
    """Internal half-power bandwidth undefined: 2 kappa_int^2 >= kappa_tot^2."""


@dataclass(frozen=True)
class ResonatorMode:
    """A single resonance: frequency plus internal/external quality factors.

    Parameters
    ----------
    f_r : float
        Resonance frequency [Hz].
    q_int : float
        Internal quality factor.
    q_ext : float
        Real part of the external quality factor.
    q_ext_imag : float, optional
        Imaginary part of the external quality factor; encodes the
        asymmetry rotation exp(i*phi) of the resonance circle.  The
        conventional reported external Q is ``q_ext_reported``.
    """

    f_r: float
    q_int: float
    q_ext: float
    q_ext_imag: float = 0.0

    def __post_init__(self):
        if not (self.f_r > 0):
            raise ValueError(f"f_r must be positive, got {self.f_r}")
        if not (self.q_int > 0):
            raise ValueError(f"q_int must be positive, got {self.q_int}")
        if not (self.q_ext > 0):
            raise ValueError(f"q_ext must be positive, got {self.q_ext}")

    @classmethod
    def from_asymmetry_angle(cls, f_r, q_int, q_ext_mag, phi):
        """Build a mode from |Q_ext| and the asymmetry angle phi.

        The complex external Q is Q_ext_mag * exp(-i*phi), so phi = 0
        recovers the symmetric dip.
        """
        return cls(f_r, q_int, q_ext_mag * np.cos(phi), -q_ext_mag * np.sin(phi))

    @property
    def q_ext_complex(self) -> complex:
        return complex(self.q_ext, self.q_ext_imag)

    @property
    def inv_q_ext_effective(self) -> float:
        """Re(1/(Q_ext,real + i Q_ext,imag)) — the loss-bearing part of the coupling."""
        return (1.0 / self.q_ext_complex).real

    @property
    def q_ext_reported(self) -> float:
        """External Q in the diameter-corrected convention, 1/Re(1/Q_ext_complex)."""
        return 1.0 / self.inv_q_ext_effective

    @property
    def q_tot(self) -> float:
        """Total quality factor, 1/Q_tot = 1/Q_int + Re(1/Q_ext_complex)."""
        return 1.0 / (1.0 / self.q_int + self.inv_q_ext_effective)

    @property
    def omega_r(self) -> float:
        """Angular resonance frequency [rad/s]."""
        return TWO_PI * self.f_r

    @property
    def kappa_int(self) -> float:
        """Internal energy decay rate [rad/s]."""
        return self.omega_r / self.q_int

    @property
    def kappa_ext(self) -> float:
        """External energy decay rate [rad/s]."""
        return self.omega_r * self.inv_q_ext_effective

    @property
    def kappa_tot(self) -> float:
        return self.kappa_int + self.kappa_ext


@dataclass(frozen=True)
class LineCalibration:
    """Feedline amplitude/delay/phase prefactor A * exp(-i(2 pi f tau + alpha)).

    amplitude is dimensionless (> 0), delay in seconds, phase_offset in rad.
    """

    amplitude: float = 1.0
    delay: float = 0.0
    phase_offset: float = 0.0

    def __post_init__(self):
        if not (self.amplitude > 0):
            raise ValueError("line amplitude must be positive")
        if not (np.isfinite(self.delay) and np.isfinite(self.phase_offset)):
            raise ValueError("delay and phase_offset must be finite")

    def factor(self, f):
        return self.amplitude * np.exp(-1j * (TWO_PI * np.asarray(f, dtype=float) * self.delay
                                              + self.phase_offset))


@dataclass(frozen=True)
class DriveCondition:
    """Microwave drive: input power [W] at the feedline and probe frequency [Hz]."""

    input_power: float
    probe_frequency: float

    def __post_init__(self):
        if not (self.input_power > 0):
            raise ValueError("input_power must be positive")


def s21_ideal(mode: ResonatorMode, f):
    """Ideal notch transmission 1 - (Q_tot/Q_ext)/(1 + 2i Q_tot x), x = (f-f_r)/f_r."""
    f = np.asarray(f, dtype=float)
    x = (f - mode.f_r) / mode.f_r
    return 1.0 - (mode.q_tot / mode.q_ext) / (1.0 + 2j * mode.q_tot * x)


def s21_full(mode: ResonatorMode, line: LineCalibration, f):
    """Full line model with asymmetry and feedline calibration.

    A exp(-i(2 pi f tau + alpha)) * (1 - [Q_tot/(Q_e,r + i Q_e,i)]/(1 + 2i Q_tot x)).
    Reduces exactly to :func:`s21_ideal` for A=1, tau=alpha=0, Q_e,i=0.
    """
    f = np.asarray(f, dtype=float)
    x = (f - mode.f_r) / mode.f_r
    dip = 1.0 - (mode.q_tot / mode.q_ext_complex) / (1.0 + 2j * mode.q_tot * x)
    return line.factor(f) * dip


def s11_magnitude_sq(mode: ResonatorMode, f):
    """|S11|^2 = (Q_tot/Q_ext)^2 / (1 + 4 Q_tot^2 (f-f_r)^2/f_r^2)."""
    f = np.asarray(f, dtype=float)
    x = (f - mode.f_r) / mode.f_r
    return (mode.q_tot / mode.q_ext) ** 2 / (1.0 + 4.0 * mode.q_tot**2 * x**2)


def dissipated_fraction(mode: ResonatorMode, f):
    """Fraction of the input power dissipated in the resonator.

    P_loss/P_in = 2 kappa_int kappa_ext / (kappa_tot^2 + 4 (omega - omega_r)^2),
    which equals 1 - |S11|^2 - |S21|^2 for the symmetric (q_ext_imag = 0) model.
    """
    w = TWO_PI * np.asarray(f, dtype=float)
    det = w - mode.omega_r
    return (2.0 * mode.kappa_int * mode.kappa_ext
            / (mode.kappa_tot**2 + 4.0 * det**2))


def photon_number(mode: ResonatorMode, drive: DriveCondition):
    """Mean intracavity photon number for a hanger-type resonator.

    n_cav = [2 kappa_ext / (kappa_tot^2 + 4 (omega - omega_r)^2)] * P_in/(hbar omega_r)
    """
    w = TWO_PI * drive.probe_frequency
    det = w - mode.omega_r
    lorentz = 2.0 * mode.kappa_ext / (mode.kappa_tot**2 + 4.0 * det**2)
    return lorentz * drive.input_power / (HBAR * mode.omega_r)


def half_power_bandwidth_internal(mode: ResonatorMode):
    """Half-power bandwidth 2*df' [Hz] measured from the bottom of the dip.

    2 pi * 2 df' = kappa_int / sqrt(1 - 2 kappa_int^2/kappa_tot^2); for an
    overcoupled resonator this reduces to kappa_int, so the from-the-bottom
    3 dB width reads off the internal loss rate.

    Raises
    ------
    UndercoupledBandwidthError
        If 2 kappa_int^2 >= kappa_tot^2 (the doubling point does not exist).
    """
    ratio = mode.kappa_int / mode.kappa_tot
    arg = 1.0 - 2.0 * ratio**2
    if arg <= 0.0:
        raise UndercoupledBandwidthError(
            f"kappa_int/kappa_tot = {ratio:.4f} >= 1/sqrt(2); dip too shallow")
    return mode.kappa_int / np.sqrt(arg) / TWO_PI


def half_power_bandwidth_external(mode: ResonatorMode):
    """Half-power bandwidth 2*df'' [Hz] at |S21|^2 = 1/2.

    2 pi * 2 df'' = kappa_ext sqrt(1 + 2 kappa_int/kappa_ext); reduces to
    kappa_ext when kappa_ext >> kappa_int.
    """
    return (mode.kappa_ext
            * np.sqrt(1.0 + 2.0 * mode.kappa_int / mode.kappa_ext) / TWO_PI)

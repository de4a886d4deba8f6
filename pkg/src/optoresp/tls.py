"""Single two-level-system (TLS) microphysics.

A TLS at detuning Delta = omega_r - omega_TLS couples to the resonator
transversely (exchange, g_perp) and longitudinally (sigma_z, g_par).  Its
state enters through the population imbalance S = <sigma_z> in [-1, 0] and
the population slope dS (seconds), the frequency derivative of the imbalance
that drives the Debye-type longitudinal response.  Both are stored per TLS so
that nonequilibrium (phonon-driven) values decouple from the thermodynamic
temperature; equilibrium values are provided as a convenience map.

Also here: dielectric loss tangent of a TLS bath, its temperature-dependent
permittivity (complex-digamma closed form), the Kramers-Kronig quadrature
oracle for that closed form, and the Gaussian spectral-diffusion loss
integral with its saturated closed form.
"""

from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import quad

from .constants import EPS_0, HBAR, K_B, PLANCK, TWO_PI
from .digamma import digamma


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""


@dataclass(frozen=True)
class ThermalEnvironment:
    """Phonon bath at temperature [K] > 0."""

    temperature: float

    def __post_init__(self):
        if not (self.temperature > 0):
            raise ValueError("temperature must be positive")


@dataclass(frozen=True)
class TlsHostMaterial:
    """Dielectric host holding the TLS bath.

    rho_tls : TLS density of states [J^-1 m^-3]
    dipole : TLS dipole moment [C m]
    epsilon_host : host permittivity [F/m]
    participation : filling factor of the TLS-bearing region, in [0, 1]
    intrinsic_loss : loss tangent delta_TLS; if None it is computed from
        the microscopic parameters via :func:`intrinsic_loss_tangent`.
    """

    rho_tls: float = 1e45
    dipole: float = 1e-30
    epsilon_host: float = EPS_0
    participation: float = 1.0
    intrinsic_loss: float | None = None

    def __post_init__(self):
        if self.rho_tls < 0 or self.dipole <= 0 or self.epsilon_host <= 0:
            raise ValueError("rho_tls must be >= 0; dipole, epsilon_host > 0")
        if not (0.0 <= self.participation <= 1.0):
            raise ValueError("participation must lie in [0, 1]")
        if self.intrinsic_loss is not None and self.intrinsic_loss < 0:
            raise ValueError("intrinsic_loss must be >= 0")

    @property
    def delta_tls(self) -> float:
        if self.intrinsic_loss is not None:
            return self.intrinsic_loss
        return intrinsic_loss_tangent(self)


@dataclass(frozen=True)
class SaturationDrive:
    """Microwave drive state for TLS saturation.

    n_cav : mean intracavity photon number (>= 0)
    n_c : critical photon number of the empirical saturation law (> 0)
    beta : empirical saturation exponent (> 0), 0.5 by default
    """

    n_cav: float = 0.0
    n_c: float = 1.0
    beta: float = 0.5

    def __post_init__(self):
        if self.n_cav < 0:
            raise ValueError("n_cav must be >= 0")
        if self.n_c <= 0 or self.beta <= 0:
            raise ValueError("n_c and beta must be positive")


@dataclass(frozen=True)
class TlsUnit:
    """One TLS: detuning, couplings, rates, populations, position.

    detuning = omega_r - omega_TLS [rad/s], signed.  gamma2 >= gamma1/2 is
    enforced (Gamma_2 = Gamma_1/2 + gamma_phi).  s is <sigma_z> in [-1, 0];
    ds [s] is the population-slope parameter of the longitudinal response
    (equal to hbar*(1 - tanh^2(hbar w/2 k T))/(k T) at equilibrium).
    """

    detuning: float
    g_perp: float
    g_par: float
    gamma1: float
    gamma2: float
    s: float
    ds: float = 0.0
    x: float = 0.0

    def __post_init__(self):
        if self.g_perp < 0 or self.g_par < 0:
            raise ValueError("couplings must be >= 0")
        if not (self.gamma1 > 0):
            raise ValueError("gamma1 must be positive")
        if self.gamma2 < 0.5 * self.gamma1:
            raise ValueError("gamma2 must be >= gamma1/2")
        if not (-1.0 <= self.s <= 0.0):
            raise ValueError(f"s (= <sigma_z>) must lie in [-1, 0], got {self.s}")
        if self.ds < 0:
            raise ValueError("ds must be >= 0")

    @classmethod
    def equilibrium(cls, omega_tls, omega_r, env: ThermalEnvironment,
                    g_perp, g_par, gamma1, gamma2, x=0.0):
        """TLS thermalized with the phonon bath: S and dS from the temperature."""
        return cls(detuning=omega_r - omega_tls, g_perp=g_perp, g_par=g_par,
                   gamma1=gamma1, gamma2=gamma2,
                   s=equilibrium_population(omega_tls, env),
                   ds=equilibrium_ds(omega_tls, env), x=x)

    def with_population(self, s=None, ds=None):
        """Copy with replaced nonequilibrium parameters."""
        return replace(self, s=self.s if s is None else s,
                       ds=self.ds if ds is None else ds)

    @property
    def saturation_photon_number(self) -> float:
        """n_s = Gamma_1 Gamma_2 / (4 g_perp^2); inf for a decoupled TLS.

        Distinct from the superfluid pair density (also written n_s in the
        superconductor module) — unrelated quantities sharing a symbol.
        """
        if self.g_perp == 0.0:
            return np.inf
        return self.gamma1 * self.gamma2 / (4.0 * self.g_perp**2)


def equilibrium_population(omega_tls, env: ThermalEnvironment):
    """<sigma_z>_0 = -tanh(hbar omega / 2 k_B T)."""
    return -np.tanh(HBAR * np.asarray(omega_tls, dtype=float)
                    / (2.0 * K_B * env.temperature))


def equilibrium_population_slope(omega_tls, env: ThermalEnvironment):
    """|d<sigma_z>_0/d omega| = hbar/(2 k_B T) sech^2(hbar omega/2 k_B T)."""
    x = HBAR * np.asarray(omega_tls, dtype=float) / (2.0 * K_B * env.temperature)
    return HBAR / (2.0 * K_B * env.temperature) / np.cosh(x) ** 2


def equilibrium_ds(omega_tls, env: ThermalEnvironment):
    """Equilibrium population-slope parameter for the longitudinal response.

    dS = hbar (1 - tanh^2(hbar w/2 k T))/(k T), i.e. twice the bare
    derivative magnitude: the sigma_z coupling modulates the TLS frequency
    by 2 g_par Re<c> while the response formulas carry a single g_par.
    """
    return 2.0 * equilibrium_population_slope(omega_tls, env)


def transverse_complex_shift(tls: TlsUnit):
    """Loss and frequency pull of the resonator from the exchange coupling.

    Returns (delta_kappa, delta_omega) in rad/s:

        delta_kappa = -2 g_perp^2 Gamma_2 S / (Gamma_2^2 + Delta^2)
        delta_omega = -  g_perp^2 Delta  S / (Gamma_2^2 + Delta^2)

    For S < 0 the loss is positive and the pull has the sign of -Delta*S:
    a TLS below the resonator (Delta > 0) pushes the frequency up.
    """
    denom = tls.gamma2**2 + tls.detuning**2
    loss = -2.0 * tls.g_perp**2 * tls.gamma2 * tls.s / denom
    shift = -tls.g_perp**2 * tls.detuning * tls.s / denom
    return loss, shift


def saturated_population(tls: TlsUnit, drive: SaturationDrive):
    """Steady-state <sigma_z> under a coherent microwave drive.

    <sigma_z> = S / (1 + (n_cav/n_s) Gamma_2^2/(Gamma_2^2 + Delta^2)),
    n_s = Gamma_1 Gamma_2 / 4 g_perp^2.  A decoupled TLS (g_perp = 0)
    cannot be saturated and keeps S.
    """
    if tls.g_perp == 0.0:
        return tls.s
    n_s = tls.saturation_photon_number
    lorentz = tls.gamma2**2 / (tls.gamma2**2 + tls.detuning**2)
    return tls.s / (1.0 + (drive.n_cav / n_s) * lorentz)


def longitudinal_complex_shift(tls: TlsUnit, omega_r):
    """Debye loss and down-shift from the sigma_z coupling.

    Returns (loss, shift) in rad/s:

        loss  = +2 g_par^2 dS Gamma_1 omega_r / (Gamma_1^2 + omega_r^2)
        shift = -  g_par^2 dS Gamma_1^2     / (Gamma_1^2 + omega_r^2)

    Both vanish for a frozen population (dS = 0); the loss is
    detuning-independent, which is the experimental fingerprint of this
    channel.
    """
    denom = tls.gamma1**2 + omega_r**2
    loss = 2.0 * tls.g_par**2 * tls.ds * tls.gamma1 * omega_r / denom
    shift = -tls.g_par**2 * tls.ds * tls.gamma1**2 / denom
    return loss, shift


def intrinsic_loss_tangent(host: TlsHostMaterial):
    """delta_TLS = pi rho_TLS d0^2 / (3 epsilon_host)."""
    return np.pi * host.rho_tls * host.dipole**2 / (3.0 * host.epsilon_host)


def tls_loss_tangent(f, env: ThermalEnvironment, host: TlsHostMaterial,
                     drive: SaturationDrive):
    """Saturable dielectric loss of the TLS bath at frequency f [Hz].

    delta_TLS tanh(h f / 2 k_B T) / sqrt(1 + (n_cav/n_c)^beta)
    """
    f = np.asarray(f, dtype=float)
    thermal = np.tanh(PLANCK * f / (2.0 * K_B * env.temperature))
    return host.delta_tls * thermal / np.sqrt(1.0 + (drive.n_cav / drive.n_c) ** drive.beta)


def permittivity_bracket(f_r, env: ThermalEnvironment):
    """Re psi(1/2 - h f/(2 i pi k T)) - ln(h f/(2 pi k T)); the temperature
    dependence of the TLS permittivity up to the -delta/pi prefactor."""
    x = PLANCK * f_r / (TWO_PI * K_B * env.temperature)
    return digamma(complex(0.5, x)).real - np.log(x)


def temperature_permittivity_shift(f_r, env: ThermalEnvironment,
                                   host: TlsHostMaterial):
    """Fractional frequency shift from the TLS permittivity at temperature T.

    Delta f_r / f_r = p * (delta_TLS/pi) * [Re psi(1/2 - h f/(2 i pi k T))
                                            - ln(h f/(2 pi k T))]

    Negative-going below k_B T ~ h f_r (digamma term), positive-going above
    (logarithmic term).
    """
    return (host.participation * host.delta_tls / np.pi
            * permittivity_bracket(f_r, env))


def kramers_kronig_real_part(f, env: ThermalEnvironment, host: TlsHostMaterial,
                             f_cutoff=None, excision_rel=1e-6):
    """Dispersive counterpart of the tanh dielectric loss, by quadrature.

    Evaluates (delta_TLS/pi) PV int_0^cutoff f' tanh(h f'/2 k T)/(f'^2 - f^2) df'
    with symmetric excision of half-width ``excision_rel * f`` around the pole
    and two-point Richardson extrapolation of the excision width toward zero.

    The transform carries coefficient 1/pi rather than the textbook one-sided
    2/pi: the tanh loss already folds the anti-resonant TLS response into the
    positive-frequency axis, so the standard form would double-count it.  With
    this normalization, differences of the returned value between two
    temperatures reproduce the digamma closed form of
    :func:`temperature_permittivity_shift` (up to the participation factor and
    overall sign of the permittivity-vs-frequency conventions):

        kk(T2) - kk(T1) = -(delta_TLS/pi) [bracket(T2) - bracket(T1)]

    The absolute value depends on the high-frequency cutoff (the tail is
    logarithmically divergent) and is therefore only meaningful in
    temperature differences.  Verification oracle only; the closed form is
    the production path.
    """
    f = float(f)
    if f <= 0:
        raise ValueError("f must be positive")
    if f_cutoff is None:
        f_thermal = 2.0 * K_B * env.temperature / PLANCK
        f_cutoff = 400.0 * max(f, f_thermal)
    if f_cutoff <= 2.0 * f:
        raise ValueError("cutoff must lie well above the probe frequency")

    a = PLANCK / (2.0 * K_B * env.temperature)

    def integrand(fp):
        return fp * np.tanh(a * fp) / (fp**2 - f**2)

    def excised(eps):
        total = 0.0
        for lo, hi in ((0.0, f - eps), (f + eps, f_cutoff)):
            pts = [p for p in (0.5 * f, 2.0 * f) if lo < p < hi]
            val, err = quad(integrand, lo, hi, limit=300, points=pts or None)
            if err > 1e-6 * max(1.0, abs(val)):
                raise QuadratureError(
                    f"principal-value segment [{lo:g}, {hi:g}] error {err:g}")
            total += val
        return total

    eps0 = excision_rel * f
    i_full = excised(eps0)
    i_half = excised(0.5 * eps0)
    # symmetric excision misses -2 eps h'(f) + O(eps^3); Richardson removes it
    pv = 2.0 * i_half - i_full
    return host.delta_tls * pv / np.pi


def spectral_diffusion_loss_closed_form(tls: TlsUnit, drive: SaturationDrive,
                                        rho_v):
    """-2 pi hbar rho V g_perp^2 S / sqrt(1 + n_cav/n_s)  [rad/s]."""
    n_ratio = 0.0 if tls.g_perp == 0.0 else drive.n_cav / tls.saturation_photon_number
    return (-TWO_PI * HBAR * rho_v * tls.g_perp**2 * tls.s
            / np.sqrt(1.0 + n_ratio))


def spectral_diffusion_loss(tls: TlsUnit, drive: SaturationDrive, sigma_sd,
                            rho_v, n_sigma_cutoff=50.0):
    """Bath loss with Gaussian spectral diffusion, by double quadrature.

    Integrates the saturated Lorentzian response, convolved in detuning with
    a Gaussian of width sigma_sd, over all TLS center detunings:

        -hbar rho V  int dDelta  int dmu  [2 g^2 Gamma_2/(Gamma_2^2 + mu^2)]
            * S / (1 + (n/n_s) Gamma_2^2/(Gamma_2^2 + mu^2))
            * N(mu; Delta, sigma_sd)

    The inner window spans ``n_sigma_cutoff`` Gaussians around each center.
    The result coincides with :func:`spectral_diffusion_loss_closed_form` for
    any sigma_sd: Gaussian wandering alone does not lift the loss above the
    saturated-Lorentzian value.

    rho_v is the rho_TLS * V_eff prefactor [J^-1].  Returns rad/s.
    """
    if not (sigma_sd > 0):
        raise ValueError("sigma_sd must be positive")
    if tls.s == 0.0 or tls.g_perp == 0.0:
        return 0.0
    g2 = tls.gamma2
    n_ratio = drive.n_cav / tls.saturation_photon_number
    s_dimless = sigma_sd / g2            # everything below in units of Gamma_2
    w = np.sqrt(1.0 + n_ratio)           # saturated half-width

    def lor_sat(m):
        core = 1.0 / (1.0 + m * m)
        return 2.0 * core / (1.0 + n_ratio * core)

    def smeared(d):
        def f(u):
            return lor_sat(d + s_dimless * u) * np.exp(-0.5 * u * u) / np.sqrt(TWO_PI)
        feats = sorted((x - d) / s_dimless for x in (-30 * w, -w, 0.0, w, 30 * w))
        knots = ([-n_sigma_cutoff]
                 + [u for u in feats if -n_sigma_cutoff < u < n_sigma_cutoff]
                 + [n_sigma_cutoff])
        return _piecewise_quad(f, knots, limit=60)

    b_core = 10.0 * max(s_dimless, w)
    b_far = max(4000.0 * w, 1.2 * n_sigma_cutoff * s_dimless, 4.0 * b_core)
    total = _piecewise_quad(smeared, [-b_core, -w, 0.0, w, b_core], limit=100)
    # far tails fall off like the Lorentzian; integrate in t = 1/Delta
    for sign in (1.0, -1.0):
        val, err = quad(lambda t: smeared(sign / t) / t**2,
                        1.0 / b_far, 1.0 / b_core, limit=80)
        _check_quad(val, err, "spectral-diffusion tail")
        total += val
    # total is the double integral in units of Gamma_2 for both axes, i.e.
    # the dimensionless 2*pi/sqrt(1 + n/n_s) when converged
    return -HBAR * rho_v * tls.g_perp**2 * tls.s * total


def _piecewise_quad(f, knots, limit=80):
    total = 0.0
    for a, b in zip(knots[:-1], knots[1:]):
        if b <= a:
            continue
        val, err = quad(f, a, b, limit=limit)
        _check_quad(val, err, f"segment [{a:g}, {b:g}]")
        total += val
    return total


def _check_quad(val, err, label):
    if not np.isfinite(val) or err > 1e-5 * max(1.0, abs(val)):
        raise QuadratureError(f"quadrature failed on {label}: value {val:g}, error {err:g}")

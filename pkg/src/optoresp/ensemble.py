"""Closed-form TLS-bath integrals and the optical-response slopes.

A bath of TLSs with density of states rho_tls (per joule per m^3), averaged
couplings g_perp_t/g_par_t and rates gamma1_t/gamma2_t, and nonequilibrium
population parameters S_tilde/dS_tilde, contributes

    loss  = -2 pi hbar rho V g_perp^2 S                 (resonant, transverse)
            + 2 hbar rho V g_par^2 K1 omega_max dS      (Debye, longitudinal)
    shift =  hbar rho V g_perp^2 ln(dmax/dmin) S        (dispersive)
            - hbar rho V g_par^2 K2 omega_max dS        (longitudinal)

with K1 = Gamma_1 omega_r/(Gamma_1^2 + omega_r^2), K2 = Gamma_1^2/(...).

Illumination sweeps the affected volume as V_eff = A xi P_opt, which turns
the bath response into the power slopes

    d(1/Q)/dP      = 2 C K_par omega_r g^2
    d(df/f)/dP     = C (K_perp - Gamma_1 K_par) g^2

with C = hbar rho A xi / omega_r, K_par = Gamma_1 omega_max dS /
(Gamma_1^2 + omega_r^2) and K_perp = (1 + S) ln(dmax/dmin).  The (1 + S)
factor is the optical-response convention: illumination is measured against
the ground-state bath, so the dispersive baseline enters as the change
S - (-1).
"""

from dataclasses import dataclass, replace

import numpy as np

from .constants import HBAR, TWO_PI


@dataclass(frozen=True)
class EnsembleParams:
    """Averaged TLS-bath parameters.

    All rates angular [rad/s]; rho_tls in J^-1 m^-3; thickness/width in m
    (cross-section A = thickness * width); xi in m/W; dS_tilde in s.
    delta_max/delta_min are the detuning cutoffs of the dispersive log
    window; they default to omega_max and omega_r.
    """

    omega_r: float = TWO_PI * 7e9
    rho_tls: float = 1e45
    thickness: float = 2e-9
    width: float = 500e-9
    xi: float = 50.0
    omega_max: float = TWO_PI * 1e12
    delta_max: float | None = None
    delta_min: float | None = None
    s_tilde: float = 0.0
    ds_tilde: float = 1.0 / (TWO_PI * 400e6)
    gamma1_t: float = TWO_PI * 16e6
    gamma2_t: float | None = None
    g_perp_t: float = TWO_PI * 5e6
    g_par_t: float = TWO_PI * 5e6

    def __post_init__(self):
        if self.delta_max is None:
            object.__setattr__(self, "delta_max", self.omega_max)
        if self.delta_min is None:
            object.__setattr__(self, "delta_min", self.omega_r)
        if self.gamma2_t is None:
            object.__setattr__(self, "gamma2_t", self.gamma1_t)
        for name in ("omega_r", "rho_tls", "thickness", "width", "xi",
                     "omega_max", "gamma1_t", "gamma2_t"):
            if not (getattr(self, name) > 0):
                raise ValueError(f"{name} must be positive")
        if self.g_perp_t < 0 or self.g_par_t < 0:
            raise ValueError("couplings must be >= 0")
        if not (-1.0 <= self.s_tilde <= 0.0):
            raise ValueError("s_tilde must lie in [-1, 0]")
        if self.ds_tilde < 0:
            raise ValueError("ds_tilde must be >= 0")
        if not (self.delta_max >= self.delta_min >= self.gamma2_t):
            raise ValueError("need delta_max >= delta_min >= gamma2_t")

    @property
    def area(self) -> float:
        return self.thickness * self.width

    def with_coupling(self, g):
        """Copy with g_perp_t = g_par_t = g."""
        return replace(self, g_perp_t=g, g_par_t=g)


def total_loss_rate(p: EnsembleParams, v_eff, split=False):
    """Bath-induced cavity loss [rad/s] in the effective volume v_eff [m^3].

    resonant = -2 pi hbar rho V g_perp^2 S; debye = 2 hbar rho V g_par^2
    * Gamma_1 omega_r/(Gamma_1^2 + omega_r^2) * omega_max * dS.
    With split=True returns (resonant, debye) instead of the sum.
    """
    if v_eff < 0:
        raise ValueError("v_eff must be >= 0")
    rho_v = HBAR * p.rho_tls * v_eff
    resonant = -TWO_PI * rho_v * p.g_perp_t**2 * p.s_tilde
    debye = (2.0 * rho_v * p.g_par_t**2
             * p.gamma1_t * p.omega_r / (p.gamma1_t**2 + p.omega_r**2)
             * p.omega_max * p.ds_tilde)
    if split:
        return resonant, debye
    return resonant + debye


def total_frequency_shift(p: EnsembleParams, v_eff, population="equilibrium",
                          split=False):
    """Bath-induced frequency pull [rad/s] in the effective volume v_eff.

    population="equilibrium" weighs the dispersive term by S (the static
    bath); population="optical" weighs it by (1 + S), the change relative to
    the ground-state bath that an illumination measurement sees.  The choice
    is explicit because both conventions are meaningful and differ by the
    full baseline.
    """
    if v_eff < 0:
        raise ValueError("v_eff must be >= 0")
    if population not in ("equilibrium", "optical"):
        raise ValueError(f"unknown population convention {population!r}")
    weight = p.s_tilde if population == "equilibrium" else 1.0 + p.s_tilde
    rho_v = HBAR * p.rho_tls * v_eff
    transverse = rho_v * p.g_perp_t**2 * np.log(p.delta_max / p.delta_min) * weight
    longitudinal = -(rho_v * p.g_par_t**2
                     * p.gamma1_t**2 / (p.gamma1_t**2 + p.omega_r**2)
                     * p.omega_max * p.ds_tilde)
    if split:
        return transverse, longitudinal
    return transverse + longitudinal


def coupling_prefactor(p: EnsembleParams) -> float:
    """C = hbar rho_tls A xi / omega_r  [s^2/W]."""
    return HBAR * p.rho_tls * p.area * p.xi / p.omega_r


def k_parallel(p: EnsembleParams) -> float:
    """K_par = Gamma_1 omega_max dS / (Gamma_1^2 + omega_r^2)  [s]."""
    return (p.gamma1_t * p.omega_max * p.ds_tilde
            / (p.gamma1_t**2 + p.omega_r**2))


def k_perp(p: EnsembleParams) -> float:
    """K_perp = (1 + S) ln(delta_max/delta_min)  [dimensionless]."""
    return (1.0 + p.s_tilde) * np.log(p.delta_max / p.delta_min)


def slope_inverse_q(p: EnsembleParams) -> float:
    """d Delta(1/Q) / dP_opt  [1/W]: 2 C K_par omega_r g_par^2."""
    return 2.0 * coupling_prefactor(p) * k_parallel(p) * p.omega_r * p.g_par_t**2


def slope_fractional_frequency(p: EnsembleParams) -> float:
    """d (Delta f_r/f_r) / dP_opt  [1/W]: C (K_perp g_perp^2 - Gamma_1 K_par g_par^2)."""
    c = coupling_prefactor(p)
    return c * (k_perp(p) * p.g_perp_t**2
                - p.gamma1_t * k_parallel(p) * p.g_par_t**2)


_SWEEP_AXES = ("omega_r", "omega_max", "gamma1")
_G_REFERENCE_FR = 7e9  # Hz; coupling normalization pivot for omega_r sweeps


def parameter_sweep(p: EnsembleParams, axis, grid):
    """Sweep one axis; returns dict of arrays (axis value + both slopes).

    axis "omega_r" rescales the couplings as g(omega_r) = g0 *
    sqrt(f_r / 7 GHz) (single-photon coupling grows with the mode frequency)
    and keeps delta_min pinned to omega_r.  axis "omega_max" moves delta_max
    with it.  axis "gamma1" moves gamma2_t along when it was tied to gamma1.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0 or np.any(grid <= 0):
        raise ValueError("grid must be nonempty and positive")
    if axis not in _SWEEP_AXES:
        raise ValueError(f"axis must be one of {_SWEEP_AXES}")

    sq = np.empty(grid.size)
    sf = np.empty(grid.size)
    for i, v in enumerate(grid):
        if axis == "omega_r":
            scale = np.sqrt(v / (TWO_PI * _G_REFERENCE_FR))
            q = replace(p, omega_r=v, delta_min=v,
                        g_perp_t=p.g_perp_t * scale, g_par_t=p.g_par_t * scale)
        elif axis == "omega_max":
            q = replace(p, omega_max=v, delta_max=v)
        else:
            q = replace(p, gamma1_t=v,
                        gamma2_t=v if p.gamma2_t == p.gamma1_t else p.gamma2_t)
        sq[i] = slope_inverse_q(q)
        sf[i] = slope_fractional_frequency(q)
    return {"axis": axis, "grid": grid,
            "slope_inverse_q": sq, "slope_fractional_frequency": sf}

import numpy as np
import pytest
from numpy.testing import assert_allclose

from optoresp.fitkit import (ComplexTrace, FitModelSpec, Identity, Log,
                             NoDipError, PowerSeries, fit_full_s21,
                             fit_lorentzian_dip, fit_power_frequency,
                             fit_power_inverse_q, fit_tls_saturation,
                             levenberg_marquardt, solve_least_squares,
                             synth_power_series, synth_tls_saturation,
                             synth_trace)
from optoresp.fitkit.models import _lorentzian, _lorentzian_jac
from optoresp.resonator import LineCalibration, ResonatorMode

# --- engine ------------------------------------------------------------------


def test_linear_model_exact_recovery():
    x = np.linspace(0, 10, 30)
    y = 3.7 * x

    def resid(p):
        return p[0] * x - y

    fit = levenberg_marquardt(resid, [1.0])
    assert fit.converged
    assert abs(fit.values[0] - 3.7) < 1e-12
    assert fit.iterations <= 2


def test_zero_residual_start_returns_immediately():
    def resid(p):
        return np.zeros(5)

    fit = levenberg_marquardt(resid, [2.0, 3.0])
    assert fit.converged and fit.iterations <= 1
    assert_allclose(fit.values, [2.0, 3.0])
    assert fit.message == "zero residual"


def test_rosenbrock_valley():
    # residuals (1-x, 10(y-x^2)) with optimum at (1, 1)
    def resid(p):
        return np.array([1.0 - p[0], 10.0 * (p[1] - p[0] ** 2)])

    fit = levenberg_marquardt(resid, [-1.2, 1.0], max_iter=500)
    assert fit.converged
    assert np.max(np.abs(fit.values - 1.0)) < 1e-8


def test_accepted_cost_sequence_non_increasing():
    rng = np.random.default_rng(0)
    x = np.linspace(0, 1, 40)
    y = 2.0 * np.exp(-3.0 * x) + 0.01 * rng.standard_normal(40)

    def resid(p):
        return p[0] * np.exp(-p[1] * x) - y

    fit = levenberg_marquardt(resid, [0.5, 0.5], transforms=[Log(), Log()])
    assert fit.converged
    assert all(b <= a + 1e-15 for a, b in zip(fit.cost_trace,
                                              fit.cost_trace[1:]))


def test_transform_bounds_respected():
    # fit forced toward zero through a log transform stays positive
    x = np.linspace(0, 1, 20)
    y = 0.5 * x  # no offset

    def resid(p):
        return p[0] * x + p[1] - y

    fit = levenberg_marquardt(resid, [1.0, 0.3], transforms=[Identity(), Log()])
    assert fit.values[1] > 0.0
    assert abs(fit.values[0] - 0.5) < 1e-3


def _centered_fd(fun, x, n_out):
    fd = np.empty((n_out, x.size))
    for j in range(x.size):
        h = 1e-6 * max(abs(x[j]), 1e-3)
        xp, xm = x.copy(), x.copy()
        xp[j] += h
        xm[j] -= h
        fd[:, j] = (fun(xp) - fun(xm)) / (2 * h)
    return fd


def test_model_jacobians_match_finite_differences():
    rng = np.random.default_rng(8)
    f = np.linspace(-1.0, 1.0, 60)
    for _ in range(20):
        x = np.array([rng.uniform(0.5, 2.0), rng.uniform(0.1, 1.0),
                      rng.uniform(-0.3, 0.3), rng.uniform(0.2, 1.5)])
        jac = _lorentzian_jac(x, f)
        fd = _centered_fd(lambda xx: _lorentzian(xx, f), x, f.size)
        assert_allclose(jac, fd, rtol=1e-6, atol=1e-8)


def test_power_and_saturation_jacobians_match_finite_differences():
    # every model that ships an analytic Jacobian is checked against
    # centered differences at random in-bounds points
    rng = np.random.default_rng(9)
    p = np.linspace(0.0, 1.0, 30)
    ones = np.ones_like(p)

    def lin_sat(x):
        return x[0] * p + x[1] * (1 - np.exp(-x[2] * p)) + x[3]

    def lin_sat_jac(x):
        e = np.exp(-x[2] * p)
        return np.column_stack([p, 1 - e, x[1] * p * e, ones])

    def dfrac(x):
        return x[0] * p - x[1] * (1 - np.exp(-x[2] * p))

    def dfrac_jac(x):
        e = np.exp(-x[2] * p)
        return np.column_stack([p, -(1 - e), -x[1] * p * e])

    n = np.logspace(0, 3, 30)

    def sat(x):
        return x[0] / np.sqrt(1 + (n / x[1]) ** x[2]) + x[3]

    def sat_jac(x):
        q = (n / x[1]) ** x[2]
        s = 1.0 / np.sqrt(1 + q)
        dsdq = -0.5 * x[0] * s**3
        return np.column_stack([s, dsdq * (-x[2] * q / x[1]),
                                dsdq * q * np.log(n / x[1]),
                                np.ones_like(n)])

    for _ in range(20):
        x4 = np.array([rng.uniform(0.5, 2), rng.uniform(0.2, 1),
                       rng.uniform(1, 6), rng.uniform(-0.5, 0.5)])
        assert_allclose(lin_sat_jac(x4), _centered_fd(lin_sat, x4, p.size),
                        rtol=1e-6, atol=1e-9)
        x3 = x4[:3]
        assert_allclose(dfrac_jac(x3), _centered_fd(dfrac, x3, p.size),
                        rtol=1e-6, atol=1e-9)
        xs = np.array([rng.uniform(0.5, 2), rng.uniform(5, 200),
                       rng.uniform(0.4, 2.0), rng.uniform(0, 1)])
        assert_allclose(sat_jac(xs), _centered_fd(sat, xs, n.size),
                        rtol=1e-6, atol=1e-9)


# --- full S21 ----------------------------------------------------------------

MODE = ResonatorMode.from_asymmetry_angle(7.061e9, 34477, 480, 0.3)
LINE = LineCalibration(0.9, 30e-9, 1.1)
LW = 7.061e9 / MODE.q_tot
GRID = np.linspace(7.061e9 - 5 * LW, 7.061e9 + 5 * LW, 801)


def test_full_s21_round_trip():
    hits = 0
    for seed in range(10):
        tr = synth_trace(MODE, LINE, GRID, noise_std=1e-3, seed=seed)
        r = fit_full_s21(tr)
        assert r.fit.converged
        ok = (abs(r.q_int - 34477) / 34477 < 0.02
              and abs(r.q_ext - MODE.q_ext_reported) / MODE.q_ext_reported < 0.02
              and abs(r.q_tot - MODE.q_tot) / MODE.q_tot < 0.02
              and abs(r.amplitude - 0.9) / 0.9 < 0.05
              and abs(r.delay - 30e-9) / 30e-9 < 0.05)
        hits += ok
    assert hits >= 9


def test_full_s21_reduces_to_ideal_fit():
    mode = ResonatorMode(7.061e9, 34477, 480)
    tr = synth_trace(mode, LineCalibration(), GRID, noise_std=0.0)
    r = fit_full_s21(tr)
    assert abs(r.q_int - 34477) / 34477 < 1e-6
    assert abs(r.q_ext - 480) / 480 < 1e-6
    assert abs(r.f_r - 7.061e9) / 7.061e9 < 1e-12


def test_full_s21_auto_guess_on_published_like_modes():
    for f_r, q_int, q_ext in [(2.418e9, 70134, 3226), (4.884e9, 76771, 499),
                              (7.061e9, 34477, 480), (11.63e9, 37364, 2743)]:
        mode = ResonatorMode(f_r, q_int, q_ext)
        lw = f_r / mode.q_tot
        grid = np.linspace(f_r - 5 * lw, f_r + 5 * lw, 801)
        tr = synth_trace(mode, LineCalibration(1.05, 5e-9, 0.4), grid,
                         noise_std=5e-4, seed=1)
        r = fit_full_s21(tr)
        assert r.fit.converged
        assert abs(r.q_int - q_int) / q_int < 0.05


def test_full_s21_global_phase_rotation_invariance():
    tr = synth_trace(MODE, LINE, GRID, noise_std=5e-4, seed=4)
    r0 = fit_full_s21(tr)
    psi = 0.8
    rotated = ComplexTrace(tr.frequencies, tr.values * np.exp(1j * psi),
                           tr.noise_std)
    r1 = fit_full_s21(rotated)
    assert abs(r1.q_int - r0.q_int) / r0.q_int < 1e-8
    assert abs(r1.q_tot - r0.q_tot) / r0.q_tot < 1e-8
    assert abs(r1.q_ext - r0.q_ext) / r0.q_ext < 1e-8


# --- Lorentzian dip -----------------------------------------------------------

def test_lorentzian_dip_round_trip():
    mode = ResonatorMode(7.061e9, 35000, 480)
    lw = 7.061e9 / mode.q_tot
    grid = np.linspace(7.061e9 - 1.2 * lw, 7.061e9 + 1.2 * lw, 6001)
    hits = 0
    for seed in range(10):
        tr = synth_trace(mode, LineCalibration(), grid, noise_std=1e-3,
                         seed=seed)
        r = fit_lorentzian_dip(tr)
        hits += abs(r.q_int - 35000) / 35000 < 0.05
        assert abs(r.q_tot_equivalent - mode.q_tot) / mode.q_tot < 0.02
    assert hits >= 9


def test_lorentzian_dip_flat_trace_raises():
    f = np.linspace(5e9, 5.1e9, 200)
    rng = np.random.default_rng(0)
    z = 1.0 + 1e-4 * (rng.standard_normal(200) + 1j * rng.standard_normal(200))
    with pytest.raises(NoDipError):
        fit_lorentzian_dip(ComplexTrace(f, z))


def test_lorentzian_vs_full_on_asymmetric_traces():
    # the two Q_int estimators stay within 20% of each other
    lw = 7.061e9 / MODE.q_tot
    grid = np.linspace(7.061e9 - 1.5 * lw, 7.061e9 + 1.5 * lw, 4001)
    for phi in (0.2, 0.35, 0.5):
        mode = ResonatorMode.from_asymmetry_angle(7.061e9, 34477, 480, phi)
        tr = synth_trace(mode, LineCalibration(), grid, noise_std=5e-4, seed=2)
        q_l = fit_lorentzian_dip(tr).q_int
        q_f = fit_full_s21(tr).q_int
        assert abs(q_l - q_f) / q_f < 0.20


# --- power series ---------------------------------------------------------------

def test_power_linear_exact():
    p = np.linspace(0, 200e-9, 12)
    series = synth_power_series(p, gamma=1e-6 / 1e-9, inv_q0=2.9e-5)
    fit = fit_power_inverse_q(series, model="linear")
    assert abs(fit["gamma"] - 1e3) / 1e3 < 1e-10
    assert abs(fit["inv_q0"] - 2.9e-5) / 2.9e-5 < 1e-10


def test_power_saturating_degenerate_flags():
    p = np.linspace(0, 200e-9, 12)
    series = synth_power_series(p, gamma=1e3, inv_q0=2.9e-5)
    fit = fit_power_inverse_q(series, model="linear_plus_saturation")
    assert "gamma3_unidentifiable" in fit.flags
    assert abs(fit["gamma1"] - 1e3) / 1e3 < 1e-3


def test_power_saturating_round_trip():
    p = np.linspace(0, 300e-9, 16)
    true = dict(gamma=8e2, inv_q0=3e-5)
    y = true["gamma"] * p + 2e-5 * (1 - np.exp(-3e7 * p)) + true["inv_q0"]
    rng = np.random.default_rng(3)
    y = y + 0.002 * np.ptp(y) * rng.standard_normal(p.size)
    series = PowerSeries(p_opt=p, inv_q=y, dfrac=np.zeros_like(p))
    # unweighted: no uncertainty columns attached
    fit = fit_power_inverse_q(series, model="linear_plus_saturation")
    assert abs(fit["gamma1"] - 8e2) / 8e2 < 0.1
    assert abs(fit["gamma2"] - 2e-5) / 2e-5 < 0.1


def test_power_frequency_pure_linear_pins_delta2():
    p = np.linspace(0, 200e-9, 12)
    series = synth_power_series(p, delta1=5.9e-7 / 1e-9)
    fit = fit_power_frequency(series)
    assert "delta2_pinned" in fit.flags
    assert abs(fit["delta1"] - 590.0) / 590.0 < 1e-6


def test_power_frequency_pure_saturating():
    p = np.linspace(0, 200e-9, 20)
    series = synth_power_series(p, delta2=2e-5, delta3=0.05e9, noise_rel=0.02,
                                seed=5)
    fit = fit_power_frequency(series)
    assert abs(fit["delta2"] - 2e-5) / 2e-5 < 0.05
    assert abs(fit["delta3"] - 0.05e9) / 0.05e9 < 0.05


def test_power_frequency_mixed_shape_round_trip():
    # blue-linear plus red-saturating: dip then rise through zero
    p = np.linspace(0, 300e-9, 25)
    true = dict(delta1=5.9e-7 / 1e-9, delta2=2e-5, delta3=0.05 / 1e-9)
    series = synth_power_series(p, delta1=true["delta1"],
                                delta2=true["delta2"], delta3=true["delta3"],
                                noise_rel=0.05, seed=7)
    clean = (true["delta1"] * p
             - true["delta2"] * (1 - np.exp(-true["delta3"] * p)))
    assert clean[1] < 0 and clean[-1] > 0  # red dip, then blue recovery
    i_min = np.argmin(clean)
    assert 0 < i_min < p.size - 1
    fit = fit_power_frequency(series)
    assert abs(fit["delta1"] - true["delta1"]) / true["delta1"] < 0.1
    assert abs(fit["delta2"] - true["delta2"]) / true["delta2"] < 0.1


def test_power_fit_preconditions():
    p = np.linspace(0, 1e-7, 3)
    series = synth_power_series(p, gamma=1.0)
    with pytest.raises(ValueError):
        fit_power_inverse_q(series, model="linear_plus_saturation")
    with pytest.raises(ValueError):
        fit_power_frequency(series)
    two = synth_power_series(np.array([0.0, 1e-9]), gamma=1.0)
    with pytest.raises(ValueError):
        fit_power_inverse_q(two, model="linear")


# --- TLS saturation -------------------------------------------------------------

def test_tls_saturation_round_trip():
    n = np.logspace(2, 5, 81)
    y_n, y, sig = synth_tls_saturation(n, f_delta=2e-5, n_c=3e3, beta=1.0,
                                       floor=1e-5, noise_rel=0.03, seed=2)
    fit = fit_tls_saturation(y_n, y, sigma=sig)
    assert abs(fit["n_c"] - 3e3) / 3e3 < 0.15
    assert abs(fit["beta"] - 1.0) < 0.15
    assert "insufficient_span" not in fit.flags


def test_tls_saturation_plateau_and_tail():
    fit_params = dict(f_delta=2e-5, n_c=3e3, beta=1.0, floor=1e-5)
    n = np.logspace(1, 7, 25)
    _, y, _ = synth_tls_saturation(n, **fit_params)
    # low-drive plateau
    assert_allclose(y[0], fit_params["f_delta"] + fit_params["floor"],
                    rtol=2e-3)
    # high-drive log-log tail slope of the TLS part approaches -beta/2
    tail = (y - fit_params["floor"])[-6:]
    slope = np.polyfit(np.log(n[-6:]), np.log(tail), 1)[0]
    assert abs(slope + fit_params["beta"] / 2) < 0.02


def test_tls_saturation_span_warning():
    n = np.linspace(100, 900, 8)
    _, y, _ = synth_tls_saturation(n, f_delta=2e-5, n_c=3e3, beta=1.0,
                                   floor=1e-5)
    fit = fit_tls_saturation(n, y)
    assert "insufficient_span" in fit.flags
    with pytest.raises(ValueError):
        fit_tls_saturation(n[:4], y[:4])


# --- synth -----------------------------------------------------------------------

def test_synth_trace_deterministic_and_exact():
    mode = ResonatorMode(5e9, 1e4, 1e3)
    grid = np.linspace(4.99e9, 5.01e9, 101)
    clean = synth_trace(mode, LineCalibration(), grid, noise_std=0.0)
    from optoresp.resonator import s21_ideal
    assert_allclose(clean.values, s21_ideal(mode, grid), rtol=1e-14)
    a = synth_trace(mode, LineCalibration(), grid, noise_std=1e-3, seed=9)
    b = synth_trace(mode, LineCalibration(), grid, noise_std=1e-3, seed=9)
    assert np.array_equal(a.values, b.values)


def test_synth_trace_noise_statistics():
    mode = ResonatorMode(5e9, 1e4, 1e3)
    grid = np.linspace(4.9e9, 5.1e9, 20000)
    tr = synth_trace(mode, LineCalibration(), grid, noise_std=2e-3, seed=0)
    from optoresp.resonator import s21_ideal
    resid = tr.values - s21_ideal(mode, grid)
    assert abs(np.std(resid.real) / 2e-3 - 1.0) < 0.1
    assert abs(np.std(resid.imag) / 2e-3 - 1.0) < 0.1


def test_solve_least_squares_requires_guess_policy():
    spec = FitModelSpec(name="bare", param_names=("a",),
                        residual=lambda x, d: x[0] - d)
    with pytest.raises(ValueError):
        solve_least_squares(spec, np.array([1.0]))

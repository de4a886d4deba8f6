"""Damped Gauss-Newton (Levenberg-Marquardt) least squares.

Minimizes 0.5 * ||r(x)||^2 for a user residual function.  Complex-valued
data is handled by the model layer (real and imaginary residuals stacked),
so the engine only ever sees real vectors.  Parameter bounds are enforced by
smooth reparameterizations (log for positive quantities, logistic for
two-sided intervals) rather than clipping, which keeps the descent surface
differentiable; the solver works in the unconstrained internal coordinates.

Termination: relative step < step_tol, relative cost decrease < cost_tol
(both counted only for undamped-quality steps), a scaled gradient test, or
max_iter.  Accepted-step costs are non-increasing by construction.
Non-convergence is reported as a flag on the result, not an exception;
SingularJacobianError is reserved for a Jacobian that vanishes identically
at a nonzero-residual stop (rank deficiency is flagged, with a
pseudoinverse covariance).
"""

from dataclasses import dataclass, field

import numpy as np


class SingularJacobianError(RuntimeError):
    """Normal equations unsolvable: Jacobian rank collapsed."""


# --- parameter transforms --------------------------------------------------

class Identity:
    def to_internal(self, x):
        return float(x)

    def to_external(self, u):
        return float(u)

    def jacobian_factor(self, u):
        """d external / d internal at internal coordinate u."""
        return 1.0


class Scaled(Identity):
    """Unbounded parameter with a natural scale; internal coordinate is x/scale.

    Keeps internal coordinates O(1) so finite differences and damping behave
    for parameters like cable delays (seconds, values ~1e-9).
    """

    def __init__(self, scale):
        if not (scale > 0):
            raise ValueError("scale must be positive")
        self.scale = float(scale)

    def to_internal(self, x):
        return float(x) / self.scale

    def to_external(self, u):
        return float(u) * self.scale

    def jacobian_factor(self, u):
        return self.scale


class Log(Identity):
    """Strictly positive parameter; internal coordinate is ln(x)."""

    def to_internal(self, x):
        if x <= 0:
            raise ValueError(f"log-transformed parameter must be > 0, got {x}")
        return float(np.log(x))

    def to_external(self, u):
        return float(np.exp(u))

    def jacobian_factor(self, u):
        return float(np.exp(u))


class Logistic(Identity):
    """Parameter confined to (lo, hi) via a logistic map."""

    def __init__(self, lo, hi):
        if not (hi > lo):
            raise ValueError("need hi > lo")
        self.lo, self.hi = float(lo), float(hi)

    def to_internal(self, x):
        if not (self.lo < x < self.hi):
            raise ValueError(f"{x} outside ({self.lo}, {self.hi})")
        z = (x - self.lo) / (self.hi - self.lo)
        return float(np.log(z / (1.0 - z)))

    def to_external(self, u):
        return float(self.lo + (self.hi - self.lo) / (1.0 + np.exp(-u)))

    def jacobian_factor(self, u):
        s = 1.0 / (1.0 + np.exp(-u))
        return float((self.hi - self.lo) * s * (1.0 - s))


@dataclass
class FitResult:
    names: list
    values: np.ndarray
    covariance: np.ndarray | None
    residual_norm: float
    cost: float
    converged: bool
    iterations: int
    message: str = ""
    flags: list = field(default_factory=list)
    cost_trace: list = field(default_factory=list)

    def __getitem__(self, name):
        return float(self.values[self.names.index(name)])

    def uncertainty(self, name):
        if self.covariance is None:
            return np.nan
        i = self.names.index(name)
        return float(np.sqrt(max(self.covariance[i, i], 0.0)))

    def as_dict(self):
        return dict(zip(self.names, (float(v) for v in self.values)))


def _finite_difference_jacobian(fun, u, r0):
    """Forward differences in internal coordinates, which are O(1) by
    construction (log/logit/scaled), so a relative step is meaningful."""
    jac = np.empty((r0.size, u.size))
    for j in range(u.size):
        h = 1e-7 * max(1.0, abs(u[j]))
        up = u.copy()
        up[j] += h
        jac[:, j] = (fun(up) - r0) / h
    return jac


def levenberg_marquardt(residual, x0, jac=None, names=None, transforms=None,
                        max_iter=200, step_tol=1e-10, cost_tol=1e-12,
                        lam0=1e-3):
    """Minimize 0.5 ||residual(x)||^2 from x0.

    Parameters
    ----------
    residual : callable(x) -> 1-D array of residuals (external coordinates).
    jac : callable(x) -> (m, n) Jacobian in external coordinates, or None
        for forward differences.
    transforms : per-parameter Identity/Log/Logistic instances, or None.

    Returns
    -------
    FitResult (converged flag False when max_iter hit without meeting the
    step/cost tolerances).
    """
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    names = list(names) if names is not None else [f"p{i}" for i in range(n)]
    transforms = list(transforms) if transforms is not None else [Identity()] * n
    if len(transforms) != n or len(names) != n:
        raise ValueError("names/transforms length mismatch")

    u = np.array([t.to_internal(v) for t, v in zip(transforms, x0)])

    def external(uv):
        return np.array([t.to_external(ui) for t, ui in zip(transforms, uv)])

    def res_u(uv):
        return np.asarray(residual(external(uv)), dtype=float)

    def jac_u(uv, r_now):
        if jac is None:
            return _finite_difference_jacobian(res_u, uv, r_now)
        jx = np.asarray(jac(external(uv)), dtype=float)
        factors = np.array([t.jacobian_factor(ui)
                            for t, ui in zip(transforms, uv)])
        return jx * factors[None, :]

    r = res_u(u)
    if not np.all(np.isfinite(r)):
        raise ValueError("residual not finite at the initial point")
    cost = 0.5 * float(r @ r)
    cost_trace = [cost]
    lam = lam0
    converged = False
    message = "max_iter reached"
    iterations = 0

    def try_step(step):
        """Clamp, evaluate; return (accepted, u_new, r_new, cost_new, step)."""
        if not np.all(np.isfinite(step)):
            return False, None, None, None, step
        # clamp runaway moves along near-flat directions; internal
        # coordinates are log/logit scaled, so 5 is already a huge move
        biggest = np.max(np.abs(step))
        if biggest > 5.0:
            step = step * (5.0 / biggest)
        u_new = u + step
        r_new = res_u(u_new)
        if not np.all(np.isfinite(r_new)):
            return False, None, None, None, step
        cost_new = 0.5 * float(r_new @ r_new)
        return cost_new <= cost, u_new, r_new, cost_new, step

    for iterations in range(1, max_iter + 1):
        if cost == 0.0:
            converged, message = True, "zero residual"
            break
        j = jac_u(u, r)
        jtj = j.T @ j
        jtr = j.T @ r

        # scaled gradient test (residual nearly orthogonal to the Jacobian)
        col = np.sqrt(np.maximum(np.diag(jtj), 0.0))
        rnorm = np.sqrt(2.0 * cost)
        if np.max(np.abs(jtr)) <= 1e-12 * max(np.max(col) * rnorm, 1e-300):
            converged, message = True, "gradient tolerance met"
            break

        # bonus undamped Gauss-Newton attempt: one-shot for linear models,
        # quadratic convergence near the optimum; its rejection is free
        try:
            accepted, u_new, r_new, cost_new, step = try_step(
                np.linalg.lstsq(j, -r, rcond=None)[0])
        except np.linalg.LinAlgError:
            accepted = False
        clean = accepted
        if not accepted:
            for attempt in range(50):
                damped = jtj + lam * np.diag(np.maximum(np.diag(jtj), 1e-300))
                try:
                    candidate = np.linalg.solve(damped, -jtr)
                except np.linalg.LinAlgError:
                    lam *= 10.0
                    continue
                accepted, u_new, r_new, cost_new, step = try_step(candidate)
                if accepted:
                    clean = attempt == 0
                    break
                lam *= 10.0
        if not accepted:
            message = "no acceptable damped step"
            break

        step_size = np.max(np.abs(step) / np.maximum(np.abs(u_new), 1.0))
        rel_drop = (cost - cost_new) / max(cost, 1e-300)
        u, r, cost = u_new, r_new, cost_new
        cost_trace.append(cost)
        lam = max(lam / 9.0, 1e-14)
        if cost == 0.0:
            converged, message = True, "zero residual"
            break
        # trust vanishing steps/drops only when the step needed no extra
        # damping; a tiny move forced by escalation is not convergence
        if clean:
            if step_size < step_tol:
                converged, message = True, "step tolerance met"
                break
            if rel_drop < cost_tol:
                converged, message = True, "cost tolerance met"
                break

    x_final = external(u)
    j_final = jac_u(u, r)
    cov, flags = _covariance(j_final, r, transforms, u, cost)
    return FitResult(names=names, values=x_final, covariance=cov,
                     residual_norm=float(np.linalg.norm(r)), cost=cost,
                     converged=converged, iterations=iterations,
                     message=message, flags=flags, cost_trace=cost_trace)


def _covariance(j_internal, r, transforms, u, cost):
    """Covariance in external coordinates from the internal-coordinate Jacobian."""
    m, n = j_internal.shape
    flags = []
    if not np.all(np.isfinite(j_internal)):
        return None, ["jacobian_nonfinite"]
    _, sv, _ = np.linalg.svd(j_internal, full_matrices=False)
    if sv.size == 0 or sv[0] == 0.0:
        if cost > 0.0:
            raise SingularJacobianError(
                "Jacobian identically zero at a nonzero-residual optimum")
        return None, ["zero_jacobian"]
    if sv[-1] < 1e-12 * sv[0]:
        flags.append("rank_deficient")
    dof = max(m - n, 1)
    s2 = float(r @ r) / dof
    jtj = j_internal.T @ j_internal
    cov_int = np.linalg.pinv(jtj) * s2
    # map internal covariance to external coordinates: x = f(u), dx = f'(u) du
    factors = np.array([t.jacobian_factor(ui) for t, ui in zip(transforms, u)])
    cov = cov_int * np.outer(factors, factors)
    return cov, flags

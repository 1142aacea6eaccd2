"""Solvers for the optimal displacement and the optimal beam-splitter setting.

``optimal_beta`` solves the stationarity condition

    xi sqrt(T) alpha = beta tanh(2 eta xi sqrt(T) alpha beta)

by bisection. The left side is constant and the right side strictly increasing
in beta, so the positive root is unique and bisection cannot fail once a sign
change is bracketed.

``optimal_transmittance`` keeps the auxiliary oscillator amplitude gamma fixed
and minimises the error directly over T; the closed-form stationarity
condition in T is singular at |alpha| = |gamma| and is only used to polish and
verify the minimiser.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .errors import (
    ConsistencyError,
    ConvergenceError,
    DegenerateInputError,
    InvalidBracketError,
    SingularInputError,
)
from .models import DetectorModel, DiscriminationProblem, DisplacementSetup
from .receivers import displacement_error

ROOT_TOL = 1e-10
ARG_TOL = 1e-8
STATIONARITY_TOL = 1e-8
MAX_ITER = 200
MINIMIZER_PROBE = 1e-4

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class RootResult:
    root: float
    residual: float
    iterations: int


def minimize_scalar(
    f: Callable[[float], float],
    bracket: tuple[float, float],
    tol: float = ARG_TOL,
    max_iter: int = MAX_ITER,
) -> RootResult:
    """Golden-section search for the minimiser of a unimodal ``f`` on ``bracket``.

    ``residual`` is the half-width of the final bracket, i.e. a bound on the
    distance between ``root`` and the true minimiser.
    """
    a, b = (float(v) for v in bracket)
    if not (math.isfinite(a) and math.isfinite(b)) or not a < b:
        raise InvalidBracketError(f"bracket must be a finite interval a < b, got {bracket!r}")
    if not tol > 0:
        raise InvalidBracketError(f"tol must be positive, got {tol!r}")

    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    it = 0
    while (b - a) > 2.0 * tol:
        if it >= max_iter:
            raise ConvergenceError(
                f"golden section did not reach tol={tol} in {max_iter} iterations"
            )
        it += 1
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    return RootResult(root=0.5 * (a + b), residual=0.5 * (b - a), iterations=it)


def beta_condition(problem: DiscriminationProblem, det: DetectorModel,
                   transmittance: float, beta: float) -> float:
    """Signed residual ``beta tanh(2 eta xi sqrt(T) alpha beta) - xi sqrt(T) alpha``."""
    c = det.xi * math.sqrt(transmittance) * problem.alpha
    return beta * math.tanh(2.0 * det.eta * c * beta) - c


def optimal_beta(
    problem: DiscriminationProblem,
    det: DetectorModel | None = None,
    transmittance: float = 1.0,
    tol: float = ROOT_TOL,
    max_iter: int = MAX_ITER,
) -> RootResult:
    """Error-minimising displacement at fixed transmittance."""
    det = det or DetectorModel.ideal()
    setup0 = DisplacementSetup(transmittance, 0.0)  # validates T
    problem.require_equal_priors()
    if problem.alpha == 0.0:
        raise DegenerateInputError("alpha = 0: every displacement gives error 1/2")
    if det.eta == 0.0 or det.xi == 0.0:
        raise DegenerateInputError(
            "eta = 0 or xi = 0: the counter carries no information about the sign"
        )

    def f(beta):
        return beta_condition(problem, det, setup0.transmittance, beta)

    c = det.xi * math.sqrt(setup0.transmittance) * problem.alpha
    lo, hi = 0.0, max(1.0, 2.0 * c)
    it = 0
    while f(hi) <= 0.0:
        it += 1
        if it > max_iter:
            raise ConvergenceError("could not bracket the optimal displacement")
        lo, hi = hi, 2.0 * hi

    while it < max_iter:
        it += 1
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            lo = hi = mid
            break
        if fm < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 2.0 * np.spacing(hi):
            break

    root = lo if abs(f(lo)) <= abs(f(hi)) else hi
    residual = abs(f(root))
    if residual > tol:
        raise ConvergenceError(
            f"optimal_beta residual {residual:.3e} exceeds {tol:.1e} after {it} iterations"
        )

    p_star = displacement_error(problem, det, DisplacementSetup(setup0.transmittance, root))
    for probe in (root - MINIMIZER_PROBE, root + MINIMIZER_PROBE):
        if probe < 0:
            continue
        if displacement_error(problem, det, DisplacementSetup(setup0.transmittance, probe)) < p_star:
            raise ConsistencyError(f"beta={root} is not a local minimiser of the error")
    return RootResult(root=root, residual=residual, iterations=it)


def _condition_from_loss(problem, det, gamma, loss):
    # written in terms of 1 - T so that T -> 1 keeps full precision
    a = problem.alpha
    s = math.sqrt(loss * (1.0 - loss))
    lhs = det.xi * a * gamma * (2.0 * loss - 1.0) / ((a * a - gamma * gamma) * s)
    return lhs - math.tanh(2.0 * det.eta * det.xi * s * a * gamma)


def transmittance_condition(problem: DiscriminationProblem, det: DetectorModel,
                            gamma: float, transmittance: float) -> float:
    """Signed residual of the fixed-gamma stationarity condition in T.

    ``xi alpha gamma (1 - 2T) / ((alpha^2 - gamma^2) sqrt(T(1-T)))
    - tanh(2 eta xi sqrt(T(1-T)) alpha gamma)``
    """
    return _condition_from_loss(problem, det, gamma, 1.0 - transmittance)


def _error_from_loss(problem, det, gamma, loss):
    return displacement_error(problem, det, DisplacementSetup(1.0 - loss, math.sqrt(loss) * gamma))


def fixed_gamma_error(problem: DiscriminationProblem, det: DetectorModel,
                      gamma: float, transmittance: float) -> float:
    return displacement_error(problem, det, DisplacementSetup.from_gamma(gamma, transmittance))


def optimal_transmittance(
    problem: DiscriminationProblem,
    det: DetectorModel | None = None,
    gamma: float = math.sqrt(24.7),
    tol: float = STATIONARITY_TOL,
    max_iter: int = MAX_ITER,
) -> RootResult:
    """Error-minimising transmittance with the auxiliary amplitude held fixed.

    The displacement follows as ``beta = sqrt(1 - T) * gamma``. The search
    runs over ``log(1 - T)``; ``residual`` is the stationarity condition
    evaluated at the returned loss ``1 - T``.
    """
    det = det or DetectorModel.ideal()
    problem.require_equal_priors()
    a = problem.alpha
    if a == 0.0 or not gamma > 0.0:
        raise DegenerateInputError(
            f"need alpha > 0 and gamma > 0 for a unique optimum (alpha={a}, gamma={gamma})"
        )
    if det.eta == 0.0 or det.xi == 0.0:
        raise DegenerateInputError("eta = 0 or xi = 0: error is 1/2 for every T")
    if math.isclose(a, gamma, rel_tol=1e-12, abs_tol=0.0):
        raise SingularInputError(f"|alpha| = |gamma| = {a}: optimality condition is singular")

    def err(y):
        return _error_from_loss(problem, det, gamma, math.exp(y))

    # coarse scan over log(1 - T); the valley spans about a decade there
    log_u = np.linspace(math.log(1e-15), math.log1p(-1e-12), 301)
    i = int(np.argmin([err(y) for y in log_u]))
    if i == 0 or i == len(log_u) - 1:
        raise ConvergenceError(f"optimal T lies outside the scanned range (index {i})")

    gs = minimize_scalar(err, (log_u[i - 1], log_u[i + 1]), tol=1e-12, max_iter=max_iter)
    u_lo, u_hi = math.exp(log_u[i - 1]), math.exp(log_u[i + 1])
    u_star = math.exp(gs.root)
    iterations = gs.iterations

    def g(u):
        return _condition_from_loss(problem, det, gamma, u)

    # polish on the stationarity condition; it changes sign across the minimum
    if g(u_lo) * g(u_hi) < 0.0:
        u_polished, info = brentq(g, u_lo, u_hi, xtol=1e-300, rtol=4 * np.finfo(float).eps,
                                  maxiter=max_iter, full_output=True, disp=False)
        iterations += info.iterations
        if info.converged:
            u_star = u_polished
    residual = abs(g(u_star))
    if residual > tol:
        raise ConvergenceError(
            f"optimal_transmittance stationarity residual {residual:.3e} exceeds {tol:.1e}"
        )
    return RootResult(root=1.0 - u_star, residual=residual, iterations=iterations)

"""Closed-form error probabilities of the four binary coherent-state receivers.

Every function returns the average error probability for equal priors.
Unequal priors are rejected: the closed forms below hold only at 1/2, 1/2.
"""

from __future__ import annotations

import math

from .errors import ConsistencyError, DomainError
from .models import DetectorModel, DiscriminationProblem, DisplacementSetup, HomodyneModel

# slack for roundoff when checking the algebraic range [0, 1/2]
_RANGE_SLACK = 1e-15


def _checked(value: float, name: str) -> float:
    if not (-_RANGE_SLACK <= value <= 0.5 + _RANGE_SLACK):
        raise ConsistencyError(f"{name} left [0, 1/2]: {value!r}")
    return value


def helstrom_error(problem: DiscriminationProblem) -> float:
    """Minimum error allowed by quantum mechanics for |+alpha> vs |-alpha>."""
    problem.require_equal_priors()
    overlap2 = math.exp(-4.0 * problem.alpha2)
    # 1 - sqrt(1 - x) == x / (1 + sqrt(1 - x)), stable for small x
    value = 0.5 * overlap2 / (1.0 + math.sqrt(1.0 - overlap2))
    return _checked(value, "helstrom_error")


def kennedy_error(problem: DiscriminationProblem) -> float:
    """Displace |-alpha> to vacuum and count photons; only |+alpha> can err."""
    problem.require_equal_priors()
    return _checked(0.5 * math.exp(-4.0 * problem.alpha2), "kennedy_error")


def homodyne_error(problem: DiscriminationProblem) -> float:
    """Sign of an ideal quadrature measurement along the signal excitation."""
    problem.require_equal_priors()
    return _checked(0.5 * math.erfc(math.sqrt(2.0) * problem.alpha), "homodyne_error")


def homodyne_error_model(problem: DiscriminationProblem, model: HomodyneModel) -> float:
    """Homodyne error including detection efficiency and excess noise.

    The quadrature is Gaussian with mean ``sqrt(eff) * alpha`` and variance
    ``(1 + excess) / 4``, so the error is ``erfc(mean / sqrt(2 var)) / 2``.
    """
    problem.require_equal_priors()
    mean = math.sqrt(model.efficiency) * problem.alpha
    value = 0.5 * math.erfc(mean / math.sqrt(2.0 * model.variance))
    return _checked(value, "homodyne_error_model")


def mean_photon_numbers(
    problem: DiscriminationProblem, setup: DisplacementSetup, xi: float = 1.0
) -> tuple[float, float]:
    """Mean photon numbers reaching the counter under each hypothesis.

    ``n_pm = T alpha^2 + beta^2 +/- 2 xi sqrt(T) alpha beta``. The minus
    branch is evaluated as ``(sqrt(T) alpha - xi beta)^2 + (1 - xi^2) beta^2``
    so that it stays accurate (and non-negative) near the Kennedy null.
    """
    a, b = problem.alpha, setup.beta
    sa = math.sqrt(setup.transmittance) * a
    n_plus = sa * sa + b * b + 2.0 * xi * sa * b
    n_minus = (sa - xi * b) ** 2 + (1.0 - xi * xi) * b * b
    if n_minus < 0.0:
        raise ConsistencyError(f"negative photon number under |-alpha>: {n_minus!r}")
    # the two forms round differently; n_minus <= n_plus holds exactly
    return n_plus, min(n_minus, n_plus)


def click_probabilities(
    problem: DiscriminationProblem,
    det: DetectorModel,
    setup: DisplacementSetup,
) -> tuple[float, float]:
    """Probability of at least one count given |+alpha> and given |-alpha>.

    Averaging ``(1 - p_plus)`` and ``p_minus`` over equal priors gives
    :func:`displacement_error` exactly.
    """
    n_plus, n_minus = mean_photon_numbers(problem, setup, det.xi)
    p_plus = -math.expm1(-det.nu - det.eta * n_plus)
    p_minus = -math.expm1(-det.nu - det.eta * n_minus)
    return p_plus, p_minus


def displacement_error(
    problem: DiscriminationProblem,
    det: DetectorModel,
    setup: DisplacementSetup,
) -> float:
    """Error of the displacement receiver with an on/off photon counter.

    ``1/2 - exp(-nu - eta (T alpha^2 + beta^2)) sinh(2 eta xi sqrt(T) alpha beta)``

    Evaluated through the per-hypothesis no-click probabilities, which is the
    same expression but keeps full relative accuracy when the error is tiny.
    """
    problem.require_equal_priors()
    n_plus, n_minus = mean_photon_numbers(problem, setup, det.xi)
    value = 0.5 * math.exp(-det.nu - det.eta * n_plus) - 0.5 * math.expm1(
        -det.nu - det.eta * n_minus
    )
    return _checked(value, "displacement_error")


def kennedy_setup(problem: DiscriminationProblem, transmittance: float = 1.0) -> DisplacementSetup:
    """Displacement that nulls the transmitted |-alpha> component."""
    if not 0.0 < transmittance <= 1.0:
        raise DomainError(f"transmittance must lie in (0, 1], got {transmittance}")
    return DisplacementSetup(transmittance, math.sqrt(transmittance) * problem.alpha)

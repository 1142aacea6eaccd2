"""Parameter containers for binary coherent-state discrimination.

All amplitudes are real and non-negative. A coherent state with amplitude
``alpha`` carries a mean photon number ``alpha**2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, InvalidPriorError

PRIOR_TOL = 1e-12


def _check_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class DiscriminationProblem:
    """The two hypotheses |+alpha> and |-alpha> together with their priors."""

    alpha: float
    prior_plus: float = 0.5
    prior_minus: float = 0.5

    def __post_init__(self):
        alpha = _check_finite("alpha", self.alpha)
        if alpha < 0:
            raise DomainError(f"alpha must be non-negative, got {alpha}")
        for name in ("prior_plus", "prior_minus"):
            p = _check_finite(name, getattr(self, name))
            if not 0.0 <= p <= 1.0:
                raise InvalidPriorError(f"{name} must lie in [0, 1], got {p}")
        if abs(self.prior_plus + self.prior_minus - 1.0) > PRIOR_TOL:
            raise InvalidPriorError(
                f"priors must sum to 1, got {self.prior_plus} + {self.prior_minus}"
            )
        object.__setattr__(self, "alpha", alpha)

    @classmethod
    def from_alpha2(cls, alpha2: float, **kwargs) -> DiscriminationProblem:
        alpha2 = _check_finite("alpha2", alpha2)
        if alpha2 < 0:
            raise DomainError(f"|alpha|^2 must be non-negative, got {alpha2}")
        return cls(math.sqrt(alpha2), **kwargs)

    @property
    def alpha2(self) -> float:
        return self.alpha * self.alpha

    @property
    def equal_priors(self) -> bool:
        return abs(self.prior_plus - 0.5) <= PRIOR_TOL

    def require_equal_priors(self) -> None:
        if not self.equal_priors:
            raise InvalidPriorError(
                "closed-form error probabilities require equal priors "
                f"(got prior_plus={self.prior_plus})"
            )


@dataclass(frozen=True)
class DetectorModel:
    """Photon-counter imperfections.

    eta: quantum efficiency, nu: mean dark counts per gate,
    xi: interference visibility at the displacement beam splitter.
    """

    eta: float = 1.0
    nu: float = 0.0
    xi: float = 1.0

    def __post_init__(self):
        eta = _check_finite("eta", self.eta)
        nu = _check_finite("nu", self.nu)
        xi = _check_finite("xi", self.xi)
        if not 0.0 <= eta <= 1.0:
            raise DomainError(f"eta must lie in [0, 1], got {eta}")
        if nu < 0.0:
            raise DomainError(f"nu must be non-negative, got {nu}")
        if not 0.0 <= xi <= 1.0:
            raise DomainError(f"xi must lie in [0, 1], got {xi}")
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "xi", xi)

    @classmethod
    def ideal(cls) -> DetectorModel:
        return cls(1.0, 0.0, 1.0)

    @property
    def is_ideal(self) -> bool:
        return self.eta == 1.0 and self.nu == 0.0 and self.xi == 1.0


@dataclass(frozen=True)
class DisplacementSetup:
    """Beam-splitter transmittance and the displacement it produces.

    The auxiliary oscillator amplitude is ``gamma = beta / sqrt(1 - T)``; at
    ``T = 1`` the displacement is the ideal limit and ``gamma`` is undefined.
    """

    transmittance: float = 1.0
    beta: float = 0.0

    def __post_init__(self):
        t = _check_finite("transmittance", self.transmittance)
        beta = _check_finite("beta", self.beta)
        if not 0.0 < t <= 1.0:
            raise DomainError(f"transmittance must lie in (0, 1], got {t}")
        if beta < 0.0:
            raise DomainError(f"beta must be non-negative, got {beta}")
        object.__setattr__(self, "transmittance", t)
        object.__setattr__(self, "beta", beta)

    @classmethod
    def from_gamma(cls, gamma: float, transmittance: float) -> DisplacementSetup:
        gamma = _check_finite("gamma", gamma)
        if gamma < 0:
            raise DomainError(f"gamma must be non-negative, got {gamma}")
        if not 0.0 < transmittance < 1.0:
            raise DomainError(
                f"a finite auxiliary oscillator needs 0 < T < 1, got {transmittance}"
            )
        return cls(transmittance, math.sqrt(1.0 - transmittance) * gamma)

    @property
    def gamma(self) -> float:
        if self.transmittance >= 1.0:
            raise DomainError("gamma is undefined at T = 1")
        return self.beta / math.sqrt(1.0 - self.transmittance)


@dataclass(frozen=True)
class HomodyneModel:
    """Homodyne receiver with efficiency and excess noise.

    Quadratures are in shot-noise units where the vacuum variance is 1/4;
    ``excess_noise`` is the added variance relative to that level.
    """

    efficiency: float = 1.0
    excess_noise: float = 0.005

    def __post_init__(self):
        eff = _check_finite("efficiency", self.efficiency)
        excess = _check_finite("excess_noise", self.excess_noise)
        if not 0.0 <= eff <= 1.0:
            raise DomainError(f"homodyne efficiency must lie in [0, 1], got {eff}")
        if excess < 0.0:
            raise DomainError(f"excess_noise must be non-negative, got {excess}")
        object.__setattr__(self, "efficiency", eff)
        object.__setattr__(self, "excess_noise", excess)

    @classmethod
    def ideal(cls) -> HomodyneModel:
        return cls(1.0, 0.0)

    @property
    def variance(self) -> float:
        return 0.25 * (1.0 + self.excess_noise)

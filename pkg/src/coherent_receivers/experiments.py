"""Parameter sweeps over amplitude, displacement and auxiliary-oscillator power."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np
from scipy.special import entr

from .errors import (
    ConsistencyError,
    DegenerateInputError,
    DomainError,
    NoSignChangeError,
    SingularInputError,
)
from .models import DetectorModel, DiscriminationProblem, DisplacementSetup, HomodyneModel
from .pulse_sim import simulate_apd_sequence, simulate_homodyne_sequence
from .receivers import (
    displacement_error,
    helstrom_error,
    homodyne_error,
    homodyne_error_model,
    kennedy_error,
)
from .solver import optimal_beta, optimal_transmittance

RECEIVERS = ("helstrom", "kennedy", "homodyne", "opt_displacement")
ENGINES = ("analytic", "montecarlo", "both")
MODES = ("ideal", "corrected")

DEFAULT_ALPHA2_GRID = np.linspace(0.0, 2.0, 81)
CROSSOVER_TOL = 1e-6


@dataclass
class SweepResult:
    axis_name: str
    axis_values: np.ndarray
    series: dict[str, np.ndarray] = field(default_factory=dict)
    annotations: dict = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    parameters: dict = field(default_factory=dict)

    def __post_init__(self):
        self.axis_values = np.asarray(self.axis_values, dtype=float)
        for name, values in self.series.items():
            self.series[name] = np.asarray(values, dtype=float)
            if self.series[name].shape != self.axis_values.shape:
                raise ConsistencyError(f"series {name!r} does not match the axis length")

    def to_csv(self, fh=None) -> str | None:
        out = io.StringIO() if fh is None else fh
        names = list(self.series)
        out.write(",".join([self.axis_name, *names]) + "\n")
        for i, x in enumerate(self.axis_values.tolist()):
            row = [_fmt(x)] + [_fmt(float(self.series[n][i])) for n in names]
            out.write(",".join(row) + "\n")
        return out.getvalue() if fh is None else None

    def to_dict(self) -> dict:
        return {
            "axis_name": self.axis_name,
            "axis_values": _jsonable(self.axis_values),
            "series": {k: _jsonable(v) for k, v in self.series.items()},
            "annotations": _jsonable(self.annotations),
            "warnings": list(self.warnings),
            "parameters": _jsonable(self.parameters),
        }


def _fmt(x: float) -> str:
    return "nan" if math.isnan(x) else repr(x)


def _jsonable(obj):
    """Convert numpy containers to plain Python, NaN to None."""
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in (obj.tolist() if isinstance(obj, np.ndarray) else obj)]
    if isinstance(obj, (np.floating, float)):
        return None if math.isnan(obj) else float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _point_seed(seed: int, *key: int) -> int:
    return int(np.random.SeedSequence([seed, *key]).generate_state(1, dtype=np.uint64)[0])


def kennedy_displacement(problem: DiscriminationProblem, transmittance: float = 1.0,
                         gamma2: float | None = None) -> DisplacementSetup:
    """Setup that nulls |-alpha>, either at fixed T or at fixed |gamma|^2."""
    if gamma2 is None:
        return DisplacementSetup(transmittance, math.sqrt(transmittance) * problem.alpha)
    if problem.alpha == 0.0:
        return DisplacementSetup(1.0, 0.0)
    # sqrt(T) alpha = sqrt(1 - T) gamma
    t = gamma2 / (problem.alpha2 + gamma2)
    return DisplacementSetup.from_gamma(math.sqrt(gamma2), t)


def optimal_displacement(problem: DiscriminationProblem, det: DetectorModel,
                         transmittance: float = 1.0,
                         gamma2: float | None = None) -> DisplacementSetup:
    """Error-minimising setup under the fixed-T or fixed-gamma policy.

    At alpha = 0 no displacement helps; the null displacement is returned.
    """
    if problem.alpha == 0.0:
        return DisplacementSetup(1.0 if gamma2 is not None else transmittance, 0.0)
    if gamma2 is None:
        return DisplacementSetup(transmittance, optimal_beta(problem, det, transmittance).root)
    gamma = math.sqrt(gamma2)
    t = optimal_transmittance(problem, det, gamma).root
    return DisplacementSetup.from_gamma(gamma, t)


def amplitude_sweep(
    alpha2_grid: Iterable[float] = DEFAULT_ALPHA2_GRID,
    det: DetectorModel | None = None,
    homodyne: HomodyneModel | None = None,
    receivers: Iterable[str] = RECEIVERS,
    engine: str = "analytic",
    mode: str = "ideal",
    transmittance: float = 1.0,
    gamma2: float | None = None,
    trials: int = 10**4,
    seed: int | None = None,
    workers: int = 1,
) -> SweepResult:
    """Error of each selected receiver versus signal mean photon number.

    In ``"corrected"`` mode the grid holds efficiency-corrected photon numbers
    ``eta |alpha|^2``; each receiver is evaluated at the physical amplitude
    ``grid / eta`` with its own efficiency, while the Helstrom bound is
    evaluated at the grid value itself.
    """
    det = det or DetectorModel.ideal()
    homodyne = homodyne or HomodyneModel.ideal()
    receivers = list(receivers)
    grid = np.asarray(list(alpha2_grid), dtype=float)
    if grid.size == 0:
        raise DomainError("amplitude grid is empty")
    if np.any(grid < 0) or not np.all(np.isfinite(grid)):
        raise DomainError("amplitude grid values must be finite and non-negative")
    unknown = set(receivers) - set(RECEIVERS)
    if unknown:
        raise DomainError(f"unknown receivers {sorted(unknown)}; choose from {RECEIVERS}")
    if engine not in ENGINES:
        raise DomainError(f"engine must be one of {ENGINES}, got {engine!r}")
    if mode not in MODES:
        raise DomainError(f"mode must be one of {MODES}, got {mode!r}")
    mc = engine in ("montecarlo", "both")
    analytic = engine in ("analytic", "both")
    if mc and seed is None:
        raise DomainError("a seed is required for the Monte Carlo engine")

    if mode == "corrected":
        if det.eta == 0.0 or homodyne.efficiency == 0.0:
            raise DomainError("corrected mode needs non-zero efficiencies")
        onoff_a2, hd_a2 = grid / det.eta, grid / homodyne.efficiency
    else:
        onoff_a2, hd_a2 = grid, grid

    series: dict[str, list[float]] = {}
    warnings: list[str] = []

    def put(name, i, value):
        series.setdefault(name, [math.nan] * grid.size)[i] = value

    for i, x in enumerate(grid):
        onoff = DiscriminationProblem.from_alpha2(onoff_a2[i])
        hd = DiscriminationProblem.from_alpha2(hd_a2[i])
        for rx in receivers:
            r_index = RECEIVERS.index(rx)
            if rx == "helstrom":
                put(rx, i, helstrom_error(DiscriminationProblem.from_alpha2(x)))
                continue
            if rx == "homodyne":
                if analytic:
                    put(rx, i, homodyne_error_model(hd, homodyne))
                if mc:
                    est = simulate_homodyne_sequence(
                        hd, homodyne, trials, _point_seed(seed, i, r_index), workers)
                    put(f"{rx}_mc", i, est.p_hat)
                    put(f"{rx}_mc_stderr", i, est.std_err)
                continue
            try:
                if rx == "kennedy":
                    setup = kennedy_displacement(onoff, transmittance, gamma2)
                else:
                    setup = optimal_displacement(onoff, det, transmittance, gamma2)
            except SingularInputError as exc:
                warnings.append(f"{rx} at alpha2={float(x)!r} skipped: {exc}")
                suffixes = ([""] if analytic else []) + (["_mc", "_mc_stderr"] if mc else [])
                for suffix in suffixes:
                    put(rx + suffix, i, math.nan)
                continue
            if analytic:
                put(rx, i, displacement_error(onoff, det, setup))
            if mc:
                est = simulate_apd_sequence(
                    onoff, det, setup, trials, _point_seed(seed, i, r_index), workers)
                put(f"{rx}_mc", i, est.p_hat)
                put(f"{rx}_mc_stderr", i, est.std_err)
        if mode == "corrected":
            put("alpha2_onoff", i, onoff_a2[i])
            put("alpha2_homodyne", i, hd_a2[i])

    if not receivers:
        series = {}
    return SweepResult(
        axis_name="alpha2_corrected" if mode == "corrected" else "alpha2",
        axis_values=grid,
        series=series,
        warnings=warnings,
        parameters={
            "detector": vars(det).copy(),
            "homodyne": vars(homodyne).copy(),
            "receivers": receivers,
            "engine": engine,
            "mode": mode,
            "transmittance": transmittance,
            "gamma2": gamma2,
            "trials": trials if mc else None,
            "seed": seed if mc else None,
        },
    )


def default_beta2_grid(alpha2: float, points: int = 50, eta: float = 1.0) -> np.ndarray:
    # the small-amplitude optimum sits near beta^2 = 1 / (2 eta)
    floor = 0.25 / eta if eta > 0 else 0.25
    return np.linspace(0.0, 4.0 * max(floor, alpha2), points)


def beta_sweep(
    problem: DiscriminationProblem,
    det: DetectorModel | None = None,
    beta2_grid: Iterable[float] | None = None,
    transmittance: float = 1.0,
    gamma2: float | None = None,
    engine: str = "analytic",
    trials: int = 10**4,
    seed: int | None = None,
    workers: int = 1,
) -> SweepResult:
    """Error of the displacement receiver versus |beta|^2 at fixed signal.

    With ``gamma2`` set, each displacement is produced by the matching
    transmittance ``T = 1 - |beta|^2 / |gamma|^2``; otherwise T is fixed.
    """
    det = det or DetectorModel.ideal()
    if problem.alpha == 0.0:
        raise DegenerateInputError("beta sweep needs alpha > 0")
    if engine not in ENGINES:
        raise DomainError(f"engine must be one of {ENGINES}, got {engine!r}")
    mc = engine in ("montecarlo", "both")
    if mc and seed is None:
        raise DomainError("a seed is required for the Monte Carlo engine")
    grid = default_beta2_grid(problem.alpha2, eta=det.eta) if beta2_grid is None else np.asarray(
        list(beta2_grid), dtype=float)
    if grid.size == 0 or np.any(grid < 0):
        raise DomainError("beta^2 grid must be non-empty and non-negative")

    def setup_for(beta2):
        if gamma2 is None:
            return DisplacementSetup(transmittance, math.sqrt(beta2))
        if beta2 == 0.0:
            return DisplacementSetup(1.0, 0.0)
        return DisplacementSetup.from_gamma(math.sqrt(gamma2), 1.0 - beta2 / gamma2)

    warnings: list[str] = []
    values = np.full(grid.size, math.nan)
    mc_values = np.full(grid.size, math.nan)
    mc_err = np.full(grid.size, math.nan)
    for i, b2 in enumerate(grid):
        try:
            setup = setup_for(b2)
        except DomainError as exc:
            warnings.append(f"beta2={float(b2)!r} skipped: {exc}")
            continue
        values[i] = displacement_error(problem, det, setup)
        if mc:
            est = simulate_apd_sequence(problem, det, setup, trials, _point_seed(seed, i), workers)
            mc_values[i], mc_err[i] = est.p_hat, est.std_err

    series = {"displacement": values}
    if mc:
        series["displacement_mc"] = mc_values
        series["displacement_mc_stderr"] = mc_err

    opt = optimal_displacement(problem, det, transmittance, gamma2)
    opt_b2 = opt.beta**2
    ken = kennedy_displacement(problem, transmittance, gamma2) if gamma2 is not None else \
        DisplacementSetup(transmittance, problem.alpha)
    i_min = int(np.nanargmin(values))
    step = float(np.max(np.diff(np.sort(grid)))) if grid.size > 1 else math.inf
    in_range = grid.min() <= opt_b2 <= grid.max()
    matches = abs(grid[i_min] - opt_b2) <= step
    if in_range and not matches:
        raise ConsistencyError(
            f"grid minimum at beta2={grid[i_min]} is more than one step from optimum {opt_b2}")

    annotations = {
        # Kennedy point: |beta|^2 = |alpha|^2
        "kennedy": {"beta2": ken.beta**2, "transmittance": ken.transmittance,
                    "error": displacement_error(problem, det, ken)},
        "optimum": {"beta2": opt_b2, "transmittance": opt.transmittance,
                    "error": displacement_error(problem, det, opt)},
        "grid_minimum": {"beta2": float(grid[i_min]), "error": float(values[i_min])},
        "grid_minimum_matches_optimum": bool(matches),
        "homodyne_ideal": homodyne_error(problem),
        "helstrom": helstrom_error(problem),
    }
    return SweepResult(
        axis_name="beta2",
        axis_values=grid,
        series=series,
        annotations=annotations,
        warnings=warnings,
        parameters={
            "alpha2": problem.alpha2,
            "detector": vars(det).copy(),
            "transmittance": transmittance if gamma2 is None else None,
            "gamma2": gamma2,
            "engine": engine,
            "trials": trials if mc else None,
            "seed": seed if mc else None,
        },
    )


def gamma_sweep(
    problem: DiscriminationProblem,
    det: DetectorModel | None = None,
    gamma2_grid: Iterable[float] = (1.0, 2.0, 5.0, 10.0, 24.7, 50.0, 100.0, 1000.0),
) -> SweepResult:
    """Best achievable error at each auxiliary-oscillator power |gamma|^2.

    Points with |gamma| = |alpha| are singular and skipped with a warning.
    """
    det = det or DetectorModel.ideal()
    if problem.alpha == 0.0:
        raise DegenerateInputError("gamma sweep needs alpha > 0")
    grid = np.asarray(list(gamma2_grid), dtype=float)
    if grid.size == 0 or np.any(grid <= 0):
        raise DomainError("|gamma|^2 grid must be non-empty and positive")

    cols = {name: np.full(grid.size, math.nan) for name in
            ("transmittance", "beta2", "error", "residual")}
    warnings = []
    for i, g2 in enumerate(grid):
        try:
            res = optimal_transmittance(problem, det, math.sqrt(g2))
        except SingularInputError as exc:
            warnings.append(f"gamma2={float(g2)!r} skipped: {exc}")
            continue
        setup = DisplacementSetup.from_gamma(math.sqrt(g2), res.root)
        cols["transmittance"][i] = res.root
        cols["beta2"][i] = setup.beta**2
        cols["error"][i] = displacement_error(problem, det, setup)
        cols["residual"][i] = res.residual

    # the gamma -> infinity limit is the fixed-T = 1 optimum
    plateau = DisplacementSetup(1.0, optimal_beta(problem, det, 1.0).root)
    return SweepResult(
        axis_name="gamma2",
        axis_values=grid,
        series=cols,
        annotations={"fixed_beta_optimum": {"beta2": plateau.beta**2,
                                            "error": displacement_error(problem, det, plateau)}},
        warnings=warnings,
        parameters={"alpha2": problem.alpha2, "detector": vars(det).copy()},
    )


def _ideal_opt_displacement(problem: DiscriminationProblem) -> float:
    setup = optimal_displacement(problem, DetectorModel.ideal())
    return displacement_error(problem, DetectorModel.ideal(), setup)


IDEAL_RECEIVERS: dict[str, Callable[[DiscriminationProblem], float]] = {
    "helstrom": helstrom_error,
    "kennedy": kennedy_error,
    "homodyne": homodyne_error,
    "opt_displacement": _ideal_opt_displacement,
}


def _as_curve(receiver) -> Callable[[float], float]:
    if callable(receiver):
        return receiver
    try:
        fn = IDEAL_RECEIVERS[receiver]
    except KeyError:
        raise DomainError(f"unknown receiver {receiver!r}; choose from {RECEIVERS}") from None
    return lambda a2: fn(DiscriminationProblem.from_alpha2(a2))


def crossover_find(receiver_a, receiver_b, bracket: tuple[float, float] = (0.01, 2.0),
                   tol: float = CROSSOVER_TOL) -> float:
    """|alpha|^2 where two receivers have equal error, by bisection.

    Receivers are names from :data:`IDEAL_RECEIVERS` or callables taking
    |alpha|^2.
    """
    fa, fb = _as_curve(receiver_a), _as_curve(receiver_b)
    lo, hi = (float(v) for v in bracket)
    if not 0.0 <= lo < hi:
        raise DomainError(f"bracket must satisfy 0 <= lo < hi, got {bracket!r}")

    def d(x):
        return fa(x) - fb(x)

    d_lo, d_hi = d(lo), d(hi)
    if d_lo == 0.0 or d_hi == 0.0 or (d_lo > 0) == (d_hi > 0):
        raise NoSignChangeError(
            f"error difference does not change sign on {bracket!r} ({d_lo:.3e}, {d_hi:.3e})")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        d_mid = d(mid)
        if d_mid == 0.0:
            return mid
        if (d_mid > 0) == (d_lo > 0):
            lo, d_lo = mid, d_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def mutual_information(p_error: float) -> float:
    """Bits per symbol of a binary symmetric channel with crossover ``p_error``."""
    p = float(p_error)
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"error probability must lie in [0, 1], got {p}")
    return 1.0 - float(entr(p) + entr(1.0 - p)) / math.log(2.0)

"""Seeded Monte Carlo simulation of pulse sequences.

Each pulse draws a hypothesis from the priors, a Poisson click count for the
on/off receiver and a Gaussian quadrature for the homodyne receiver. The trial
stream is cut into fixed-size chunks; chunk ``k`` draws from generators seeded
by ``SeedSequence(seed, spawn_key=(k,))``, with independent child streams for
hypotheses, counts and quadratures. Results therefore do not depend on how
many workers process the chunks, and the two receiver simulations see exactly
the hypotheses recorded in the joint pulse log.
"""

from __future__ import annotations

import io
import math
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError
from .models import DetectorModel, DiscriminationProblem, DisplacementSetup, HomodyneModel
from .receivers import mean_photon_numbers

CHUNK_SIZE = 2**16
CSV_HEADER = "trial,hypothesis,apd_counts,quadrature,decision_apd,decision_homodyne"

_HYP, _APD, _HD = 0, 1, 2


@dataclass(frozen=True)
class ErrorEstimate:
    """Empirical error rate with its binomial standard error."""

    p_hat: float
    trials: int
    std_err: float
    errors: int = 0

    @classmethod
    def from_counts(cls, errors: int, trials: int) -> ErrorEstimate:
        errors, trials = int(errors), int(trials)
        if trials < 1 or not 0 <= errors <= trials:
            raise DomainError(f"need 0 <= errors <= trials and trials >= 1, got {errors}/{trials}")
        p = errors / trials
        return cls(p_hat=p, trials=trials, std_err=math.sqrt(p * (1.0 - p) / trials), errors=errors)

    def within(self, expected: float, n_sigma: float = 4.0) -> bool:
        return abs(self.p_hat - expected) <= n_sigma * self.std_err


@dataclass(frozen=True)
class PulseRecord:
    trial: int
    hypothesis: int
    apd_counts: int
    quadrature: float
    decision_apd: int
    decision_homodyne: int


def _check_run(trials: int, seed: int, workers: int, chunk_size: int, allow_empty=False):
    if isinstance(trials, bool) or int(trials) != trials:
        raise DomainError(f"trials must be an integer, got {trials!r}")
    if trials < (0 if allow_empty else 1):
        raise DomainError(f"trials must be >= {0 if allow_empty else 1}, got {trials}")
    if seed is None or int(seed) != seed or seed < 0:
        raise DomainError(f"seed must be a non-negative integer, got {seed!r}")
    if workers < 1:
        raise DomainError(f"workers must be >= 1, got {workers}")
    if chunk_size < 1:
        raise DomainError(f"chunk_size must be >= 1, got {chunk_size}")


def _chunks(trials: int, chunk_size: int) -> list[tuple[int, int, int]]:
    """(chunk index, first trial, number of trials) for every chunk."""
    return [
        (k, start, min(chunk_size, trials - start))
        for k, start in enumerate(range(0, trials, chunk_size))
    ]


def _streams(seed: int, chunk: int) -> list[np.random.Generator]:
    children = np.random.SeedSequence(int(seed), spawn_key=(chunk,)).spawn(3)
    return [np.random.Generator(np.random.PCG64(c)) for c in children]


def _hypotheses(rng, n, prior_plus):
    return np.where(rng.random(n) < prior_plus, 1, -1).astype(np.int8)


def _counts(rng, hyp, mean_plus, mean_minus):
    return rng.poisson(np.where(hyp > 0, mean_plus, mean_minus))


def _quadratures(rng, hyp, mean, sd):
    return hyp * mean + sd * rng.standard_normal(hyp.shape[0])


def _run_chunks(kernel: Callable, chunks, workers: int) -> list:
    if workers == 1 or len(chunks) <= 1:
        return [kernel(*c) for c in chunks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda c: kernel(*c), chunks))


def _count_means(problem, det, setup):
    n_plus, n_minus = mean_photon_numbers(problem, setup, det.xi)
    return det.nu + det.eta * n_plus, det.nu + det.eta * n_minus


def _quadrature_params(problem, model):
    return math.sqrt(model.efficiency) * problem.alpha, math.sqrt(model.variance)


def simulate_apd_sequence(
    problem: DiscriminationProblem,
    det: DetectorModel,
    setup: DisplacementSetup,
    trials: int,
    seed: int,
    workers: int = 1,
    chunk_size: int = CHUNK_SIZE,
) -> ErrorEstimate:
    """Monte Carlo error rate of the displacement receiver (click => |+alpha>)."""
    _check_run(trials, seed, workers, chunk_size)
    mean_plus, mean_minus = _count_means(problem, det, setup)

    def kernel(k, start, n):
        rngs = _streams(seed, k)
        hyp = _hypotheses(rngs[_HYP], n, problem.prior_plus)
        clicks = _counts(rngs[_APD], hyp, mean_plus, mean_minus)
        decision = np.where(clicks > 0, 1, -1)
        return int(np.count_nonzero(decision != hyp))

    errors = sum(_run_chunks(kernel, _chunks(trials, chunk_size), workers))
    return ErrorEstimate.from_counts(errors, trials)


def simulate_homodyne_sequence(
    problem: DiscriminationProblem,
    model: HomodyneModel,
    trials: int,
    seed: int,
    workers: int = 1,
    chunk_size: int = CHUNK_SIZE,
) -> ErrorEstimate:
    """Monte Carlo error rate of the homodyne receiver (x > 0 => |+alpha>)."""
    _check_run(trials, seed, workers, chunk_size)
    mean, sd = _quadrature_params(problem, model)

    def kernel(k, start, n):
        rngs = _streams(seed, k)
        hyp = _hypotheses(rngs[_HYP], n, problem.prior_plus)
        x = _quadratures(rngs[_HD], hyp, mean, sd)
        decision = np.where(x > 0, 1, -1)
        return int(np.count_nonzero(decision != hyp))

    errors = sum(_run_chunks(kernel, _chunks(trials, chunk_size), workers))
    return ErrorEstimate.from_counts(errors, trials)


class PulseLog(Sequence):
    """Column-backed sequence of :class:`PulseRecord`."""

    def __init__(self, hypothesis, apd_counts, quadrature):
        self.hypothesis = np.asarray(hypothesis, dtype=np.int8)
        self.apd_counts = np.asarray(apd_counts, dtype=np.int64)
        self.quadrature = np.asarray(quadrature, dtype=np.float64)
        self.decision_apd = np.where(self.apd_counts > 0, 1, -1).astype(np.int8)
        self.decision_homodyne = np.where(self.quadrature > 0, 1, -1).astype(np.int8)

    def __len__(self):
        return self.hypothesis.shape[0]

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        if i < 0:
            i += len(self)
        if not 0 <= i < len(self):
            raise IndexError(i)
        return PulseRecord(
            trial=i,
            hypothesis=int(self.hypothesis[i]),
            apd_counts=int(self.apd_counts[i]),
            quadrature=float(self.quadrature[i]),
            decision_apd=int(self.decision_apd[i]),
            decision_homodyne=int(self.decision_homodyne[i]),
        )

    def summary(self) -> tuple[ErrorEstimate, ErrorEstimate]:
        """(apd, homodyne) error estimates re-aggregated from the decisions."""
        n = len(self)
        apd = int(np.count_nonzero(self.decision_apd != self.hypothesis))
        hd = int(np.count_nonzero(self.decision_homodyne != self.hypothesis))
        return ErrorEstimate.from_counts(apd, n), ErrorEstimate.from_counts(hd, n)

    def to_csv(self, fh=None) -> str | None:
        """Write the log as CSV; returns the text when ``fh`` is None."""
        out = io.StringIO() if fh is None else fh
        out.write(CSV_HEADER + "\n")
        rows = zip(
            self.hypothesis.tolist(),
            self.apd_counts.tolist(),
            self.quadrature.tolist(),
            self.decision_apd.tolist(),
            self.decision_homodyne.tolist(),
        )
        out.writelines(
            f"{i},{h},{c},{x!r},{da},{dh}\n" for i, (h, c, x, da, dh) in enumerate(rows)
        )
        if fh is None:
            return out.getvalue()
        return None


def generate_pulse_log(
    problem: DiscriminationProblem,
    det: DetectorModel,
    setup: DisplacementSetup,
    model: HomodyneModel,
    trials: int,
    seed: int,
    workers: int = 1,
    chunk_size: int = CHUNK_SIZE,
) -> PulseLog:
    """Per-pulse records with both receivers sampled on the same hypotheses."""
    _check_run(trials, seed, workers, chunk_size, allow_empty=True)
    mean_plus, mean_minus = _count_means(problem, det, setup)
    mean, sd = _quadrature_params(problem, model)

    def kernel(k, start, n):
        rngs = _streams(seed, k)
        hyp = _hypotheses(rngs[_HYP], n, problem.prior_plus)
        return (
            hyp,
            _counts(rngs[_APD], hyp, mean_plus, mean_minus),
            _quadratures(rngs[_HD], hyp, mean, sd),
        )

    parts = _run_chunks(kernel, _chunks(trials, chunk_size), workers)
    if not parts:
        return PulseLog(np.empty(0), np.empty(0), np.empty(0))
    hyp, counts, quad = (np.concatenate(col) for col in zip(*parts))
    return PulseLog(hyp, counts, quad)

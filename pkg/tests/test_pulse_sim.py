import math

import numpy as np
import pytest

from coherent_receivers import (
    DetectorModel,
    DiscriminationProblem,
    DisplacementSetup,
    DomainError,
    ErrorEstimate,
    HomodyneModel,
    displacement_error,
    generate_pulse_log,
    kennedy_error,
    simulate_apd_sequence,
    simulate_homodyne_sequence,
)
from coherent_receivers.pulse_sim import CSV_HEADER
from coherent_receivers.receivers import mean_photon_numbers

from . import oracles

IDEAL = DetectorModel.ideal()
APPARATUS_DET = DetectorModel(0.55, 0.0, 0.996)
P04 = DiscriminationProblem(0.4)


def test_error_estimate_from_counts():
    est = ErrorEstimate.from_counts(250, 1000)
    assert est.p_hat == 0.25
    assert est.std_err == pytest.approx(math.sqrt(0.25 * 0.75 / 1000), abs=1e-12)
    with pytest.raises(DomainError):
        ErrorEstimate.from_counts(5, 0)
    with pytest.raises(DomainError):
        ErrorEstimate.from_counts(11, 10)


@pytest.mark.parametrize("kwargs", [{"trials": 0}, {"seed": None}, {"seed": -1}, {"workers": 0}])
def test_invalid_run_arguments(kwargs):
    args = {"trials": 10, "seed": 1, "workers": 1} | kwargs
    with pytest.raises(DomainError):
        simulate_apd_sequence(P04, IDEAL, DisplacementSetup(1.0, 0.4), **args)


def test_no_displacement_is_coin_flip():
    est = simulate_apd_sequence(P04, DetectorModel(0.8, 0.0, 1.0), DisplacementSetup(1.0, 0.0),
                                10**5, seed=11)
    assert est.within(0.5)


def test_kennedy_matches_analytic():
    est = simulate_apd_sequence(P04, IDEAL, DisplacementSetup(1.0, 0.4), 10**6, seed=12)
    assert est.within(oracles.KENNEDY_016)


def test_imperfect_displacement_matches_analytic():
    setup = DisplacementSetup(0.977, 0.748)
    est = simulate_apd_sequence(P04, APPARATUS_DET, setup, 10**6, seed=13)
    assert est.within(displacement_error(P04, APPARATUS_DET, setup))


def test_dark_counts_matter():
    det = DetectorModel(0.55, 0.2, 0.996)
    setup = DisplacementSetup(0.977, 0.748)
    est = simulate_apd_sequence(P04, det, setup, 2 * 10**5, seed=14)
    assert est.within(displacement_error(P04, det, setup))


def test_homodyne_zero_amplitude():
    est = simulate_homodyne_sequence(DiscriminationProblem(0.0), HomodyneModel(), 10**5, seed=15)
    assert est.within(0.5)


def test_homodyne_ideal_matches_analytic():
    est = simulate_homodyne_sequence(P04, HomodyneModel.ideal(), 10**6, seed=16)
    assert est.within(oracles.HOMODYNE_016)


def test_homodyne_efficiency_corrected_equivalence():
    eta = 0.858
    problem = DiscriminationProblem(math.sqrt(0.16 / eta))
    est = simulate_homodyne_sequence(problem, HomodyneModel(eta, 0.0), 10**6, seed=17)
    assert est.within(oracles.HOMODYNE_016)


def test_vacuum_quadrature_variance():
    log = generate_pulse_log(DiscriminationProblem(0.0), IDEAL, DisplacementSetup(1.0, 0.0),
                             HomodyneModel(1.0, 0.005), 2 * 10**5, seed=18)
    var = np.var(log.quadrature)
    n = len(log)
    expected = 0.25 * 1.005
    # variance of a sample variance for a Gaussian: 2 sigma^4 / (n - 1)
    assert abs(var - expected) <= 4 * expected * math.sqrt(2 / (n - 1))


def test_poisson_mean_under_plus():
    setup = DisplacementSetup(0.977, 0.748)
    log = generate_pulse_log(P04, APPARATUS_DET, setup, HomodyneModel(), 2 * 10**5, seed=19)
    counts = log.apd_counts[log.hypothesis == 1]
    n_plus, _ = mean_photon_numbers(P04, setup, APPARATUS_DET.xi)
    mean = APPARATUS_DET.nu + APPARATUS_DET.eta * n_plus
    assert abs(counts.mean() - mean) <= 4 * math.sqrt(mean / counts.size)


def test_unequal_priors_drawn():
    problem = DiscriminationProblem(0.4, 0.8, 0.2)
    log = generate_pulse_log(problem, IDEAL, DisplacementSetup(1.0, 0.4), HomodyneModel(),
                             10**5, seed=20)
    frac = np.mean(log.hypothesis == 1)
    assert abs(frac - 0.8) <= 4 * math.sqrt(0.16 / 10**5)
    # Kennedy only errs on |+alpha>, so error = prior_plus * exp(-4 alpha^2)
    apd, _ = log.summary()
    assert apd.within(0.8 * math.exp(-0.64))


class TestPulseLog:
    def make(self, trials=5000, seed=21, workers=1, chunk_size=1024):
        return generate_pulse_log(P04, APPARATUS_DET, DisplacementSetup(0.977, 0.748),
                                  HomodyneModel(0.858, 0.005), trials, seed,
                                  workers=workers, chunk_size=chunk_size)

    def test_empty(self):
        log = self.make(trials=0)
        assert len(log) == 0
        assert list(log) == []
        assert log.to_csv() == CSV_HEADER + "\n"

    def test_threshold_invariants(self):
        log = self.make()
        for rec in log[:500]:
            assert rec.decision_apd == (1 if rec.apd_counts > 0 else -1)
            assert rec.decision_homodyne == (1 if rec.quadrature > 0 else -1)
            assert rec.hypothesis in (1, -1)
            assert rec.apd_counts >= 0
        assert np.all((log.apd_counts > 0) == (log.decision_apd == 1))
        assert np.all((log.quadrature > 0) == (log.decision_homodyne == 1))

    def test_records(self):
        log = self.make(trials=10)
        assert log[-1].trial == 9
        assert log[3] == log[3]
        with pytest.raises(IndexError):
            log[10]

    def test_same_seed_same_bytes(self):
        assert self.make().to_csv() == self.make().to_csv()

    def test_different_seed_differs(self):
        assert self.make(seed=1).to_csv() != self.make(seed=2).to_csv()

    @pytest.mark.parametrize("workers", [2, 4, 8])
    def test_independent_of_workers(self, workers):
        assert self.make(workers=workers).to_csv() == self.make(workers=1).to_csv()

    def test_summary_matches_simulators(self):
        setup = DisplacementSetup(0.977, 0.748)
        hd = HomodyneModel(0.858, 0.005)
        log = self.make(trials=20000, seed=5)
        apd, hom = log.summary()
        assert apd == simulate_apd_sequence(P04, APPARATUS_DET, setup, 20000, 5, chunk_size=1024)
        assert hom == simulate_homodyne_sequence(P04, hd, 20000, 5, chunk_size=1024)

    def test_summary_matches_simulators_default_chunks(self):
        setup = DisplacementSetup(1.0, 0.4)
        log = generate_pulse_log(P04, IDEAL, setup, HomodyneModel.ideal(), 150000, seed=9)
        apd, hom = log.summary()
        assert apd == simulate_apd_sequence(P04, IDEAL, setup, 150000, 9, workers=3)
        assert hom == simulate_homodyne_sequence(P04, HomodyneModel.ideal(), 150000, 9, workers=3)
        assert apd.within(kennedy_error(P04))

    def test_csv_format(self):
        text = self.make(trials=3).to_csv()
        lines = text.split("\n")
        assert lines[0] == "trial,hypothesis,apd_counts,quadrature,decision_apd,decision_homodyne"
        assert text.endswith("\n")
        assert len(lines) == 5 and lines[-1] == ""
        fields = lines[1].split(",")
        assert fields[0] == "0"
        float(fields[3])

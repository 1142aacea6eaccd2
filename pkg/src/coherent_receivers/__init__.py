"""Error rates of receivers for binary phase-shifted coherent states.

Closed-form models for the Helstrom bound, the Kennedy receiver, homodyne
detection and the optimised-displacement receiver, solvers for the optimal
displacement, seeded Monte Carlo pulse simulation and parameter sweeps.
"""

__version__ = "0.1.0"

from .errors import (
    ConsistencyError,
    ConvergenceError,
    DegenerateInputError,
    DomainError,
    InvalidBracketError,
    InvalidPriorError,
    NoSignChangeError,
    ReceiverError,
    SingularInputError,
)
from .models import DetectorModel, DiscriminationProblem, DisplacementSetup, HomodyneModel
from .receivers import (
    click_probabilities,
    displacement_error,
    helstrom_error,
    homodyne_error,
    homodyne_error_model,
    kennedy_error,
    mean_photon_numbers,
)
from .solver import RootResult, minimize_scalar, optimal_beta, optimal_transmittance
from .pulse_sim import (
    ErrorEstimate,
    PulseLog,
    PulseRecord,
    generate_pulse_log,
    simulate_apd_sequence,
    simulate_homodyne_sequence,
)
from .experiments import (
    SweepResult,
    amplitude_sweep,
    beta_sweep,
    crossover_find,
    gamma_sweep,
    mutual_information,
)

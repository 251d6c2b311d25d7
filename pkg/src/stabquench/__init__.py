"""Stabilizer-entropy dynamics of the transverse-field Ising chain after a quench."""

from .errors import (DegeneracyWarning, DegenerateMomentsError, DomainError, Flag, InsufficientWindowError,
                     NoRevivalError, ResolutionError, ResourceError)
from .fermions import (FiniteChain, MajoranaCorrelation, QuenchSpec, ThermodynamicLimit, evolved_correlation,
                       gge_correlation, ground_correlation)
from .pauli import MomentSums, PauliString, moment_sums, pauli_expectation, pfaffian
from .metrics import SEReport, se_report, stabilizer_entropy
from .analysis import (LocalityProfile, ScanResult, equilibration_time, extrapolate_M2, locality_length,
                       locality_profile, second_difference, spreading_velocity, time_scan)
from .loschmidt import extract_lr_speed, loschmidt_echo
from .replica import ReplicaScaling, UniformMPS, mps_scaling, predict_T

__version__ = "0.1.0"

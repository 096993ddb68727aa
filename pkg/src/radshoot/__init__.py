"""Shooting laboratory for radial ground states of ``u'' + (N-1)/r u' + f(u) = 0``."""

__version__ = "0.1.0"

from .nonlinearity import (AffineSine, BaseModel, BlockSpec, ConstructionError, DomainError,
                           PiecewiseNonlinearity, Power, Sampled, compile_nonlinearity,
                           power_chain)
from .odeint import EventSpec, RadialState, SolverControls, Trajectory, integrate
from .shooting import (TAG_N, TAG_P, TAG_UNDETERMINED, Classification, ClassificationError,
                       GroundStateBracket, classify, find_alpha_star, find_ground_states,
                       scan_ground_states)
from .hypotheses import HypothesisReport, HypothesisResult, verify
from .tuning import ChainTuning, TuningError, tune_chain, tune_fixed_chain
from .config import ConfigError, ExperimentConfig
from .estimators import ChainTuner, GroundStateShooter

__all__ = [
    "AffineSine", "BaseModel", "BlockSpec", "ChainTuner", "ChainTuning", "Classification",
    "ClassificationError", "ConfigError", "ConstructionError", "DomainError", "EventSpec",
    "ExperimentConfig", "GroundStateBracket", "GroundStateShooter", "HypothesisReport",
    "HypothesisResult", "PiecewiseNonlinearity", "Power", "RadialState", "Sampled",
    "SolverControls", "TAG_N", "TAG_P", "TAG_UNDETERMINED", "Trajectory", "TuningError",
    "classify", "compile_nonlinearity", "find_alpha_star", "find_ground_states", "integrate",
    "power_chain", "scan_ground_states", "tune_chain", "tune_fixed_chain", "verify",
]

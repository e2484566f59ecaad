"""Fisher information, DQM checks and Le Cam-style simulation for a Gamma location model with hidden signs."""
from .dqm import DqmReport, dqm_verify
from .lecam import SimConfig, SimResult, gap_limit_check, mle_Q, simulate, tv_decay_fit
from .models import ModelParams, PointX
from .numerics import EmpiricalDistribution, PowerLawFit, QuadratureResult, integrate
from .projection import InfoReport, pythagoras_check

__version__ = "0.1.0"

__all__ = [
    "DqmReport", "EmpiricalDistribution", "InfoReport", "ModelParams", "PointX",
    "PowerLawFit", "QuadratureResult", "SimConfig", "SimResult", "dqm_verify",
    "gap_limit_check", "integrate", "mle_Q", "pythagoras_check", "simulate",
    "tv_decay_fit",
]

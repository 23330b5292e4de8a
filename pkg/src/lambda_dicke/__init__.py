"""Mean-field thermodynamics of the three-level Lambda Dicke model."""

from .free_energy import f_delta0, f_general, grad_f, q_func
from .minimizer import GridSpec, StationaryPoint, global_minimum, local_minima, refine
from .model import (MeanField, ModelParams, ParameterError, PhaseLabel, ThermoPoint,
                    critical_coupling, validate)
from .observables import ObservableSet, observable_set
from .phase_diagram import classify, locate_boundary, sweep_g1g2, sweep_g1T

__version__ = "0.1.0"

__all__ = [
    "GridSpec", "MeanField", "ModelParams", "ObservableSet", "ParameterError",
    "PhaseLabel", "StationaryPoint", "ThermoPoint", "classify", "critical_coupling",
    "f_delta0", "f_general", "global_minimum", "grad_f", "local_minima",
    "locate_boundary", "observable_set", "q_func", "refine", "sweep_g1T",
    "sweep_g1g2", "validate", "__version__",
]

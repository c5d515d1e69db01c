"""Dynamic analytical initialization of spacecraft attitude estimators."""

from .davenport import (InitializerState, VectorObservationPair, current_attitude,
                        solve_constant_attitude, step_observe, step_propagate, step_solve)
from .mekf import MekfConfig, MekfState, handoff_from_initializer, mekf_propagate, mekf_update
from .quaternion import attitude_error_deg, compose, propagate, to_rotation_matrix
from .scenario import Method, ScenarioConfig, run_monte_carlo

__version__ = "0.1.0"

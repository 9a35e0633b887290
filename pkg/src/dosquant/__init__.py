"""Sampled-data switched linear systems with dynamic quantization over a link
subject to denial-of-service attacks."""

from .attack import AttackParams, AttackTrace
from .benchmarks import INITIAL_STATES, PLANTS, plant_a, plant_b, plant_c
from .cert import Certificate, check, solve_envelope
from .errors import (DimensionError, DosQuantError, InfeasibleError, InvalidLevelError,
                     ProtocolError, SaturationError, ScenarioError, UnreachableStateError)
from .plant import SwitchedPlant, discretize
from .sim import Scenario, load_scenario, replay_invariants, run
from .switching import SwitchingSignal

__version__ = "0.1.0"

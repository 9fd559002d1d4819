"""Dissipative entanglement generation for two detuned qubits and a lossy mode."""

__version__ = "0.1.0"

from .hilbert import SpaceLayout, annihilation, embed, named_state, partial_trace_mode
from .measures import concurrence, dark_state, fidelity_pure, populations
from .model import Schedule, SystemParams
from .dynamics import IntegratorConfig, evolve, steady_state

__all__ = [
    "SpaceLayout",
    "SystemParams",
    "Schedule",
    "IntegratorConfig",
    "annihilation",
    "embed",
    "named_state",
    "partial_trace_mode",
    "concurrence",
    "dark_state",
    "fidelity_pure",
    "populations",
    "evolve",
    "steady_state",
    "__version__",
]

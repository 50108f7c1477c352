"""Length-gauge TDSE reference on a radial partial-wave grid."""

from .radial import (BracketError, CutCoulomb, NotBoundError, RadialGrid, bound_states, find_zeff,
                     radial_eigenstate, radial_operator)
from .solver import (AbsorberLossWarning, PartialWaveFunction, UnstableError, continuum_waves, initial_state,
                     load_checkpoint, photoelectron_spectrum, project_out_bound, propagate, save_checkpoint)

__all__ = [
    "AbsorberLossWarning", "BracketError", "CutCoulomb", "NotBoundError", "PartialWaveFunction", "RadialGrid",
    "UnstableError", "bound_states", "continuum_waves", "find_zeff", "initial_state", "load_checkpoint",
    "photoelectron_spectrum", "project_out_bound", "propagate", "radial_eigenstate", "radial_operator",
    "save_checkpoint",
]

"""Strong-field ionization spectra in length and velocity gauge: SFA quadrature, saddle points and a TDSE reference."""

from .field import MonochromaticField, PulseParams, action, electric_field, vector_potential
from .quadrature import NonConvergedError, QuadratureSpec
from .saddle import EmptyResultError, SaddleCoalescenceError, SaddleSolution, solve_saddles, spa_amplitude, spa_spectrum
from .sfa import amplitude_form_factor, amplitude_interaction_form, spectrum
from .spectra import Gauge, Method, SpectrumGrid
from .states import BoundStateModel, StateKind, form_factor, momentum_wavefunction

__version__ = "0.1.0"

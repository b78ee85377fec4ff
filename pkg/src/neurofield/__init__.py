"""Neural field simulation on periodic grids, resolvent-kernel series and MacKay-type figures."""

__version__ = "0.1.0"

from .errors import (
    BlowUpError,
    ContractionError,
    ConvergenceError,
    DomainError,
    GridMismatchError,
    HorizonError,
    InvalidParamsError,
    MultiplierError,
    NearPoleError,
    NeuroFieldError,
    SamplingError,
    StructuralError,
    UnsupportedElementError,
)
from .grid import Field, GridSpec, apply_multiplier, convolve, load_field, norm, sample, save_field, shift
from .kernels import CANONICAL, DoGParams, constants, dog_eval, kernel_field, omega_hat
from .response import ResponseKind, f_eval, f_prime, parse_response
from .dynamics import integrate, linearized_response, stationary_state
from .analytic import K_series_eval, b_heaviside_eval, locate_zeros, poles_and_residues
from .stimuli import BinaryPattern, GroupElement, Stimulus, act, binarize, generate, warp_to_retina
from .control import ControlProblem, linear_control, small_time_control, two_phase_control

__all__ = [
    "BlowUpError",
    "ContractionError",
    "ConvergenceError",
    "DomainError",
    "GridMismatchError",
    "HorizonError",
    "InvalidParamsError",
    "MultiplierError",
    "NearPoleError",
    "NeuroFieldError",
    "SamplingError",
    "StructuralError",
    "UnsupportedElementError",
    "Field",
    "GridSpec",
    "apply_multiplier",
    "convolve",
    "load_field",
    "norm",
    "sample",
    "save_field",
    "shift",
    "CANONICAL",
    "DoGParams",
    "constants",
    "dog_eval",
    "kernel_field",
    "omega_hat",
    "ResponseKind",
    "f_eval",
    "f_prime",
    "parse_response",
    "integrate",
    "linearized_response",
    "stationary_state",
    "K_series_eval",
    "b_heaviside_eval",
    "locate_zeros",
    "poles_and_residues",
    "BinaryPattern",
    "GroupElement",
    "Stimulus",
    "act",
    "binarize",
    "generate",
    "warp_to_retina",
    "ControlProblem",
    "linear_control",
    "small_time_control",
    "two_phase_control",
]

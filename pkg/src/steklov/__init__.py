"""Steklov sampling operators, kernel certification and Orlicz-space convergence."""

from ._accel import BACKEND
from .errors import (ConfigError, InputError, MembershipError, NumericalError,
                     QuadratureError, SteklovError)
from .kernels import REGISTERED, certify_kernel, eval_kernel, get_kernel, kernel_fourier
from .orlicz import (check_modular_inequality, find_modular_lambda, luxemburg_norm, modular,
                     parse_phi, phi_eval)
from .sampling import (KantorovichOperator, SteklovOperator, SteklovParams, compute_coefficients,
                       kantorovich_eval, operator_eval, steklov_mean)
from .signals import CATALOG, load_csv_signal, make_signal, signal_eval

__version__ = "0.1.0"

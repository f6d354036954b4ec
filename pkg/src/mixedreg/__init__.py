"""Mixed linear regression with two components: spectral initialization,
alternating minimization, and numerical checks."""

from .errors import (ConvergenceError, DegenerateEventError, InvalidInputError, MixedRegError,
                     NumericInconsistencyError)
from .estimator import (EmTrace, EstimatePair, LabelAssignment, assign_labels, em_step,
                        error_metric, exact_recovery, loss, run_em)
from .initializer import (GridConfig, InitResult, MomentSpectrum, default_delta, grid_init,
                          moment_matrix, proportion_init, random_init)
from .kernels import BACKEND
from .model import (MixtureModel, Observations, SampleSet, derive_seeds, generate, make_model,
                    split)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "ConvergenceError", "DegenerateEventError", "EmTrace", "EstimatePair",
    "GridConfig", "InitResult", "InvalidInputError", "LabelAssignment", "MixedRegError",
    "MixtureModel", "MomentSpectrum", "NumericInconsistencyError", "Observations", "SampleSet",
    "assign_labels", "default_delta", "derive_seeds", "em_step", "error_metric",
    "exact_recovery", "generate", "grid_init", "loss", "make_model", "moment_matrix",
    "proportion_init", "random_init", "run_em", "split",
]

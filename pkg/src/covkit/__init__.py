"""Pointing-error covariances of linear systems driven by white noise.

For a stable system ``x' = A x + B u``, ``p = C x`` and an exposure window
of length ``T`` the package computes the covariance of the pointing error
(accuracy), of its window mean (displacement), of its fitted window slope
(smear) and of what remains (jitter).
"""

from .errors import (
    ConsistencyError,
    ConvergenceError,
    CovkitError,
    FeedthroughError,
    InputError,
    ModelParseError,
    NumericRangeError,
    ShapeError,
    SingularityError,
    SolvabilityError,
    StabilityError,
    WellPosednessError,
)
from .linalg import expm, solve_lyapunov
from .metrics import (
    ExposureConfig,
    PointingCovariances,
    displacement_covariance_fast,
    exposure_sweep,
    first_order_closed_form,
    pointing_covariances,
)
from .modelio import dump_model, load_model
from .ss import (
    StateSpaceModel,
    feedback,
    freq_response,
    mimo_from_blocks,
    second_order_siso,
    series,
)

__version__ = "0.1.0"

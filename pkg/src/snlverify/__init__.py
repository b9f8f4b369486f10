"""Construct strongest-nonlocal orthogonal state sets and certify them two ways."""

from .constructions import (
    FamilyTag, StateSet, build, build_example1, build_theorem1, build_theorem2, build_theorem3,
    build_theorem4, custom_set, lower_bound, product_basis, stopper_state,
)
from .errors import (
    HypothesisNotEstablished, IndexOutOfRange, SizeLimitExceeded, ValidationError,
)
from .replay import Mode, ReplayVerdict, overall, replay, replay_strongest
from .tensor import Dims, ExactScalar, Ket, MeasuredSet, reshape, schmidt_rank
from .verifier import Verdict, check_single_party, check_triviality, verify_strongest

__version__ = "0.1.0"

__all__ = [
    "FamilyTag", "StateSet", "build", "build_example1", "build_theorem1", "build_theorem2",
    "build_theorem3", "build_theorem4", "custom_set", "lower_bound", "product_basis",
    "stopper_state", "HypothesisNotEstablished", "IndexOutOfRange", "SizeLimitExceeded",
    "ValidationError", "Mode", "ReplayVerdict", "overall", "replay", "replay_strongest", "Dims",
    "ExactScalar", "Ket", "MeasuredSet", "reshape", "schmidt_rank", "Verdict",
    "check_single_party", "check_triviality", "verify_strongest",
]

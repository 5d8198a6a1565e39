"""Divisibility analysis of finite-dimensional quantum channels."""

from .channel import (
    DEFAULT_TOL,
    Channel,
    ChoiState,
    KrausRep,
    LinearMap,
    Tolerances,
    TransferMatrix,
    build_channel,
    build_map,
    compose,
    convert,
    depolarizing_channel,
    determinant,
    distance,
    dual,
    identity_channel,
    minimal_determinant_channel,
    purity_and_bounds,
    transposition_channel,
    unitary_channel,
    validate,
)
from .errors import (
    ChannelError,
    DegenerateClass,
    DimensionMismatch,
    InvalidGenerator,
    InvalidInput,
    NegativeChoi,
    NonConvergence,
    NotHermitian,
    NotInfinitesimalDivisible,
    NotPSD,
    NotTracePreserving,
    NumericalFailure,
    OutOfRange,
    ParseError,
    SchemaError,
    UnknownSuite,
    WrongDimension,
    WrongRank,
)
from .markov import (
    GKSForm,
    LindbladGenerator,
    exp_generator,
    gks_projection,
    make_generator,
    markov_approx,
    optimal_unitary,
    time_ordered_exp,
    validate_generator,
)
from .qubit import (
    amplitude_damping,
    class1_channel,
    class2_channel,
    class3_channel,
    classify,
    lorentz_normal_form,
    markov_product_approx,
    pauli_transfer,
    rank_two_normal_form,
    unital_channel,
)
from .sampling import (
    SampleSpec,
    random_channel,
    random_generator,
    random_unitary,
    run_property_suite,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_TOL",
    "Channel",
    "ChoiState",
    "KrausRep",
    "LinearMap",
    "Tolerances",
    "TransferMatrix",
    "build_channel",
    "build_map",
    "compose",
    "convert",
    "depolarizing_channel",
    "determinant",
    "distance",
    "dual",
    "identity_channel",
    "minimal_determinant_channel",
    "purity_and_bounds",
    "transposition_channel",
    "unitary_channel",
    "validate",
    "ChannelError",
    "DegenerateClass",
    "DimensionMismatch",
    "InvalidGenerator",
    "InvalidInput",
    "NegativeChoi",
    "NonConvergence",
    "NotHermitian",
    "NotInfinitesimalDivisible",
    "NotPSD",
    "NotTracePreserving",
    "NumericalFailure",
    "OutOfRange",
    "ParseError",
    "SchemaError",
    "UnknownSuite",
    "WrongDimension",
    "WrongRank",
    "GKSForm",
    "LindbladGenerator",
    "exp_generator",
    "gks_projection",
    "make_generator",
    "markov_approx",
    "optimal_unitary",
    "time_ordered_exp",
    "validate_generator",
    "amplitude_damping",
    "class1_channel",
    "class2_channel",
    "class3_channel",
    "classify",
    "lorentz_normal_form",
    "markov_product_approx",
    "pauli_transfer",
    "rank_two_normal_form",
    "unital_channel",
    "SampleSpec",
    "random_channel",
    "random_generator",
    "random_unitary",
    "run_property_suite",
]

"""Irreducibility analysis of finite-dimensional Lindblad dynamics."""

__version__ = "0.1.0"

from .operator_core import DEFAULT_TOL, OperatorSubspace, ToleranceConfig
from .liouvillian import (
    LindbladSystem,
    SteadyStateError,
    Superoperator,
    adjoint_superoperator,
    build_superoperator,
    compute_K,
    spectrum,
    steady_states,
)
from .algebra import commutant, generate_algebra, is_self_adjoint_span
from .irreducibility import (
    CheckerDisagreement,
    EvansVerdict,
    NoWitnessFound,
    Verdict,
    analyze,
    check_davies_algebra,
    check_davies_steady,
    check_evans,
    find_dark_states,
    find_reducing_projection,
    verify_reducing_projection,
)
from .channel_markov import (
    channel_from_liouvillian,
    choi_matrix,
    classical_transition_matrix,
    is_irreducible_markov,
    kraus_from_choi,
)
from .models import preset, preset_names

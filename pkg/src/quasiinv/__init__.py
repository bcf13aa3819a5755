"""Average fidelity and optimal unitary correction ("quasi-inverse") of qubit channels."""

from .batch import BatchResult, quasi_inverse_batch
from .channel import (
    AffineMap,
    QubitChannel,
    affine_closed_form,
    affine_of,
    choi_of,
    compose,
    conjugate,
    from_kraus,
    identity_channel,
    is_completely_positive,
    make_amplitude_damping,
    make_diagonal,
    make_mixed_rotation,
    make_pauli,
    make_tetrahedron,
    make_tetrahedron_pair,
    make_unitary,
    mixture,
    split_affine,
)
from .eigen import jacobi_eigh, sym_eigen4
from .errors import (
    ChannelValidationError,
    InconsistencyError,
    InvalidInputError,
    NotCompletelyPositiveError,
    TracePreservationError,
)
from .fidelity import avg_fidelity, b_matrix, composed_avg_fidelity, fidelity_formulas, mc_avg_fidelity
from .pauli import (
    PauliForm,
    UnitaryRotation,
    pauli_compose,
    pauli_decompose,
    rotation_of_unitary,
    unitary_from_axis_angle,
)
from .quasi_inverse import (
    QForm,
    QuasiInverseResult,
    brute_force_best_unitary,
    geometric_quasi_inverse,
    q_form,
    quasi_inverse,
)
from .specs import SpecError, parse_channel_spec

__version__ = "0.1.0"

"""Quantum hash functions over finite abelian groups, simulated exactly."""

__version__ = "0.1.0"

from .errors import CapacityError, DomainError, ParseError, QHashError, StructuralError
from .groups import (
    Automorphism,
    GroupElement,
    GroupSpec,
    apply_automorphism,
    compose,
    decompose_modulus,
    enumerate_elements,
    identity,
    inverse,
    unit_group,
)
from .unitary import amplitude, rep_matrix, rotation_matrix
from .hashing import (
    HashParams,
    HashState,
    build_state,
    classical_hash,
    collision_resistance,
    concat_state,
    invert_state,
    overlap_sq,
)
from .goodset import (
    BiasReport,
    GoodSetReport,
    SamplerConfig,
    bias_report,
    exhaustive_min_goodset,
    monte_carlo_bad_rate,
    required_size,
    sample_key,
    verify_good,
)

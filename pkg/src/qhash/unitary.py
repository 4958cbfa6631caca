"""Rotation representation of Z_q1 x ... x Z_qm on m qubits.

Residue g of Z_q acts on one qubit as the plane rotation by 2*pi*g/q.
A product group acts through the Kronecker product of the component
rotations, with component 0 as the most significant tensor factor.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import CapacityError, DomainError, StructuralError
from .groups import GroupElement, GroupSpec

DIM_GUARD = 4096


def _cos_sin(g: int, q: int) -> tuple[float, float]:
    """cos and sin of 2*pi*g/q, evaluated at min(g, q-g) so that g and -g agree exactly."""
    g %= q
    if 2 * g > q:
        c, s = _cos_sin(q - g, q)
        return c, -s
    a = 2.0 * math.pi * g / q
    return math.cos(a), math.sin(a)


def rotation_matrix(g: int, q: int) -> np.ndarray:
    if q < 2:
        raise DomainError(f"modulus must be >= 2, got {q}")
    if not 0 <= g < q:
        raise DomainError(f"residue {g} not in [0, {q})")
    c, s = _cos_sin(g, q)
    return np.array([[c, -s], [s, c]], dtype=complex)


def check_dimension(spec: GroupSpec) -> int:
    dim = 2**spec.component_count
    if dim > DIM_GUARD:
        raise CapacityError(f"Hilbert space dimension {dim} exceeds guard {DIM_GUARD}")
    return dim


def rep_matrix(spec: GroupSpec, g: GroupElement) -> np.ndarray:
    """Dense ``2^m x 2^m`` matrix of the representation at ``g``."""
    spec.check_element(g)
    check_dimension(spec)
    out = np.ones((1, 1), dtype=complex)
    for r, q in zip(g.residues, spec.moduli):
        out = np.kron(out, rotation_matrix(r, q))
    return out


def amplitude(spec: GroupSpec, g: GroupElement) -> float:
    """``<0...0| rep(g) |0...0>``, a product of cosines."""
    spec.check_element(g)
    value = 1.0
    for r, q in zip(g.residues, spec.moduli):
        value *= _cos_sin(r, q)[0]
    return value


def apply_rep(spec: GroupSpec, g: GroupElement, vec: np.ndarray) -> np.ndarray:
    """Compute ``rep(g) @ vec`` one qubit at a time without forming rep(g)."""
    spec.check_element(g)
    dim = check_dimension(spec)
    vec = np.asarray(vec, dtype=complex)
    if vec.shape != (dim,):
        raise StructuralError(f"vector of shape {vec.shape} does not act on dimension {dim}")
    m = spec.component_count
    psi = vec.reshape((2,) * m)
    for axis, (r, q) in enumerate(zip(g.residues, spec.moduli)):
        if r == 0:
            continue
        psi = np.tensordot(rotation_matrix(r, q), psi, axes=([1], [axis]))
        psi = np.moveaxis(psi, 0, axis)
    return psi.reshape(dim)


def ground_column(spec: GroupSpec, g: GroupElement) -> np.ndarray:
    """``rep(g) |0...0>``: Kronecker product of the (cos, sin) columns."""
    spec.check_element(g)
    check_dimension(spec)
    out = np.ones(1, dtype=complex)
    for r, q in zip(g.residues, spec.moduli):
        out = np.kron(out, np.array(_cos_sin(r, q), dtype=complex))
    return out


def cosine_tables(spec: GroupSpec) -> list[np.ndarray]:
    """Per component, ``cos(2*pi*r/q)`` for every residue r.

    The vectorized kernels index into these tables so that every exhaustive
    scan reads identical floating-point values.
    """
    return [np.array([_cos_sin(r, q)[0] for r in range(q)]) for q in spec.moduli]


def is_unitary(u: np.ndarray, tol: float = 1e-12) -> bool:
    u = np.asarray(u)
    eye = np.eye(u.shape[0])
    return bool(np.max(np.abs(u.conj().T @ u - eye)) <= tol)

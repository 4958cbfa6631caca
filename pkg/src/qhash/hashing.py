"""Quantum hash states over a finite abelian group.

For a key ``K = (k_0, ..., k_{t-1})`` of automorphisms and a group element
``g = h(x)`` the hash state is

    |Psi(g)> = t^{-1/2} * sum_j |j> (x) rep(k_j{g}) |psi_0>

stored branch-major as a complex vector of length ``t * 2^m``.  Because the
representation is a homomorphism, the squared overlap of two states only
depends on ``inverse(h(x)) ∘ h(y)``, which is what :func:`overlap_sq`
evaluates without building any vectors.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import CapacityError, DomainError, ParseError, StructuralError
from .groups import (
    Automorphism,
    GroupElement,
    GroupSpec,
    apply_automorphism,
    compose,
    enumeration_guard,
    inverse,
)
from .unitary import apply_rep, check_dimension, cosine_tables, ground_column

CHUNK = 1 << 15


@dataclass(frozen=True)
class HashParams:
    spec: GroupSpec
    key: tuple[Automorphism, ...]
    epsilon: float = 1.0

    def __post_init__(self) -> None:
        key = tuple(self.key)
        if not key:
            raise StructuralError("key must contain at least one automorphism")
        # re-validate: bare Automorphism() skips the unit check
        key = tuple(self.spec.automorphism(k.multipliers) for k in key)
        object.__setattr__(self, "key", key)
        if not 0.0 < self.epsilon <= 1.0:
            raise DomainError(f"epsilon must lie in (0, 1], got {self.epsilon}")

    @property
    def t(self) -> int:
        return len(self.key)

    @property
    def m(self) -> int:
        return self.spec.component_count

    def key_array(self) -> np.ndarray:
        return np.array([k.multipliers for k in self.key], dtype=np.int64)


@dataclass(frozen=True)
class HashState:
    amplitudes: np.ndarray = field(repr=False)
    t: int
    m: int

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.t * 2**self.m,):
            raise StructuralError(
                f"state of shape {amps.shape} does not match t={self.t}, m={self.m}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > 1e-12:
            raise DomainError(f"state norm {norm!r} differs from 1")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def branch(self, j: int) -> np.ndarray:
        d = 2**self.m
        return self.amplitudes[j * d : (j + 1) * d]

    def inner(self, other: HashState) -> complex:
        if self.amplitudes.shape != other.amplitudes.shape:
            raise StructuralError("states live in different spaces")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def allclose(self, other: HashState, tol: float = 1e-12) -> bool:
        if self.amplitudes.shape != other.amplitudes.shape:
            return False
        return bool(np.max(np.abs(self.amplitudes - other.amplitudes)) <= tol)


def check_message(bits: str) -> str:
    if any(c not in "01" for c in bits):
        raise ParseError(f"message must be a binary string, got {bits!r}")
    return bits


def classical_hash(spec: GroupSpec, bits: str) -> GroupElement:
    """Big-endian value of ``bits`` reduced into every component."""
    check_message(bits)
    value = int(bits, 2) if bits else 0
    return spec.element(value % q for q in spec.moduli)


def shift_compose(spec: GroupSpec, h_u: GroupElement, v: str) -> GroupElement:
    """``h(u + v)`` from ``h(u)`` and the suffix: ``2^|v| * h(u) ∘ h(v)``."""
    check_message(v)
    shifted = GroupElement(
        tuple((r * pow(2, len(v), q)) % q for r, q in zip(h_u.residues, spec.moduli))
    )
    return compose(spec, shifted, classical_hash(spec, v))


def build_state(
    params: HashParams,
    g: GroupElement,
    initial: HashState | np.ndarray | None = None,
) -> HashState:
    spec, t, m = params.spec, params.t, params.m
    spec.check_element(g)
    d = check_dimension(spec)
    out = np.empty(t * d, dtype=complex)
    norm = 1.0 / math.sqrt(t)
    if initial is None:
        for j, k in enumerate(params.key):
            out[j * d : (j + 1) * d] = norm * ground_column(spec, apply_automorphism(spec, k, g))
    else:
        seed = initial.amplitudes if isinstance(initial, HashState) else np.asarray(initial, dtype=complex)
        if seed.shape != (t * d,):
            raise StructuralError(f"branch seed of shape {seed.shape}, expected ({t * d},)")
        root_t = math.sqrt(t)
        for j, k in enumerate(params.key):
            psi_j = root_t * seed[j * d : (j + 1) * d]
            out[j * d : (j + 1) * d] = norm * apply_rep(spec, apply_automorphism(spec, k, g), psi_j)
    return HashState(out, t, m)


def hash_state(params: HashParams, bits: str) -> HashState:
    return build_state(params, classical_hash(params.spec, bits))


def element_block(spec: GroupSpec, start: int, stop: int) -> np.ndarray:
    """Residue rows for lexicographic element indices ``start <= i < stop``."""
    idx = np.arange(start, stop, dtype=np.int64)
    out = np.empty((idx.size, spec.component_count), dtype=np.int64)
    for col in range(spec.component_count - 1, -1, -1):
        q = spec.moduli[col]
        out[:, col] = idx % q
        idx //= q
    return out


def mean_amplitudes(
    spec: GroupSpec,
    multipliers: np.ndarray,
    elements: np.ndarray,
    tables: Sequence[np.ndarray] | None = None,
) -> np.ndarray:
    """``(1/t) * sum_j <0|rep(k_j{g})|0>`` for every row g of ``elements``.

    Rows of ``multipliers`` are the automorphisms k_j.  Terms are added in key
    order with compensated summation, so the value for an element does not
    depend on which block it was evaluated in.
    """
    if tables is None:
        tables = cosine_tables(spec)
    moduli = np.array(spec.moduli, dtype=np.int64)
    n = elements.shape[0]
    total = np.zeros(n)
    comp = np.zeros(n)
    for u in multipliers:
        images = (elements * u) % moduli
        term = tables[0][images[:, 0]]
        for col in range(1, len(tables)):
            term = term * tables[col][images[:, col]]
        y = term - comp
        acc = total + y
        comp = (acc - total) - y
        total = acc
    return total / multipliers.shape[0]


def overlap_sq(params: HashParams, x: str, y: str) -> float:
    """Squared overlap of the hash states of ``x`` and ``y`` in closed form."""
    spec = params.spec
    hx, hy = classical_hash(spec, x), classical_hash(spec, y)
    if hx == hy:
        return 1.0
    diff = compose(spec, inverse(spec, hx), hy)
    mean = mean_amplitudes(spec, params.key_array(), np.array([diff.residues], dtype=np.int64))[0]
    return float(mean * mean)


def state_overlap_sq(a: HashState, b: HashState) -> float:
    return abs(a.inner(b)) ** 2


def concat_state(params: HashParams, u: str, v: str) -> HashState:
    """Hash of ``u + v`` obtained by continuing from the hash state of ``u``."""
    spec = params.spec
    h_u = classical_hash(spec, u)
    prefix = build_state(params, h_u)
    step = compose(spec, inverse(spec, h_u), shift_compose(spec, h_u, v))
    return build_state(params, step, initial=prefix)


def invert_state(params: HashParams, state: HashState, g: GroupElement) -> HashState:
    """Undo ``g`` branch-wise: apply ``rep(k_j{g^-1})`` to every branch."""
    if state.t != params.t or state.m != params.m:
        raise StructuralError(
            f"state has t={state.t}, m={state.m}; params expect t={params.t}, m={params.m}"
        )
    return build_state(params, inverse(params.spec, g), initial=state)


def _block_max(spec, multipliers, tables, start, stop):
    vals = mean_amplitudes(spec, multipliers, element_block(spec, start, stop), tables)
    sq = vals * vals
    if start == 0:
        sq[0] = -np.inf
    i = int(np.argmax(sq))
    return float(sq[i]), start + i


def scan_worst(
    spec: GroupSpec,
    multipliers: np.ndarray,
    threads: int = 1,
    guard: int | None = None,
) -> tuple[float, int]:
    """Max over non-identity g of the squared mean amplitude, with its index.

    Ties go to the smallest lexicographic index regardless of how the scan
    is split across threads.
    """
    limit = enumeration_guard(guard)
    n = spec.order
    if n > limit:
        raise CapacityError(f"|G| = {n} exceeds enumeration guard {limit}")
    tables = cosine_tables(spec)
    bounds = [(s, min(s + CHUNK, n)) for s in range(0, n, CHUNK)]
    if threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda b: _block_max(spec, multipliers, tables, *b), bounds))
    else:
        parts = [_block_max(spec, multipliers, tables, *b) for b in bounds]
    best = max(v for v, _ in parts)
    return best, min(i for v, i in parts if v == best)


def collision_resistance(
    params: HashParams, threads: int = 1, guard: int | None = None
) -> tuple[float, GroupElement]:
    """Worst squared overlap ``delta`` over all g != e and the element attaining it."""
    spec = params.spec
    delta, index = scan_worst(spec, params.key_array(), threads=threads, guard=guard)
    worst = spec.element(element_block(spec, index, index + 1)[0].tolist())
    return delta, worst


def is_good(params: HashParams, **kwargs) -> bool:
    delta, _ = collision_resistance(params, **kwargs)
    return delta < params.epsilon


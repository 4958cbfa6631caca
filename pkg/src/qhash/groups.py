"""Finite abelian groups as products of cyclic groups Z_q1 x ... x Z_qm.

Elements are residue vectors, the operation is component-wise addition,
and the automorphisms considered here are component-wise multiplication by
units, which is the product construction used for hash keys.
"""

from __future__ import annotations

import itertools
import math
import os
import re
from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import CapacityError, DomainError, ParseError, StructuralError

DEFAULT_GUARD = 10**7

_GROUP_RE = re.compile(r"^\s*\d+(\s*x\s*\d+)*\s*$")


def enumeration_guard(guard: int | None = None) -> int:
    """Return the active enumeration limit.

    An explicit ``guard`` wins, then the ``QHASH_GUARD`` environment
    variable, then :data:`DEFAULT_GUARD`.
    """
    if guard is not None:
        return int(guard)
    env = os.environ.get("QHASH_GUARD")
    if env:
        try:
            return int(env)
        except ValueError:
            raise ParseError(f"QHASH_GUARD must be an integer, got {env!r}") from None
    return DEFAULT_GUARD


@dataclass(frozen=True, order=True)
class GroupElement:
    residues: tuple[int, ...]

    def __iter__(self) -> Iterator[int]:
        return iter(self.residues)

    def __len__(self) -> int:
        return len(self.residues)

    def __str__(self) -> str:
        return "(" + ",".join(map(str, self.residues)) + ")"


@dataclass(frozen=True)
class Automorphism:
    """Component-wise multiplication ``g_i -> u_i * g_i mod q_i``.

    Build instances through :meth:`GroupSpec.automorphism`, which checks
    that every multiplier is a unit; the bare constructor does not.
    """

    multipliers: tuple[int, ...]

    def __str__(self) -> str:
        return "x".join(map(str, self.multipliers))


@dataclass(frozen=True)
class GroupSpec:
    moduli: tuple[int, ...]

    def __post_init__(self) -> None:
        moduli = tuple(int(q) for q in self.moduli)
        if not moduli:
            raise StructuralError("a group needs at least one cyclic component")
        for q in moduli:
            if q < 2:
                raise DomainError(f"cyclic modulus must be >= 2, got {q}")
        object.__setattr__(self, "moduli", moduli)

    @classmethod
    def parse(cls, text: str) -> GroupSpec:
        """Parse ``"4x3x5"`` style group strings."""
        if not isinstance(text, str) or not _GROUP_RE.match(text):
            raise ParseError(f"malformed group string {text!r}; expected e.g. '4x3x5'")
        moduli = tuple(int(part) for part in text.split("x"))
        try:
            return cls(moduli)
        except DomainError as exc:
            raise ParseError(str(exc)) from None

    @property
    def order(self) -> int:
        return math.prod(self.moduli)

    @property
    def component_count(self) -> int:
        return len(self.moduli)

    def __str__(self) -> str:
        return "x".join(map(str, self.moduli))

    def element(self, residues: Iterable[int] | int) -> GroupElement:
        """Make an element, reducing each residue modulo its component."""
        if isinstance(residues, int):
            residues = (residues,)
        residues = tuple(int(r) for r in residues)
        if len(residues) != len(self.moduli):
            raise StructuralError(
                f"element has {len(residues)} residues, group {self} has "
                f"{len(self.moduli)} components"
            )
        return GroupElement(tuple(r % q for r, q in zip(residues, self.moduli)))

    def automorphism(self, multipliers: Iterable[int] | int) -> Automorphism:
        if isinstance(multipliers, int):
            multipliers = (multipliers,)
        multipliers = tuple(int(u) for u in multipliers)
        if len(multipliers) != len(self.moduli):
            raise StructuralError(
                f"automorphism has {len(multipliers)} multipliers, group {self} has "
                f"{len(self.moduli)} components"
            )
        for u, q in zip(multipliers, self.moduli):
            if not 1 <= u < q or math.gcd(u, q) != 1:
                raise DomainError(f"multiplier {u} is not a unit modulo {q}")
        return Automorphism(multipliers)

    def check_element(self, g: GroupElement) -> None:
        if len(g.residues) != len(self.moduli):
            raise StructuralError(
                f"element {g} does not have {len(self.moduli)} components"
            )
        for r, q in zip(g.residues, self.moduli):
            if not 0 <= r < q:
                raise StructuralError(f"residue {r} not reduced modulo {q}")

    def check_automorphism(self, k: Automorphism) -> None:
        if len(k.multipliers) != len(self.moduli):
            raise StructuralError(
                f"automorphism {k} does not have {len(self.moduli)} components"
            )


def identity(spec: GroupSpec) -> GroupElement:
    return GroupElement((0,) * spec.component_count)


def compose(spec: GroupSpec, a: GroupElement, b: GroupElement) -> GroupElement:
    spec.check_element(a)
    spec.check_element(b)
    return GroupElement(
        tuple((x + y) % q for x, y, q in zip(a.residues, b.residues, spec.moduli))
    )


def inverse(spec: GroupSpec, a: GroupElement) -> GroupElement:
    spec.check_element(a)
    return GroupElement(tuple((-x) % q for x, q in zip(a.residues, spec.moduli)))


def scale(spec: GroupSpec, a: GroupElement, n: int) -> GroupElement:
    """The n-fold power ``a ∘ a ∘ ... ∘ a`` (negative n allowed)."""
    spec.check_element(a)
    return GroupElement(tuple((x * n) % q for x, q in zip(a.residues, spec.moduli)))


def apply_automorphism(spec: GroupSpec, k: Automorphism, g: GroupElement) -> GroupElement:
    spec.check_automorphism(k)
    spec.check_element(g)
    return GroupElement(
        tuple((u * x) % q for u, x, q in zip(k.multipliers, g.residues, spec.moduli))
    )


def units(q: int) -> list[int]:
    """Unit residues of Z_q in increasing order."""
    if q < 2:
        raise DomainError(f"modulus must be >= 2, got {q}")
    return [u for u in range(1, q) if math.gcd(u, q) == 1]


def unit_group(spec: GroupSpec, guard: int | None = None) -> list[Automorphism]:
    """All component-wise unit automorphisms, in lexicographic order."""
    per_component = [units(q) for q in spec.moduli]
    size = math.prod(len(u) for u in per_component)
    limit = enumeration_guard(guard)
    if size > limit:
        raise CapacityError(f"unit group of {spec} has {size} elements > guard {limit}")
    return [Automorphism(tuple(m)) for m in itertools.product(*per_component)]


def enumerate_elements(spec: GroupSpec, guard: int | None = None) -> Iterator[GroupElement]:
    """Yield every element once, identity first, lexicographic residue order."""
    limit = enumeration_guard(guard)
    if spec.order > limit:
        raise CapacityError(f"|G| = {spec.order} exceeds enumeration guard {limit}")
    # product() over ranges is already lexicographic with the identity first
    return map(GroupElement, itertools.product(*(range(q) for q in spec.moduli)))


def decompose_modulus(n: int) -> list[int]:
    """Split Z_n into its prime-power cyclic factors (sorted ascending).

    >>> decompose_modulus(60)
    [3, 4, 5]
    """
    if n < 2:
        raise DomainError(f"n must be >= 2, got {n}")
    factors = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            power = 1
            while n % p == 0:
                n //= p
                power *= p
            factors.append(power)
        p += 1 if p == 2 else 2
    if n > 1:
        factors.append(n)
    return sorted(factors)


def cyclic_spec(n: int) -> GroupSpec:
    """Z_n rewritten as a product of prime-power cyclic groups."""
    return GroupSpec(tuple(decompose_modulus(n)))


def crt_split(spec: GroupSpec, value: int, n: int) -> GroupElement:
    """Image of ``value mod n`` under Z_n -> prod Z_{q_i} (moduli must multiply to n)."""
    if spec.order != n:
        raise StructuralError(f"{spec} does not have order {n}")
    return spec.element(value % q for q in spec.moduli)


def parse_element(spec: GroupSpec, text: str) -> GroupElement:
    """Parse an element written like the group string, e.g. ``"1x0x4"``."""
    try:
        residues = [int(part) for part in text.split("x")]
    except ValueError:
        raise ParseError(f"malformed element {text!r}") from None
    try:
        return spec.element(residues)
    except StructuralError as exc:
        raise ParseError(str(exc)) from None


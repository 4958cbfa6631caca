"""Random key sets, epsilon-good verification and the Azuma size bound.

A key ``K`` is epsilon-good when every non-identity element g satisfies
``((1/|K|) * sum_k <0|rep(k{g})|0>)^2 < epsilon``.  Drawing ``|K|`` keys
i.i.d. from a pool whose mean amplitude vanishes makes the partial sums a
bounded-increment martingale, so Azuma gives, for one fixed g,

    P(bad) <= 2 * exp(-epsilon * |K| / 2).
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import CapacityError, DomainError, StructuralError
from .groups import (
    Automorphism,
    GroupElement,
    GroupSpec,
    enumeration_guard,
    identity,
    unit_group,
)
from .hashing import (
    HashParams,
    collision_resistance,
    element_block,
    mean_amplitudes,
    scan_worst,
)
from .unitary import cosine_tables

MIN_MC_TRIALS = 100
ZERO_BIAS_TOL = 1e-9


def _check_epsilon(epsilon: float) -> None:
    if not 0.0 < epsilon <= 1.0:
        raise DomainError(f"epsilon must lie in (0, 1], got {epsilon}")


def _check_seed(seed: int) -> None:
    if not 0 <= seed < 2**64:
        raise DomainError(f"seed must be an unsigned 64-bit integer, got {seed}")


def required_size(epsilon: float, group_order: int, union_bound: bool = False) -> int:
    """Key size from the Azuma argument.

    ``union_bound=False`` gives ``ceil((2/eps) ln|G|)``.  ``union_bound=True``
    gives ``ceil((2/eps) ln(2(|G|-1)))``, the size at which the per-element
    failure bound summed over all non-identity elements reaches 1.
    """
    _check_epsilon(epsilon)
    if group_order < 2:
        raise DomainError(f"group order must be >= 2, got {group_order}")
    arg = 2 * (group_order - 1) if union_bound else group_order
    return math.ceil(2.0 / epsilon * math.log(arg))


def azuma_bound(epsilon: float, t: int) -> float:
    return 2.0 * math.exp(-epsilon * t / 2.0)


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent generator for trial ``trial`` derived from the master seed."""
    _check_seed(seed)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(trial,))))


@dataclass(frozen=True)
class SamplerConfig:
    spec: GroupSpec
    set_size: int
    epsilon: float
    seed: int = 0
    trials: int = 1
    pool: tuple[Automorphism, ...] | None = None

    def __post_init__(self) -> None:
        if self.set_size < 1:
            raise DomainError(f"set_size must be >= 1, got {self.set_size}")
        if self.trials < 1:
            raise DomainError(f"trials must be >= 1, got {self.trials}")
        _check_epsilon(self.epsilon)
        _check_seed(self.seed)
        if self.pool is None:
            object.__setattr__(self, "pool", tuple(unit_group(self.spec)))
        else:
            pool = tuple(self.spec.automorphism(k.multipliers) for k in self.pool)
            if not pool:
                raise StructuralError("sampling pool is empty")
            object.__setattr__(self, "pool", pool)

    def pool_array(self) -> np.ndarray:
        return np.array([k.multipliers for k in self.pool], dtype=np.int64)


def _draw(config: SamplerConfig, trial: int) -> np.ndarray:
    return trial_rng(config.seed, trial).integers(len(config.pool), size=config.set_size)


def sample_key(config: SamplerConfig, trial: int = 0) -> list[Automorphism]:
    """``set_size`` uniform draws from the pool, with replacement."""
    return [config.pool[i] for i in _draw(config, trial)]


@dataclass(frozen=True)
class GoodSetReport:
    is_good: bool
    delta: float
    worst: GroupElement
    set_size: int
    epsilon: float
    martingale_bound: float
    seed: int | None = None

    def to_dict(self) -> dict:
        return {
            "is_good": self.is_good,
            "delta": self.delta,
            "worst": list(self.worst.residues),
            "set_size": self.set_size,
            "epsilon": self.epsilon,
            "martingale_bound": self.martingale_bound,
            "seed": self.seed,
        }


def verify_good(
    spec: GroupSpec,
    key: Sequence[Automorphism],
    epsilon: float,
    seed: int | None = None,
    threads: int = 1,
    guard: int | None = None,
) -> GoodSetReport:
    params = HashParams(spec, tuple(key), epsilon)
    delta, worst = collision_resistance(params, threads=threads, guard=guard)
    return GoodSetReport(
        is_good=delta < epsilon,
        delta=delta,
        worst=worst,
        set_size=params.t,
        epsilon=epsilon,
        martingale_bound=azuma_bound(epsilon, params.t),
        seed=seed,
    )


@dataclass(frozen=True)
class BiasReport:
    """Mean amplitude over the pool for each non-identity element.

    Values are kept as arrays in enumeration order; ``per_element_bias``
    builds the mapping on demand.
    """

    elements: np.ndarray = field(repr=False)
    biases: np.ndarray = field(repr=False)
    max_abs_bias: float
    claimed_zero: bool

    @property
    def per_element_bias(self) -> dict[GroupElement, float]:
        return {
            GroupElement(tuple(int(r) for r in row)): float(b)
            for row, b in zip(self.elements, self.biases)
        }


def scaling_pool(spec: GroupSpec, guard: int | None = None) -> list[Automorphism]:
    """Every multiplier vector, units or not.  Only meaningful for diagnostics."""
    limit = enumeration_guard(guard)
    if spec.order > limit:
        raise CapacityError(f"scaling pool of size {spec.order} exceeds guard {limit}")
    return [Automorphism(m) for m in itertools.product(*(range(q) for q in spec.moduli))]


def bias_report(
    spec: GroupSpec,
    pool: Sequence[Automorphism] | None = None,
    diagnostic: bool = False,
    guard: int | None = None,
) -> BiasReport:
    """Mean of ``<0|rep(k{g})|0>`` over the pool, for every g != e.

    With ``diagnostic=True`` the pool may contain non-invertible scalings
    (see :func:`scaling_pool`).
    """
    if pool is None:
        pool = unit_group(spec, guard=guard)
    pool = list(pool)
    if not pool:
        raise StructuralError("pool is empty")
    if not diagnostic:
        pool = [spec.automorphism(k.multipliers) for k in pool]
    else:
        for k in pool:
            spec.check_automorphism(k)
    limit = enumeration_guard(guard)
    if spec.order > limit or len(pool) > limit:
        raise CapacityError(f"bias scan over |G|={spec.order}, |pool|={len(pool)} exceeds guard {limit}")
    elements = element_block(spec, 1, spec.order)
    multipliers = np.array([k.multipliers for k in pool], dtype=np.int64)
    biases = mean_amplitudes(spec, multipliers, elements)
    max_abs = float(np.max(np.abs(biases)))
    return BiasReport(elements, biases, max_abs, max_abs < ZERO_BIAS_TOL)


@dataclass(frozen=True)
class MonteCarloResult:
    rate: float
    bound: float
    stderr: float
    trials: int
    bad: int
    fixed_g: GroupElement | None
    insufficient: bool

    def to_dict(self) -> dict:
        return {
            "rate": self.rate,
            "bound": self.bound,
            "stderr": self.stderr,
            "trials": self.trials,
            "bad": self.bad,
            "fixed_g": None if self.fixed_g is None else list(self.fixed_g.residues),
            "insufficient": self.insufficient,
        }


def _pool_terms(spec: GroupSpec, pool: np.ndarray, g: GroupElement) -> np.ndarray:
    # same table products as hashing.mean_amplitudes, so sums agree bit-for-bit
    tables = cosine_tables(spec)
    images = (pool * np.array(g.residues, dtype=np.int64)) % np.array(spec.moduli, dtype=np.int64)
    term = tables[0][images[:, 0]]
    for col in range(1, len(tables)):
        term = term * tables[col][images[:, col]]
    return term


def _compensated_row_means(values: np.ndarray) -> np.ndarray:
    total = np.zeros(values.shape[0])
    comp = np.zeros(values.shape[0])
    for j in range(values.shape[1]):
        y = values[:, j] - comp
        acc = total + y
        comp = (acc - total) - y
        total = acc
    return total / values.shape[1]


def monte_carlo_bad_rate(
    config: SamplerConfig,
    fixed_g: GroupElement | None = None,
    threads: int = 1,
    guard: int | None = None,
) -> MonteCarloResult:
    """Fraction of sampled keys that fail the epsilon-good test.

    With ``fixed_g`` only that element is tested and the reference bound is
    the per-element Azuma value; otherwise every g != e is tested and the
    bound is the union over the ``|G|-1`` elements, capped at 1.
    """
    if config.trials < MIN_MC_TRIALS:
        raise DomainError(f"Monte Carlo needs at least {MIN_MC_TRIALS} trials, got {config.trials}")
    spec, t, eps = config.spec, config.set_size, config.epsilon
    pool = config.pool_array()
    draws = np.stack([_draw(config, r) for r in range(config.trials)])
    per_g = azuma_bound(eps, t)

    if fixed_g is not None:
        spec.check_element(fixed_g)
        if fixed_g == identity(spec):
            raise DomainError("the identity element is never distinguishable; pick g != e")
        means = _compensated_row_means(_pool_terms(spec, pool, fixed_g)[draws])
        bad = int(np.count_nonzero(means * means >= eps))
        bound = per_g
    else:
        limit = enumeration_guard(guard)
        if spec.order > limit:
            raise CapacityError(f"|G| = {spec.order} exceeds enumeration guard {limit}")

        def trial_delta(row: np.ndarray) -> float:
            return scan_worst(spec, pool[row], guard=guard)[0]

        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as ex:
                deltas = list(ex.map(trial_delta, draws))
        else:
            deltas = [trial_delta(row) for row in draws]
        bad = sum(1 for d in deltas if d >= eps)
        bound = min(1.0, (spec.order - 1) * per_g)

    rate = bad / config.trials
    stderr = math.sqrt(rate * (1.0 - rate) / config.trials)
    return MonteCarloResult(
        rate=rate,
        bound=bound,
        stderr=stderr,
        trials=config.trials,
        bad=bad,
        fixed_g=fixed_g,
        insufficient=config.trials * bound < 5,
    )


def exhaustive_min_goodset(
    spec: GroupSpec,
    epsilon: float,
    max_t: int,
    guard: int | None = None,
) -> tuple[int, list[Automorphism]] | None:
    """Smallest epsilon-good multiset of units, searched size by size.

    Within a size, multisets are visited in lexicographic order of their
    sorted multiplier tuples, and the first good one is returned.
    """
    _check_epsilon(epsilon)
    if max_t < 1:
        raise DomainError(f"max_t must be >= 1, got {max_t}")
    pool = unit_group(spec, guard=guard)
    limit = enumeration_guard(guard)
    if len(pool) ** max_t > limit:
        raise CapacityError(f"|pool|^max_t = {len(pool)}^{max_t} exceeds guard {limit}")
    if len(pool) * (spec.order - 1) > limit:
        raise CapacityError(f"amplitude table {len(pool)} x {spec.order - 1} exceeds guard {limit}")

    multipliers = np.array([k.multipliers for k in pool], dtype=np.int64)
    elements = element_block(spec, 1, spec.order)
    tables = cosine_tables(spec)
    # terms[p, i]: amplitude of pool[p] applied to element i (identity excluded)
    terms = np.stack([mean_amplitudes(spec, multipliers[p : p + 1], elements, tables) for p in range(len(pool))])
    batch = max(1, (1 << 20) // max(1, terms.shape[1]))

    for t in range(1, max_t + 1):
        combos = itertools.combinations_with_replacement(range(len(pool)), t)
        while True:
            chunk = list(itertools.islice(combos, batch))
            if not chunk:
                break
            idx = np.array(chunk, dtype=np.int64)
            total = np.zeros((idx.shape[0], terms.shape[1]))
            comp = np.zeros_like(total)
            for j in range(t):
                y = terms[idx[:, j]] - comp
                acc = total + y
                comp = (acc - total) - y
                total = acc
            means = total / t
            worst = np.max(means * means, axis=1)
            hits = np.flatnonzero(worst < epsilon)
            if hits.size:
                key = [pool[p] for p in idx[hits[0]]]
                return t, key
    return None

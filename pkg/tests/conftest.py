import math

import numpy as np
import pytest
from hypothesis import settings, strategies as st

from qhash.groups import GroupSpec, units

settings.register_profile("default", max_examples=100, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


@st.composite
def specs(draw, max_components=3, max_modulus=12):
    moduli = draw(st.lists(st.integers(2, max_modulus), min_size=1, max_size=max_components))
    return GroupSpec(tuple(moduli))


@st.composite
def spec_and_elements(draw, n=1, **kw):
    spec = draw(specs(**kw))
    elems = [
        spec.element([draw(st.integers(0, q - 1)) for q in spec.moduli]) for _ in range(n)
    ]
    return (spec, *elems)


@st.composite
def spec_key(draw, max_t=8, **kw):
    spec = draw(specs(**kw))
    t = draw(st.integers(1, max_t))
    key = [
        spec.automorphism([draw(st.sampled_from(units(q))) for q in spec.moduli])
        for _ in range(t)
    ]
    return spec, key


def random_spec(rng, max_order=10**4, max_components=6, max_modulus=40):
    while True:
        m = int(rng.integers(1, max_components + 1))
        moduli = tuple(int(q) for q in rng.integers(2, max_modulus + 1, size=m))
        if math.prod(moduli) <= max_order:
            return GroupSpec(moduli)


def random_key(rng, spec, t):
    return [
        spec.automorphism([int(rng.choice(units(q))) for q in spec.moduli]) for _ in range(t)
    ]


def random_bits(rng, max_len=24):
    n = int(rng.integers(0, max_len + 1))
    return "".join(rng.choice(["0", "1"], size=n))


# --- acceptance reporting -------------------------------------------------

_CRITERIA = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _CRITERIA.append((marker.args[0], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label, outcome in _CRITERIA:
        tag = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"[{tag}] {label}")

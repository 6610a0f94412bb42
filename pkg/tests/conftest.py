import itertools

import pytest
from hypothesis import settings

from bandsis.graph import BandSpec

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def band_permutations(spec: BandSpec):
    """Brute-force oracle: all permutations within the band."""
    return [
        p
        for p in itertools.permutations(range(1, spec.n + 1))
        if all(spec.contains(i, v) for i, v in enumerate(p, 1))
    ]


@pytest.fixture
def fig1_matrix():
    return [[1, 1, 0], [0, 1, 1], [1, 1, 1]]


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(RESULTS, key=lambda s: int(s.split()[2])):
            terminalreporter.write_line(line)

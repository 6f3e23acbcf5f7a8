from fractions import Fraction

import numpy as np
import pytest

from ganfinder.grid import Grid


def random_grid(rng: np.random.Generator, h: int, w: int, density: float) -> Grid:
    blocked = rng.random((h, w)) < density
    free = np.argwhere(~blocked)
    if len(free) < 2:
        blocked[:] = False
        free = np.argwhere(~blocked)
    i, j = rng.choice(len(free), size=2, replace=False)
    return Grid(blocked, tuple(free[i]), tuple(free[j]))


def union_find_components(cells, width, height):
    """Reference 8-connected components by pairwise union-find."""
    cells = list(dict.fromkeys(cells))
    parent = {c: c for c in cells}

    def find(c):
        while parent[c] != c:
            parent[c] = parent[parent[c]]
            c = parent[c]
        return c

    for a in cells:
        for b in cells:
            if a != b and max(abs(a[0] - b[0]), abs(a[1] - b[1])) == 1:
                parent[find(a)] = find(b)
    groups = {}
    for c in cells:
        groups.setdefault(find(c), set()).add(c)
    return sorted((frozenset(g) for g in groups.values()), key=lambda s: min(s))


def closest_line(a, b):
    """Reference rasterization: along the major axis pick the integer minor
    coordinate nearest the ideal line, ties toward ``a``."""
    (r0, c0), (r1, c1) = a, b
    n = max(abs(r1 - r0), abs(c1 - c0))
    if n == 0:
        return [a]
    out = []
    steep = abs(r1 - r0) > abs(c1 - c0)
    for t in range(n + 1):
        if steep:
            major = r0 + (t if r1 > r0 else -t)
            ideal = c0 + Fraction(t * (c1 - c0), n)
            start_minor = c0
        else:
            major = c0 + (t if c1 > c0 else -t)
            ideal = r0 + Fraction(t * (r1 - r0), n)
            start_minor = r0
        lo = ideal.numerator // ideal.denominator
        cands = sorted({lo, lo + 1}, key=lambda m: (abs(m - ideal), abs(m - start_minor)))
        m = cands[0]
        out.append((major, m) if steep else (m, major))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])

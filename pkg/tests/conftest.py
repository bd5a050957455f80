import numpy as np
import pytest

from blaschke_lab import parse_function


def random_zeros(rng, n, r_max=0.9, avoid=(), min_sep=0.05):
    """``n`` points in ``|z| < r_max`` with pairwise separation and radii outside ``avoid`` bands."""
    pts = []
    while len(pts) < n:
        z = r_max * np.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform())
        if any(lo <= abs(z) <= hi for lo, hi in avoid):
            continue
        if all(abs(z - p) > min_sep for p in pts):
            pts.append(complex(round(z.real, 6), round(z.imag, 6)))
    return pts


def blaschke_text(zeros):
    return "blaschke(" + "; ".join(f"{z.real!r}{z.imag:+.6f}i" for z in zeros) + ")"


def blaschke_of(zeros):
    return parse_function(blaschke_text(zeros))


def blaschke_modulus(zeros, z):
    """Independent product formula for ``|B(z)|``."""
    z = np.asarray(z, dtype=complex)
    out = np.ones(z.shape)
    for a in zeros:
        out = out * np.abs((a - z) / (1 - np.conj(a) * z))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def three_zero_blaschke():
    zeros = [0.3 + 0.2j, -0.5j, -0.4 + 0.1j]
    return zeros, blaschke_of(zeros)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

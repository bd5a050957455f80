"""Desk-scale acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line with its wall time; the lines are echoed
at the end of the pytest run and printed inline under ``-s``.
"""

import time
from contextlib import contextmanager

import mpmath
import numpy as np
import pytest

from blaschke_lab import (
    Contour,
    MeasureEstimate,
    PreconditionError,
    ZeroSequence,
    blaschke_functional,
    check_L_bound,
    check_O_condition,
    circular_mean,
    classify_series,
    disk,
    estimate_C_prime,
    evaluate_inequality_C,
    green_domain,
    green_identity_residual,
    green_unit_disk,
    hahn_jordan_split,
    integrate_measure,
    locate_zeros,
    make_test_function,
    parse_function,
    riesz_charge,
    riesz_measure_grid,
    sample_grid,
    unit_disk,
    winding_number,
    zero_counting_measure,
)
from blaschke_lab.potential.green import green_field
from blaschke_lab.potential.measures import RegionFilter

from cli_corpus import CORPUS, run_cli, write_inputs
from conftest import ACCEPTANCE_LINES, blaschke_modulus, blaschke_of, random_zeros

D_HALF = unit_disk(inner=disk(0, 0.5))
D_POWER = unit_disk(inner=disk(0, 0.75))


@contextmanager
def criterion(number, title, budget=None):
    start = time.perf_counter()
    ok = False
    elapsed = 0.0
    try:
        yield
        elapsed = time.perf_counter() - start
        ok = budget is None or elapsed < budget
    finally:
        elapsed = time.perf_counter() - start
        line = f"{'PASS' if ok else 'FAIL'} [{number:2d}] {title} ({elapsed:.2f} s)"
        print(line)
        ACCEPTANCE_LINES.append(line)
    assert ok, f"runtime {elapsed:.2f} s exceeds {budget} s"


@pytest.fixture(scope="module")
def loginv():
    return make_test_function("loginv", D_HALF)


def test_01_blaschke_dichotomy(loginv):
    square_oracle = float(mpmath.fsum(-mpmath.log(1 - mpmath.mpf(k) ** -2) for k in range(2, 10_001)))
    with criterion(1, "dichotomy: 1-k^-2 bounded near log 2, 1-1/k passes 5 by N=1000", budget=5.0):
        k = np.arange(2, 10_001)
        square = blaschke_functional(loginv, ZeroSequence.from_points(1 - 1.0 / k ** 2, truncated=True))
        assert square.total == pytest.approx(square_oracle, rel=1e-12)
        assert square.total == pytest.approx(np.log(2), rel=0.05)
        assert np.all(np.diff(square.partial_sums) >= 0) and square.total <= np.pi ** 2 / 6
        assert classify_series(square)["classification"] == "CONVERGENT"
        k = np.arange(2, 1001)
        harmonic = blaschke_functional(loginv, ZeroSequence.from_points(1 - 1.0 / k, truncated=True))
        assert harmonic.total > 5.0
        assert classify_series(harmonic)["classification"] == "DIVERGENT"


def test_02_implication_coincidence(loginv):
    rng = np.random.default_rng(2)
    where = RegionFilter.annulus_part(D_HALF)
    with criterion(2, "atomic and grid charges reproduce the zero sum for 10 products", budget=30.0):
        worst_atomic = worst_grid = 0.0
        for _ in range(10):
            zeros = random_zeros(rng, int(rng.integers(1, 9)), r_max=0.97, avoid=[(0.48, 0.52)])
            B = blaschke_of(zeros)
            M = parse_function(f"logabs({B.text()})")
            oracle = sum(-np.log(abs(a)) for a in zeros if abs(a) >= 0.5)
            atomic = zero_counting_measure(locate_zeros(B, unit_disk()))
            grid = riesz_charge(M, D_HALF, h=1 / 512, method="grid")
            worst_atomic = max(worst_atomic, abs(integrate_measure(loginv, atomic, where) - oracle))
            worst_grid = max(worst_grid, abs(integrate_measure(loginv, grid, where) - oracle))
        assert worst_atomic < 1e-6
        assert worst_grid < 2e-2


def test_03_green_suite():
    rng = np.random.default_rng(3)
    D = unit_disk()
    with criterion(3, "Green: symmetry, zero outside, unit pole mass, boundary decay"):
        pts = lambda n: 0.999 * np.sqrt(rng.uniform(size=n)) * np.exp(2j * np.pi * rng.uniform(size=n))
        z, w = pts(1000), pts(1000)
        gap = [abs(green_domain(D, p, q) - green_domain(D, q, p)) for p, q in zip(z, w)]
        assert max(gap) < 1e-10
        outside = (1 + rng.uniform(0, 3, 1000)) * np.exp(2j * np.pi * rng.uniform(size=1000))
        assert np.all(green_domain(D, outside, 0.3 - 0.2j) == 0.0)
        z0 = 0.2 + 0.1j
        nu = riesz_measure_grid(green_field(D, z0, -1.1 - 1.1j, 1.1 + 1.1j, 1 / 512))
        near = np.abs(nu.cell_centers() - z0) < 0.3
        assert abs(nu.cell_masses[near].sum()) == pytest.approx(1.0, rel=0.02)
        assert green_domain(D, 1 - 1e-6, 0) < 1.1e-6


def test_04_jensen_oracle():
    rng = np.random.default_rng(4)
    radii = (0.3, 0.6, 0.9)
    bands = [(r - 0.02, r + 0.02) for r in radii]
    with criterion(4, "circular means of log|B| match Jensen at 2048 nodes"):
        worst = 0.0
        for _ in range(10):
            zeros = random_zeros(rng, int(rng.integers(1, 9)), r_max=0.95, avoid=bands)
            M = parse_function(f"logabs({blaschke_of(zeros).text()})")
            log_b0 = float(np.log(blaschke_modulus(zeros, 0.0)))
            for r in radii:
                jensen = log_b0 + sum(np.log(r / abs(a)) for a in zeros if abs(a) < r)
                worst = max(worst, abs(circular_mean(M, 0, r, nodes=2048) - jensen))
        assert worst < 1e-6


def test_05_riesz_mass_recovery():
    zeros = random_zeros(np.random.default_rng(5), 5, r_max=0.9)
    B = blaschke_of(zeros)
    with criterion(5, "grid mass of a 5-zero product within 2% of the winding count"):
        oracle = winding_number(B, Contour.circle(0, 0.97))
        assert oracle == 5
        assert locate_zeros(B, unit_disk()).total_multiplicity() == oracle
        nu = riesz_measure_grid(sample_grid(B, -1 - 1j, 1 + 1j, 1 / 512, region=unit_disk().contains))
        assert nu.total_mass() == pytest.approx(oracle, rel=0.02)


def test_06_hahn_jordan_round_trip():
    rng = np.random.default_rng(6)
    with criterion(6, "Hahn-Jordan split and recombine on 50 signed grids"):
        for _ in range(50):
            n = int(rng.integers(1, 400))
            masses = rng.normal(size=n) * (rng.uniform(size=n) > 0.2)
            atoms = rng.normal(size=int(rng.integers(0, 6)))
            nu = MeasureEstimate(rng.normal(size=len(atoms)) + 0j, atoms,
                                 [[k, 0, k + 1, 1] for k in range(n)], masses, signed=True)
            s = hahn_jordan_split(nu)
            back = s.recombined()
            assert np.array_equal(back.cell_masses, nu.cell_masses)
            assert np.array_equal(back.atom_masses, nu.atom_masses)
            for part in (s.positive, s.negative):
                assert not part.signed
                assert np.all(part.cell_masses >= 0) and np.all(part.atom_masses >= 0)
            assert not np.any((s.positive.cell_masses > 0) & (s.negative.cell_masses > 0))
            assert not np.any((s.positive.atom_masses > 0) & (s.negative.atom_masses > 0))


def test_07_identity_residual():
    v = make_test_function("power", D_POWER, q=2)
    corpus = ["re(z^2) + 0.3*im(z)", "2.5", "abs(z)^2", "abs(z)^4 + abs(z)^2"]
    with criterion(7, "identity residual below 1e-3 at h=1/256 and halving under refinement"):
        for text in corpus:
            M = parse_function(text)
            coarse = green_identity_residual(M, v, h=1 / 256)
            fine = green_identity_residual(M, v, h=1 / 512)
            assert coarse < 1e-3
            assert fine <= 0.5 * coarse + 1e-6


def test_08_L_bound():
    rng = np.random.default_rng(8)
    D = unit_disk()
    zeros = random_zeros(rng, 4, r_max=0.9)
    B = blaschke_of(zeros)
    zero, one, logB = parse_function("0"), parse_function("1"), parse_function(f"logabs({B.text()})")
    corpus = [(one, zero), (B, zero), (B, logB)]
    with criterion(8, "(L) holds on 100 admissible samples and (d) violations are rejected"):
        admissible = rejected = 0
        while admissible < 100:
            z = 0.95 * np.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform())
            r = rng.uniform(0.0, 1.2)
            if 0 < r < 1 - abs(z):
                admissible += 1
                for f, M in corpus:
                    assert check_L_bound(zero, f, M, z, r, 0.5, D).verdict == "HOLDS"
            else:
                rejected += 1
                for f, M in corpus:
                    with pytest.raises(PreconditionError):
                        check_L_bound(zero, f, M, z, r, 0.5, D)
        assert rejected > 0


def test_09_O_collars(loginv):
    with criterion(9, "collar of log 1/|z| equals exp(-eps)"):
        rows = check_O_condition(loginv, [1, 0.1, 0.01]).trace
        for row in rows:
            assert row["collar_radius"] == pytest.approx(np.exp(-row["epsilon"]), abs=1e-6)


def test_10_inequality_C(loginv):
    g = make_test_function("greenpole", D_HALF, z0=0)
    rng = np.random.default_rng(10)
    with criterion(10, "(C) equality case and Jensen-derived minimal C"):
        M = parse_function("abs(z)^2")
        first = evaluate_inequality_C(M, M, loginv, 0.1)
        assert first.verdict == "HOLDS"
        assert np.isfinite(first.constants["C"])
        assert first.constants["C_bar"] == 0.0
        assert evaluate_inequality_C(M, M, loginv, 0.1).to_json() == first.to_json()
        for _ in range(3):
            zeros = random_zeros(rng, 5, r_max=0.9, avoid=[(0.48, 0.52)])
            u = parse_function(f"logabs({blaschke_of(zeros).text()})")
            r = evaluate_inequality_C(u, parse_function("0"), g, 0, dtilde=disk(0, 0.99))
            u0 = float(np.log(blaschke_modulus(zeros, 0.0)))
            oracle = sum(green_unit_disk(a, 0) for a in zeros if abs(a) >= 0.5) / -u0
            assert r.constants["C"] == pytest.approx(oracle, abs=1e-6)


def test_11_homogeneity():
    family = [make_test_function("loginv", D_HALF), make_test_function("greenpole", D_HALF, z0=0.2)]
    Z = ZeroSequence.from_points([0.7, 0.9j, -0.8 + 0.1j, 0.55 - 0.6j])
    nu = zero_counting_measure(Z)
    where = RegionFilter.annulus_part(D_HALF)
    M = parse_function("0")
    rel = lambda x, y: abs(x - y) / abs(y)
    with criterion(11, "functionals scale exactly with v"):
        for a in (0.5, 2.0, 10.0):
            for v in family:
                w = v.scaled(a)
                assert rel(blaschke_functional(w, Z).total, a * blaschke_functional(v, Z).total) < 1e-12
                assert rel(integrate_measure(w, nu, where), a * integrate_measure(v, nu, where)) < 1e-12
            scaled = [v.scaled(a) for v in family]
            assert rel(estimate_C_prime(nu, M, scaled, domain=D_HALF),
                       a * estimate_C_prime(nu, M, family, domain=D_HALF)) < 1e-12


def test_12_cli_corpus(tmp_path):
    write_inputs(tmp_path)
    with criterion(12, "CLI corpus is byte-identical across runs with documented exit codes"):
        for name, argv, expected in CORPUS:
            first = run_cli(argv, tmp_path)
            second = run_cli(argv, tmp_path)
            assert first[0] == expected, name
            assert first == second, name

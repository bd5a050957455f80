import json

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blaschke_lab import (
    MeasureEstimate,
    PreconditionError,
    ValidationError,
    ZeroSequence,
    blaschke_functional,
    check_implication,
    check_L_bound,
    check_O_condition,
    circular_mean,
    classify_series,
    disk,
    estimate_C_prime,
    evaluate_inequality_C,
    green_identity_residual,
    green_unit_disk,
    integrate_measure,
    make_test_function,
    parse_function,
    riesz_charge,
    unit_disk,
    validate_test_function,
    verify_majorant,
    zero_counting_measure,
)
from blaschke_lab.conditions.report import ConditionReport, combine_verdicts
from blaschke_lab.potential.measures import RegionFilter

from conftest import blaschke_modulus, blaschke_of, random_zeros

D_HALF = unit_disk(inner=disk(0, 0.5))
D_POWER = unit_disk(inner=disk(0, 0.75))


@pytest.fixture(scope="module")
def loginv():
    return make_test_function("loginv", D_HALF)


@pytest.fixture(scope="module")
def power2():
    return make_test_function("power", D_POWER, q=2)


# -- test functions ---------------------------------------------------------------

def test_loginv_bound_and_flags(loginv):
    assert loginv.b == pytest.approx(np.log(2), abs=1e-15)
    assert loginv.vanishes_on_boundary
    assert not loginv.normal_derivative_vanishes


def test_greenpole_at_origin_equals_loginv(loginv, rng):
    g = make_test_function("greenpole", D_HALF, z0=0)
    z = 0.99 * np.sqrt(rng.uniform(0.25, 1, 200)) * np.exp(2j * np.pi * rng.uniform(size=200))
    np.testing.assert_allclose(g(z), loginv(z), atol=1e-15)
    assert g.b == pytest.approx(loginv.b, abs=1e-15)


def test_power_bound_and_flags(power2):
    assert power2.b == pytest.approx((1 - 0.75 ** 2) ** 2, abs=1e-14)
    assert power2.vanishes_on_boundary
    assert power2.normal_derivative_vanishes


def test_power_requires_core_inside_D0():
    with pytest.raises(PreconditionError):
        make_test_function("power", D_HALF, q=2)


def test_greenpole_requires_pole_in_D0():
    with pytest.raises(PreconditionError):
        make_test_function("greenpole", D_HALF, z0=0.7)


def test_test_function_needs_inner_domain():
    with pytest.raises(PreconditionError):
        make_test_function("loginv", unit_disk())


def test_loginv_normal_derivative_is_one(loginv):
    report = validate_test_function(loginv)
    assert report.passed
    nd = report.checks["normal_derivative"]
    assert nd["mean"] == pytest.approx(1.0, abs=1e-3)
    assert not nd["vanishes"]


def test_power_validation_passes(power2):
    report = validate_test_function(power2)
    assert report.passed
    assert report.flags == {"vanishes_on_boundary": True, "normal_derivative_vanishes": True}


def test_negative_custom_fails():
    with pytest.raises(ValidationError) as exc:
        make_test_function("custom", D_HALF, function=parse_function("-1"))
    assert "nonnegative" in exc.value.report.failures()


def test_constant_custom_has_no_boundary_limit():
    v = make_test_function("custom", D_HALF, strict=False, function=parse_function("1"))
    assert v.validation.failures() == ["boundary_limit"]
    assert not v.vanishes_on_boundary


def test_custom_callable_matches_builtin(loginv, rng):
    v = make_test_function("custom", D_HALF, function=parse_function("-logabs(z)"))
    z = 0.9 * np.exp(2j * np.pi * rng.uniform(size=50))
    np.testing.assert_allclose(v(z), loginv(z), atol=1e-15)


def test_coarse_validation_grid_rejected(loginv):
    with pytest.raises(PreconditionError):
        validate_test_function(loginv, h=0.5 / 16)


def test_test_function_zero_outside_domain(loginv):
    assert loginv(np.array([1.5]))[0] == 0.0


# -- (O) --------------------------------------------------------------------------

def test_loginv_collar(loginv):
    r = check_O_condition(loginv, [0.1])
    assert r.verdict == "HOLDS"
    assert r.trace[0]["collar_radius"] == pytest.approx(np.exp(-0.1), abs=1e-6)


def test_constant_has_no_collar():
    v = make_test_function("custom", D_HALF, strict=False, function=parse_function("1"))
    assert check_O_condition(v, [0.5]).verdict == "FAILS"


def test_greenpole_collars_monotone():
    v = make_test_function("greenpole", D_HALF, z0=0.2 - 0.1j)
    radii = [row["collar_radius"] for row in check_O_condition(v, [1, 0.1, 0.01]).trace]
    assert radii[0] < radii[1] < radii[2] < 1


def test_epsilon_must_be_positive(loginv):
    with pytest.raises(PreconditionError):
        check_O_condition(loginv, [0.0])


@pytest.mark.parametrize("kind,params,domain", [
    ("loginv", {}, D_HALF),
    ("greenpole", {"z0": 0.3j}, D_HALF),
    ("power", {"q": 2}, D_POWER),
    ("power", {"q": 3.5}, unit_disk(inner=disk(0, 0.6))),
    ("greenpole", {"z0": 1.2}, disk(1, 0.5, inner=disk(1.1, 0.2))),
])
def test_validated_functions_satisfy_O(kind, params, domain):
    v = make_test_function(kind, domain, **params)
    assert check_O_condition(v, [1, 0.1, 0.01, 1e-4]).verdict == "HOLDS"


# -- Blaschke functional ----------------------------------------------------------

def test_two_point_functional(loginv):
    t = blaschke_functional(loginv, ZeroSequence.from_points([0.9, 0.99], region=unit_disk()))
    oracle = float(-mpmath.log(mpmath.mpf("0.9")) - mpmath.log(mpmath.mpf("0.99")))
    assert t.total == pytest.approx(oracle, abs=1e-15)
    assert [row["k"] for row in t.to_list()] == [1, 2]


def test_zeros_in_D0_are_skipped(loginv):
    t = blaschke_functional(loginv, ZeroSequence.from_points([0.1, 0.2j, -0.3], region=unit_disk()))
    assert t.total == 0.0


def test_harmonic_zero_sequence_diverges(loginv):
    k = np.arange(2, 10_001)
    Z = ZeroSequence.from_points(1 - 1 / k, region=unit_disk(), truncated=True)
    trace = blaschke_functional(loginv, Z)
    oracle = float(mpmath.fsum(-mpmath.log(1 - mpmath.mpf(1) / j) for j in range(2, 10_001)))
    assert trace.total == pytest.approx(oracle, rel=1e-12)
    assert trace.total == pytest.approx(np.log(10_000), rel=1e-12)
    assert classify_series(trace)["classification"] == "DIVERGENT"


def test_square_zero_sequence_converges(loginv):
    k = np.arange(2, 10_001)
    Z = ZeroSequence.from_points(1 - 1.0 / k ** 2, region=unit_disk(), truncated=True)
    c = classify_series(blaschke_functional(loginv, Z))
    assert c["classification"] == "CONVERGENT"
    assert c["tail_slope"] == pytest.approx(-2, abs=0.05)


def test_short_truncated_series_inconclusive(loginv):
    Z = ZeroSequence.from_points([0.9, 0.95, 0.97], region=unit_disk(), truncated=True)
    assert classify_series(blaschke_functional(loginv, Z))["classification"] == "INCONCLUSIVE"


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 0.999), st.floats(0, 2 * np.pi)), max_size=30))
def test_sum_trace_monotone(points):
    v = make_test_function("loginv", D_HALF)
    Z = ZeroSequence.from_points([r * np.exp(1j * t) for r, t in points], region=unit_disk())
    sums = np.array([row["partial_sum"] for row in blaschke_functional(v, Z).to_list()])
    assert np.all(np.diff(sums) >= 0)


# -- majorants and the implication ------------------------------------------------

def test_blaschke_below_zero():
    assert verify_majorant(parse_function("blaschke(0.3; 0.6i)"), parse_function("0"), D_HALF).holds


def test_constant_two_violates_zero():
    r = verify_majorant(parse_function("2"), parse_function("0"), D_HALF)
    assert not r.holds
    assert r.worst_violation == pytest.approx(np.log(2), abs=1e-15)


def test_log_modulus_majorant_identity():
    B = parse_function("blaschke(0.3; 0.6i)")
    r = verify_majorant(B, parse_function(f"logabs({B.text()})"), D_HALF)
    assert r.holds and r.worst_violation == 0.0


def _dyadic_blaschke():
    return parse_function("blaschke(" + "; ".join(repr(1 - 2.0 ** -k) for k in range(1, 13)) + ")")


def test_implication_coincidence(loginv):
    B = _dyadic_blaschke()
    r = check_implication(B, parse_function(f"logabs({B.text()})"), loginv)
    oracle = float(mpmath.fsum(-mpmath.log(1 - mpmath.mpf(2) ** -k) for k in range(1, 13)))
    assert r.verdict == "HOLDS"
    assert r.lhs == pytest.approx(oracle, abs=1e-12)
    assert r.rhs == pytest.approx(oracle, abs=1e-12)
    assert r.constants["C_prime"] == pytest.approx(0, abs=1e-12)


def test_implication_with_zero_majorant_records_constant(loginv):
    B = _dyadic_blaschke()
    r = check_implication(B, parse_function("0"), loginv)
    assert r.verdict == "HOLDS"
    assert r.lhs == 0.0
    assert r.constants["C_prime"] == pytest.approx(r.rhs, abs=1e-15)
    assert any("not required" in n for n in r.notes)


def test_implication_divergence_raises_uniqueness_flag(loginv):
    k = np.arange(2, 1001)
    Z = ZeroSequence.from_points(1 - 1 / k, region=unit_disk(), truncated=True)
    r = check_implication(None, parse_function("0"), loginv, Z=Z, bound=5.0)
    assert r.verdict == "FAILS"
    assert r.rhs > 5.0
    assert any("identically zero" in n for n in r.notes)


def test_implication_majorant_failure_is_error(loginv):
    with pytest.raises(PreconditionError):
        check_implication(parse_function("2"), parse_function("0"), loginv)


def test_grid_and_atomic_implication_agree(loginv):
    zeros = [0.6 + 0.2j, -0.7j, 0.1]
    B = blaschke_of(zeros)
    M = parse_function(f"logabs({B.text()})")
    atomic = check_implication(B, M, loginv, method="atomic")
    grid = check_implication(B, M, loginv, method="grid", h=1 / 256)
    assert grid.lhs == pytest.approx(atomic.lhs, abs=2e-2)


# -- (C) ------------------------------------------------------------------------------

def test_inequality_C_equality_case(loginv):
    M = parse_function("abs(z)^2")
    r = evaluate_inequality_C(M, M, loginv, 0.1)
    assert r.verdict == "HOLDS"
    assert np.isfinite(r.constants["C"])
    assert r.constants["C_bar"] == 0.0
    assert evaluate_inequality_C(M, M, loginv, 0.1).to_json() == r.to_json()


def test_inequality_C_jensen_case():
    zeros = random_zeros(np.random.default_rng(5), 5, 0.9)
    u = parse_function(f"logabs({blaschke_of(zeros).text()})")
    g = make_test_function("greenpole", D_HALF, z0=0)
    r = evaluate_inequality_C(u, parse_function("0"), g, 0, dtilde=disk(0, 0.99))
    u0 = np.log(blaschke_modulus(zeros, 0.0))
    jensen = sum(green_unit_disk(a, 0) for a in zeros)
    assert -u0 == pytest.approx(jensen, abs=1e-12)
    S = sum(green_unit_disk(a, 0) for a in zeros if abs(a) >= 0.5)
    assert r.constants["C"] == pytest.approx(S / -u0, abs=1e-6)


def test_inequality_C_negative_part_terms(loginv):
    b1 = "blaschke(0.7; 0.6i)"
    b2_zeros = [0.6, -0.55j]
    M = parse_function(f"logabs({b1}) - logabs({blaschke_of(b2_zeros).text()})")
    r = evaluate_inequality_C(parse_function(f"logabs({b1})"), M, loginv, 0.1j)
    row = r.trace[0]
    assert row["int_v_nu_M_minus"] == pytest.approx(sum(loginv(np.array(b2_zeros))), abs=1e-12)
    assert row["int_v_nu_M_minus"] > 0


def test_inequality_C_pole_off_dom_M_rejected(loginv):
    M = parse_function("logabs(blaschke(0.1))")
    with pytest.raises(PreconditionError):
        evaluate_inequality_C(M, M, loginv, 0.1)


def test_inequality_C_pole_outside_D0_rejected(loginv):
    M = parse_function("abs(z)^2")
    with pytest.raises(PreconditionError):
        evaluate_inequality_C(M, M, loginv, 0.8)


# -- C' ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def family():
    return [make_test_function("loginv", D_HALF), make_test_function("greenpole", D_HALF, z0=0.2)]


def test_C_prime_identity(family):
    M = parse_function("logabs(blaschke(0.7; 0.9i))")
    assert estimate_C_prime(riesz_charge(M, D_HALF), M, family, domain=D_HALF) == 0.0


def test_C_prime_counting_measure(family):
    Z = ZeroSequence.from_points([0.7, 0.9j], region=unit_disk())
    value = estimate_C_prime(zero_counting_measure(Z), parse_function("0"), family, domain=D_HALF)
    sums = [float(np.sum(v(Z.locations()))) for v in family]
    assert value == pytest.approx(max(sums), abs=1e-14)


def test_C_prime_zero_measure(family):
    M = parse_function("logabs(blaschke(0.7; 0.9i))")
    assert estimate_C_prime(MeasureEstimate.zero(), M, family, domain=D_HALF) == 0.0


# -- green identity -------------------------------------------------------------------

SMOOTH = ["re(z^2) + 0.3*im(z)", "2.5", "abs(z)^2", "abs(z)^4 + abs(z)^2"]


@pytest.mark.parametrize("text", SMOOTH)
def test_identity_residual_small_and_refining(power2, text):
    M = parse_function(text)
    r1 = green_identity_residual(M, power2, h=1 / 128)
    r2 = green_identity_residual(M, power2, h=1 / 256)
    assert r2 < 1e-3
    assert r2 <= 0.5 * r1 + 1e-6


def test_identity_antisymmetric_case(power2):
    assert green_identity_residual(power2, power2, h=1 / 256) < 1e-9


def test_identity_needs_both_flags(loginv):
    with pytest.raises(PreconditionError):
        green_identity_residual(parse_function("1"), loginv)


# -- (L) ------------------------------------------------------------------------------

def test_L_trivial_case():
    r = check_L_bound(parse_function("0"), parse_function("1"), parse_function("0"), 0.3, 0.4, 0.5, unit_disk())
    assert r.verdict == "HOLDS"
    assert r.rhs == pytest.approx(1.5 * np.log(1.3 / 0.4), abs=1e-12)


def test_L_sub_mean_value_case():
    B = parse_function("blaschke(0.3; 0.6i)")
    M = parse_function(f"logabs({B.text()})")
    r = check_L_bound(parse_function("0"), B, M, 0.1, 0.5, 0.5, unit_disk())
    assert r.verdict == "HOLDS"
    assert r.lhs <= circular_mean(M, 0.1, 0.5, nodes=2048)


def test_L_constraint_d_violation():
    with pytest.raises(PreconditionError):
        check_L_bound(parse_function("0"), parse_function("1"), parse_function("0"), 0.5, 0.6, 0.5, unit_disk())


# -- homogeneity ------------------------------------------------------------------------

@pytest.mark.parametrize("a", [0.5, 2.0, 10.0])
def test_positive_homogeneity(family, a):
    Z = ZeroSequence.from_points([0.7, 0.9j, -0.8 + 0.1j], region=unit_disk())
    nu = zero_counting_measure(Z)
    where = RegionFilter.annulus_part(D_HALF)
    for v in family:
        w = v.scaled(a)
        assert blaschke_functional(w, Z).total == pytest.approx(a * blaschke_functional(v, Z).total, rel=1e-12)
        assert integrate_measure(w, nu, where) == pytest.approx(a * integrate_measure(v, nu, where), rel=1e-12)
    M = parse_function("0")
    scaled = [v.scaled(a) for v in family]
    assert estimate_C_prime(nu, M, scaled, domain=D_HALF) == pytest.approx(
        a * estimate_C_prime(nu, M, family, domain=D_HALF), rel=1e-12)


# -- reports ----------------------------------------------------------------------------

def test_report_json_is_deterministic_and_finite_safe():
    r = ConditionReport("X", "HOLDS", lhs=1 / 3, rhs=float("inf"), constants={"c": 1 + 2j})
    data = json.loads(r.to_json())
    assert data["lhs"] == 0.333333333333333
    assert data["rhs"] == "inf"
    assert data["constants"]["c"] == {"re": 1.0, "im": 2.0}
    assert list(data) == sorted(data)


def test_unknown_verdict_rejected():
    with pytest.raises(ValueError):
        ConditionReport("X", "MAYBE")


def test_verdict_combination():
    assert combine_verdicts(["HOLDS", "INCONCLUSIVE"]) == "INCONCLUSIVE"
    assert combine_verdicts(["INCONCLUSIVE", "FAILS"]) == "FAILS"
    assert combine_verdicts([]) == "HOLDS"

import numpy as np
import pytest

from siegel.arith import golden_mean, rotation_number
from siegel.blaschke import (
    blaschke_eval,
    classify_c5,
    critical_residuals,
    first_entry_time,
    log_derivative,
    solve_blaschke,
    standard_f_theta,
)
from siegel.errors import PoleError, SolverFailureError

THETA = golden_mean()

# frozen oracle for the mu=2 solution: obtained independently by reducing
# the four real equations under the conjugate-pair symmetry q = conj(p)
# forced by real mu, and root-finding the 2-d reduced system
MU2_P = 2.907760918516 - 1.997871855712j


@pytest.fixture(scope="module")
def params_mu2():
    return solve_blaschke(2.0 + 0j, THETA, tol=5e-7)


def test_double_critical_equations_at_p_q_5():
    r = critical_residuals(5.0, 5.0, 2.0)
    assert abs(r[0]) < 1e-14
    assert abs(r[1]) < 1e-14


def test_p_q_5_degenerate_double_root_at_one():
    # all four free critical points coalesce: L and L' both vanish at 1
    h = 1e-6
    assert abs(log_derivative(5.0, 5.0, 1.0)) < 1e-12
    fd = (log_derivative(5.0, 5.0, 1.0 + h) - log_derivative(5.0, 5.0, 1.0 - h)) / (2 * h)
    assert abs(fd) < 1e-6


def test_solved_mu2_matches_independent_oracle(params_mu2):
    pair = sorted([params_mu2.p, params_mu2.q], key=lambda z: z.imag)
    assert abs(pair[0] - MU2_P) < 1e-9
    assert abs(pair[1] - np.conj(MU2_P)) < 1e-9


def test_solved_residuals_small(params_mu2):
    assert np.max(np.abs(params_mu2.residuals())) <= 1e-10
    assert abs(params_mu2.p) > 1 and abs(params_mu2.q) > 1


def test_rotation_number_of_solved_map(params_mu2):
    est = rotation_number(params_mu2.lift(), budget=2_000_000)
    assert abs(est.estimate - THETA.value) < 1e-6


def test_circle_invariance(params_mu2):
    rng = np.random.default_rng(7)
    for x in rng.random(50):
        z = np.exp(2j * np.pi * x)
        assert abs(abs(blaschke_eval(params_mu2, z)) - 1.0) < 1e-12


def test_reflection_identity(params_mu2):
    rng = np.random.default_rng(8)
    for _ in range(100):
        z = complex(rng.normal(), rng.normal())
        if abs(z) < 1e-3:
            continue
        lhs = blaschke_eval(params_mu2, 1.0 / np.conj(z))
        rhs = 1.0 / np.conj(blaschke_eval(params_mu2, z))
        assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(rhs))


def test_triple_zero_leading_order(params_mu2):
    z = 1e-7
    lead = blaschke_eval(params_mu2, z) / z**3
    expected = params_mu2.tau * params_mu2.p * params_mu2.q
    assert abs(lead - expected) < 1e-5 * abs(expected)


def test_pole_proximity_error(params_mu2):
    pole = 1.0 / np.conj(params_mu2.p)
    with pytest.raises(PoleError):
        blaschke_eval(params_mu2, pole)


def test_circle_lift_monotone(params_mu2):
    lift = params_mu2.lift()
    x = np.linspace(0, 1, 10_001)
    vals = np.array([lift(v) for v in x])
    assert np.all(np.diff(vals) >= -1e-12)


def test_standard_f_theta_value():
    cal = standard_f_theta(THETA, tol=1e-5)
    assert abs(cal.t - 0.613648) <= 1e-4


def test_standard_f_theta_double_critical_point():
    # the angular lift of e^{2 pi i t} z^2 (z-3)/(1-3z) has a double critical
    # point at angle 0: first and second derivative of the lift vanish
    from siegel.arith import BlaschkeCircleLift

    lift = BlaschkeCircleLift(0.613648, 2, (3.0 + 0.0j,))
    h = 1e-5
    d1 = (lift(h) - lift(-h)) / (2 * h)
    d2 = (lift(2 * h) - lift(h) - lift(-h) + lift(-2 * h)) / (3 * h * h)
    assert abs(d1) < 1e-8
    assert abs(d2) < 1e-3


def test_unit_modulus_mu_symmetric_branch():
    mu = np.exp(1j * np.pi / 3)
    params = solve_blaschke(mu, THETA)
    r = critical_residuals(params.p, params.q, mu)
    assert np.max(np.abs(r)) <= 1e-10


def test_large_mu_degeneration():
    qdist = []
    for e in (2, 3, 4):
        params = solve_blaschke(10.0**e + 0j, THETA)
        qdist.append(abs(params.q - 3.0))
        assert abs(params.p) > 10.0 ** (e - 1)
    assert qdist[0] > qdist[1] > qdist[2]
    assert qdist[1] <= 0.05


def test_inversion_symmetry_same_map(params_mu2):
    inv = solve_blaschke(0.5 + 0j, THETA, tol=5e-7)
    same = abs(inv.p - params_mu2.p) < 1e-8 and abs(inv.q - params_mu2.q) < 1e-8
    swapped = abs(inv.p - params_mu2.q) < 1e-8 and abs(inv.q - params_mu2.p) < 1e-8
    assert same or swapped


def test_classify_c5_membership(params_mu2):
    cls = classify_c5(2.0 + 0j, THETA, max_iter=500, params=params_mu2)
    assert cls.member
    big = solve_blaschke(1000.0 + 0j, THETA)
    assert not classify_c5(1000.0 + 0j, THETA, max_iter=500, params=big).member


def test_classify_c5_unit_circle_member():
    mu = np.exp(1j * np.pi / 3)
    params = solve_blaschke(mu, THETA)
    cls = classify_c5(mu, THETA, max_iter=100, params=params)
    assert cls.tag == "hits-closed-disk"
    assert cls.step == 0


def test_first_entry_time(params_mu2):
    assert first_entry_time(params_mu2, 0.5 + 0j, 10) == 0
    assert first_entry_time(params_mu2, params_mu2.free_critical_point, 10) == 1
    assert first_entry_time(params_mu2, 50.0 + 0j, 20) is None


def test_zero_mu_rejected():
    with pytest.raises(ValueError):
        solve_blaschke(0.0, THETA)

import math
from itertools import product

import numpy as np
import pytest
from scipy.linalg import expm

from kerrcavity.errors import MemoryGuardError, SolverError, StabilityError
from kerrcavity.fock import Coherent, DensityMatrix, Fock, Truncation, make_state
from kerrcavity.kraus import ChannelParams, evolve_kerr_unitary, evolve_kraus
from kerrcavity.solvers import (
    IntegratorConfig,
    _fast_rhs,
    build_liouvillian,
    evolve_liouvillian,
    left_super,
    lindblad_rhs,
    matrix_exponential,
    right_super,
    rk4_evolve,
    rk4_integrate,
    solver_compare,
    stability_rate,
    unvec,
    vec,
)
from kerrcavity.validation import random_states

from conftest import random_hermitian

SUITE = list(product([0.0, 0.2, 1.0], [0.0, 0.2, 1.0], [0.1, 1.0, 5.0]))


def fixed_point_expm(m, bits=200, scale_to=2.0**-6):
    """exp(m) with big-integer fixed-point arithmetic (~60 significant digits)."""
    one = 1 << bits

    def to_fixed(x):
        return np.array([[int(round(v * 2.0**60)) << (bits - 60) for v in row] for row in x], dtype=object)

    def mul(a, b):
        ar, ai = a
        br, bi = b
        rr = (ar.dot(br) - ai.dot(bi))
        ii = (ar.dot(bi) + ai.dot(br))
        return (np.vectorize(lambda v: v >> bits, otypes=[object])(rr),
                np.vectorize(lambda v: v >> bits, otypes=[object])(ii))

    norm = np.max(np.sum(np.abs(m), axis=0))
    s = max(0, math.ceil(math.log2(norm / scale_to)))
    # 2^-s scaling is exact on the 60-bit mantissa grid
    a = (to_fixed(m.real), to_fixed(m.imag))
    a = (np.vectorize(lambda v: v >> s, otypes=[object])(a[0]), np.vectorize(lambda v: v >> s, otypes=[object])(a[1]))
    n = m.shape[0]
    eye = np.array([[one if i == j else 0 for j in range(n)] for i in range(n)], dtype=object)
    zero = np.zeros((n, n), dtype=object) * 0
    total = (eye.copy(), zero.copy())
    term = (eye, zero)
    k = 1
    while True:
        term = mul(term, a)
        term = (np.vectorize(lambda v: v // k if v >= 0 else -((-v) // k), otypes=[object])(term[0]),
                np.vectorize(lambda v: v // k if v >= 0 else -((-v) // k), otypes=[object])(term[1]))
        total = (total[0] + term[0], total[1] + term[1])
        if max(abs(v) for v in np.concatenate([term[0].ravel(), term[1].ravel()])) < 2 ** (bits - 190):
            break
        k += 1
    for _ in range(s):
        total = mul(total, total)
    re = np.vectorize(lambda v: float(v) / one if abs(v) < 2**1000 else float(v >> bits))(total[0])
    im = np.vectorize(lambda v: float(v) / one if abs(v) < 2**1000 else float(v >> bits))(total[1])
    return re + 1j * im


def rk4_steps(t, params, dim, h_max=1e-3):
    need = math.floor(t * stability_rate(dim, params) / 0.1) + 1
    return IntegratorConfig(max(1, math.ceil(t / h_max), need))


# lindblad_rhs


def test_rhs_vacuum_is_steady():
    assert np.max(np.abs(lindblad_rhs(make_state(Fock(0), Truncation(6)), ChannelParams(0.7, 1.3, 1.0)))) == 0


def test_rhs_fock_without_damping():
    assert np.max(np.abs(lindblad_rhs(make_state(Fock(3), Truncation(6)), ChannelParams(0.7, 0.0, 1.0)))) == 0


def test_rhs_single_photon_loss():
    gamma = 0.45
    out = lindblad_rhs(make_state(Fock(1), Truncation(4)), ChannelParams(0.0, gamma, 1.0))
    expected = np.zeros((4, 4))
    expected[0, 0], expected[1, 1] = 2 * gamma, -2 * gamma
    assert np.max(np.abs(out - expected)) <= 1e-15


def test_fast_rhs_matches_operator_form(rng):
    p = ChannelParams(0.37, 0.81, 1.0)
    f = _fast_rhs(9, p.chi, p.gamma)
    for _ in range(10):
        r = random_hermitian(rng, 9)
        assert np.max(np.abs(f(r) - lindblad_rhs(r, p))) <= 1e-12


# rk4


def test_rk4_t0():
    rho = make_state(Coherent(0.5), Truncation(6))
    assert np.array_equal(rk4_evolve(rho, ChannelParams(1, 1, 0), IntegratorConfig(1)).elements, rho.elements)


def test_rk4_single_photon_decay():
    out = rk4_evolve(make_state(Fock(1), Truncation(4)), ChannelParams(0.0, 0.5, 1.0), IntegratorConfig(10000))
    assert abs(out.elements[1, 1].real - math.exp(-1)) <= 1e-8


def test_rk4_stability_guard():
    rho = make_state(Fock(1), Truncation(16))
    p = ChannelParams(0.3, 0.2, 2.0)
    with pytest.raises(StabilityError) as err:
        rk4_evolve(rho, p, IntegratorConfig(20))
    need = err.value.required_steps
    assert str(need) in str(err.value)
    rk4_evolve(rho, p, IntegratorConfig(need))


def test_rk4_reports_drift():
    res = rk4_integrate(make_state(Coherent(1.0), Truncation(8)), ChannelParams(0.2, 0.2, 1.0), IntegratorConfig(2000))
    assert res.trace_drift < 1e-12
    assert not res.renormalized


@pytest.mark.parametrize("gamma,chi,t", SUITE)
def test_rk4_matches_kraus(gamma, chi, t):
    tr = Truncation(12)
    rho = random_states(tr, 1, seed=int(100 * (gamma + 3 * chi + 7 * t)))[0]
    p = ChannelParams(chi, gamma, t)
    out = rk4_evolve(rho, p, rk4_steps(t, p, 12))
    assert np.max(np.abs(out.elements - evolve_kraus(rho, p).elements)) <= 1e-6


def test_rk4_fourth_order():
    tr = Truncation(12)
    rho = make_state(Coherent(1.5), tr)
    p = ChannelParams(0.5, 0.5, 1.0)
    exact = evolve_kraus(rho, p).elements
    e1 = np.max(np.abs(rk4_evolve(rho, p, IntegratorConfig(1000)).elements - exact))
    e2 = np.max(np.abs(rk4_evolve(rho, p, IntegratorConfig(2000)).elements - exact))
    assert 12 <= e1 / e2 <= 20


# Liouvillian


def test_vectorization_convention(rng):
    n = 5
    a, b, r = (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)) for _ in range(3))
    assert np.array_equal(unvec(vec(r), n), r)
    assert vec(r)[2 * n + 3] == r[2, 3]
    assert np.allclose(left_super(a) @ right_super(b) @ vec(r), vec(a @ r @ b), atol=1e-12)


@pytest.mark.parametrize("chi,gamma", [(0.0, 0.0), (0.3, 0.2), (-1.0, 2.0), (5.0, 0.0)])
def test_liouvillian_vacuum_and_trace(chi, gamma):
    lv = build_liouvillian(Truncation(7), ChannelParams(chi, gamma, 0.0))
    assert np.max(np.abs(lv.matrix @ vec(make_state(Fock(0), Truncation(7)).elements))) <= 1e-14
    assert np.max(np.abs(vec(np.eye(7)) @ lv.matrix)) <= 1e-12


def test_liouvillian_matches_rhs(rng):
    p = ChannelParams(0.43, 0.29, 0.0)
    lv = build_liouvillian(Truncation(8), p)
    for _ in range(100):
        r = random_hermitian(rng, 8)
        assert np.max(np.abs(lv.matrix @ vec(r) - vec(lindblad_rhs(r, p)))) <= 1e-12
        assert np.max(np.abs(lv.apply(r) - lindblad_rhs(r, p))) <= 1e-12


def test_liouvillian_unitary_without_damping():
    m = build_liouvillian(Truncation(6), ChannelParams(0.8, 0.0, 0.0)).matrix
    assert np.max(np.abs(1j * m - (1j * m).conj().T)) <= 1e-12


# matrix exponential


def test_expm_zero():
    assert np.array_equal(matrix_exponential(np.zeros((4, 4))), np.eye(4))


def test_expm_diagonal():
    th = math.pi / 3
    out = matrix_exponential(np.diag([1j * th, -1j * th, 0]))
    assert np.max(np.abs(out - np.diag([np.exp(1j * th), np.exp(-1j * th), 1]))) <= 1e-14


def test_expm_against_fixed_point_reference():
    rng = np.random.default_rng(64)
    m = rng.normal(size=(64, 64)) + 1j * rng.normal(size=(64, 64))
    m *= 3.0 / np.max(np.sum(np.abs(m), axis=0))
    ref = fixed_point_expm(m)
    assert np.max(np.abs(matrix_exponential(m) - ref)) <= 1e-10
    assert np.max(np.abs(expm(m) - ref)) <= 1e-10


def test_expm_inverse_and_scipy(rng):
    for scale in (0.1, 1.0, 3.0):
        m = rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))
        m *= scale / np.max(np.sum(np.abs(m), axis=0))
        e = matrix_exponential(m)
        assert np.max(np.abs(e @ matrix_exponential(-m) - np.eye(16))) <= 1e-10
        assert np.max(np.abs(e - expm(m))) <= 1e-12


def test_expm_large_norm():
    rng = np.random.default_rng(5)
    h = random_hermitian(rng, 16, scale=10.0)
    u = matrix_exponential(-1j * h)
    assert np.max(np.abs(u @ matrix_exponential(1j * h) - np.eye(16))) <= 1e-10
    m = rng.normal(size=(16, 16)) * 3.0
    e = matrix_exponential(m)
    assert np.max(np.abs(e - expm(m))) <= 1e-12 * np.abs(e).max()


# Liouvillian propagation


def test_liouvillian_t0():
    rho = make_state(Coherent(1j), Truncation(6))
    assert np.max(np.abs(evolve_liouvillian(rho, ChannelParams(1, 1, 0)).elements - rho.elements)) == 0


@pytest.mark.parametrize("gamma,chi,t", SUITE)
def test_liouvillian_matches_kraus(gamma, chi, t):
    rho = random_states(Truncation(12), 1, seed=int(10 * (gamma + chi + t)))[0]
    p = ChannelParams(chi, gamma, t)
    out = evolve_liouvillian(rho, p)
    assert np.max(np.abs(out.elements - evolve_kraus(rho, p).elements)) <= 1e-8
    assert abs(np.trace(out.elements) - 1) <= 1e-10
    assert out.min_eigenvalue() >= -1e-8


def test_liouvillian_kerr_only():
    rho = make_state(Coherent(1.5), Truncation(12))
    out = evolve_liouvillian(rho, ChannelParams(0.7, 0.0, 2.3))
    assert np.max(np.abs(out.elements - evolve_kerr_unitary(rho, 0.7, 2.3).elements)) <= 1e-10


def test_liouvillian_memory_guard():
    rho = make_state(Fock(0), Truncation(33))
    with pytest.raises(MemoryGuardError, match="rk4"):
        evolve_liouvillian(rho, ChannelParams(1, 1, 1))
    small = make_state(Fock(0), Truncation(5))
    with pytest.raises(MemoryGuardError):
        evolve_liouvillian(small, ChannelParams(1, 1, 1), max_dim=4)


# comparison


def test_compare_t0():
    rep = solver_compare(make_state(Coherent(1.0), Truncation(8)), ChannelParams(0.3, 0.2, 0.0), IntegratorConfig(1))
    assert set(rep.deviations) == {("kraus", "rk4"), ("kraus", "liouville"), ("rk4", "liouville")}
    assert all(d == 0 for d in rep.deviations.values())
    assert set(rep.wall_time) == {"kraus", "rk4", "liouville"}


def test_compare_frozen_dynamics():
    rho = make_state(Coherent(1.0 + 1j), Truncation(10))
    rep = solver_compare(rho, ChannelParams(0.0, 0.0, 3.0), IntegratorConfig(10))
    assert rep.max_deviation <= 1e-12
    for state in rep.states.values():
        assert np.max(np.abs(state.elements - rho.elements)) <= 1e-12


def test_compare_attaches_solver_name():
    rho = make_state(Fock(1), Truncation(16))
    with pytest.raises(SolverError) as err:
        solver_compare(rho, ChannelParams(0.3, 0.2, 2.0), IntegratorConfig(3))
    assert err.value.solver == "rk4"
    assert isinstance(err.value.cause, StabilityError)


def test_density_matrix_tolerance_for_liouville():
    with pytest.raises(Exception):
        DensityMatrix(Truncation(2), np.diag([0.5, 0.5 + 1e-11]))
    DensityMatrix(Truncation(2), np.diag([0.5, 0.5 + 1e-11]), tol=1e-10)

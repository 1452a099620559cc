import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.ndimage import maximum_filter

from kerrcavity.errors import DimensionError, UnsupportedStateError
from kerrcavity.fock import Cat, Coherent, DensityMatrix, Fock, Thermal, Truncation, make_state
from kerrcavity.kraus import ChannelParams, evolve_amplitude_damping, evolve_kerr_unitary, evolve_kraus
from kerrcavity.observables import (
    QGrid,
    fidelity_pure,
    husimi_q,
    mean_photon_number,
    observe,
    photon_distribution,
    purity,
    trace_distance,
)
from kerrcavity.validation import random_states


@pytest.mark.parametrize("spec", [Fock(2), Coherent(1 - 1j), Cat(1.5, 0.3)])
def test_pure_state_purity(spec):
    assert purity(make_state(spec, Truncation(16))) == pytest.approx(1, abs=1e-10)


def test_maximally_mixed_purity():
    n = 7
    rho = DensityMatrix(Truncation(n), np.eye(n) / n)
    assert abs(purity(rho) - 1 / n) <= 1e-12


def test_purity_does_not_mutate():
    rho = make_state(Coherent(1.0), Truncation(6))
    before = rho.elements.copy()
    purity(rho)
    assert np.array_equal(before, rho.elements)


def test_kerr_preserves_purity():
    rho = make_state(Coherent(2.0), Truncation(24))
    for t in np.linspace(0, 2 * math.pi, 13):
        assert abs(purity(evolve_kerr_unitary(rho, 1.0, t)) - 1) <= 1e-10


def test_damping_purity_not_increasing():
    rho = make_state(Coherent(1.5), Truncation(20))
    p0 = purity(rho)
    for t in np.linspace(0, 4, 9):
        assert purity(evolve_amplitude_damping(rho, 0.3, t)) <= p0 + 1e-10


def test_fidelity_basics():
    tr = Truncation(4)
    assert fidelity_pure(make_state(Fock(0), tr), Fock(0)) == 1
    assert fidelity_pure(make_state(Fock(1), tr), Fock(0)) == 0
    with pytest.raises(UnsupportedStateError):
        fidelity_pure(make_state(Fock(0), tr), Thermal(0.1))


def test_fidelity_vacuum_limit():
    rho = make_state(Coherent(1.0), Truncation(16))
    out = evolve_kraus(rho, ChannelParams(0.2, 1.0, 10.0))
    assert fidelity_pure(out, Fock(0)) >= 1 - 1e-6


def test_trace_distance_basics():
    tr = Truncation(5)
    a, b = make_state(Fock(0), tr), make_state(Fock(1), tr)
    assert trace_distance(a, a) == 0
    assert trace_distance(a, b) == pytest.approx(1, abs=1e-15)
    with pytest.raises(DimensionError):
        trace_distance(a, make_state(Fock(0), Truncation(6)))


def test_trace_distance_of_pure_states():
    # for pure states D = sqrt(1 - |<a|b>|^2)
    tr = Truncation(20)
    a, b = make_state(Coherent(1.0), tr), make_state(Coherent(1.5j), tr)
    overlap = fidelity_pure(a, Coherent(1.5j))
    assert trace_distance(a, b) == pytest.approx(math.sqrt(1 - overlap), abs=1e-12)


pure_specs = st.one_of(
    st.builds(Fock, st.integers(0, 9)),
    st.builds(Coherent, st.builds(complex, st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))),
)


@given(pure_specs, st.integers(0, 1000), st.floats(0, 3))
def test_fuchs_van_de_graaf(spec, seed, t):
    tr = Truncation(10)
    rho = evolve_kraus(random_states(tr, 1, seed=seed)[0], ChannelParams(0.3, 0.2, t))
    psi = make_state(spec, tr)
    assert 1 - fidelity_pure(rho, spec) <= trace_distance(rho, psi) + 1e-9


def test_mean_photon_number():
    assert mean_photon_number(make_state(Fock(3), Truncation(6))) == 3
    rho = make_state(Coherent(1.2 + 0.5j), Truncation(30))
    p = photon_distribution(rho)
    assert mean_photon_number(rho) == pytest.approx(float(np.dot(np.arange(30), p)), abs=1e-14)
    assert mean_photon_number(rho) == pytest.approx(abs(1.2 + 0.5j) ** 2, abs=1e-10)


@given(st.integers(0, 1000), st.floats(0, 5))
def test_record_invariants(seed, t):
    tr = Truncation(12)
    rho = evolve_kraus(random_states(tr, 1, seed=seed)[0], ChannelParams(0.4, 0.3, t))
    rec = observe(rho, t, Fock(0))
    assert min(rec.photon_dist) >= -1e-12
    assert abs(sum(rec.photon_dist) - rec.trace_re) <= 1e-10
    assert abs(sum(rec.photon_dist) - 1) <= 1e-10
    assert rec.purity <= 1 + 1e-10
    assert 0 <= rec.fidelity_vs_ref <= 1 + 1e-10


def test_record_mixed_reference_is_nan():
    rec = observe(make_state(Thermal(0.3), Truncation(4)), 0.0, Thermal(0.3))
    assert math.isnan(rec.fidelity_vs_ref)


def test_husimi_vacuum_peak():
    q = husimi_q(make_state(Fock(0), Truncation(10)), QGrid(-3, 3, -3, 3, 61))
    xs, ys = q.axes()
    i, j = np.unravel_index(np.argmax(q.values), q.values.shape)
    assert xs[j] == 0 and ys[i] == 0
    assert abs(q.values[i, j] - 1 / math.pi) <= 1e-10


def test_husimi_nonnegative_and_normalized():
    rho = evolve_kraus(random_states(Truncation(12), 1, seed=4)[0], ChannelParams(0.5, 0.1, 1.0))
    q = husimi_q(rho, QGrid(-6, 6, -6, 6, 121))
    assert q.values.min() >= -1e-12
    total = q.values.sum() * q.cell_area
    assert total <= 1 + 1e-3
    assert total > 0.95


def test_husimi_orientation():
    q = husimi_q(make_state(Coherent(1.0 + 2.0j), Truncation(20)), QGrid(-4, 4, -4, 4, 81))
    xs, ys = q.axes()
    i, j = np.unravel_index(np.argmax(q.values), q.values.shape)
    assert (xs[j], ys[i]) == pytest.approx((1.0, 2.0))


def _top_two_maxima(q):
    v = q.values
    peaks = np.argwhere((v == maximum_filter(v, size=5)) & (v > 1e-3))
    order = np.argsort(v[tuple(peaks.T)])[::-1][:2]
    xs, ys = q.axes()
    return [complex(xs[j], ys[i]) for i, j in peaks[order]]


@pytest.mark.parametrize("alpha", [2.0, 2.0j])
def test_husimi_kerr_cat_two_lobes(alpha):
    rho = evolve_kerr_unitary(make_state(Coherent(alpha), Truncation(24)), 1.0, math.pi / 2)
    a, b = _top_two_maxima(husimi_q(rho, QGrid(-4, 4, -4, 4, 81)))
    assert abs(a - b) == pytest.approx(2 * abs(alpha), abs=0.15)
    assert sorted([a, b], key=lambda z: (z.real, z.imag)) == pytest.approx(
        sorted([alpha, -alpha], key=lambda z: (complex(z).real, complex(z).imag)), abs=0.15
    )
    if isinstance(alpha, complex):
        assert abs(a.real) < 0.1 and abs(b.real) < 0.1


def test_husimi_resolution_guard():
    with pytest.raises(ValueError):
        husimi_q(make_state(Fock(0), Truncation(3)), QGrid(-1, 1, -1, 1, 1))

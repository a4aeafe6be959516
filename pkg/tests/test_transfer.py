import math
import threading

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracle import norm as oracle_norm
from systems import random_descriptor
from specvalset import StateSpaceSystem, TransferEvaluator
from specvalset.counters import Counters
from specvalset.transfer import second_derivative_hermitian

ZERO = StateSpaceSystem.from_matrices([[0.0]])


@pytest.mark.parametrize("mode", ["lu", "hessenberg"])
def test_scalar_norm_and_pole(mode):
    ev = TransferEvaluator(ZERO, mode=mode)
    assert ev.norm(2.0) == pytest.approx(0.5)
    t = ev.norm_at(0.0)
    assert t.sigma == math.inf and t.pole


def test_diagonal_resolvent_norm():
    ev = TransferEvaluator(StateSpaceSystem.from_matrices(np.diag([-1.0, -2.0])))
    assert ev.norm(0.0) == pytest.approx(1.0)


@pytest.mark.parametrize("path", ["sigma-min", "full"])
def test_scalar_horizontal_derivatives(path):
    ev = TransferEvaluator(ZERO, path=path)
    b = ev.derivatives_horizontal(2.0, 0.0, want_second=True)
    assert (b.value, b.first, b.second) == pytest.approx((0.5, -0.25, 0.25))
    b = ev.derivatives_horizontal(0.0, 1.0, want_second=True)
    assert b.value == pytest.approx(1.0) and abs(b.first) < 1e-15


@pytest.mark.parametrize("theta", [0.0, 1.0, 4.0])
def test_scalar_radial_derivatives(theta):
    b = TransferEvaluator(ZERO).derivatives_radial(2.0, theta, want_second=True)
    assert (b.value, b.first, b.second) == pytest.approx((0.5, -0.25, 0.25))


def test_pole_bundle():
    b = TransferEvaluator(ZERO).derivatives_horizontal(0.0, 0.0)
    assert b.pole and b.value == math.inf


def test_second_derivative_scalar_reduction():
    # For 1x1 G the sum only has the -sigma eigenvalue, giving Re(u d2G v) + Im(u dG v)^2/sigma.
    g, dg, d2g = 0.7 * np.exp(0.3j), 0.2 - 0.5j, 1.1 + 0.4j
    U, s, Vh = np.linalg.svd(np.array([[g]]))
    V = Vh.conj().T
    got = second_derivative_hermitian(s, U, V, np.array([[dg]]), np.array([[d2g]]))
    u, v = U[0, 0], V[0, 0]
    want = (np.conj(u) * d2g * v).real + (np.conj(u) * dg * v).imag ** 2 / s[0]
    assert got == pytest.approx(want)


def test_second_derivative_zero_path():
    rng = np.random.RandomState(0)
    G = rng.randn(3, 2) + 1j * rng.randn(3, 2)
    U, s, Vh = np.linalg.svd(G)
    assert second_derivative_hermitian(s, U, Vh.conj().T, np.zeros((3, 2)), np.zeros((3, 2))) == 0


@pytest.mark.parametrize("shape", [(3, 2), (2, 3), (3, 3)])
def test_second_derivative_quadratic_path(shape):
    rng = np.random.RandomState(sum(shape))
    G0, G1, G2 = (rng.randn(*shape) + 1j * rng.randn(*shape) for _ in range(3))
    path = lambda t: G0 + t * G1 + t * t * G2
    U, s, Vh = np.linalg.svd(G0)
    got = second_derivative_hermitian(s, U, Vh.conj().T, G1, 2 * G2)
    h = 1e-4
    sig = lambda t: np.linalg.norm(path(t), 2)
    fd = (sig(h) - 2 * sig(0) + sig(-h)) / h ** 2
    assert got == pytest.approx(fd, rel=1e-4)


def test_degenerate_largest_singular_value():
    ev = TransferEvaluator(StateSpaceSystem.from_matrices(np.zeros((2, 2))))
    b = ev.derivatives_horizontal(2.0, 0.0, want_second=True)
    assert b.degenerate and b.second is None
    assert b.value == pytest.approx(0.5) and b.first == pytest.approx(-0.25)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_paths_and_modes_agree(seed):
    rng = np.random.RandomState(seed)
    n = rng.randint(1, 7)
    A = rng.randn(n, n) + 1j * rng.randn(n, n)
    z = complex(*rng.randn(2)) * 2
    s = StateSpaceSystem.from_matrices(A)
    ref = oracle_norm(s.A, s.B, s.C, s.D, s.E, z)
    bundles = []
    for path in ("sigma-min", "full"):
        for mode in ("lu", "hessenberg"):
            ev = TransferEvaluator(s, mode=mode, path=path)
            assert ev.norm(z) == pytest.approx(ref, rel=1e-10)
            bundles.append(ev.derivatives_radial(abs(z), np.angle(z), want_second=True))
    if bundles[0].degenerate or bundles[0].gap < 1e-6 * bundles[0].value:
        return
    for b in bundles[1:]:
        assert b.first == pytest.approx(bundles[0].first, rel=1e-8, abs=1e-10 * b.value)
        assert b.second == pytest.approx(bundles[0].second, rel=1e-7, abs=1e-10 * b.value)


def test_sigma_min_path_needs_identity_io():
    s = StateSpaceSystem.from_matrices(np.eye(2), B=np.ones((2, 1)))
    with pytest.raises(ValueError):
        TransferEvaluator(s, path="sigma-min")


def test_descriptor_norm_matches_direct_solve():
    rng = np.random.RandomState(4)
    for _ in range(20):
        s, _ = random_descriptor(rng)
        ev = TransferEvaluator(s, mode="hessenberg")
        z = complex(*rng.randn(2))
        assert ev.norm(z) == pytest.approx(oracle_norm(s.A, s.B, s.C, s.D, s.E, z), rel=1e-10)
        np.testing.assert_allclose(ev.transfer(z), s.transfer_matrix(z), atol=1e-10)


def test_objective_and_counters():
    c = Counters()
    ev = TransferEvaluator(ZERO, counters=c)
    f = ev.objective("horizontal", 0.0, 2.0)
    sample = f(0.1)
    assert sample.f == pytest.approx(8.0) and sample.df == pytest.approx(-100.0)
    ev.norm(1.0)
    assert c.svd_evals == 2
    with pytest.raises(ValueError):
        ev.objective("diagonal", 0.0, 1.0)


def test_counter_is_thread_safe():
    c = Counters()
    ev = TransferEvaluator(StateSpaceSystem.from_matrices(np.diag([1.0, 2.0])), counters=c)

    def work():
        for k in range(200):
            ev.norm(3.0 + 0.01j * k)

    threads = [threading.Thread(target=work) for _ in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert c.svd_evals == 800

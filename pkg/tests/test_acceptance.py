"""Acceptance criteria, one test per criterion.

The terminal summary prints one PASS/FAIL line per criterion.
"""
import cmath
import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from oracle import grid_extremes, norm as oracle_norm
from systems import random_descriptor, random_normal
from specvalset import (
    EpsilonTooLarge,
    SingularE,
    SolverOptions,
    StateSpaceSystem,
    SvsProblem,
    TransferEvaluator,
    solve,
)
from specvalset.files import dumps_report, save_system
from specvalset.pencils import (
    circle_boundary_points,
    line_boundary_points,
    vertical_boundary_points,
)
from specvalset.roots import fast_search, find_root_to_the_right

SUITE_SEED = 2024
SUITE_SIZE = 50


def _diag(*values):
    return StateSpaceSystem.from_matrices(np.diag(np.asarray(values, dtype=complex)))


def _real_normal(rng, n):
    """Real normal matrix with conjugate pairs: Q blkdiag(2x2 rotations) Q^T."""
    T = np.zeros((n, n))
    k = 0
    while k < n:
        if k + 1 < n and rng.rand() < 0.7:
            a, b = rng.randn(2)
            T[k:k + 2, k:k + 2] = [[a, b], [-b, a]]
            k += 2
        else:
            T[k, k] = rng.randn()
            k += 1
    Q, _ = np.linalg.qr(rng.randn(n, n))
    return Q @ T @ Q.T


@pytest.fixture(scope="module")
def suite():
    """Random descriptor systems with oracle values and solves by both methods."""
    rng = np.random.RandomState(SUITE_SEED)
    rows = []
    t_oracle = t_improved = t_direct = 0.0
    for _ in range(SUITE_SIZE):
        system, eps = random_descriptor(rng)
        t0 = time.perf_counter()
        alpha, rho, h = grid_extremes(system, eps)
        t1 = time.perf_counter()
        improved = {m: solve(SvsProblem(system, eps, mode=m)) for m in ("abscissa", "radius")}
        t2 = time.perf_counter()
        direct = {m: solve(SvsProblem(system, eps, mode=m,
                                      options=SolverOptions(method="direct")))
                  for m in ("abscissa", "radius")}
        t3 = time.perf_counter()
        t_oracle += t1 - t0
        t_improved += t2 - t1
        t_direct += t3 - t2
        rows.append(dict(system=system, eps=eps, oracle={"abscissa": alpha, "radius": rho},
                         h=h, improved=improved, direct=direct))
    return dict(rows=rows, t_oracle=t_oracle, t_improved=t_improved, t_direct=t_direct)


def test_criterion_01_normal_closed_form(criterion):
    with criterion(1, "normal-matrix closed form") as rec:
        rng = np.random.RandomState(1)
        t0 = time.perf_counter()
        worst = 0.0
        for trial in range(25):
            n = rng.randint(1, 21)
            if trial % 3 == 0:
                A, lam = random_normal(rng, n)
            elif trial % 3 == 1:
                S = rng.randn(n, n)
                A = S + S.T
                lam = np.linalg.eigvalsh(A)
            else:
                A = _real_normal(rng, n)
                lam = np.linalg.eigvals(A)
            system = StateSpaceSystem.from_matrices(A)
            alpha, rho = np.max(lam.real), np.max(np.abs(lam))
            for eps in (1e-3, 0.1, 1.0):
                a = solve(SvsProblem(system, eps, mode="abscissa")).eta
                r = solve(SvsProblem(system, eps, mode="radius")).eta
                ea = abs(a - (alpha + eps)) / max(1.0, abs(alpha) + eps)
                er = abs(r - (rho + eps)) / (rho + eps)
                worst = max(worst, ea, er)
                assert ea <= 1e-10, (trial, eps, a, alpha + eps)
                assert er <= 1e-10, (trial, eps, r, rho + eps)
        elapsed = time.perf_counter() - t0
        rec.detail = f"worst rel err {worst:.1e}, {elapsed:.1f}s"
        assert elapsed < 30.0


def test_criterion_02_grid_oracle(criterion, suite):
    with criterion(2, "grid-oracle agreement") as rec:
        worst = 0.0
        bad = []
        for k, row in enumerate(suite["rows"]):
            for mode in ("abscissa", "radius"):
                err = abs(row["improved"][mode].eta - row["oracle"][mode]) / row["h"]
                worst = max(worst, err)
                if not err <= 2.0:
                    bad.append((k, mode, row["improved"][mode].eta, row["oracle"][mode]))
        elapsed = suite["t_oracle"] + suite["t_improved"]
        rec.detail = f"worst |eta - oracle| = {worst:.2f} h, {elapsed:.0f}s"
        assert not bad, bad
        assert elapsed < 300.0


def test_criterion_03_method_agreement(criterion, suite):
    with criterion(3, "improved vs line-search agreement") as rec:
        flagged = 0
        bad = []
        for k, row in enumerate(suite["rows"]):
            for mode in ("abscissa", "radius"):
                a, b = row["improved"][mode], row["direct"][mode]
                if abs(a.eta - b.eta) <= 1e-8 * max(1.0, abs(a.eta)):
                    continue
                if any(d.startswith("suspected-rounding") for d in b.diagnostics):
                    flagged += 1
                    continue
                bad.append((k, mode, a.eta, b.eta))
        rec.detail = f"{2 * len(suite['rows'])} pairs, {flagged} flagged"
        assert not bad, bad


def test_criterion_04_pencil_round_trip(criterion, suite):
    with criterion(4, "pencil/transfer round trip") as rec:
        checked = 0
        worst = 0.0
        for row in suite["rows"]:
            system, eps = row["system"], row["eps"]
            problem = SvsProblem(system, eps)
            ev = TransferEvaluator(system)
            gamma = 1.0 / eps
            alpha = row["improved"]["abscissa"].eta
            rho = row["improved"]["radius"].eta
            lam0 = row["improved"]["abscissa"].lambda0
            sets = []
            for frac in (0.01, 0.1, 0.5):
                sets.append(vertical_boundary_points(problem, alpha - frac * eps, ev=ev))
                if rho - frac * eps > 0:
                    sets.append(circle_boundary_points(problem, rho - frac * eps, ev=ev))
            for theta in (0.3, 1.9, 4.0):
                s = (lam0 * cmath.exp(-1j * theta)).imag
                sets.append(line_boundary_points(problem, theta, s, ev=ev))
            for pts in sets:
                for z in pts.points():
                    value = oracle_norm(system.A, system.B, system.C, system.D, system.E, z)
                    err = abs(value - gamma) / gamma
                    worst = max(worst, err)
                    checked += 1
                    assert err <= 1e-7, (pts.geometry, pts.level, z, value, gamma)
        rec.detail = f"{checked} points, worst rel residual {worst:.1e}"
        assert checked > 0


def test_criterion_05_scalar_closed_forms(criterion):
    with criterion(5, "scalar closed forms") as rec:
        zero = StateSpaceSystem.from_matrices([[0.0]])
        p = SvsProblem(zero, 0.5)
        np.testing.assert_allclose(vertical_boundary_points(p, 0.0).ordinates,
                                   [-0.5, 0.5], rtol=0, atol=1e-10)
        np.testing.assert_allclose(vertical_boundary_points(p, 0.3).ordinates,
                                   [-0.4, 0.4], rtol=0, atol=1e-10)
        assert len(vertical_boundary_points(p, 0.6).ordinates) == 0
        np.testing.assert_allclose(line_boundary_points(p, 0.0, 0.0).ordinates,
                                   [-0.5, 0.5], rtol=0, atol=1e-10)
        np.testing.assert_allclose(line_boundary_points(p, 0.0, 0.3).ordinates,
                                   [-0.4, 0.4], rtol=0, atol=1e-10)

        disks = SvsProblem(_diag(-1.0, -2.0), 0.1)
        np.testing.assert_allclose(vertical_boundary_points(disks, -0.95).ordinates,
                                   [-math.sqrt(0.01 - 0.0025), math.sqrt(0.01 - 0.0025)],
                                   rtol=0, atol=1e-10)

        shifted = StateSpaceSystem.from_matrices([[0.3]])
        c = math.acos(0.15)
        np.testing.assert_allclose(circle_boundary_points(SvsProblem(shifted, 1.0), 1.0).ordinates,
                                   [c, 2 * math.pi - c], rtol=0, atol=1e-10)
        assert len(circle_boundary_points(SvsProblem(shifted, 0.5), 1.0).ordinates) == 0
        rec.detail = "vertical, line and circle cases"


def _fd(fun, t, h):
    f1, f_1 = fun(t + h), fun(t - h)
    f2, f_2 = fun(t + 2 * h), fun(t - 2 * h)
    f0 = fun(t)
    d1 = (8 * (f1 - f_1) - (f2 - f_2)) / (12 * h)
    d2 = (16 * (f1 + f_1) - (f2 + f_2) - 30 * f0) / (12 * h * h)
    return d1, d2


def test_criterion_06_derivative_suites(criterion):
    with criterion(6, "derivative suites vs finite differences") as rec:
        rng = np.random.RandomState(6)
        samples = 0
        worst1 = worst2 = 0.0
        attempts = 0
        while samples < 150:
            attempts += 1
            assert attempts < 2000
            system, eps = random_descriptor(rng)
            ev = TransferEvaluator(system)
            eig = np.linalg.eigvals(np.linalg.solve(system.E, system.A))
            z = eig[rng.randint(len(eig))] + eps * cmath.exp(2j * math.pi * rng.rand()) * rng.uniform(0.5, 3)
            kind = ("horizontal", "radial")[samples % 2]
            if kind == "horizontal":
                x, y = z.real, z.imag
                bundle = ev.derivatives_horizontal(x, y, want_second=True)
                fun = lambda t: oracle_norm(system.A, system.B, system.C, system.D,
                                            system.E, complex(t, y))
                t0 = x
            else:
                r, theta = abs(z), cmath.phase(z)
                if r < 1e-3:
                    continue
                bundle = ev.derivatives_radial(r, theta, want_second=True)
                fun = lambda t: oracle_norm(system.A, system.B, system.C, system.D,
                                            system.E, t * cmath.exp(1j * theta))
                t0 = r
            if bundle.degenerate or bundle.pole or bundle.gap < 1e-3 * bundle.value:
                continue
            h = 1e-3 * max(1.0, abs(t0))
            d1, d2 = _fd(fun, t0, h)
            d1h, d2h = _fd(fun, t0, h / 2)
            # Skip samples whose difference quotients have not settled.
            if abs(d2 - d2h) > 1e-6 * max(1.0, abs(d2h)):
                continue
            e1 = abs(bundle.first - d1h) / max(1.0, abs(d1h))
            e2 = abs(bundle.second - d2h) / max(1.0, abs(d2h))
            worst1, worst2 = max(worst1, e1), max(worst2, e2)
            assert e1 <= 1e-6, (kind, z, bundle.first, d1h)
            assert e2 <= 1e-4, (kind, z, bundle.second, d2h)
            samples += 1
        rec.detail = f"{samples} samples, worst sigma' {worst1:.1e}, sigma'' {worst2:.1e}"


def _check_trace(report):
    it = report.iterates
    assert all(b > a for a, b in zip(it, it[1:])), it
    assert report.eta == it[-1]
    assert report.termination in ("no-progress", "no-cross-sections"), report.termination
    events = report.events
    levels = [k for k, e in enumerate(events) if e["kind"] == "level"]
    assert levels, "no level search before termination"
    last = levels[-1]
    assert math.isclose(events[last]["eta"], report.eta) or report.method == "direct"
    assert not any(e["progress"] for e in events[last:])
    if report.termination == "no-cross-sections":
        assert events[-1]["kind"] == "level" and events[-1]["sections"] == 0
    elif report.mode == "radius" and report.method == "improved":
        assert events[-1]["kind"] == "escape"
        assert report.escape_events >= 1


def test_criterion_07_monotone_and_termination(criterion, suite):
    with criterion(7, "monotone iterates and termination") as rec:
        count = 0
        for row in suite["rows"]:
            for method in ("improved", "direct"):
                for mode in ("abscissa", "radius"):
                    _check_trace(row[method][mode])
                    count += 1
        rec.detail = f"{count} solves"


def test_criterion_08_interior_circle_escape(criterion):
    with criterion(8, "interior-circle escape") as rec:
        inner = StateSpaceSystem.from_matrices(np.diag([0.5, -0.3]), np.diag([1.0, 10.0]))
        # With no extra initial angles the first circle, |lam| = 0.7, lies in
        # the set and touches its boundary at a single point.
        cases = [
            ("four disks", _diag(0.9, 0.9j, -0.9, -0.9j), 0.5, 3),
            ("circle inside", inner, 0.1, 3),
            ("tangent circle inside", inner, 0.1, 0),
        ]
        notes = []
        for name, system, eps, angles in cases:
            _, rho, h = grid_extremes(system, eps)
            for seed in range(10):
                opts = SolverOptions(seed=seed, random_angles=angles)
                report = solve(SvsProblem(system, eps, mode="radius", options=opts))
                assert report.escape_events >= 1, (name, seed)
                assert abs(report.eta - rho) <= 2 * h, (name, seed, report.eta, rho)
            notes.append(f"{name}: eta {report.eta:.6f} vs oracle {rho:.6f}")
        rec.detail = "; ".join(notes)


def _exhaustive(eta0, candidates, kind, ev, eps):
    best = eta0
    for psi in candidates:
        fun = ev.objective(kind, psi, 1.0 / eps)
        s0 = fun(eta0)
        if not s0.f > 0:
            continue
        res = find_root_to_the_right(fun, eta0, ftol=1e-12 / eps, sample0=s0)
        best = max(best, res.root)
    return best


def test_criterion_09_fast_search_accounting(criterion):
    with criterion(9, "fast_search skip logic") as rec:
        cases = [
            (_diag(0.0, -0.4 + 0.9j), 0.5, 0.05, [0.9, 0.0], "horizontal", 0.5),
            (_diag(0.6, 0.4j), 0.3, 0.6, [math.pi / 2, 0.0], "radial", 0.9),
        ]
        for system, eps, eta0, cands, kind, expected in cases:
            ev = TransferEvaluator(system)
            fs = fast_search(eta0, cands, kind, ev, eps)
            assert fs.solved < fs.requested, (fs.solved, fs.requested)
            ref = _exhaustive(eta0, cands, kind, ev, eps)
            assert abs(fs.eta - ref) <= 1e-10 * max(1.0, ref)
            assert abs(fs.eta - expected) <= 1e-10
        rng = np.random.RandomState(9)
        skipped = 0
        for _ in range(20):
            system, eps = random_descriptor(rng, n=4)
            ev = TransferEvaluator(system)
            eig = np.linalg.eigvals(np.linalg.solve(system.E, system.A))
            lam0 = eig[np.argmax(eig.real)]
            cands = list(rng.uniform(lam0.imag - 1, lam0.imag + 1, 4)) + [lam0.imag]
            fs = fast_search(lam0.real, cands, "horizontal", ev, eps)
            ref = _exhaustive(lam0.real, cands, "horizontal", ev, eps)
            assert fs.solved <= fs.requested
            assert abs(fs.eta - ref) <= 1e-10 * max(1.0, abs(ref)), (fs.eta, ref)
            skipped += fs.requested - fs.solved
        rec.detail = f"constructed cases skip; {skipped} skips on 20 random batches"


def test_criterion_10_validation(criterion):
    with criterion(10, "validation and infinite eigenvalues") as rec:
        s = StateSpaceSystem.from_matrices(np.eye(2), D=2 * np.eye(2))
        with pytest.raises(EpsilonTooLarge):
            solve(SvsProblem(s, 0.6))
        with pytest.raises(EpsilonTooLarge):
            solve(SvsProblem(s, 0.5))
        for E in (np.zeros((2, 2)), np.diag([1.0, 0.0])):
            with pytest.raises(SingularE):
                solve(SvsProblem(StateSpaceSystem.from_matrices(np.eye(2), E=E), 0.1))
        inf_system = StateSpaceSystem.from_matrices(np.eye(2), E=np.diag([1.0, 0.0]))
        relaxed = SolverOptions(require_invertible_e=False)
        for mode in ("abscissa", "radius"):
            for method in ("improved", "direct"):
                opts = SolverOptions(require_invertible_e=False, method=method)
                report = solve(SvsProblem(inf_system, 0.1, mode=mode, options=opts))
                assert report.eta == math.inf
                assert report.termination == "infinite-eigenvalue"
        assert relaxed.require_invertible_e is False
        rec.detail = "eps*||D|| >= 1, singular E, infinite eigenvalue"


def _strip_time(text):
    doc = json.loads(text)
    doc["environment"].pop("wall_time")
    return doc


def test_criterion_11_determinism(criterion, tmp_path):
    with criterion(11, "determinism") as rec:
        rng = np.random.RandomState(11)
        runs = 0
        for _ in range(5):
            system, eps = random_descriptor(rng)
            for mode in ("abscissa", "radius"):
                for method in ("improved", "direct"):
                    opts = SolverOptions(method=method, seed=7)
                    a = solve(SvsProblem(system, eps, mode=mode, options=opts))
                    b = solve(SvsProblem(system, eps, mode=mode, options=opts))
                    assert a.to_dict() == b.to_dict()
                    assert _strip_time(dumps_report(a, 1.0)) == _strip_time(dumps_report(b, 2.0))
                    runs += 1
        save_system(tmp_path / "sys", system, eps)
        docs = []
        for k in range(2):
            out = tmp_path / f"r{k}.json"
            subprocess.run([sys.executable, "-m", "specvalset", "radius", "--system",
                            str(tmp_path / "sys"), "--seed", "3", "--report", str(out)],
                           check=True, capture_output=True)
            docs.append(_strip_time(out.read_text()))
        assert docs[0] == docs[1]
        rec.detail = f"{runs} in-process pairs and two CLI runs identical"


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))

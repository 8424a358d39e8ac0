"""Spectral forward solvers, Duhamel cross-check and observation synthesis."""

import math
import warnings

import numpy as np
import pytest

from postincident.errors import ConfigError, PointOutsideDomain, TruncationWarning, UnsupportedDomain
from postincident.forward import (
    ObservationRecord,
    add_noise,
    duhamel_convolve,
    homogeneous_solution,
    observe,
    posterior_coefficients,
    read_csv,
    solve_heat,
    solve_wave,
    time_grid,
)
from postincident.sources import Bump, ModeCombination, Ramp, SmoothBump, StepDecay, Table, exponential_moment
from postincident.inverse import build_nonuniqueness_example
from postincident.spectra import Disk, Interval, enumerate_spectrum, project

DOM = Interval(1.0)
SPEC = enumerate_spectrum(DOM, 128)
PHI1 = ModeCombination.of(DOM, {1: 1.0})
LAM1 = math.pi**2


@pytest.fixture(autouse=True)
def _quiet_truncation():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        yield


def test_zero_source_gives_zero_field():
    for solver in (solve_heat, solve_wave):
        sol = solver(SPEC, SmoothBump((0.4,), 0.2), Table.zero(1.0), 32)
        assert not np.any(sol.evaluate(np.linspace(0, 1, 9), [0.3, 1.0, 2.5]))


def test_heat_constant_source_first_mode():
    T = 1.0
    sol = solve_heat(SPEC, PHI1, Table.constant(T), 4)
    t = np.array([0.1, 0.5, 0.9, 1.0])
    np.testing.assert_allclose(sol.coefficients(t)[:, 0], (1 - np.exp(-LAM1 * t)) / LAM1, rtol=1e-13)


def test_heat_post_source_form():
    T = 1.0
    sol = solve_heat(SPEC, PHI1, Table.constant(T), 4)
    t = np.array([1.01, 1.3, 2.0])
    scaled = sol.coefficients(t)[:, 0] * np.exp(LAM1 * t)
    np.testing.assert_allclose(scaled, exponential_moment(Table.constant(T), LAM1), rtol=1e-9)


def test_heat_posterior_gamma():
    T = 1.0
    post = posterior_coefficients(solve_heat(SPEC, PHI1, Table.constant(T), 4))
    assert post.gamma[0].value() == pytest.approx((math.exp(LAM1 * T) - 1) / LAM1, rel=1e-12)
    assert post.gamma[1].value() == 0.0


def test_heat_posterior_matches_coefficients():
    mu = Bump(1.0, 0.5, 0.4)
    sol = solve_heat(SPEC, SmoothBump((0.37,), 0.25), mu, 12)
    post = posterior_coefficients(sol)
    t = 1.2
    expected = np.array([g.mantissa * math.exp(g.log_scale - s * t) for g, s in zip(post.gamma, post.sigma)])
    np.testing.assert_allclose(sol.coefficients([t])[0], expected, rtol=1e-10, atol=1e-300)


def test_nonuniqueness_posterior_is_zero():
    mu = build_nonuniqueness_example(SPEC, 1.0)
    post = posterior_coefficients(solve_heat(SPEC, PHI1, mu, 4))
    assert abs(post.gamma[0].value()) < 1e-12 * math.exp(LAM1)


def test_wave_narrow_pulse_limit():
    w1 = math.pi
    t = np.linspace(0.2, 2.0, 10)
    errs = []
    for width in (2e-3, 1e-3):
        mu = Bump.unit_mass(2 * width, width, width)
        c = solve_wave(SPEC, PHI1, mu, 2).coefficients(t)[:, 0]
        np.testing.assert_allclose(c, np.sin(w1 * (t - width)) / w1, atol=1e-4)
        errs.append(np.max(np.abs(c - np.sin(w1 * t) / w1)))
    # the remaining discrepancy is the pulse delay, linear in the width
    assert errs[1] == pytest.approx(errs[0] / 2, rel=0.05)


def test_wave_posterior_matches_ramp_closed_forms():
    T = 1.0
    sol = solve_wave(SPEC, PHI1, Ramp(T), 4)
    post = posterior_coefficients(sol)
    w = math.pi
    A = (1 - math.cos(w * T)) / w**2  # int (T - s) cos(ws) ds
    B = T / w - math.sin(w * T) / w**2  # int (T - s) sin(ws) ds
    assert post.a[0] == pytest.approx(A / w, rel=1e-12)
    assert post.b[0] == pytest.approx(-B / w, rel=1e-12)
    t = np.array([1.2, 1.7, 3.1])
    np.testing.assert_allclose(
        sol.coefficients(t)[:, 0], post.a[0] * np.sin(w * t) + post.b[0] * np.cos(w * t), rtol=1e-12
    )


def test_wave_post_source_modal_invariant():
    sol = solve_wave(SPEC, SmoothBump((0.37,), 0.25), Bump(1.0, 0.5, 0.45), 32)
    t = np.array([1.05, 1.7, 2.9, 5.3])
    c, v = sol.coefficients(t), sol.velocity(t)
    inv = c**2 + v**2 / sol.sigma
    np.testing.assert_allclose(inv, np.broadcast_to(inv[0], inv.shape), rtol=1e-9, atol=1e-15 * np.max(inv))


def test_wave_energy_constant_after_source():
    sol = solve_wave(SPEC, SmoothBump((0.37,), 0.25), Ramp(1.0), 64)
    e = sol.energy(np.linspace(1.0, 6.0, 23))
    assert np.max(np.abs(e - e[0])) <= 1e-10 * e[0]
    post = posterior_coefficients(sol)
    assert np.sum(post.modal_energy()) == pytest.approx(e[0], rel=1e-10)


def test_heat_decay_bound_after_source():
    sol = solve_heat(SPEC, SmoothBump((0.37,), 0.25), Ramp(1.0), 64)
    T = 1.0
    norm_T = math.sqrt(sol.energy([T])[0])
    for t in (1.01, 1.1, 1.5, 3.0):
        assert math.sqrt(sol.energy([t])[0]) <= norm_T * math.exp(-LAM1 * (t - T)) * (1 + 1e-12)


def test_heat_coefficients_continuous_at_support_end():
    sol = solve_heat(SPEC, SmoothBump((0.37,), 0.25), Ramp(1.0), 16)
    before, after = sol.coefficients([1.0 - 1e-12, 1.0 + 1e-12])
    np.testing.assert_allclose(before, after, atol=1e-12)


def test_neumann_zero_mode_identity():
    dom = Interval(1.0, "neumann")
    spec = enumerate_spectrum(dom, 64)
    f = SmoothBump((0.4,), 0.3)
    x0, T_star, a = 0.5, 3.0, 0.2
    # zero-mode part (f, phi_0) phi_0(x0) = int f / |Omega|
    mean_f = project(spec, f, 1).flat()[0] / math.sqrt(dom.length)
    u = {}
    for t0 in (0.3, 0.4):
        u[t0] = solve_heat(spec, f, StepDecay(t0, a), 64).evaluate([x0], [T_star])[0, 0]
    R = u[0.4] - u[0.3] - 0.1 * mean_f
    assert abs(R) <= 0.1 * 2 * math.exp(-LAM1 * (T_star - 0.4 - a))


def test_disk_forward_unsupported():
    with pytest.raises(UnsupportedDomain):
        solve_heat(enumerate_spectrum(Disk(), 5), SmoothBump((0.0, 0.0), 0.3), Ramp(1.0), 3)


def test_wave_needs_dirichlet():
    with pytest.raises(UnsupportedDomain):
        solve_wave(enumerate_spectrum(Interval(1.0, "neumann"), 5), PHI1, Ramp(1.0), 3)


def test_truncation_warning():
    with warnings.catch_warnings():
        warnings.simplefilter("error", TruncationWarning)
        sol = solve_heat(SPEC, SmoothBump((0.37,), 0.05), Ramp(1.0), 8)
        with pytest.raises(TruncationWarning):
            sol.evaluate([0.37], [0.5])


# ---------------------------------------------------------------------------
# Duhamel convolution cross-check
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("equation", ["heat", "wave"])
def test_duhamel_agrees_with_modal_solution(equation):
    f = SmoothBump((0.37,), 0.25)
    rng = np.random.default_rng(11)
    knots = np.concatenate([[0.0], np.sort(rng.uniform(0.05, 0.95, 4)), [1.0]])
    mu = Table(tuple(knots), tuple(rng.uniform(-1, 1, knots.size - 1).tolist() + [0.0]))
    solver = solve_heat if equation == "heat" else solve_wave
    sol = solver(SPEC, f, mu, 32)
    v = homogeneous_solution(SPEC, f, equation, 32)
    times = [0.4, 1.0, 1.6]
    conv = duhamel_convolve(v, mu, times)
    ref = sol.coefficients(times)
    for row, r in zip(conv, ref):
        assert np.linalg.norm(row - r) < 1e-6 * np.linalg.norm(r)


def test_duhamel_zero_source():
    v = homogeneous_solution(SPEC, SmoothBump((0.37,), 0.25), "heat", 16)
    assert not np.any(duhamel_convolve(v, Table.zero(1.0), [0.5, 1.5]))


def test_duhamel_field_values():
    f = SmoothBump((0.37,), 0.25)
    mu = Ramp(1.0)
    v = homogeneous_solution(SPEC, f, "wave", 48)
    got = duhamel_convolve(v, mu, [1.3], points=[[0.2], [0.6]])
    ref = solve_wave(SPEC, f, mu, 48).evaluate([[0.2], [0.6]], [1.3])
    np.testing.assert_allclose(got, ref, rtol=1e-6, atol=1e-9)


# ---------------------------------------------------------------------------
# observations
# ---------------------------------------------------------------------------


def test_time_grid_uniform():
    t = time_grid(1.1, 1.5, 0.01)
    assert t[0] == 1.1 and t.size == 41
    assert np.max(np.abs(np.diff(t) - 0.01)) < 1e-12


def test_node_observation_vanishes():
    f = ModeCombination.of(DOM, {2: 1.0})
    sol = solve_heat(SPEC, f, Ramp(1.0), 4)
    rec = observe(sol, "point", time_grid(1.1, 1.5, 0.05), [[0.5]])
    assert np.max(np.abs(rec.values)) < 1e-15


def test_noise_free_record_is_exact_evaluation():
    sol = solve_heat(SPEC, SmoothBump((0.37,), 0.25), Bump(1.0, 0.5, 0.4), 64)
    t = time_grid(1.02, 1.5, 0.01)
    rec = observe(sol, "point", t, [[0.3], [0.6]])
    np.testing.assert_array_equal(rec.values, sol.evaluate([[0.3], [0.6]], t))
    rec0 = observe(sol, "point", t, [[0.3]], noise={"model": "gaussian", "delta": 0.0, "seed": 1})
    np.testing.assert_array_equal(rec0.values[:, 0], rec.values[:, 0])


def test_flux_observation():
    sol = solve_heat(SPEC, SmoothBump((0.37,), 0.25), Ramp(1.0), 64)
    t = time_grid(1.1, 1.2, 0.05)
    rec = observe(sol, "flux", t, [[0.0], [1.0]])
    c = sol.coefficients(t)
    n = np.arange(1, 65)
    d0 = -math.sqrt(2) * n * math.pi
    d1 = math.sqrt(2) * n * math.pi * np.cos(n * math.pi)
    np.testing.assert_allclose(rec.values, np.column_stack([c @ d0, c @ d1]), rtol=1e-12, atol=1e-15)


def test_observation_outside_domain():
    sol = solve_heat(SPEC, PHI1, Ramp(1.0), 4)
    with pytest.raises(PointOutsideDomain):
        observe(sol, "point", [1.5], [[1.5]])


def test_noise_is_seeded_and_relative():
    v = np.linspace(-2.0, 1.0, 200)[:, None]
    a = add_noise(v, "gaussian", 1e-3, 5)
    b = add_noise(v, "gaussian", 1e-3, 5)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, add_noise(v, "gaussian", 1e-3, 6))
    u = add_noise(v, "uniform", 1e-2, 0)
    assert np.max(np.abs(u - v)) <= 2e-2


def test_record_post_incident_guard():
    with pytest.raises(ConfigError):
        ObservationRecord("point", [0.9, 1.0], [0.0, 0.0], source_end=1.0)
    with pytest.raises(ConfigError):
        ObservationRecord("point", [1.1, 1.2, 1.35], [0.0, 0.0, 0.0])


def test_csv_round_trip_is_exact():
    sol = solve_heat(SPEC, SmoothBump((0.37,), 0.25), Ramp(1.0), 64)
    rec = observe(sol, "point", time_grid(1.02, 1.2, 0.02), [[0.3], [0.7]])
    text = rec.to_csv()
    assert text.splitlines()[0] == "t,value,value2"
    assert "\r" not in text
    back = ObservationRecord.from_csv(text)
    np.testing.assert_array_equal(back.values, rec.values)
    np.testing.assert_array_equal(back.times, rec.times)


@pytest.mark.parametrize("text", ["", "t,value\n", "t,value\n1.0,abc\n", "t,value\n1.0,2.0,3.0\n", "t,value\n1.0,nan\n"])
def test_malformed_csv(text):
    with pytest.raises(ConfigError):
        read_csv(text)

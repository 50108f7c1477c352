import math

import numpy as np
import pytest

from sfagauge import saddle
from sfagauge.field import MonochromaticField, PulseParams
from sfagauge.saddle import (EmptyResultError, SaddleCoalescenceError, saddle_velocities, solve_saddles,
                             spa_amplitude, spa_spectrum, with_state)
from sfagauge.sfa import spectrum
from sfagauge.spectra import find_spectral_dips, find_spectral_peaks
from sfagauge.states import BoundStateModel, StateKind

S = BoundStateModel(StateKind.S_EVEN)
P = BoundStateModel(StateKind.P_ODD)
MONO = MonochromaticField(n_cycles=3)


def test_residuals_random_momenta(pulse, rng):
    for _ in range(50):
        p = rng.uniform(-1.2, 1.2, 3)
        try:
            sols = solve_saddles(p, pulse, 0.5)
        except EmptyResultError:
            continue
        for s in sols:
            assert s.residual < 1e-9
            assert s.t_s.imag > 0
            assert 0 <= s.t_s.real <= pulse.duration
            v = s.velocity
            assert abs(complex(v @ v) + 1.0) < 1e-9


def test_analytic_root_at_rest():
    sols = solve_saddles(np.zeros(3), MONO, 0.5)
    gamma = math.sqrt(2 * 0.5) * MONO.omega / MONO.e0
    assert gamma == pytest.approx(0.67146, abs=5e-6)
    # closed form: asinh(0.67146) = 0.629131
    assert math.asinh(gamma) == pytest.approx(0.629131, abs=5e-6)
    w = MONO.omega
    for s in sols:
        assert w * s.t_s.imag == pytest.approx(math.asinh(gamma), abs=1e-8)
        phase = (w * s.t_s.real) % (2 * math.pi)
        assert min(abs(phase - math.pi / 2), abs(phase - 3 * math.pi / 2)) < 1e-8
    assert len(sols) == 2 * MONO.n_cycles


def _by_cycle(sols, w):
    groups = {}
    for s in sols:
        groups.setdefault(int(w * s.t_s.real // (2 * math.pi)), []).append(s)
    return [g for g in groups.values() if len(g) == 2]


@pytest.mark.parametrize("p_par", [0.5, -0.3, 0.9])
def test_sign_pattern_per_cycle(p_par):
    w = MONO.omega
    pairs = _by_cycle(solve_saddles(np.array([0, 0, p_par]), MONO, 0.5), w)
    assert pairs
    for a, b in pairs:
        ca, cb = math.cos(w * a.t_s.real), math.cos(w * b.t_s.real)
        sa, sb = math.sin(w * a.t_s.real), math.sin(w * b.t_s.real)
        assert np.sign(ca) == np.sign(cb)
        assert np.sign(sa) == -np.sign(sb)
        va, vb = a.velocity[2], b.velocity[2]
        assert va == pytest.approx(-vb, abs=1e-8)


@pytest.mark.parametrize("p_perp,expected", [(0.0, 1.0), (0.3, 1.04403)])
def test_velocities_monochromatic(p_perp, expected):
    sols = solve_saddles(np.array([p_perp, 0, 0.2]), MONO, 0.5)
    v = saddle_velocities(sols)
    exact = math.sqrt(1 + p_perp**2)
    assert exact == pytest.approx(expected, abs=5e-6)
    np.testing.assert_allclose(np.abs(v[:, 2].real), 0, atol=1e-8)
    np.testing.assert_allclose(np.abs(v[:, 2].imag), exact, atol=1e-8)
    assert {np.sign(x.imag) for x in v[:, 2]} == {-1.0, 1.0}


def test_no_field_no_saddles():
    with pytest.raises(EmptyResultError):
        solve_saddles(np.array([0, 0, 0.4]), PulseParams(e0=0.0), 0.5)


def test_pulse_velocities_satisfy_equation_only(pulse):
    v = saddle_velocities(solve_saddles(np.array([0.0, 0.0, 0.7]), pulse, 0.5))
    np.testing.assert_allclose(np.sum(v * v, axis=1), -1.0, atol=1e-9)


def test_parity_of_form_factors_per_pair():
    p = np.array([0, 0, 0.4])
    w = MONO.omega
    for a, b in _by_cycle(solve_saddles(p, MONO, 0.5), w):
        a, b = with_state(a, p, P), with_state(b, p, P)
        assert a.form_factor_V == b.form_factor_V
        assert np.sign(a.velocity[2].imag) == -np.sign(b.velocity[2].imag)
        sa, sb = with_state(a, p, S), with_state(b, p, S)
        assert sa.form_factor_L == sb.form_factor_L


def test_p_length_pole_contribution_matches_quadrature(pulse):
    # the regularized contribution against the direct amplitude at a single point
    p = np.array([0, 0, 0.55])
    direct = spectrum(P, "length", pulse, [0.5 * 0.55**2]).values[0]
    spa = abs(spa_amplitude(p, "length", P, pulse)) ** 2
    assert 0.5 < spa / direct < 2.0


@pytest.mark.parametrize("state", [S, P])
@pytest.mark.parametrize("gauge", ["length", "velocity"])
def test_spa_tracks_direct(pulse, state, gauge):
    e = np.linspace(0.3, 0.9, 241)
    d = spectrum(state, gauge, pulse, e).values
    s = spa_spectrum(state, gauge, pulse, e)
    assert s.energies.size == e.size
    ratio = s.values / d
    tops = find_spectral_peaks(e, d, pulse.omega, prominence=0.05)
    assert np.all((ratio[tops] > 0.5) & (ratio[tops] < 2.0))
    for find in (find_spectral_peaks, find_spectral_dips):
        a = e[find(e, d, pulse.omega)]
        b = e[find(e, s.values, pulse.omega)]
        assert len(a) == len(b)
        assert np.all(np.abs(a - b) < pulse.omega / 4)


@pytest.mark.parametrize("state", [S, P])
@pytest.mark.parametrize("gauge", ["length", "velocity"])
def test_no_complete_interference_off_axis(pulse, state, gauge):
    e = np.linspace(0.05, 1.2, 200)
    theta = np.arcsin(np.minimum(1.0, 0.1 / np.sqrt(2 * e)))
    vals = [abs(spa_amplitude(np.sqrt(2 * en) * np.array([np.sin(th), 0, np.cos(th)]), gauge, state, pulse)) ** 2
            for en, th in zip(e, theta)]
    assert min(vals) > 0


def test_coalescence_is_flagged(pulse):
    p = np.array([0, 0, 0.6])
    sols = solve_saddles(p, pulse, 0.5)
    s = sols[0]
    bad = saddle.SaddleSolution(s.t_s, s.velocity, s.action_phase, 1e-12, s.prefactor, s.form_factor_L,
                                s.form_factor_V, s.residual)
    with pytest.raises(SaddleCoalescenceError):
        spa_amplitude(p, "length", S, pulse, solutions=[bad])


def test_spa_error_does_not_grow_with_intensity():
    e = np.linspace(0.3, 0.9, 61)
    med = []
    for e0 in (0.0834, 0.0834 * math.sqrt(2)):
        pulse = PulseParams(e0=e0)
        r = spa_spectrum(S, "length", pulse, e).values / spectrum(S, "length", pulse, e).values
        med.append(np.median(np.abs(r - 1)))
    assert med[1] <= med[0]

import numpy as np
import pytest

from sfagauge.field import PulseParams
from sfagauge.quadrature import NonConvergedError, QuadratureSpec, composite_nodes, converged_integral
from sfagauge.sfa import (amplitude_form_factor, amplitude_interaction_form, boundary_term, spectrum,
                          volkov_bra_factor)
from sfagauge.spectra import Gauge, Method
from sfagauge.states import BoundStateModel, StateKind, form_factor

S = BoundStateModel(StateKind.S_EVEN)
P = BoundStateModel(StateKind.P_ODD)
GAUGES = [Gauge.LENGTH, Gauge.VELOCITY]


def test_composite_rule_integrates_polynomials_exactly():
    x, w = composite_nodes(0.0, 3.0, 5, 12)
    assert w @ x**7 == pytest.approx(3.0**8 / 8, rel=1e-13)


def test_quadrature_spec_limits():
    with pytest.raises(ValueError):
        QuadratureSpec(order=8)
    with pytest.raises(ValueError):
        QuadratureSpec(panels_per_cycle=8)


def test_non_converged_raises():
    calls = iter(range(100))
    with pytest.raises(NonConvergedError):
        converged_integral(lambda spec: np.array([1.0 + next(calls)]), QuadratureSpec(max_doublings=2))


def test_rounding_floor_accepts_cancellation_noise():
    # a tiny result jittering at the 1e-15 level of a unit-size integrand
    jitter = iter([1e-9, 1e-9 + 1e-15, 1e-9 - 1e-15, 1e-9])
    evaluate = lambda spec: np.array([next(jitter)]) + 0j  # noqa: E731
    with pytest.raises(NonConvergedError):
        converged_integral(evaluate, QuadratureSpec(max_doublings=2))
    jitter = iter([1e-9, 1e-9 + 1e-15])
    out = converged_integral(lambda spec: (np.array([next(jitter)]) + 0j, np.array([1.0])), QuadratureSpec())
    assert out[0] == pytest.approx(1e-9)


def test_volkov_factor_after_pulse(pulse):
    p = np.array([0.1, 0.0, 0.5])
    for g in GAUGES:
        _, k = volkov_bra_factor(p, pulse.duration + 10.0, g, pulse)
        np.testing.assert_array_equal(k, p)


def test_volkov_factor_momenta(pulse):
    p = np.array([0.0, 0.2, 0.5])
    t = 250.0
    _, k_l = volkov_bra_factor(p, t, "length", pulse)
    _, k_v = volkov_bra_factor(p, t, "velocity", pulse)
    np.testing.assert_allclose(k_l, p + np.array([0, 0, pulse.vector_potential(t)]))
    np.testing.assert_array_equal(k_v, p)


@pytest.mark.parametrize("state", [S, P])
@pytest.mark.parametrize("gauge", GAUGES)
def test_zero_field_window_is_sinc(state, gauge):
    free = PulseParams(e0=0.0)
    p = np.array([0.0, 0.3, 0.9])
    omega = 0.5 * p @ p + state.ip
    t = free.duration
    ref = abs(2 * np.sin(omega * t / 2) / omega) * abs(form_factor(p, state))
    got = amplitude_form_factor(p, gauge, state, free, tails=False)
    assert abs(got) == pytest.approx(ref, rel=1e-10)


@pytest.mark.parametrize("state", [S, P])
def test_zero_field_physical_amplitude_vanishes(state):
    free = PulseParams(e0=0.0)
    p = np.array([[0.0, 0.0, 0.5], [0.2, 0.1, -0.4]])
    np.testing.assert_allclose(amplitude_form_factor(p, "length", state, free), 0, atol=1e-13)
    np.testing.assert_array_equal(amplitude_interaction_form(p, "velocity", state, free), 0)
    np.testing.assert_array_equal(amplitude_interaction_form(p, "length", state, free), 0)


def test_p_state_at_rest_vanishes_in_velocity_gauge(pulse):
    assert amplitude_form_factor(np.zeros(3), "velocity", P, pulse) == 0


@pytest.mark.parametrize("state", [S, P])
@pytest.mark.parametrize("gauge", GAUGES)
def test_integration_by_parts_identity(pulse, rng, state, gauge):
    p = rng.normal(scale=0.6, size=(20, 3))
    m8 = amplitude_interaction_form(p, gauge, state, pulse)
    m11 = amplitude_form_factor(p, gauge, state, pulse, tails=False)
    b = boundary_term(p, gauge, state, pulse)
    assert np.max(np.abs(m8 - m11 + b) / np.abs(m11)) < 1e-6


def test_identity_example_point(pulse):
    p = np.array([0.0, 0.0, 0.8])
    m8 = amplitude_interaction_form(p, "length", S, pulse)
    m11 = amplitude_form_factor(p, "length", S, pulse, tails=False)
    assert abs(m8 - m11 + boundary_term(p, "length", S, pulse)) / abs(m11) < 1e-6


def test_doubling_changes_little(pulse):
    p = np.array([[0, 0, 0.6], [0.1, 0, 1.1]])
    for g in GAUGES:
        coarse = amplitude_form_factor(p, g, P, pulse)
        fine = amplitude_form_factor(p, g, P, pulse, QuadratureSpec(panels_per_cycle=128))
        assert np.all(np.abs(np.abs(fine) ** 2 - np.abs(coarse) ** 2) <= 1e-6 * np.abs(fine) ** 2)


def test_spectrum_container(pulse):
    e = np.linspace(0.05, 1.0, 40)
    spec = spectrum(P, "length", pulse, e)
    assert spec.method is Method.SFA_DIRECT and spec.gauge is Gauge.LENGTH and spec.state_kind is StateKind.P_ODD
    assert np.all(spec.values > 0)
    np.testing.assert_allclose(spec.values, np.abs(amplitude_form_factor(spec.momenta, "length", P, pulse)) ** 2)


def test_p_state_suppressed_perpendicular(pulse):
    e = np.linspace(0.1, 1.0, 30)
    along = spectrum(P, "velocity", pulse, e).values
    perp = spectrum(P, "velocity", pulse, e, theta=np.pi / 2).values
    # in velocity gauge the form factor carries q_z = cos(pi/2) |p|, zero up to rounding
    assert np.all(perp < 1e-25 * along)
    assert np.all(along > 0)
    perp_l = spectrum(P, "length", pulse, e, theta=np.pi / 2).values
    assert np.median(perp_l) < np.median(spectrum(P, "length", pulse, e).values)


def test_s_state_gauges_agree(pulse):
    # constant form factor: both gauges produce the same amplitude
    e = np.linspace(0.1, 1.0, 20)
    np.testing.assert_allclose(spectrum(S, "length", pulse, e).values, spectrum(S, "velocity", pulse, e).values,
                               rtol=1e-12)


def test_cep_symmetry_at_zero_phase(pulse):
    e = np.linspace(0.1, 1.0, 20)
    for st in (S, P):
        fwd = spectrum(st, "length", pulse, e, theta=0.0).values
        back = spectrum(st, "length", pulse, e, theta=np.pi).values
        np.testing.assert_allclose(fwd, back, rtol=1e-9)

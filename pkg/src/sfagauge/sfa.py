"""Direct time quadrature of the SFA amplitude in length and velocity gauge.

Two equivalent routes are implemented:

* the form-factor route, integrand ``-i exp(i[S_p + Ip t]) <k(t)|V|0>``;
* the interaction route, integrand ``-i exp(i[S_p + Ip t]) <k(t)|H_I(t)|0>``.

They differ on a finite window by the boundary term
``B = [<k(t)|0> exp(i[S_p + Ip t])]_0^{T_p}``:
``M_interaction = M_form_window - B``.  Outside the pulse the
form-factor integrand does not vanish, and its field-free tails integrate
(with adiabatic switching) to exactly ``-B``.  The physical amplitude is
therefore ``M_form_window - B``, which is what ``amplitude_form_factor``
returns unless ``tails=False``.
"""

from __future__ import annotations

import numpy as np

from .field import E_CHARGE, action, kinetic_momentum
from .quadrature import QuadratureSpec, converged_integral, pulse_nodes
from .spectra import Gauge, Method, SpectrumGrid, momenta_along
from .states import BoundStateModel, form_factor, momentum_wavefunction, momentum_wavefunction_dz

_CHUNK = 64


def volkov_bra_factor(p, t, gauge, pulse):
    """Conjugate Volkov phase ``exp(+i S_p(t))`` and the plane-wave momentum of the Volkov state."""
    gauge = Gauge.parse(gauge)
    phase = np.exp(1j * action(p, t, pulse))
    if gauge is Gauge.LENGTH:
        k = kinetic_momentum(p, t, pulse)
    else:
        p = np.asarray(p, dtype=float)
        k = np.broadcast_to(p[(...,) + (np.newaxis,) * np.ndim(t) + (slice(None),)],
                            p.shape[:-1] + np.shape(t) + (3,))
    return phase, k


def _phase(momenta, t, state, pulse):
    return np.exp(1j * (action(momenta, t, pulse) + state.ip * t))


def _plane_wave_momentum(momenta, t, gauge, pulse):
    if gauge is Gauge.LENGTH:
        return kinetic_momentum(momenta, t, pulse)
    return np.broadcast_to(momenta[:, None, :], (len(momenta), len(t), 3))


def _integrand_form(momenta, t, gauge, state, pulse):
    k = _plane_wave_momentum(momenta, t, gauge, pulse)
    return -1j * _phase(momenta, t, state, pulse) * form_factor(k, state)


def _integrand_interaction(momenta, t, gauge, state, pulse):
    phase = _phase(momenta, t, state, pulse)
    if gauge is Gauge.LENGTH:
        k = kinetic_momentum(momenta, t, pulse)
        # H_I = -e z E(t);  <k|z|0> = i d<k|0>/dk_z
        dip = 1j * momentum_wavefunction_dz(k, state)
        h = -E_CHARGE * pulse.electric_field(t)[None, :] * dip
    else:
        a = pulse.vector_potential(t)[None, :]
        pz = momenta[:, 2:3]
        # H_I = -(e/m) p.A + e^2 A^2 / 2m
        h = (-E_CHARGE * pz * a + 0.5 * E_CHARGE**2 * a * a) * momentum_wavefunction(momenta, state)[:, None]
    return -1j * phase * h


def _window_integral(integrand, momenta, gauge, state, pulse, quad):
    def evaluate(spec):
        t, w = pulse_nodes(pulse, spec)
        out = np.empty(len(momenta), dtype=complex)
        l1 = np.empty(len(momenta))
        for lo in range(0, len(momenta), _CHUNK):
            f = integrand(momenta[lo:lo + _CHUNK], t, gauge, state, pulse)
            out[lo:lo + _CHUNK] = f @ w
            l1[lo:lo + _CHUNK] = np.abs(f) @ np.abs(w)
        return out, l1

    return converged_integral(evaluate, quad)


def _as_batch(p):
    p = np.asarray(p, dtype=float)
    return p.reshape(-1, 3), p.ndim == 1


def boundary_term(p, gauge, state: BoundStateModel, pulse):
    """``[<k(t)|0> exp(i[S_p(t) + Ip t])]`` between ``t = 0`` and ``t = T_p``."""
    momenta, single = _as_batch(p)
    ends = np.array([0.0, pulse.duration])
    k = _plane_wave_momentum(momenta, ends, Gauge.parse(gauge), pulse)
    b = _phase(momenta, ends, state, pulse) * momentum_wavefunction(k, state)
    out = b[:, 1] - b[:, 0]
    return out[0] if single else out


def amplitude_form_factor(p, gauge, state: BoundStateModel, pulse, quad: QuadratureSpec | None = None,
                          tails: bool = True):
    """SFA amplitude from the binding-potential form factor.

    With ``tails=False`` only the pulse window ``[0, T_p]`` is integrated;
    the default adds the analytic field-free tails outside the window.
    Accepts a single momentum ``(3,)`` or a batch ``(N, 3)``.
    """
    gauge = Gauge.parse(gauge)
    quad = quad or QuadratureSpec()
    momenta, single = _as_batch(p)
    m = _window_integral(_integrand_form, momenta, gauge, state, pulse, quad)
    if tails:
        m = m - boundary_term(momenta, gauge, state, pulse)
    return m[0] if single else m


def amplitude_interaction_form(p, gauge, state: BoundStateModel, pulse, quad: QuadratureSpec | None = None):
    """SFA amplitude from the interaction Hamiltonian over the pulse window."""
    gauge = Gauge.parse(gauge)
    quad = quad or QuadratureSpec()
    momenta, single = _as_batch(p)
    m = _window_integral(_integrand_interaction, momenta, gauge, state, pulse, quad)
    return m[0] if single else m


def spectrum(state: BoundStateModel, gauge, pulse, energy_grid, theta: float = 0.0,
             quad: QuadratureSpec | None = None) -> SpectrumGrid:
    """``|M_p|^2`` on a grid of final energies at emission angle ``theta``."""
    gauge = Gauge.parse(gauge)
    energies = np.asarray(energy_grid, dtype=float)
    m = amplitude_form_factor(momenta_along(energies, theta), gauge, state, pulse, quad)
    return SpectrumGrid(energies, float(theta), np.abs(m) ** 2, Method.SFA_DIRECT, gauge, state.kind,
                        {"ip": state.ip})

"""Complex ionization times and the saddle-point approximation of the SFA amplitude.

Saddles solve ``(p - e A(t))^2 + 2 Ip = 0`` with ``Im t > 0``.  Writing
``Phi(t) = S_p(t) + Ip t`` the stationary-phase contribution of an isolated
saddle is ``-i V sqrt(2 pi i / Phi'') exp(i Phi)`` with
``Phi'' = -E(t_s) (p - e A(t_s))_z``.  The square root is the principal
branch: the steepest-descent path through each saddle is traversed with
increasing real time, which fixes ``Re sqrt > 0``.

For the p state in length gauge the form factor has a simple pole at the
saddle, ``<q|V|0> = -N q_z / (4 Phi'(t))``.  The pole sits on the saddle
and the contour passes it on the side of the real axis, so that saddle
contributes ``i pi`` times the residue: ``-pi N q_z exp(i Phi) / (4 Phi'')``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .field import E_CHARGE, action
from .spectra import Gauge, Method, SpectrumGrid, momenta_along
from .states import BoundStateModel, StateKind, form_factor


class EmptyResultError(ValueError):
    """No saddle point with ``Im t > 0`` inside the pulse was found."""


class SaddleCoalescenceError(ArithmeticError):
    """Two saddles merge; the isolated-saddle formula does not apply."""


@dataclass(frozen=True)
class ComplexInstant:
    t_r: float
    t_i: float

    @property
    def value(self) -> complex:
        return complex(self.t_r, self.t_i)


@dataclass(frozen=True)
class SaddleSolution:
    t_s: complex
    velocity: np.ndarray
    action_phase: complex
    second_derivative: complex
    prefactor: complex
    form_factor_L: complex
    form_factor_V: complex
    residual: float

    @property
    def instant(self) -> ComplexInstant:
        return ComplexInstant(self.t_s.real, self.t_s.imag)

    def contribution(self, gauge) -> complex:
        ff = self.form_factor_L if Gauge.parse(gauge) is Gauge.LENGTH else self.form_factor_V
        return -1j * ff * self.prefactor * np.exp(1j * self.action_phase)


def _equation(t, p, ip, pulse):
    a = pulse.vector_potential(t)
    qz = p[2] - E_CHARGE * a
    f = qz * qz + p[0] ** 2 + p[1] ** 2 + 2 * ip
    # dA/dt = -E
    df = 2 * qz * E_CHARGE * pulse.electric_field(t)
    return f, df


def _newton(seeds, p, ip, pulse, max_iter=80):
    t = np.array(seeds, dtype=complex)
    max_step = 0.25 * pulse.period
    alive = np.ones(t.shape, dtype=bool)
    for _ in range(max_iter):
        f, df = _equation(t, p, ip, pulse)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = f / df
        bad = ~np.isfinite(step)
        alive &= ~bad
        step[bad] = 0
        big = np.abs(step) > max_step
        step[big] *= max_step / np.abs(step[big])
        t = t - step
        if np.all(np.abs(step[alive]) < 1e-13 * pulse.period):
            break
    f, _ = _equation(t, p, ip, pulse)
    return t, np.abs(f), alive


def solve_saddles(p, pulse, ip: float, seeds_per_cycle: int = 4, tol: float = 1e-9):
    """Saddle points with ``Im t > 0`` and ``0 <= Re t <= duration``, sorted by ``Re t``.

    Raises ``EmptyResultError`` if none survive.
    """
    p = np.asarray(p, dtype=float)
    w = pulse.omega
    t_r = np.arange(0.0, pulse.duration + 1e-9, pulse.period / seeds_per_cycle)
    seeds = (t_r[:, None] + 1j * np.array([0.2 / w, 1.0 / w])[None, :]).ravel()
    roots, resid, alive = _newton(seeds, p, ip, pulse)
    ok = alive & (resid < tol) & (roots.imag > 0) & (roots.real >= 0) & (roots.real <= pulse.duration)
    unique: list[complex] = []
    for t in roots[ok][np.argsort(roots[ok].real)]:
        if all(abs(t - u) > 1e-6 / w for u in unique):
            unique.append(complex(t))
    if not unique:
        raise EmptyResultError(f"no saddle points for p={p.tolist()}")
    return [_describe(t, p, ip, pulse) for t in unique]


def _describe(t, p, ip, pulse) -> SaddleSolution:
    state_s = BoundStateModel(StateKind.S_EVEN, ip)
    a = complex(pulse.vector_potential(t))
    e = complex(pulse.electric_field(t))
    v = np.array([p[0], p[1], p[2] - E_CHARGE * a], dtype=complex)
    phi = complex(action(p, np.asarray(t), pulse)) + ip * t
    phi2 = -e * v[2]
    resid = abs(complex(np.sum(v * v)) + 2 * ip)
    pref = np.sqrt(2j * np.pi / phi2) if phi2 != 0 else complex("nan")
    ff = complex(form_factor(v, state_s))
    return SaddleSolution(t, v, phi, phi2, pref, ff, ff, resid)


def with_state(sol: SaddleSolution, p, state: BoundStateModel) -> SaddleSolution:
    """Attach the form factors of ``state`` to a saddle found for the same ``p`` and ``Ip``."""
    ff_v = complex(form_factor(np.asarray(p, dtype=float), state))
    if state.kind is StateKind.S_EVEN:
        ff_l = ff_v
    else:
        # pole contribution written in the form -i ff prefactor exp(i Phi)
        ff_l = -1j * math.pi * state.norm_constant * sol.velocity[2] / (4 * sol.second_derivative * sol.prefactor)
    return SaddleSolution(sol.t_s, sol.velocity, sol.action_phase, sol.second_derivative,
                          sol.prefactor, ff_l, ff_v, sol.residual)


def saddle_velocities(solutions) -> np.ndarray:
    """Instantaneous velocities ``p - e A(t_s)``, shape ``(n, 3)``."""
    return np.array([s.velocity for s in solutions])


def spa_amplitude(p, gauge, state: BoundStateModel, pulse, solutions=None) -> complex:
    """Sum of the saddle contributions; raises ``SaddleCoalescenceError`` near cutoff kinematics."""
    sols = solutions if solutions is not None else solve_saddles(p, pulse, state.ip)
    total = 0j
    for sol in sols:
        if abs(sol.second_derivative) < 1e-8:
            raise SaddleCoalescenceError(f"|Phi''| = {abs(sol.second_derivative):.2e} at t_s = {sol.t_s}")
        total += with_state(sol, p, state).contribution(gauge)
    return total


def spa_spectrum(state: BoundStateModel, gauge, pulse, energy_grid, theta: float = 0.0) -> SpectrumGrid:
    """``|M_spa|^2`` on an energy grid.  Points at saddle coalescence are dropped and listed in metadata."""
    gauge = Gauge.parse(gauge)
    energies = np.asarray(energy_grid, dtype=float)
    values, kept, flagged = [], [], []
    for e, p in zip(energies, momenta_along(energies, theta)):
        try:
            values.append(abs(spa_amplitude(p, gauge, state, pulse)) ** 2)
            kept.append(e)
        except (SaddleCoalescenceError, EmptyResultError):
            flagged.append(float(e))
    return SpectrumGrid(np.array(kept), float(theta), np.array(values), Method.SFA_SPA, gauge,
                        state.kind, {"ip": state.ip, "flagged": flagged})

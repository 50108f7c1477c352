"""Laser pulse, vector potential and Volkov action in atomic units.

The field is linearly polarized along z.  The electron charge is fixed to
``E_CHARGE = -1`` so the kinetic momentum is ``p - e A = p + A``.

All closed forms are sums of trigonometric terms, so they can be evaluated at
complex time for the saddle-point analysis.  For real times outside the pulse
the field and the vector potential vanish and the action integrals are frozen
at their end-of-pulse values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

E_CHARGE = -1.0
ELECTRON_MASS = 1.0


@dataclass(frozen=True)
class PulseParams:
    """sin^2-envelope pulse ``E(t) = e0 sin^2(w t / 2n) cos(w t + cep)`` on ``[0, T_p]``."""

    e0: float = 0.0834
    omega: float = 0.056
    n_cycles: int = 4
    cep: float = 0.0

    def __post_init__(self):
        if not self.e0 >= 0:
            raise ValueError(f"e0 must be non-negative, got {self.e0}")
        if not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        if int(self.n_cycles) != self.n_cycles or self.n_cycles < 2:
            raise ValueError(f"n_cycles must be an integer >= 2, got {self.n_cycles}")

    @property
    def period(self) -> float:
        return 2 * math.pi / self.omega

    @property
    def duration(self) -> float:
        return self.n_cycles * self.period

    @property
    def ponderomotive(self) -> float:
        return self.e0**2 / (4 * self.omega**2)

    def _components(self):
        # E(t) = sum_j amp_j cos(freq_j t + cep)
        env = self.omega / self.n_cycles
        freqs = np.array([self.omega, self.omega + env, self.omega - env])
        amps = np.array([0.5, -0.25, -0.25]) * self.e0
        # A(t) = A0 + sum_j c_j sin(freq_j t + cep)
        coefs = -amps / freqs
        offset = -math.sin(self.cep) * coefs.sum()
        return freqs, amps, coefs, offset

    def electric_field(self, t):
        t = np.asarray(t)
        freqs, amps, _, _ = self._components()
        val = sum(a * np.cos(w * t + self.cep) for w, a in zip(freqs, amps))
        if np.iscomplexobj(t):
            return val
        return np.where((t >= 0) & (t <= self.duration), val, 0.0)

    def vector_potential(self, t):
        t = np.asarray(t)
        freqs, _, coefs, offset = self._components()
        if not np.iscomplexobj(t):
            t = np.clip(t, 0.0, self.duration)
        val = offset + sum(c * np.sin(w * t + self.cep) for w, c in zip(freqs, coefs))
        if np.iscomplexobj(t):
            return val
        # the closed form vanishes at both endpoints only up to rounding
        return np.where((t > 0) & (t < self.duration), val, 0.0)

    def integrals(self, t):
        """Return ``(int_0^t A, int_0^t A^2)``."""
        t = np.asarray(t)
        if not np.iscomplexobj(t):
            t = np.clip(t, 0.0, self.duration)
        freqs, _, coefs, offset = self._components()
        phi = self.cep
        int_sin = [(math.cos(phi) - np.cos(w * t + phi)) / w for w in freqs]
        int_a = offset * t + sum(c * s for c, s in zip(coefs, int_sin))

        int_a2 = offset**2 * t + 2 * offset * (int_a - offset * t)
        for j in range(3):
            for k in range(3):
                diff = freqs[j] - freqs[k]
                if j == k:
                    i_diff = t
                else:
                    i_diff = np.sin(diff * t) / diff
                total = freqs[j] + freqs[k]
                i_sum = (np.sin(total * t + 2 * phi) - math.sin(2 * phi)) / total
                int_a2 = int_a2 + coefs[j] * coefs[k] * 0.5 * (i_diff - i_sum)
        return int_a, int_a2


@dataclass(frozen=True)
class MonochromaticField:
    """``A(t) = (e0/omega) cos(omega t + cep)``; ``n_cycles`` only bounds the saddle search window."""

    e0: float = 0.0834
    omega: float = 0.056
    n_cycles: int = 1
    cep: float = 0.0

    @property
    def period(self) -> float:
        return 2 * math.pi / self.omega

    @property
    def duration(self) -> float:
        return self.n_cycles * self.period

    @property
    def ponderomotive(self) -> float:
        return self.e0**2 / (4 * self.omega**2)

    @property
    def amplitude(self) -> float:
        return self.e0 / self.omega

    def electric_field(self, t):
        return self.e0 * np.sin(self.omega * np.asarray(t) + self.cep)

    def vector_potential(self, t):
        return self.amplitude * np.cos(self.omega * np.asarray(t) + self.cep)

    def integrals(self, t):
        t = np.asarray(t)
        w, phi, a0 = self.omega, self.cep, self.amplitude
        int_a = a0 * (np.sin(w * t + phi) - math.sin(phi)) / w
        int_a2 = a0**2 * (0.5 * t + (np.sin(2 * (w * t + phi)) - math.sin(2 * phi)) / (4 * w))
        return int_a, int_a2


def electric_field(t, pulse):
    """Electric field along the polarization axis."""
    return pulse.electric_field(t)


def vector_potential(t, pulse):
    """Vector potential ``A(t) = -int_0^t E``; accepts complex ``t``."""
    return pulse.vector_potential(t)


def action(p, t, pulse):
    """Volkov action ``S_p(t) = 1/2 int_0^t (p - e A)^2`` for momenta ``p[..., 3]``.

    Broadcasts ``p[..., 3]`` against ``t``: the result has shape
    ``p.shape[:-1] + t.shape`` when both are arrays.
    """
    p = np.asarray(p)
    t = np.asarray(t)
    int_a, int_a2 = pulse.integrals(t)
    p2 = np.sum(p * p, axis=-1)
    pz = p[..., 2]
    extra = (np.newaxis,) * t.ndim
    p2 = p2[(...,) + extra]
    pz = pz[(...,) + extra]
    # (p + A)^2 = p^2 + 2 p_z A + A^2 for e = -1
    return 0.5 * (p2 * t - 2 * E_CHARGE * pz * int_a + E_CHARGE**2 * int_a2)


def kinetic_momentum(p, t, pulse):
    """``p - e A(t)`` with the field along z; shape ``p.shape[:-1] + t.shape + (3,)``."""
    p = np.asarray(p)
    a = np.asarray(pulse.vector_potential(t))
    extra = (np.newaxis,) * a.ndim
    out = np.broadcast_to(p[(...,) + extra + (slice(None),)], p.shape[:-1] + a.shape + (3,))
    out = out.astype(np.result_type(p, a, float))
    out[..., 2] = out[..., 2] - E_CHARGE * a
    return out

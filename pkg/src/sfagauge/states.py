"""Short-range initial states and their binding-potential form factors.

Two models, both with ``kappa = sqrt(2 Ip)``:

* ``S_EVEN``: zero-range s state, ``<q|0> = sqrt(kappa) / (pi (q^2 + kappa^2))``.
* ``P_ODD``:  m = 0 p state along z, ``<q|0> = N q_z / (q^2 + kappa^2)^2`` with
  ``N = sqrt(24 kappa^3) / pi``.

The form factor follows from the bound-state equation,
``<q|V|0> = -(q^2 + kappa^2)/2 <q|0>``.  Every expression is rational in
``q`` and uses ``q.q`` (not ``|q|^2``), so complex momenta are accepted.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np


class StateKind(enum.Enum):
    S_EVEN = "s"
    P_ODD = "p"

    @classmethod
    def parse(cls, value) -> "StateKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        for kind in cls:
            if key in (kind.value, kind.name.lower(), {"s": "1s", "p": "2p"}[kind.value]):
                return kind
        raise ValueError(f"unknown state kind {value!r}")

    @property
    def parity(self) -> int:
        return 1 if self is StateKind.S_EVEN else -1


@dataclass(frozen=True)
class BoundStateModel:
    kind: StateKind = StateKind.S_EVEN
    ip: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "kind", StateKind.parse(self.kind))
        if not self.ip > 0:
            raise ValueError(f"ip must be positive, got {self.ip}")

    @property
    def kappa(self) -> float:
        return math.sqrt(2 * self.ip)

    @property
    def axis(self) -> np.ndarray:
        return np.array([0.0, 0.0, 1.0])

    @property
    def norm_constant(self) -> float:
        k = self.kappa
        if self.kind is StateKind.S_EVEN:
            return math.sqrt(k) / math.pi
        return math.sqrt(24 * k**3) / math.pi


def _q2(q):
    q = np.asarray(q)
    return np.sum(q * q, axis=-1), q[..., 2]


def momentum_wavefunction(q, state: BoundStateModel):
    """``<q|0>`` for momenta ``q[..., 3]`` (real or complex)."""
    q2, qz = _q2(q)
    d = q2 + state.kappa**2
    if state.kind is StateKind.S_EVEN:
        return state.norm_constant / d
    return state.norm_constant * qz / d**2


def momentum_wavefunction_dz(q, state: BoundStateModel):
    """``d<q|0>/dq_z``; the dipole element is ``<q|z|0> = i d<q|0>/dq_z``."""
    q2, qz = _q2(q)
    d = q2 + state.kappa**2
    n = state.norm_constant
    if state.kind is StateKind.S_EVEN:
        return -2 * n * qz / d**2
    return n * (1 / d**2 - 4 * qz**2 / d**3)


def form_factor(q, state: BoundStateModel):
    """Binding-potential matrix element ``<q|V|0>``."""
    q2, qz = _q2(q)
    n = state.norm_constant
    if state.kind is StateKind.S_EVEN:
        return np.full(np.shape(q2), -0.5 * n, dtype=np.result_type(q2, float))
    return -0.5 * n * qz / (q2 + state.kappa**2)

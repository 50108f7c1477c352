"""Spectrum container and the peak/envelope analysis shared by all methods."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import maximum_filter1d, uniform_filter1d
from scipy.signal import find_peaks

from .states import StateKind


class Gauge(enum.Enum):
    LENGTH = "length"
    VELOCITY = "velocity"

    @classmethod
    def parse(cls, value) -> "Gauge":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        for g in cls:
            if key in (g.value, g.name.lower(), g.value[0]):
                return g
        raise ValueError(f"unknown gauge {value!r}")


class Method(enum.Enum):
    SFA_DIRECT = "sfa_direct"
    SFA_SPA = "sfa_spa"
    TDSE = "tdse"


@dataclass
class SpectrumGrid:
    energies: np.ndarray
    theta: float
    values: np.ndarray
    method: Method
    gauge: Gauge | None
    state_kind: StateKind
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.energies = np.asarray(self.energies, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.energies.shape != self.values.shape:
            raise ValueError("energies and values differ in shape")
        if np.any(np.diff(self.energies) <= 0):
            raise ValueError("energies must be strictly increasing")
        if not np.all(np.isfinite(self.values)) or np.any(self.values < 0):
            raise ValueError("spectrum values must be finite and non-negative")

    @property
    def momenta(self) -> np.ndarray:
        return momenta_along(self.energies, self.theta)

    @property
    def gauge_label(self) -> str:
        return self.gauge.value if self.gauge is not None else "n/a"

    def window(self, e_min: float, e_max: float) -> "SpectrumGrid":
        sel = (self.energies >= e_min) & (self.energies <= e_max)
        return SpectrumGrid(self.energies[sel], self.theta, self.values[sel], self.method,
                            self.gauge, self.state_kind, dict(self.metadata))


def momenta_along(energies, theta: float) -> np.ndarray:
    """Final momenta ``sqrt(2E) (sin theta, 0, cos theta)``, z along the polarization."""
    k = np.sqrt(2 * np.asarray(energies, dtype=float))
    return k[:, None] * np.array([np.sin(theta), 0.0, np.cos(theta)])[None, :]


def _log(values):
    values = np.asarray(values, dtype=float)
    tiny = max(float(values.max(initial=0.0)), 1e-300) * 1e-30
    return np.log10(np.maximum(values, tiny))


def find_spectral_peaks(energies, values, omega: float, prominence: float = 0.2):
    """Indices of local maxima of ``log10(values)``.

    ``prominence`` is in decades; peaks closer than ``omega/2`` are merged.
    The energy grid is assumed uniform.
    """
    energies = np.asarray(energies, dtype=float)
    de = float(np.median(np.diff(energies)))
    distance = max(1, int(np.floor(0.5 * omega / de)))
    idx, _ = find_peaks(_log(values), prominence=prominence, distance=distance)
    return idx


def find_spectral_dips(energies, values, omega: float, prominence: float = 0.2):
    return find_spectral_peaks(energies, 1.0 / np.maximum(values, 1e-300), omega, prominence)


def refine_extremum(energies, values, idx):
    """Parabolic interpolation of a sampled extremum of ``log10(values)``."""
    y = _log(values)
    out = []
    for i in np.atleast_1d(idx):
        if 0 < i < len(y) - 1:
            denom = y[i - 1] - 2 * y[i] + y[i + 1]
            shift = 0.5 * (y[i - 1] - y[i + 1]) / denom if denom != 0 else 0.0
            shift = float(np.clip(shift, -1.0, 1.0))
            out.append(energies[i] + shift * (energies[i + 1] - energies[i]))
        else:
            out.append(energies[i])
    return np.array(out)


def peak_energies(energies, values, omega: float, prominence: float = 0.2):
    return refine_extremum(energies, values, find_spectral_peaks(energies, values, omega, prominence))


def peak_spacings(energies, values, omega: float, prominence: float = 0.2):
    return np.diff(peak_energies(energies, values, omega, prominence))


def upper_envelope(energies, values, omega: float):
    """``log10`` upper envelope: running maximum over one photon energy, then a running mean of the same width."""
    energies = np.asarray(energies, dtype=float)
    de = float(np.median(np.diff(energies)))
    width = max(1, int(round(omega / de))) | 1
    top = maximum_filter1d(_log(values), width, mode="nearest")
    return uniform_filter1d(top, width, mode="nearest")


def envelope_extrema(energies, values, omega: float, prominence: float = 0.1):
    """Maxima and minima of ``upper_envelope`` with at least ``prominence`` decades.

    The running maximum bridges the ATI comb, so what remains is the slow
    modulation from the interference of the two ionization times per cycle.
    Returns ``(max_energies, min_energies)``.
    """
    energies = np.asarray(energies, dtype=float)
    env = upper_envelope(energies, values, omega)
    imax, _ = find_peaks(env, prominence=prominence)
    imin, _ = find_peaks(-env, prominence=prominence)
    return energies[imax], energies[imin]


def match_extrema(tested, reference, tolerance: float) -> bool:
    """True if every energy in ``tested`` lies within ``tolerance`` of some energy in ``reference``."""
    tested = np.asarray(tested, dtype=float)
    return bool(np.all(np.abs(nearest_offsets(tested, reference)) <= tolerance))


def pair_peaks(a, b):
    """Mutually nearest pairs ``(a_i, b_j)`` sorted by ``a_i``; swapping the inputs swaps the columns."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size == 0 or b.size == 0:
        return np.empty((0, 2))
    d = np.abs(a[:, None] - b[None, :])
    ja = np.argmin(d, axis=1)
    ib = np.argmin(d, axis=0)
    pairs = [(a[i], b[j]) for i, j in enumerate(ja) if ib[j] == i]
    return np.array(sorted(pairs)).reshape(-1, 2)


def nearest_offsets(targets, references):
    """For every target energy the signed offset to the nearest reference energy."""
    targets = np.asarray(targets, dtype=float)
    references = np.asarray(references, dtype=float)
    if references.size == 0:
        return np.full(targets.shape, np.inf)
    d = targets[:, None] - references[None, :]
    return d[np.arange(len(targets)), np.argmin(np.abs(d), axis=1)]

"""Length-gauge TDSE on a radial partial-wave grid (m = 0) and photoelectron spectra."""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import spherical_jn, spherical_yn

from ..spectra import Gauge, Method, SpectrumGrid
from ..states import StateKind
from .kernels import Stepper, regular_solutions
from .radial import RadialGrid, bound_states, radial_eigenstate, radial_operator

logger = logging.getLogger(__name__)


class UnstableError(RuntimeError):
    """The norm grew during a propagation step."""


class AbsorberLossWarning(UserWarning):
    """A sizeable part of the ionized flux reached the absorbing boundary."""


@dataclass
class PartialWaveFunction:
    """``psi(r, theta) = sum_l u_l(r) / r * Y_l0(theta)`` with ``coefficients[l, i] = u_l(r_i)``."""

    coefficients: np.ndarray
    grid: RadialGrid
    time: float = 0.0
    absorbed: float = 0.0
    info: dict = field(default_factory=dict)

    @property
    def l_max(self) -> int:
        return self.coefficients.shape[0] - 1

    def norm(self) -> float:
        c = self.coefficients
        return float(np.sum(c.real**2 + c.imag**2) * self.grid.dr)

    def partial_norms(self) -> np.ndarray:
        c = self.coefficients
        return np.sum(c.real**2 + c.imag**2, axis=1) * self.grid.dr

    def overlap(self, other: "PartialWaveFunction") -> complex:
        return complex(np.vdot(self.coefficients, other.coefficients) * self.grid.dr)

    def copy(self) -> "PartialWaveFunction":
        return PartialWaveFunction(self.coefficients.copy(), self.grid, self.time, self.absorbed, dict(self.info))


def initial_state(potential, ell: int, grid: RadialGrid, l_max: int) -> PartialWaveFunction:
    """Lowest eigenstate of angular momentum ``ell`` embedded in an ``l_max`` partial-wave basis."""
    energy, u = radial_eigenstate(potential, ell, 0, grid)
    c = np.zeros((l_max + 1, grid.n_r), dtype=complex)
    c[ell] = u
    return PartialWaveFunction(c, grid, info={"energy": energy, "ell": ell})


def dipole_couplings(l_max: int) -> np.ndarray:
    """``<Y_{l+1,0}|cos theta|Y_l0>`` for ``l = 0..l_max``."""
    l = np.arange(l_max + 1, dtype=float)
    return (l + 1) / np.sqrt((2 * l + 1) * (2 * l + 3))


def propagate(initial: PartialWaveFunction, potential, pulse, grid: RadialGrid | None = None,
              dt: float = 0.025, absorber: bool = True, t_final: float | None = None,
              mask_power: float = 0.125, backend: str | None = None) -> PartialWaveFunction:
    """Propagate from ``t = 0`` to ``t_final`` (default: end of the pulse).

    The step is ``dt`` shrunk so that an integer number of steps ends exactly
    at ``t_final``.  The field is sampled at step midpoints.
    """
    grid = grid or initial.grid
    if not dt > 0:
        raise ValueError("dt must be positive")
    t_final = pulse.duration if t_final is None else t_final
    n_steps = max(1, math.ceil(t_final / dt - 1e-9))
    dt = t_final / n_steps
    l_max = initial.l_max
    ops = [radial_operator(potential, l, grid) for l in range(l_max + 1)]
    mask = grid.mask(mask_power) if absorber else np.ones(grid.n_r)
    stepper = Stepper(ops, grid.r, dipole_couplings(l_max), dt, mask, grid.dr, backend=backend)
    psi = np.ascontiguousarray(initial.coefficients, dtype=complex).copy()
    times = (np.arange(n_steps) + 0.5) * dt
    fields = np.asarray(pulse.electric_field(times), dtype=float)
    norm = initial.norm()
    start_norm = norm
    for step in range(n_steps):
        new = stepper(psi, fields[step])
        if new > norm * (1 + 1e-6):
            raise UnstableError(f"norm grew from {norm:.12g} to {new:.12g} at step {step}")
        norm = new
    logger.debug("propagated %d steps (dt=%g), norm %.12g", n_steps, dt, norm)
    return PartialWaveFunction(psi, grid, initial.time + t_final,
                               initial.absorbed + (start_norm - norm if absorber else 0.0),
                               dict(initial.info, dt=dt, n_steps=n_steps))


def project_out_bound(psi: PartialWaveFunction, potential):
    """Remove all bound components; return ``(continuum part, bound population)``."""
    out = psi.copy()
    population = 0.0
    for l in range(psi.l_max + 1):
        _, states = bound_states(potential, l, psi.grid)
        for u in states:
            amp = np.dot(u, out.coefficients[l]) * psi.grid.dr
            out.coefficients[l] -= amp * u
            population += abs(amp) ** 2
    return out, population


def _numerov_wavenumber(energies, dr):
    c = (6.0 - 5.0 * energies * dr**2) / (6.0 + energies * dr**2)
    k = np.arccos(c) / dr
    # dE/dk of the discrete dispersion E(k) = 6 (1 - cos k dr) / (dr^2 (5 + cos k dr))
    group = 36.0 * np.sin(k * dr) / (dr * (5.0 + c) ** 2)
    return k, group


def continuum_waves(potential, ell: int, grid: RadialGrid, energies, backend=None):
    """Energy-normalized real continuum waves ``u_{E,l}`` and phase shifts.

    Beyond ``r_c`` the outward solution is fitted to Riccati-Bessel functions
    over one wavelength; the amplitude is set from the discrete dispersion so
    that ``dr * sum u_E u_E' = delta(E - E')``.
    Returns ``(u[n_E, n_r], delta[n_E])``.
    """
    energies = np.asarray(energies, dtype=float)
    op = radial_operator(potential, ell, grid)
    raw = regular_solutions(op, energies, backend=backend)
    r = grid.r
    k, group = _numerov_wavenumber(energies, grid.dr)
    r_c = float(getattr(potential, "r_c", 0.0))
    limit = grid.mask_start * grid.r_max
    u = np.empty_like(raw)
    delta = np.empty(energies.size)
    for j, (kj, gj) in enumerate(zip(k, group)):
        wavelength = 2 * np.pi / kj
        r_a = max(r_c + 5.0, 1.2 * (ell + 1) / kj)
        r_a = min(r_a, limit - wavelength)
        sel = (r >= r_a) & (r <= r_a + wavelength)
        x = kj * r[sel]
        basis = np.stack([x * spherical_jn(ell, x), x * spherical_yn(ell, x)], axis=1)
        (alpha, beta), *_ = np.linalg.lstsq(basis, raw[j, sel], rcond=None)
        # u = a (j^ cos d - n^ sin d), with j^ ~ sin(x - l pi/2), n^ ~ -cos(x - l pi/2)
        a = math.hypot(alpha, beta)
        delta[j] = math.atan2(-beta, alpha)
        u[j] = raw[j] * math.sqrt(2.0 / (np.pi * gj)) / a
    return u, delta


def _ylm0(ell: int, theta: float) -> float:
    from scipy.special import eval_legendre

    return math.sqrt((2 * ell + 1) / (4 * np.pi)) * float(eval_legendre(ell, math.cos(theta)))


def photoelectron_spectrum(final: PartialWaveFunction, potential, energy_grid, theta: float = 0.0,
                           state_kind: StateKind = StateKind.S_EVEN, backend=None,
                           absorber_threshold: float = 0.2) -> SpectrumGrid:
    """Angle-resolved spectrum ``|A(E, theta)|^2 / sqrt(2E)`` by projection on continuum waves.

    ``A(E, theta) = sum_l (-i)^l exp(i delta_l) <u_{E,l}|psi_l> Y_l0(theta)``.
    Dividing by ``k = sqrt(2E)`` turns ``d^2P/dE dOmega`` into ``d^3P/dk^3``,
    the normalization of ``|M_p|^2`` in the SFA.
    """
    energies = np.asarray(energy_grid, dtype=float)
    continuum, bound_pop = project_out_bound(final, potential)
    ionized_left = continuum.norm()
    absorbed = final.absorbed
    if absorbed > absorber_threshold * (absorbed + ionized_left):
        warnings.warn(f"absorber removed {absorbed:.3e} of ionized norm {absorbed + ionized_left:.3e}",
                      AbsorberLossWarning, stacklevel=2)
    amp = np.zeros(energies.size, dtype=complex)
    dr = final.grid.dr
    for l in range(final.l_max + 1):
        c = continuum.coefficients[l]
        if not np.any(c):
            continue
        u, delta = continuum_waves(potential, l, final.grid, energies, backend=backend)
        overlap = (u @ c) * dr
        amp += (-1j) ** l * np.exp(1j * delta) * overlap * _ylm0(l, theta)
    values = np.abs(amp) ** 2 / np.sqrt(2 * energies)
    meta = {"bound_population": bound_pop, "absorbed": absorbed, "ionized_remaining": ionized_left}
    return SpectrumGrid(energies, float(theta), values, Method.TDSE, None, StateKind.parse(state_kind), meta)


CHECKPOINT_MAGIC = "SFAGAUGE-CHECKPOINT"
CHECKPOINT_VERSION = 1


def save_checkpoint(path, psi: PartialWaveFunction):
    """One-line text header, then raw little-endian complex128 coefficients."""
    g = psi.grid
    header = (f"{CHECKPOINT_MAGIC} v{CHECKPOINT_VERSION} dr={g.dr!r} n_r={g.n_r} mask_start={g.mask_start!r} "
              f"l_max={psi.l_max} time={psi.time!r} absorbed={psi.absorbed!r}\n")
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(np.ascontiguousarray(psi.coefficients, dtype="<c16").tobytes())


def load_checkpoint(path) -> PartialWaveFunction:
    with open(path, "rb") as fh:
        header = fh.readline().decode("ascii").split()
        payload = fh.read()
    if not header or header[0] != CHECKPOINT_MAGIC:
        raise ValueError(f"{path}: not a checkpoint file")
    if header[1] != f"v{CHECKPOINT_VERSION}":
        raise ValueError(f"{path}: unsupported checkpoint version {header[1]}")
    fields = dict(item.split("=", 1) for item in header[2:])
    grid = RadialGrid(float(fields["dr"]), int(fields["n_r"]), float(fields["mask_start"]))
    l_max = int(fields["l_max"])
    coeffs = np.frombuffer(payload, dtype="<c16").reshape(l_max + 1, grid.n_r).astype(complex)
    return PartialWaveFunction(coeffs, grid, float(fields["time"]), float(fields["absorbed"]))

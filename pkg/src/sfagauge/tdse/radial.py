"""Radial grid, truncated Coulomb potential and bound-state solver.

The radial kinetic energy uses the Numerov-improved three-point stencil
``-1/2 M^{-1} D`` with ``D = tri(1, -2, 1) / dr^2`` and
``M = tri(1, 10, 1) / 12``.  For ``l = 0`` the first diagonal elements of
``D`` and ``M`` are corrected for the ``-Z/r`` cusp at the origin; the
correction keeps ``M^{-1} D`` symmetric.  All operators stay tridiagonal and
eigenvalues converge as ``dr^4``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import brentq


class NotBoundError(ValueError):
    """No bound state of the requested index exists."""


class BracketError(ValueError):
    """The effective-charge search interval does not bracket the target energy."""


@dataclass(frozen=True)
class CutCoulomb:
    """``-z_eff / r`` inside ``r_c``, zero outside.

    With ``smooth=True`` the inner part is shifted by ``+z_eff / r_c`` so the
    potential is continuous at ``r_c``.
    """

    z_eff: float
    r_c: float = 2.0
    smooth: bool = False

    def __post_init__(self):
        if not (self.z_eff > 0 and self.r_c > 0):
            raise ValueError("z_eff and r_c must be positive")

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        inside = -self.z_eff / r
        if self.smooth:
            inside = inside + self.z_eff / self.r_c
        return np.where(r <= self.r_c, inside, 0.0)


@dataclass(frozen=True)
class RadialGrid:
    dr: float = 0.1
    n_r: int = 4000
    mask_start: float = 0.9

    def __post_init__(self):
        if not self.dr > 0 or self.n_r < 10:
            raise ValueError("need dr > 0 and n_r >= 10")
        if not 0.5 < self.mask_start < 1:
            raise ValueError("mask_start must lie in (0.5, 1)")

    @classmethod
    def from_extent(cls, dr: float, r_max: float, mask_start: float = 0.9) -> "RadialGrid":
        return cls(dr, int(round(r_max / dr)), mask_start)

    @property
    def r(self) -> np.ndarray:
        return self.dr * np.arange(1, self.n_r + 1)

    @property
    def r_max(self) -> float:
        return self.n_r * self.dr

    def mask(self, power: float = 0.125) -> np.ndarray:
        """``cos^power`` ramp from ``mask_start * r_max`` down to zero at ``r_max``."""
        r = self.r
        r0 = self.mask_start * self.r_max
        x = np.clip((r - r0) / (self.r_max - r0), 0.0, 1.0)
        return np.cos(0.5 * np.pi * x) ** power


@dataclass(frozen=True)
class RadialOperator:
    """Tridiagonal pieces of ``H_l = -1/2 M^{-1} D + w`` on a grid."""

    d_diag: np.ndarray
    d_off: float
    m_diag: np.ndarray
    m_off: float
    w: np.ndarray
    dr: float

    def bands(self, energy: float = 0.0):
        """Lower, diagonal and upper bands of ``-1/2 D + M (w - energy)``."""
        we = self.w - energy
        lower = -0.5 * self.d_off + self.m_off * we[:-1]
        diag = -0.5 * self.d_diag + self.m_diag * we
        upper = -0.5 * self.d_off + self.m_off * we[1:]
        return lower, diag, upper

    def m_matrix(self):
        n = self.w.size
        off = np.full(n - 1, self.m_off)
        return sp.diags([off, self.m_diag, off], [-1, 0, 1], format="csc")

    def shifted(self, sigma: float):
        """``-1/2 D + M (w - sigma)`` as a sparse matrix."""
        lower, diag, upper = self.bands(sigma)
        return sp.diags([lower, diag, upper], [-1, 0, 1], format="csc")

    def apply(self, u):
        """``H u``."""
        lower, diag, upper = self.bands(0.0)
        mw = diag * u
        mw[1:] += lower * u[:-1]
        mw[:-1] += upper * u[1:]
        return spla.spsolve(self.m_matrix(), mw)


def effective_potential(potential, ell: int, grid: RadialGrid) -> np.ndarray:
    r = grid.r
    return potential(r) + 0.5 * ell * (ell + 1) / r**2


def radial_operator(potential, ell: int, grid: RadialGrid) -> RadialOperator:
    h = grid.dr
    n = grid.n_r
    d_diag = np.full(n, -2.0 / h**2)
    m_diag = np.full(n, 10.0 / 12.0)
    z = float(getattr(potential, "z_eff", 0.0))
    if ell == 0 and z > 0:
        a = -z * h / (12.0 - 10.0 * z * h)
        d_diag[0] = -2.0 / h**2 * (1.0 + a)
        m_diag[0] = (5.0 - a) / 6.0
    return RadialOperator(d_diag, 1.0 / h**2, m_diag, 1.0 / 12.0,
                          effective_potential(potential, ell, grid), h)


def _three_point_levels(potential, ell, grid, select, select_range):
    diag = 1.0 / grid.dr**2 + effective_potential(potential, ell, grid)
    off = np.full(grid.n_r - 1, -0.5 / grid.dr**2)
    return eigh_tridiagonal(diag, off, eigvals_only=True, select=select, select_range=select_range)


def _lowest_pairs(op: RadialOperator, k: int, sigma: float):
    n = op.w.size
    lu = spla.splu(op.shifted(sigma))
    m = op.m_matrix()
    opinv = spla.LinearOperator((n, n), matvec=lambda x: lu.solve(m @ x), dtype=float)
    ham = spla.LinearOperator((n, n), matvec=op.apply, dtype=float)
    w, v = spla.eigsh(ham, k=k, sigma=sigma, OPinv=opinv, which="LM", tol=1e-13)
    order = np.argsort(w)
    return w[order], v[:, order]


def radial_eigenstate(potential, ell: int, n_index: int, grid: RadialGrid):
    """The ``n_index``-th (0-based) eigenpair of the radial Hamiltonian for angular momentum ``ell``.

    Returns ``(energy, u)`` with ``dr * sum(u**2) = 1`` and ``u`` positive
    at its first extremum.  Raises ``NotBoundError`` if the eigenvalue is
    not negative.
    """
    op = radial_operator(potential, ell, grid)
    seed = _three_point_levels(potential, ell, grid, "i", (0, 0))[0]
    w, v = _lowest_pairs(op, n_index + 1, seed - 1.0)
    energy = float(w[n_index])
    if energy >= 0:
        raise NotBoundError(f"state {n_index} for l={ell} is not bound (E={energy:.3e})")
    u = v[:, n_index] / np.sqrt(grid.dr)
    first = np.argmax(np.abs(u) > 1e-3 * np.abs(u).max())
    if u[first] < 0:
        u = -u
    return energy, u


def bound_states(potential, ell: int, grid: RadialGrid):
    """All eigenpairs with negative energy, as ``(energies, u[n_bound, n_r])``."""
    levels = _three_point_levels(potential, ell, grid, "v", (-1e6, 0.0))
    if levels.size == 0:
        # the Numerov spectrum lies slightly lower; make sure nothing is missed
        probe = _three_point_levels(potential, ell, grid, "i", (0, 0))
        if probe[0] > 0.05:
            return np.empty(0), np.empty((0, grid.n_r))
    op = radial_operator(potential, ell, grid)
    k = levels.size + 2
    sigma = (levels[0] if levels.size else 0.0) - 1.0
    w, v = _lowest_pairs(op, k, sigma)
    keep = w < 0
    return w[keep], (v[:, keep] / np.sqrt(grid.dr)).T


def lowest_energy(z_eff: float, ell: int, r_c: float, grid: RadialGrid, smooth: bool = False) -> float:
    op = radial_operator(CutCoulomb(z_eff, r_c, smooth), ell, grid)
    seed = _three_point_levels(CutCoulomb(z_eff, r_c, smooth), ell, grid, "i", (0, 0))[0]
    w, _ = _lowest_pairs(op, 1, seed - 1.0)
    return float(w[0])


def find_zeff(target_ip: float, ell: int, r_c: float, grid: RadialGrid, smooth: bool = False,
              bracket=(0.5, 10.0)) -> float:
    """Effective charge that puts the lowest ``ell`` level at ``-target_ip``."""
    if not target_ip > 0:
        raise ValueError("target_ip must be positive")

    def mismatch(z):
        return lowest_energy(z, ell, r_c, grid, smooth) + target_ip

    lo, hi = bracket
    if mismatch(lo) * mismatch(hi) > 0:
        raise BracketError(f"no sign change for z_eff in [{lo}, {hi}] (l={ell}, r_c={r_c})")
    return brentq(mismatch, lo, hi, xtol=1e-12, rtol=1e-14)

"""Hot loops of the TDSE: split-step propagation and continuum integration.

Each kernel exists twice, compiled with numba and as plain numpy/scipy, with
identical semantics.  ``Stepper`` and ``regular_solutions`` dispatch on
``sfagauge._jit.USE_NUMBA`` unless a backend is requested explicitly.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .. import _jit
from .._jit import njit

_RESCALE = 1e150


# --------------------------------------------------------------------------
# numba kernels


@njit
def _couple_nb(psi, r, cg, amp, parity):
    n_l, n_r = psi.shape
    for l in range(parity, n_l - 1, 2):
        g = amp * cg[l]
        for i in range(n_r):
            ang = g * r[i]
            c = np.cos(ang)
            s = np.sin(ang)
            a = psi[l, i]
            b = psi[l + 1, i]
            psi[l, i] = c * a - 1j * s * b
            psi[l + 1, i] = c * b - 1j * s * a


@njit
def _cn_nb(psi, r_lo, r_di, r_up, a_lo, c_prime, inv_den):
    n_l, n_r = psi.shape
    for l in range(n_l):
        prev = 0j
        dprev = 0j
        for i in range(n_r):
            cur = psi[l, i]
            rhs = r_di[l, i] * cur
            if i > 0:
                rhs += r_lo[l, i] * prev
            if i + 1 < n_r:
                rhs += r_up[l, i] * psi[l, i + 1]
            dcur = (rhs - a_lo[l, i] * dprev) * inv_den[l, i]
            psi[l, i] = dcur
            dprev = dcur
            prev = cur
        for i in range(n_r - 2, -1, -1):
            psi[l, i] = psi[l, i] - c_prime[l, i] * psi[l, i + 1]


@njit
def _mask_norm_nb(psi, mask, dr):
    n_l, n_r = psi.shape
    total = 0.0
    for l in range(n_l):
        for i in range(n_r):
            v = psi[l, i] * mask[i]
            psi[l, i] = v
            total += v.real * v.real + v.imag * v.imag
    return total * dr


@njit
def _step_nb(psi, r, cg, half_amp, r_lo, r_di, r_up, a_lo, c_prime, inv_den, mask, dr):
    _couple_nb(psi, r, cg, half_amp, 0)
    _couple_nb(psi, r, cg, half_amp, 1)
    _cn_nb(psi, r_lo, r_di, r_up, a_lo, c_prime, inv_den)
    _couple_nb(psi, r, cg, half_amp, 1)
    _couple_nb(psi, r, cg, half_amp, 0)
    return _mask_norm_nb(psi, mask, dr)


@njit
def _regular_nb(w, d_diag, d_off, m_diag, m_off, energies, first, store_from, out):
    n_e = energies.shape[0]
    n_r = w.shape[0]
    for k in range(n_e):
        e = energies[k]
        um = 0.0
        u = 1.0
        for i in range(first, n_r):
            if i >= store_from:
                out[k, i - store_from] = u
            if abs(u) > _RESCALE:
                um /= _RESCALE
                u /= _RESCALE
                if i >= store_from:
                    out[k, i - store_from] = u
                    for j in range(i - store_from):
                        out[k, j] /= _RESCALE
            if i + 1 == n_r:
                break
            lo = -0.5 * d_off + m_off * (w[i - 1] - e) if i > 0 else 0.0
            di = -0.5 * d_diag[i] + m_diag[i] * (w[i] - e)
            up = -0.5 * d_off + m_off * (w[i + 1] - e)
            un = -(lo * um + di * u) / up
            um = u
            u = un
        for i in range(store_from, first):
            out[k, i - store_from] = 0.0


# --------------------------------------------------------------------------
# numpy kernels


def _couple_np(psi, r, cg, amp, parity):
    ls = np.arange(parity, psi.shape[0] - 1, 2)
    if ls.size == 0:
        return
    ang = amp * cg[ls][:, None] * r[None, :]
    c, s = np.cos(ang), np.sin(ang)
    a = psi[ls].copy()
    b = psi[ls + 1]
    psi[ls] = c * a - 1j * s * b
    psi[ls + 1] = c * b - 1j * s * a


def _regular_np(w, d_diag, d_off, m_diag, m_off, energies, first, store_from):
    n_r = w.shape[0]
    out = np.zeros((energies.size, n_r - store_from))
    um = np.zeros_like(energies)
    u = np.ones_like(energies)
    for i in range(first, n_r):
        if i >= store_from:
            out[:, i - store_from] = u
        big = np.abs(u) > _RESCALE
        if big.any():
            um[big] /= _RESCALE
            u[big] /= _RESCALE
            if i >= store_from:
                out[big, : i - store_from] /= _RESCALE
                out[:, i - store_from] = u
        if i + 1 == n_r:
            break
        lo = -0.5 * d_off + m_off * (w[i - 1] - energies) if i > 0 else 0.0
        di = -0.5 * d_diag[i] + m_diag[i] * (w[i] - energies)
        up = -0.5 * d_off + m_off * (w[i + 1] - energies)
        um, u = u, -(lo * um + di * u) / up
    return out


# --------------------------------------------------------------------------
# public dispatch


def _crank_nicolson_bands(ops, dt):
    """Bands of ``M -/+ i dt/2 (-1/2 D + M w)`` stacked over partial waves."""
    half = 0.5j * dt
    n_l, n_r = len(ops), ops[0].w.size
    bands = {key: np.zeros((n_l, n_r), dtype=complex) for key in ("lo", "di", "up")}
    left = {key: np.zeros((n_l, n_r), dtype=complex) for key in ("lo", "di", "up")}
    for l, op in enumerate(ops):
        lower, diag, upper = op.bands(0.0)
        bands["lo"][l, 1:] = op.m_off - half * lower
        bands["di"][l] = op.m_diag - half * diag
        bands["up"][l, :-1] = op.m_off - half * upper
        left["lo"][l, 1:] = op.m_off + half * lower
        left["di"][l] = op.m_diag + half * diag
        left["up"][l, :-1] = op.m_off + half * upper
    return bands, left


class Stepper:
    """One split-operator Crank-Nicolson step for the coupled partial waves.

    ``ops[l]`` are the field-free radial operators; ``cg[l]`` the
    ``<l+1|cos theta|l>`` couplings.  The dipole interaction ``E r cos theta``
    is applied as exact 2x2 rotations on even then odd ``(l, l+1)`` pairs,
    half a step before and after the atomic Crank-Nicolson step.
    """

    def __init__(self, ops, r, cg, dt, mask, dr, backend=None):
        self.backend = backend or _jit.backend_name()
        self.dt = dt
        self.r = np.ascontiguousarray(r, dtype=float)
        self.cg = np.ascontiguousarray(cg, dtype=float)
        self.mask = np.ascontiguousarray(mask, dtype=float)
        self.dr = dr
        right, left = _crank_nicolson_bands(ops, dt)
        self.r_lo, self.r_di, self.r_up = right["lo"], right["di"], right["up"]
        if self.backend == "numba":
            a, b, c = left["lo"], left["di"], left["up"]
            c_prime = np.empty_like(b)
            inv_den = np.empty_like(b)
            prev = np.zeros(b.shape[0], dtype=complex)
            for i in range(b.shape[1]):
                inv_den[:, i] = 1.0 / (b[:, i] - a[:, i] * prev)
                prev = c[:, i] * inv_den[:, i]
                c_prime[:, i] = prev
            self.a_lo, self.c_prime, self.inv_den = a, c_prime, inv_den
        elif self.backend == "numpy":
            lo = left["lo"][:, 1:]
            up = left["up"][:, :-1]
            n_l, n_r = left["di"].shape
            sub = np.zeros(n_l * n_r - 1, dtype=complex)
            sup = np.zeros(n_l * n_r - 1, dtype=complex)
            for l in range(n_l):
                sub[l * n_r : l * n_r + n_r - 1] = lo[l]
                sup[l * n_r : l * n_r + n_r - 1] = up[l]
            mat = sp.diags([sub, left["di"].ravel(), sup], [-1, 0, 1], format="csc")
            self._lu = spla.splu(mat)
        else:
            raise ValueError(f"unknown backend {backend!r}")

    def __call__(self, psi, field_value):
        """Advance ``psi`` in place by one step at field ``field_value``; return the new norm."""
        # H_I = -e E z = E r cos(theta) for e = -1; each parity sweep covers dt/2
        half_amp = 0.5 * self.dt * field_value
        if self.backend == "numba":
            return _step_nb(psi, self.r, self.cg, half_amp, self.r_lo, self.r_di, self.r_up,
                            self.a_lo, self.c_prime, self.inv_den, self.mask, self.dr)
        _couple_np(psi, self.r, self.cg, half_amp, 0)
        _couple_np(psi, self.r, self.cg, half_amp, 1)
        rhs = self.r_di * psi
        rhs[:, 1:] += self.r_lo[:, 1:] * psi[:, :-1]
        rhs[:, :-1] += self.r_up[:, :-1] * psi[:, 1:]
        psi[:] = self._lu.solve(rhs.ravel()).reshape(psi.shape)
        _couple_np(psi, self.r, self.cg, half_amp, 1)
        _couple_np(psi, self.r, self.cg, half_amp, 0)
        psi *= self.mask
        return float(np.sum(psi.real**2 + psi.imag**2) * self.dr)


def regular_solutions(op, energies, store_from=0, backend=None):
    """Regular solutions of ``H_l u = E u`` for the discretized radial operator ``op``.

    The recurrence starts from ``u = 0`` at the origin, or, for large ``l``,
    from ``u = 0`` just inside the centrifugal barrier where the regular
    solution is negligible.  Returns rows of shape ``(n_r - store_from,)``
    with arbitrary positive scale.
    """
    backend = backend or _jit.backend_name()
    energies = np.ascontiguousarray(np.atleast_1d(energies), dtype=float)
    w = np.ascontiguousarray(op.w, dtype=float)
    # the stencil is ill-conditioned where w exceeds 3/dr^2
    steep = np.nonzero(w >= 3.0 / op.dr**2)[0]
    first = int(steep[-1]) + 2 if steep.size else 0
    if backend == "numba":
        out = np.empty((energies.size, w.size - store_from))
        _regular_nb(w, np.ascontiguousarray(op.d_diag), op.d_off, np.ascontiguousarray(op.m_diag),
                    op.m_off, energies, first, store_from, out)
        return out
    return _regular_np(w, op.d_diag, op.d_off, op.m_diag, op.m_off, energies, first, store_from)

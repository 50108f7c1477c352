"""Composite Gauss-Legendre rules over the pulse support."""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np


class NonConvergedError(RuntimeError):
    """Quadrature did not converge within the allowed number of doublings."""


@dataclass(frozen=True)
class QuadratureSpec:
    panels_per_cycle: int = 32
    order: int = 16
    rtol: float = 1e-6
    max_doublings: int = 3

    def __post_init__(self):
        if self.order < 12:
            raise ValueError("order must be >= 12")
        if self.panels_per_cycle < 16:
            raise ValueError("panels_per_cycle must be >= 16")

    def doubled(self) -> "QuadratureSpec":
        return replace(self, panels_per_cycle=2 * self.panels_per_cycle)


@lru_cache(maxsize=16)
def _legendre(order: int):
    return np.polynomial.legendre.leggauss(order)


def composite_nodes(a: float, b: float, n_panels: int, order: int):
    """Nodes and weights of an ``n_panels`` x ``order`` Gauss-Legendre rule on ``[a, b]``."""
    x, w = _legendre(order)
    edges = np.linspace(a, b, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def pulse_nodes(pulse, spec: QuadratureSpec):
    return composite_nodes(0.0, pulse.duration, spec.panels_per_cycle * int(pulse.n_cycles), spec.order)


def converged_integral(evaluate, spec: QuadratureSpec):
    """Run ``evaluate(spec)`` with node doubling until ``|M|^2`` settles.

    ``evaluate`` returns the complex integrals, or a pair ``(integrals, l1)``
    with ``l1 = sum |f w|`` per point.  Convergence is judged on ``|M|^2``
    pointwise with relative tolerance ``spec.rtol``; the allowance is widened
    by the rounding level ``64 eps l1``, which matters where heavy cancellation
    leaves a tiny integral.
    """
    current, _ = _with_l1(evaluate(spec))
    for _ in range(spec.max_doublings):
        spec = spec.doubled()
        finer, l1 = _with_l1(evaluate(spec))
        p0, p1 = np.abs(current) ** 2, np.abs(finer) ** 2
        noise = 64 * np.finfo(float).eps * l1
        floor = 1e-28 * max(float(np.max(p1, initial=0.0)), 1e-300) + 2 * np.abs(finer) * noise + noise**2
        if np.all(np.abs(p1 - p0) <= spec.rtol * p1 + floor):
            return finer
        current = finer
    raise NonConvergedError(
        f"quadrature not converged at {spec.panels_per_cycle} panels/cycle, order {spec.order}"
    )


def _with_l1(result):
    if isinstance(result, tuple):
        return result
    return result, np.zeros(np.shape(result))

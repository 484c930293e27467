"""Legendre polynomials, Gauss-Lobatto nodes and nodal Lagrange bases.

Everything here works on the reference interval [-1, 1]; callers apply the
affine map to physical intervals.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import InputError

__all__ = [
    "legendre_eval",
    "legendre_deriv",
    "gauss_lobatto_nodes",
    "basis_matrix",
    "basis_deriv_matrix",
    "lagrange_to_legendre",
]


def legendre_eval(j: int, t):
    """Value of the degree-``j`` Legendre polynomial at ``t`` in [-1, 1]."""
    if j < 0:
        raise InputError("Legendre degree must be nonnegative")
    t = np.asarray(t, dtype=float)
    pkm1 = np.ones_like(t)
    if j == 0:
        return pkm1 if pkm1.ndim else float(pkm1)
    pk = t.copy()
    for k in range(1, j):
        pkm1, pk = pk, ((2 * k + 1) * t * pk - k * pkm1) / (k + 1)
    return pk if pk.ndim else float(pk)


def legendre_deriv(j: int, t):
    """First derivative of the degree-``j`` Legendre polynomial."""
    if j == 0:
        t = np.asarray(t, dtype=float)
        z = np.zeros_like(t)
        return z if z.ndim else 0.0
    t = np.asarray(t, dtype=float)
    # (1 - t^2) P_j'(t) = j (P_{j-1}(t) - t P_j(t)); handle t = +-1 by limit
    pj = np.asarray(legendre_eval(j, t))
    pjm1 = np.asarray(legendre_eval(j - 1, t))
    with np.errstate(divide="ignore", invalid="ignore"):
        d = j * (pjm1 - t * pj) / (1.0 - t**2)
    at_end = np.isclose(np.abs(t), 1.0)
    if np.any(at_end):
        endval = 0.5 * j * (j + 1) * np.sign(t) ** (j + 1)
        d = np.where(at_end, endval, d)
    return d if d.ndim else float(d)


@lru_cache(maxsize=None)
def gauss_lobatto_nodes(p: int) -> tuple[float, ...]:
    """The ``p + 1`` Gauss-Lobatto points on [-1, 1] (nodal basis sites).

    For p = 0 the single node sits at the interval midpoint.
    """
    if p < 0:
        raise InputError("polynomial degree must be nonnegative")
    if p == 0:
        return (0.0,)
    if p == 1:
        return (-1.0, 1.0)
    # interior nodes are the roots of P_p'
    coeffs = np.zeros(p + 1)
    coeffs[p] = 1.0
    interior = np.polynomial.legendre.legroots(np.polynomial.legendre.legder(coeffs))
    interior = np.real(interior)
    # one Newton polish on P_p'
    for _ in range(2):
        f = np.array([legendre_deriv(p, x) for x in interior])
        # derivative of P_p' from the Legendre ODE:
        # (1-x^2) P_p'' = 2x P_p' - p(p+1) P_p
        fp = (
            2 * interior * f
            - p * (p + 1) * np.array([legendre_eval(p, x) for x in interior])
        ) / (1 - interior**2)
        interior = interior - f / fp
    nodes = np.concatenate(([-1.0], np.sort(interior), [1.0]))
    nodes = 0.5 * (nodes - nodes[::-1])  # enforce symmetry
    return tuple(nodes)


@lru_cache(maxsize=None)
def _legendre_vandermonde_inv(nodes: tuple[float, ...]) -> np.ndarray:
    n = len(nodes)
    x = np.asarray(nodes)
    V = np.column_stack([np.asarray(legendre_eval(j, x)) for j in range(n)])
    return np.linalg.inv(V)


def lagrange_to_legendre(nodes: tuple[float, ...]) -> np.ndarray:
    """Matrix mapping nodal values at ``nodes`` to Legendre coefficients."""
    return _legendre_vandermonde_inv(tuple(float(x) for x in nodes))


def basis_matrix(nodes, pts) -> np.ndarray:
    """Values of the Lagrange basis at ``nodes`` evaluated at ``pts``.

    Returns shape ``(len(pts), len(nodes))``; row ``i`` holds the basis
    values at ``pts[i]``, so ``B @ nodal_values`` interpolates.
    """
    nodes = tuple(float(x) for x in nodes)
    pts = np.atleast_1d(np.asarray(pts, dtype=float))
    C = lagrange_to_legendre(nodes)  # (n, n): column k = coeffs of basis k
    n = len(nodes)
    E = np.column_stack([np.asarray(legendre_eval(j, pts)) for j in range(n)])
    return E @ C


def basis_deriv_matrix(nodes, pts) -> np.ndarray:
    """Derivatives (d/dt on [-1,1]) of the Lagrange basis at ``pts``."""
    nodes = tuple(float(x) for x in nodes)
    pts = np.atleast_1d(np.asarray(pts, dtype=float))
    C = lagrange_to_legendre(nodes)
    n = len(nodes)
    E = np.column_stack([np.asarray(legendre_deriv(j, pts)) for j in range(n)])
    return E @ C

"""Forward-mode differentiation scalars for evaluating problem functions.

Problem functions are written against ordinary arithmetic.  Evaluating them
on :class:`Dual` arguments propagates first (and optionally second)
derivatives with respect to a chosen set of seed directions.  Values may be
numpy arrays, in which case derivatives are carried for every entry at once,
so one call differentiates a whole batch of evaluation points.
"""

from __future__ import annotations

import numpy as np

__all__ = ["Dual", "seed", "value", "sin", "cos", "tan", "exp", "log", "sqrt", "tanh"]


def _outer(a, b):
    # (m, ...) x (m, ...) -> (m, m, ...), batched over trailing axes
    return np.einsum("i...,j...->ij...", a, b)


class Dual:
    """Truncated Taylor scalar: value, gradient, optional Hessian.

    ``grad`` has shape ``(m,) + shape(val)`` for ``m`` seed directions;
    ``hess``, when present, has shape ``(m, m) + shape(val)``.  Mixing a
    second-order Dual with a first-order Dual is not supported; constants
    (plain floats/arrays) mix freely with either.
    """

    __slots__ = ("val", "grad", "hess")

    def __init__(self, val, grad, hess=None):
        self.val = val
        self.grad = grad
        self.hess = hess

    def __repr__(self):
        return f"Dual(val={self.val!r})"

    # -- addition / subtraction ------------------------------------------
    def __add__(self, other):
        if isinstance(other, Dual):
            h = None
            if self.hess is not None:
                h = self.hess + other.hess
            return Dual(self.val + other.val, self.grad + other.grad, h)
        return Dual(self.val + other, self.grad, self.hess)

    __radd__ = __add__

    def __neg__(self):
        h = None if self.hess is None else -self.hess
        return Dual(-self.val, -self.grad, h)

    def __sub__(self, other):
        return self + (-other if isinstance(other, Dual) else -np.asarray(other))

    def __rsub__(self, other):
        return (-self) + other

    # -- multiplication / division ---------------------------------------
    def __mul__(self, other):
        if isinstance(other, Dual):
            h = None
            if self.hess is not None:
                h = (
                    self.hess * other.val
                    + other.hess * self.val
                    + _outer(self.grad, other.grad)
                    + _outer(other.grad, self.grad)
                )
            return Dual(
                self.val * other.val,
                self.grad * other.val + other.grad * self.val,
                h,
            )
        h = None if self.hess is None else self.hess * other
        return Dual(self.val * other, self.grad * other, h)

    __rmul__ = __mul__

    def _reciprocal(self):
        inv = 1.0 / self.val
        return _unary(self, inv, -(inv**2), 2.0 * inv**3)

    def __truediv__(self, other):
        if isinstance(other, Dual):
            return self * other._reciprocal()
        return self * (1.0 / np.asarray(other))

    def __rtruediv__(self, other):
        return self._reciprocal() * other

    def __pow__(self, k):
        if isinstance(k, Dual):
            raise TypeError("Dual exponents are not supported")
        if k == 2:  # common case, avoids 0**negative issues at val = 0
            return self * self
        v = self.val
        return _unary(self, v**k, k * v ** (k - 1), k * (k - 1) * v ** (k - 2))


def _unary(x: Dual, f0, f1, f2):
    """Chain rule for a scalar function with precomputed f(v), f'(v), f''(v)."""
    hess = None
    if x.hess is not None:
        hess = f2 * _outer(x.grad, x.grad) + f1 * x.hess
    return Dual(f0, f1 * x.grad, hess)


def seed(values, m: int, offset: int = 0, second_order: bool = False):
    """Seed ``k`` components as Duals with unit directions ``offset..offset+k-1``.

    ``values`` is array-like of shape ``(k,)`` or ``(k, n)``; returns a list
    of ``k`` Duals sharing the total seed dimension ``m``.
    """
    values = np.asarray(values)
    if not np.issubdtype(values.dtype, np.floating):
        values = values.astype(float)
    tail = values.shape[1:]
    out = []
    for i in range(values.shape[0]):
        g = np.zeros((m,) + tail, dtype=values.dtype)
        g[offset + i] = 1.0
        h = np.zeros((m, m) + tail, dtype=values.dtype) if second_order else None
        out.append(Dual(values[i], g, h))
    return out


def value(x):
    """Plain value of a Dual or passthrough for ordinary numbers."""
    return x.val if isinstance(x, Dual) else x


def sin(x):
    if isinstance(x, Dual):
        return _unary(x, np.sin(x.val), np.cos(x.val), -np.sin(x.val))
    return np.sin(x)


def cos(x):
    if isinstance(x, Dual):
        return _unary(x, np.cos(x.val), -np.sin(x.val), -np.cos(x.val))
    return np.cos(x)


def tan(x):
    return sin(x) / cos(x)


def exp(x):
    if isinstance(x, Dual):
        e = np.exp(x.val)
        return _unary(x, e, e, e)
    return np.exp(x)


def log(x):
    if isinstance(x, Dual):
        inv = 1.0 / x.val
        return _unary(x, np.log(x.val), inv, -(inv**2))
    return np.log(x)


def sqrt(x):
    if isinstance(x, Dual):
        r = np.sqrt(x.val)
        return _unary(x, r, 0.5 / r, -0.25 / (r * x.val))
    return np.sqrt(x)


def tanh(x):
    if isinstance(x, Dual):
        t = np.tanh(x.val)
        return _unary(x, t, 1.0 - t**2, -2.0 * t * (1.0 - t**2))
    return np.tanh(x)

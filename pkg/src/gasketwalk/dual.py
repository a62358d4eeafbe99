"""First-order jets over numpy arrays.

A ``Dual`` carries a value array and a derivative array of the same shape.
All arithmetic used by the Green-function engine (elementwise ops, matmul,
batched inverse and solve) propagates the derivative exactly, so a quantity
computed from ``z = Dual(e^{iθ}, e^{iθ})`` carries ``z ∂_z`` of itself.
"""

from __future__ import annotations

from typing import Callable, Sequence, Union

import numpy as np

ArrayLike = Union[np.ndarray, complex, float]


class Dual:
    __slots__ = ("val", "der")
    # let numpy defer binary operators to the reflected methods below
    __array_ufunc__ = None

    def __init__(self, val, der=None):
        self.val = np.asarray(val, dtype=complex)
        if der is None:
            self.der = np.zeros_like(self.val)
        else:
            self.der = np.broadcast_to(np.asarray(der, dtype=complex), self.val.shape).copy()

    @property
    def shape(self) -> tuple[int, ...]:
        return self.val.shape

    @property
    def ndim(self) -> int:
        return self.val.ndim

    def __repr__(self) -> str:
        return f"Dual(val={self.val!r}, der={self.der!r})"

    def __len__(self) -> int:
        return len(self.val)

    def __getitem__(self, key) -> "Dual":
        return Dual(self.val[key], self.der[key])

    def __neg__(self) -> "Dual":
        return Dual(-self.val, -self.der)

    def __add__(self, other) -> "Dual":
        if isinstance(other, Dual):
            return Dual(self.val + other.val, self.der + other.der)
        return Dual(self.val + other, self.der)

    __radd__ = __add__

    def __sub__(self, other) -> "Dual":
        if isinstance(other, Dual):
            return Dual(self.val - other.val, self.der - other.der)
        return Dual(self.val - other, self.der)

    def __rsub__(self, other) -> "Dual":
        return Dual(other - self.val, -self.der)

    def __mul__(self, other) -> "Dual":
        if isinstance(other, Dual):
            return Dual(self.val * other.val, self.val * other.der + self.der * other.val)
        return Dual(self.val * other, self.der * other)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Dual":
        if isinstance(other, Dual):
            q = self.val / other.val
            return Dual(q, (self.der - q * other.der) / other.val)
        return Dual(self.val / other, self.der / other)

    def __rtruediv__(self, other) -> "Dual":
        q = other / self.val
        return Dual(q, -q * self.der / self.val)

    def __pow__(self, k: int) -> "Dual":
        return Dual(self.val**k, k * self.val ** (k - 1) * self.der)

    def __matmul__(self, other) -> "Dual":
        if isinstance(other, Dual):
            return Dual(self.val @ other.val, self.val @ other.der + self.der @ other.val)
        return Dual(self.val @ other, self.der @ other)

    def __rmatmul__(self, other) -> "Dual":
        return Dual(other @ self.val, other @ self.der)

    def conj(self) -> "Dual":
        return Dual(self.val.conj(), self.der.conj())

    def swapaxes(self, a: int, b: int) -> "Dual":
        return Dual(self.val.swapaxes(a, b), self.der.swapaxes(a, b))

    def reshape(self, *shape) -> "Dual":
        return Dual(self.val.reshape(*shape), self.der.reshape(*shape))


def value(x) -> np.ndarray:
    return x.val if isinstance(x, Dual) else np.asarray(x)


def deriv(x) -> np.ndarray:
    return x.der if isinstance(x, Dual) else np.zeros_like(np.asarray(x, dtype=complex))


def linear(fn: Callable[[np.ndarray], np.ndarray], x):
    """Apply a linear map to a plain array or to both parts of a jet."""
    if isinstance(x, Dual):
        return Dual(fn(x.val), fn(x.der))
    return fn(x)


def inv(a):
    if isinstance(a, Dual):
        ai = np.linalg.inv(a.val)
        return Dual(ai, -ai @ a.der @ ai)
    return np.linalg.inv(a)


def solve(a, b):
    """Solve ``a x = b`` with batched numpy semantics."""
    if not isinstance(a, Dual) and not isinstance(b, Dual):
        return np.linalg.solve(a, b)
    av, ad = value(a), deriv(a)
    bv, bd = value(b), deriv(b)
    x = np.linalg.solve(av, bv)
    return Dual(x, np.linalg.solve(av, bd - ad @ x))


def stack(items: Sequence, axis: int = 0):
    if any(isinstance(t, Dual) for t in items):
        return Dual(
            np.stack([value(t) for t in items], axis=axis),
            np.stack([deriv(t) for t in items], axis=axis),
        )
    return np.stack(items, axis=axis)


def concatenate(items: Sequence, axis: int = 0):
    if any(isinstance(t, Dual) for t in items):
        return Dual(
            np.concatenate([np.broadcast_to(value(t), np.shape(value(t))) for t in items], axis=axis),
            np.concatenate([deriv(t) for t in items], axis=axis),
        )
    return np.concatenate(items, axis=axis)


def block(grid: Sequence[Sequence]):
    """Assemble a 2-d grid of equally sized matrix blocks into one matrix."""
    def build(parts):
        h, w = parts[0][0].shape[-2:]
        lead = np.broadcast_shapes(*(p.shape[:-2] for row in parts for p in row))
        out = np.empty(lead + (h * len(parts), w * len(parts[0])), dtype=complex)
        for r, row in enumerate(parts):
            for c, p in enumerate(row):
                out[..., r * h : (r + 1) * h, c * w : (c + 1) * w] = p
        return out

    if any(isinstance(t, Dual) for row in grid for t in row):
        vals = [[np.asarray(value(t)) for t in row] for row in grid]
        ders = [[np.broadcast_to(deriv(t), np.shape(value(t))) for t in row] for row in grid]
        return Dual(build(vals), build(ders))
    return build([[np.asarray(t) for t in row] for row in grid])


def where(mask, a, b):
    """Elementwise select with jets on either side."""
    if isinstance(a, Dual) or isinstance(b, Dual):
        return Dual(np.where(mask, value(a), value(b)), np.where(mask, deriv(a), deriv(b)))
    return np.where(mask, a, b)


def seed(z) -> Dual:
    """Jet for ``z`` whose derivative slot holds ``z`` itself (radial seed)."""
    z = np.asarray(z, dtype=complex)
    return Dual(z, z)

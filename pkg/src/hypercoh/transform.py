"""Separable Fourier transform on d-dimensional hypercomplex arrays.

Dimension j rotates coefficients in the generator-i_j planes only, so the
transform factors into one pass per dimension; commutativity of the algebra
makes the pass order irrelevant.  Both directions carry the unitary
normalization 1/sqrt(prod T_j).
"""

from __future__ import annotations

import numpy as np

from .algebra import HyperComplex, _check_dimension

__all__ = ["HyperArray", "forward", "inverse", "orthogonality_check", "fourier_coefficient"]


class HyperArray:
    """Grid of hypercomplex values with one coefficient axis at the end.

    Parameters
    ----------
    dims : tuple of int
        Grid extents (T_1, ..., T_d); the number of generators equals d.
    data : ndarray, optional
        Real array of shape dims + (2**d,); zeros when omitted.
    """

    __slots__ = ("dims", "d", "data")

    def __init__(self, dims, data=None):
        dims = tuple(int(t) for t in dims)
        if not dims or any(t < 1 for t in dims):
            raise ValueError(f"dims must be positive, got {dims}")
        d = _check_dimension(len(dims))
        nc = 1 << d
        if data is None:
            data = np.zeros(dims + (nc,))
        else:
            data = np.asarray(data, dtype=float)
            if data.shape != dims + (nc,):
                raise ValueError(f"data shape {data.shape} does not match dims {dims} + ({nc},)")
        self.dims = dims
        self.d = d
        self.data = data

    @property
    def ncomp(self) -> int:
        return 1 << self.d

    @property
    def size(self) -> int:
        return int(np.prod(self.dims))

    @classmethod
    def zeros(cls, dims) -> "HyperArray":
        return cls(dims)

    @classmethod
    def spike(cls, dims, at, value=None) -> "HyperArray":
        """Array that is zero except for one entry (default the real unit)."""
        arr = cls(dims)
        at = tuple(int(i) for i in at)
        if value is None:
            arr.data[at + (0,)] = 1.0
        else:
            arr.data[at] = np.asarray(value.coeffs if isinstance(value, HyperComplex) else value)
        return arr

    def entry(self, at) -> HyperComplex:
        return HyperComplex(self.d, self.data[tuple(int(i) for i in at)])

    def set_entry(self, at, value: HyperComplex) -> None:
        self.data[tuple(int(i) for i in at)] = value.coeffs

    def copy(self) -> "HyperArray":
        return HyperArray(self.dims, self.data.copy())

    def allclose(self, other: "HyperArray", tol: float = 1e-12) -> bool:
        return self.dims == other.dims and bool(np.max(np.abs(self.data - other.data)) <= tol)

    def __repr__(self) -> str:
        return f"HyperArray(dims={self.dims}, d={self.d})"


def _generator_action(data: np.ndarray, j: int) -> np.ndarray:
    """Coefficients of i_j * z along the trailing coefficient axis."""
    nc = data.shape[-1]
    bit = 1 << (j - 1)
    idx = np.arange(nc) ^ bit
    sign = np.where(np.arange(nc) & bit, 1.0, -1.0)
    return data[..., idx] * sign


def _pass_1d(data: np.ndarray, dims, j: int, sign: float) -> np.ndarray:
    """One transform pass along dimension j of (..., T_1..T_d, nc) data."""
    d = len(dims)
    t = dims[j - 1]
    axis = data.ndim - 1 - d + (j - 1)
    k = np.arange(t)
    theta = 2.0 * np.pi * np.outer(k, k) / t
    cos_m = np.cos(theta) / np.sqrt(t)
    sin_m = sign * np.sin(theta) / np.sqrt(t)
    rotated = _generator_action(data, j)
    out = np.tensordot(cos_m, data, axes=(1, axis)) + np.tensordot(sin_m, rotated, axes=(1, axis))
    return np.moveaxis(out, 0, axis)


def _transform_data(data: np.ndarray, dims, sign: float) -> np.ndarray:
    for j in range(1, len(dims) + 1):
        data = _pass_1d(data, dims, j, sign)
    return data


def forward(z: HyperArray) -> HyperArray:
    """Transform a frequency-domain array into its time-domain image."""
    return HyperArray(z.dims, _transform_data(z.data, z.dims, +1.0))


def inverse(zhat: HyperArray) -> HyperArray:
    """Exact inverse of :func:`forward` (negated angles, same scaling)."""
    return HyperArray(zhat.dims, _transform_data(zhat.data, zhat.dims, -1.0))


def fourier_coefficient(dims, k, t) -> HyperComplex:
    """Unnormalized kernel value at frequency k and time t.

    The product of per-dimension exponentials exp(2*pi*k_j*t_j/T_j * i_j);
    a factorizable, unimodular element.
    """
    d = len(dims)
    from .algebra import GeneratorExponent, exp_generator, multiply

    out = HyperComplex.one(d)
    for j in range(1, d + 1):
        theta = 2.0 * np.pi * k[j - 1] * t[j - 1] / dims[j - 1]
        out = multiply(out, exp_generator(GeneratorExponent(j, theta), d))
    return out


def orthogonality_check(dims) -> float:
    """Max deviation of kernel cross-sums from their predicted real values.

    For every frequency pair (k, l), sums kernel(k; t) * conj(kernel(l; t))
    over the whole grid and compares against prod(T_j) at k == l and the
    zero element elsewhere.  Intended for small grids; cost is O(N**3).
    """
    dims = tuple(int(t) for t in dims)
    d = len(dims)
    nc = 1 << d
    n = int(np.prod(dims))
    grid = np.indices(dims).reshape(d, n).T

    # kernel coefficient stack F[k_flat, t_flat, :]
    ker = np.zeros((n, n, nc))
    ker[:, :, 0] = 1.0
    for j in range(1, d + 1):
        theta = 2.0 * np.pi * np.outer(grid[:, j - 1], grid[:, j - 1]) / dims[j - 1]
        rotated = _generator_action(ker, j)
        ker = np.cos(theta)[..., None] * ker + np.sin(theta)[..., None] * rotated

    from .algebra import _conj_signs, _structure_tensor

    conj = ker * _conj_signs(d)
    structure = _structure_tensor(d)
    worst = 0.0
    for ki in range(n):
        # sum_t F(k;t) F_conj(l;t) for all l at once
        prod = np.einsum("tg,lth->lgh", ker[ki], conj)
        acc = np.einsum("lgh,ghe->le", prod, structure)
        expected = np.zeros((n, nc))
        expected[ki, 0] = n
        worst = max(worst, float(np.max(np.abs(acc - expected))))
    return worst

"""Commutative hypercomplex algebra with d anticommuting-free generators.

Elements carry 2**d real coefficients indexed by generator subsets: the
coefficient at subset index ``g`` multiplies the basis product of all
generators ``i_j`` with bit ``j-1`` set in ``g``.  Index 0 is the real unit
and index ``2**d - 1`` is the product of all generators.  Every generator
squares to -1 and generators commute, which makes the whole algebra
commutative (unlike quaternions or octonions).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_DIMENSION = 8

__all__ = [
    "MAX_DIMENSION",
    "HyperComplex",
    "GeneratorExponent",
    "multiply",
    "conjugate",
    "modulus",
    "from_factors",
    "inverse_factorizable",
    "vector_iso",
    "matrix_iso",
    "exp_generator",
]


def _check_dimension(d: int) -> int:
    if not isinstance(d, (int, np.integer)) or d < 1:
        raise ValueError(f"dimension must be a positive integer, got {d!r}")
    if d > MAX_DIMENSION:
        raise ValueError(f"dimension {d} exceeds supported maximum {MAX_DIMENSION}")
    return int(d)


@lru_cache(maxsize=None)
def _mul_tables(d: int) -> tuple[np.ndarray, np.ndarray]:
    """Target-index and sign tables for the basis product.

    i_g * i_h = (-1)**|g & h| * i_(g ^ h): shared generators each contribute
    a factor i_j**2 = -1, the rest survive as the symmetric difference.
    """
    n = 1 << d
    g = np.arange(n)[:, None]
    h = np.arange(n)[None, :]
    target = g ^ h
    sign = np.where(_popcount(g & h) % 2 == 0, 1.0, -1.0)
    return target, sign


def _popcount(x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x)
    v = x.copy()
    while np.any(v):
        out += v & 1
        v >>= 1
    return out


@lru_cache(maxsize=None)
def _conj_signs(d: int) -> np.ndarray:
    """(-1)**(|g| mod 2) per subset index g."""
    g = np.arange(1 << d)
    return np.where(_popcount(g) % 2 == 0, 1.0, -1.0)


@lru_cache(maxsize=None)
def _structure_tensor(d: int) -> np.ndarray:
    """S[g, h, e] with (i_g * i_h) = sum_e S[g, h, e] * i_e."""
    n = 1 << d
    target, sign = _mul_tables(d)
    out = np.zeros((n, n, n))
    g, h = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    out[g, h, target] = sign
    return out


class HyperComplex:
    """One element of the d-generator commutative hypercomplex algebra.

    Parameters
    ----------
    d : int
        Number of generators, 1 <= d <= 8.
    coeffs : array_like
        2**d real coefficients in subset-bitmask order (bit j-1 of the
        index marks generator i_j).

    Values are immutable after construction; all operations return new
    elements and are safe for concurrent use.
    """

    __slots__ = ("d", "coeffs")

    def __init__(self, d: int, coeffs) -> None:
        d = _check_dimension(d)
        c = np.asarray(coeffs, dtype=float).copy()
        if c.shape != (1 << d,):
            raise ValueError(f"expected {1 << d} coefficients for d={d}, got shape {c.shape}")
        c.flags.writeable = False
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "coeffs", c)

    def __setattr__(self, name, value):
        raise AttributeError("HyperComplex values are immutable")

    @classmethod
    def zero(cls, d: int) -> "HyperComplex":
        return cls(d, np.zeros(1 << _check_dimension(d)))

    @classmethod
    def one(cls, d: int) -> "HyperComplex":
        c = np.zeros(1 << _check_dimension(d))
        c[0] = 1.0
        return cls(d, c)

    @classmethod
    def basis(cls, d: int, g: int) -> "HyperComplex":
        """Basis element i_g for subset index g (g=0 is the real unit)."""
        d = _check_dimension(d)
        if not 0 <= g < (1 << d):
            raise ValueError(f"subset index {g} out of range for d={d}")
        c = np.zeros(1 << d)
        c[g] = 1.0
        return cls(d, c)

    @classmethod
    def real(cls, d: int, value: float) -> "HyperComplex":
        c = np.zeros(1 << _check_dimension(d))
        c[0] = value
        return cls(d, c)

    def is_real(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.coeffs[1:]) <= tol))

    def conjugate(self) -> "HyperComplex":
        return HyperComplex(self.d, self.coeffs * _conj_signs(self.d))

    def modulus(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def __add__(self, other: "HyperComplex") -> "HyperComplex":
        self._check_same(other)
        return HyperComplex(self.d, self.coeffs + other.coeffs)

    def __sub__(self, other: "HyperComplex") -> "HyperComplex":
        self._check_same(other)
        return HyperComplex(self.d, self.coeffs - other.coeffs)

    def __neg__(self) -> "HyperComplex":
        return HyperComplex(self.d, -self.coeffs)

    def __mul__(self, other):
        if isinstance(other, HyperComplex):
            return multiply(self, other)
        return HyperComplex(self.d, self.coeffs * float(other))

    def __rmul__(self, other):
        return self.__mul__(other)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, HyperComplex)
            and self.d == other.d
            and bool(np.array_equal(self.coeffs, other.coeffs))
        )

    def __hash__(self):
        return hash((self.d, self.coeffs.tobytes()))

    def allclose(self, other: "HyperComplex", tol: float = 1e-12) -> bool:
        self._check_same(other)
        return bool(np.max(np.abs(self.coeffs - other.coeffs)) <= tol)

    def _check_same(self, other: "HyperComplex") -> None:
        if not isinstance(other, HyperComplex):
            raise TypeError(f"expected HyperComplex, got {type(other).__name__}")
        if self.d != other.d:
            raise ValueError(f"dimension mismatch: {self.d} != {other.d}")

    def __repr__(self) -> str:
        return f"HyperComplex(d={self.d}, coeffs={self.coeffs.tolist()})"


@dataclass(frozen=True)
class GeneratorExponent:
    """Angle theta attached to a single generator i_j (j is 1-based)."""

    j: int
    theta: float

    def __post_init__(self):
        if self.j < 1:
            raise ValueError(f"generator index must be >= 1, got {self.j}")


def multiply(a: HyperComplex, b: HyperComplex) -> HyperComplex:
    """Algebra product of two elements (commutative and bilinear)."""
    a._check_same(b)
    target, sign = _mul_tables(a.d)
    out = np.zeros(1 << a.d)
    np.add.at(out, target, sign * np.outer(a.coeffs, b.coeffs))
    return HyperComplex(a.d, out)


def conjugate(z: HyperComplex) -> HyperComplex:
    """Flip the sign of every odd-cardinality subset coefficient."""
    return z.conjugate()


def modulus(z: HyperComplex) -> float:
    """Euclidean norm of the coefficient vector."""
    return z.modulus()


def vector_iso(z: HyperComplex) -> np.ndarray:
    """Coefficient vector of z as a length-2**d float array (a copy)."""
    return np.array(z.coeffs, dtype=float)


def from_factors(factors) -> HyperComplex:
    """Product of complex elements (a_j + b_j i_j), one factor per dimension.

    Parameters
    ----------
    factors : sequence of (a, b) pairs
        Factor j (1-based) contributes a + b*i_j; the list length sets d.

    The result is factorizable by construction, so conj(x)*x is a real
    element equal to |x|**2 and the modulus factors over the pairs.
    """
    factors = list(factors)
    if not factors:
        raise ValueError("factor list must not be empty")
    d = _check_dimension(len(factors))
    out = HyperComplex.one(d)
    for j, (a, b) in enumerate(factors, start=1):
        c = np.zeros(1 << d)
        c[0] = a
        c[1 << (j - 1)] = b
        out = multiply(out, HyperComplex(d, c))
    return out


def inverse_factorizable(x: HyperComplex, tol: float = 0.0) -> HyperComplex:
    """Multiplicative inverse conj(x) / |x|**2, valid for factorizable x."""
    m2 = x.modulus() ** 2
    if m2 <= tol:
        raise ZeroDivisionError("element has zero modulus; no inverse exists")
    return HyperComplex(x.d, x.conjugate().coeffs / m2)


@lru_cache(maxsize=None)
def _generator_matrices(d: int) -> tuple[np.ndarray, ...]:
    one_c = np.eye(2)
    i_c = np.array([[0.0, -1.0], [1.0, 0.0]])
    mats = []
    for j in range(1, d + 1):
        m = np.eye(1)
        # Kronecker slots run from dimension d down to 1; slot j holds i_c.
        for slot in range(d, 0, -1):
            m = np.kron(m, i_c if slot == j else one_c)
        mats.append(m)
    return tuple(mats)


@lru_cache(maxsize=None)
def _basis_matrices(d: int) -> np.ndarray:
    """Matrix image of every basis element, shape (2**d, 2**d, 2**d)."""
    n = 1 << d
    gens = _generator_matrices(d)
    out = np.empty((n, n, n))
    for g in range(n):
        m = np.eye(n)
        for j in range(d):
            if g >> j & 1:
                m = m @ gens[j]
        out[g] = m
    return out


def matrix_iso(z: HyperComplex) -> np.ndarray:
    """Real-matrix image of z under the multiplication-operator isomorphism.

    The image is linear in z, turns algebra products into matrix products,
    sends conjugation to transposition, and acts on coefficient vectors as
    matrix_iso(x) @ vector_iso(y) == vector_iso(x * y).
    """
    return np.tensordot(z.coeffs, _basis_matrices(z.d), axes=(0, 0))


def exp_generator(e: GeneratorExponent, d: int) -> HyperComplex:
    """Exponential of theta*i_j: cos(theta) + sin(theta)*i_j.

    A unimodular complex element; exp(theta i) * exp(-theta i) = 1.
    """
    d = _check_dimension(d)
    if e.j > d:
        raise ValueError(f"generator index {e.j} exceeds dimension {d}")
    c = np.zeros(1 << d)
    c[0] = np.cos(e.theta)
    c[1 << (e.j - 1)] = np.sin(e.theta)
    return HyperComplex(d, c)

"""Matched-filter and mixed-norm sparse reconstruction.

The equality-constrained program minimizes the sum of per-pixel moduli
(the mixed l2,1 norm of the coordinatized vector, grouped by frequency)
subject to consistency with the acquired samples.  It is solved by an
operator-splitting iteration that alternates an exact projection onto the
data-consistency affine set with a group soft-threshold; the projection is
a single adjoint application because the operator's rows are orthonormal.
A scalar variant shrinks every real coordinate independently, which is the
classical l1 program on the real coordinatization.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .acquisition import AcquisitionOperator, adjoint_apply, apply
from .algebra import HyperComplex
from .transform import HyperArray

__all__ = [
    "SparseSpectrum",
    "SolverParams",
    "RecoveryResult",
    "hyper_l1_norm",
    "group_soft_threshold",
    "matched_filter",
    "solve_ph1",
    "theorem1_certificate",
    "theorem2_certificate",
]


@dataclass
class SparseSpectrum:
    """Sparse frequency-domain fixture: distinct support points with values."""

    dims: tuple
    support: list
    values: list

    def __post_init__(self):
        self.dims = tuple(int(t) for t in self.dims)
        self.support = [tuple(int(v) for v in s) for s in self.support]
        if len(set(self.support)) != len(self.support):
            raise ValueError("support entries must be distinct")

    @property
    def k(self) -> int:
        return len(self.support)

    def to_array(self) -> HyperArray:
        arr = HyperArray(self.dims)
        for loc, val in zip(self.support, self.values):
            arr.set_entry(loc, val)
        return arr

    def to_json(self) -> str:
        return json.dumps(
            {
                "dims": list(self.dims),
                "entries": [
                    {"k": list(loc), "coeffs": val.coeffs.tolist()}
                    for loc, val in zip(self.support, self.values)
                ],
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "SparseSpectrum":
        payload = json.loads(text)
        dims = tuple(payload["dims"])
        d = len(dims)
        support = [tuple(e["k"]) for e in payload["entries"]]
        values = [HyperComplex(d, e["coeffs"]) for e in payload["entries"]]
        return cls(dims, support, values)


@dataclass
class SolverParams:
    rho: float = 1.0
    tol: float = 1e-9
    max_iter: int = 5000


@dataclass
class RecoveryResult:
    estimate: HyperArray
    converged: bool
    iterations: int
    primal_residual: float
    dual_residual: float
    objective: float
    flagged: list = field(default_factory=list)

    def support(self, threshold: float = 1e-8) -> list:
        mods = np.linalg.norm(self.estimate.data, axis=-1)
        return [tuple(int(v) for v in idx) for idx in np.argwhere(mods > threshold)]

    def to_json(self) -> str:
        mods = np.linalg.norm(self.estimate.data, axis=-1)
        sup = np.argwhere(mods > 1e-8)
        return json.dumps(
            {
                "converged": self.converged,
                "iterations": self.iterations,
                "primal_residual": self.primal_residual,
                "dual_residual": self.dual_residual,
                "objective": self.objective,
                "support": [
                    {"k": [int(v) for v in idx], "modulus": float(mods[tuple(idx)])}
                    for idx in sup
                ],
            },
            indent=2,
        )


def hyper_l1_norm(x: HyperArray) -> float:
    """Sum of per-pixel moduli (mixed l2,1 norm of the coordinatization)."""
    return float(np.linalg.norm(x.data, axis=-1).sum())


def group_soft_threshold(data: np.ndarray, kappa: float) -> np.ndarray:
    """Proximal map of kappa * sum of group l2 norms over the last axis."""
    norms = np.linalg.norm(data, axis=-1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        scale = np.where(norms > kappa, 1.0 - kappa / norms, 0.0)
    return data * scale


def matched_filter(op: AcquisitionOperator, y: np.ndarray) -> HyperArray:
    """Adjoint reconstruction with per-real-coordinate diagonal scaling.

    Coordinates whose column is unsampled (zero diagonal) are set to zero
    and reported through a warning; under full sampling the result is the
    exact inverse.
    """
    from .coherence import _BlockEngine

    engine = _BlockEngine(op.masks, op.dims)
    n_freq = int(np.prod(op.dims))
    idx = np.stack(np.unravel_index(np.arange(n_freq), op.dims), axis=-1)
    diag = engine.diag_entries(idx).reshape(-1)
    back = adjoint_apply(op, y)
    flat = back.data.reshape(-1)
    dead = diag <= 1e-14
    if dead.any():
        warnings.warn(f"{int(dead.sum())} unsampled real coordinates zeroed in matched filter")
        flat = np.where(dead, 0.0, flat)
        diag = np.where(dead, 1.0, diag)
    return HyperArray(op.dims, (flat / diag).reshape(back.data.shape))


def _shrink(data: np.ndarray, kappa: float, norm: str) -> np.ndarray:
    if norm == "group":
        return group_soft_threshold(data, kappa)
    if norm == "scalar":
        return np.sign(data) * np.maximum(np.abs(data) - kappa, 0.0)
    raise ValueError(f"unknown norm {norm!r}")


def solve_ph1(op: AcquisitionOperator, y: np.ndarray, params: SolverParams | None = None,
              norm: str = "group") -> RecoveryResult:
    """Equality-constrained minimum-norm reconstruction by splitting.

    Alternates the exact projection onto the measurement-consistency set
    (one forward and one adjoint pass, rows being orthonormal) with the
    proximal shrinkage of the chosen norm; stops when both primal and dual
    residuals fall below params.tol.
    """
    params = params or SolverParams()
    y = np.asarray(y, dtype=float)
    shape = op.dims + (op.nc,)
    z = np.zeros(shape)
    u = np.zeros(shape)
    kappa = 1.0 / params.rho
    converged = False
    primal = dual = np.inf
    it = 0
    x = np.zeros(shape)
    for it in range(1, params.max_iter + 1):
        v = HyperArray(op.dims, z - u)
        resid = y - apply(op, v)
        x = v.data + adjoint_apply(op, resid).data
        z_old = z
        z = _shrink(x + u, kappa, norm)
        u = u + x - z
        primal = float(np.linalg.norm(x - z))
        dual = float(params.rho * np.linalg.norm(z - z_old))
        if primal < params.tol and dual < params.tol:
            converged = True
            break
    estimate = HyperArray(op.dims, z.copy())
    objective = hyper_l1_norm(estimate) if norm == "group" else float(np.abs(z).sum())
    return RecoveryResult(estimate, converged, it, primal, dual, objective)


def _sparsity_bound(mu: float) -> float:
    if mu == 0:
        return np.inf
    if not np.isfinite(mu):
        return 0.5  # only k = 0 satisfies k < 1/2
    return (1.0 + 1.0 / mu) / 2.0


def theorem2_certificate(mu_h: float, k: int) -> bool:
    """True when k-sparse recovery is guaranteed for block coherence mu_h."""
    return k < _sparsity_bound(mu_h)


def theorem1_certificate(mu: float, k: int) -> bool:
    """Scalar-coordinate analogue using the classical coherence."""
    return k < _sparsity_bound(mu)

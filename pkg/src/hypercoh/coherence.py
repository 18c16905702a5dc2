"""Gram-block coherence and point-spread diagnostics.

The acquisition matrix groups its columns by frequency coordinate into
blocks of 2**d real columns.  Cross-correlation between two frequencies is
the 2**d x 2**d Gram block of those column groups; after scaling every
group so its diagonal block has unit minimum singular value, the
block-aware coherence is the largest singular value over all off-diagonal
blocks, and the point-spread row of a spike is the same quantity against a
fixed first coordinate.

Every block is unitarily equivalent to a small complex matrix whose
entries are Fourier coefficients of the per-component sampling masks
(rank-one decomposition of the rotation kernel over the eigenbasis
(1, -i)/sqrt(2), (1, i)/sqrt(2) per dimension).  The engine below builds
blocks from FFTs of the masks and prunes the frequency-pair scan using
structural facts it detects on the masks:

* a dimension whose sine/cosine partners are always sampled together
  contributes only the frequency difference, so one side can be pinned;
* a dimension along which every mask is constant forces equal (or, without
  partner completeness, mirrored) frequencies and only three inequivalent
  frequency classes (zero, half, generic).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .acquisition import AcquisitionOperator
from .schedules import SamplingSchedule, quadrature_check

__all__ = [
    "GramBlock",
    "CoherenceReport",
    "NormalizedBlocks",
    "gram_block",
    "normalize_blocks",
    "mu_hypercomplex",
    "mu_traditional",
    "hpsf",
    "lemma_zero_pattern",
    "mu_from_dense",
]

SINGULAR_TOL = 1e-12


@dataclass
class GramBlock:
    """Cross-correlation block between two frequency coordinates."""

    i: tuple
    j: tuple
    matrix: np.ndarray

    @property
    def sigma_max(self) -> float:
        return float(np.linalg.svd(self.matrix, compute_uv=False)[0])

    @property
    def sigma_min(self) -> float:
        return float(np.linalg.svd(self.matrix, compute_uv=False)[-1])


@dataclass
class NormalizedBlocks:
    blocks: list
    factors: dict
    infinite: bool = False
    singular_groups: list = field(default_factory=list)


@dataclass
class CoherenceReport:
    """Block coherence plus the diagnostics that produced it."""

    mu_h: float
    infinite: bool = False
    argmax: tuple | None = None
    normalization: dict = field(default_factory=dict)
    traditional_mu: float | None = None
    descriptor: dict = field(default_factory=dict)
    seed: int | None = None
    singular_group: tuple | None = None

    def to_json(self) -> str:
        payload = {
            "mu_h": None if self.infinite else self.mu_h,
            "infinite": self.infinite,
            "argmax": [list(self.argmax[0]), list(self.argmax[1])] if self.argmax else None,
            "singular_group": list(self.singular_group) if self.singular_group else None,
            "normalization": {",".join(map(str, k)): v for k, v in sorted(self.normalization.items())},
            "traditional_mu": self.traditional_mu,
            "descriptor": self.descriptor,
            "seed": self.seed,
        }
        return json.dumps(payload, indent=2)


# ---------------------------------------------------------------------------
# direct block accumulation


def _rotation_stack(theta: np.ndarray) -> np.ndarray:
    """Stack of 2x2 rotation matrices, one per entry of theta."""
    c, s = np.cos(theta), np.sin(theta)
    return np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2)


def _kernel_stack(dims, k, pixels) -> np.ndarray:
    """Rotation-kernel matrices of frequency k at the given pixels.

    Dimension j occupies bit j-1 of the row/column indices, so the last
    dimension is the outermost Kronecker factor.
    """
    out = np.ones((len(pixels), 1, 1))
    for j in range(len(dims)):
        theta = 2.0 * np.pi * k[j] * pixels[:, j] / dims[j]
        rot = _rotation_stack(theta)
        m = out.shape[-1]
        out = np.einsum("pab,pcd->pacbd", rot, out).reshape(len(pixels), 2 * m, 2 * m)
    return out


def gram_block(op: AcquisitionOperator, i, j) -> GramBlock:
    """Accumulate the (i, j) block over sampled (pixel, component) rows."""
    i = tuple(int(v) for v in i)
    j = tuple(int(v) for v in j)
    dims = op.dims
    n_total = int(np.prod(dims))
    mask_pm = np.moveaxis(op.masks, 0, -1).reshape(n_total, op.nc)
    used = np.flatnonzero(mask_pm.any(axis=1))
    pixels = np.stack(np.unravel_index(used, dims), axis=-1)
    phi_i = _kernel_stack(dims, i, pixels)
    phi_j = phi_i if j == i else _kernel_stack(dims, j, pixels)
    g = np.einsum("prc,pr,prk->ck", phi_i, mask_pm[used].astype(float), phi_j) / n_total
    return GramBlock(i, j, g)


def normalize_blocks(blocks, strategy: str = "group", tol: float = SINGULAR_TOL) -> NormalizedBlocks:
    """Scale column groups so diagonal blocks get unit minimum singular value.

    ``blocks`` must contain the diagonal block of every frequency that
    appears; a singular diagonal block flags infinite coherence instead of
    raising.
    """
    if strategy != "group":
        raise ValueError(f"unknown normalization strategy {strategy!r}")
    blocks = list(blocks)
    smin = {}
    for b in blocks:
        if b.i == b.j:
            smin[b.i] = b.sigma_min
    needed = {b.i for b in blocks} | {b.j for b in blocks}
    missing = needed - set(smin)
    if missing:
        raise ValueError(f"missing diagonal blocks for {sorted(missing)}")
    singular = sorted(i for i, s in smin.items() if s <= tol)
    if singular:
        return NormalizedBlocks(blocks, {}, infinite=True, singular_groups=singular)
    factors = {i: 1.0 / np.sqrt(s) for i, s in smin.items()}
    scaled = [
        GramBlock(b.i, b.j, b.matrix * (factors[b.i] * factors[b.j]))
        for b in blocks
    ]
    return NormalizedBlocks(scaled, factors)


# ---------------------------------------------------------------------------
# FFT-backed block engine

_V = {1: np.array([1.0, -1.0j]) / np.sqrt(2.0), -1: np.array([1.0, 1.0j]) / np.sqrt(2.0)}


def _cv(mu: int, eta: int, rbit: np.ndarray) -> np.ndarray:
    """conj(v_mu[r]) * v_eta[r] for a bit array r."""
    base = np.full(rbit.shape, 0.5)
    if mu != eta:
        return np.where(rbit == 1, -base, base)
    return base


@dataclass
class _DimPlan:
    """Scan behaviour of one dimension inside a segment.

    Modes: "free" sweeps both frequencies with independent signs; "diff"
    pins the first frequency of a partner-complete dimension; "fixed"
    slices a mask-constant dimension at a generic frequency class to one
    candidate relation (+1 equal, -1 mirrored, carried in ``relation``);
    "split" handles the self-mirrored classes (zero and half) of a
    mask-constant dimension, where the block is 2x2 block-circulant in the
    dimension's sign and decomposes into the components with bit value
    ``relation`` (0 or 1).  "special" keeps the full sign freedom and is
    used for diagonal blocks.
    """

    mode: str
    k_values: list
    relation: int = 1


class _BlockEngine:
    """Evaluates Gram blocks and singular-value scans from mask FFTs."""

    def __init__(self, masks: np.ndarray, dims):
        self.dims = tuple(int(t) for t in dims)
        self.d = len(self.dims)
        self.nc = masks.shape[0]
        self.n_total = int(np.prod(self.dims))
        m = masks.astype(float)
        self.masks = m
        axes = tuple(range(1, self.d + 1))
        # mtil[r][f] = sum_t m_r(t) exp(+2 pi i f.t / T)
        self.mtil = np.fft.ifftn(m, axes=axes) * self.n_total
        self.uniform = [self._is_uniform(j) for j in range(1, self.d + 1)]
        self.collapsed = [self._is_collapsed(j) for j in range(1, self.d + 1)]

    def _is_uniform(self, j: int) -> bool:
        axis = j  # masks axis 0 is the component index
        first = np.take(self.masks, [0], axis=axis)
        return bool(np.all(self.masks == first))

    def _is_collapsed(self, j: int) -> bool:
        bit = 1 << (j - 1)
        perm = np.arange(self.nc) ^ bit
        return bool(np.array_equal(self.masks, self.masks[perm]))

    # -- full (unreduced) assembly ------------------------------------

    def c_full(self, ks: np.ndarray, ls: np.ndarray) -> np.ndarray:
        """Unreduced complex block matrices for paired frequency rows."""
        ks = np.atleast_2d(ks)
        ls = np.atleast_2d(ls)
        b = max(len(ks), len(ls))
        ks = np.broadcast_to(ks, (b, self.d))
        ls = np.broadcast_to(ls, (b, self.d))
        patterns = list(itertools.product((1, -1), repeat=self.d))
        rbits = (np.arange(self.nc)[:, None] >> np.arange(self.d)[None, :]) & 1
        out = np.empty((b, self.nc, self.nc), dtype=complex)
        for a, mu in enumerate(patterns):
            for c, eta in enumerate(patterns):
                xi = np.ones(self.nc)
                for j in range(self.d):
                    xi = xi * _cv(mu[j], eta[j], rbits[:, j])
                f = tuple(
                    (eta[j] * ls[:, j] - mu[j] * ks[:, j]) % self.dims[j]
                    for j in range(self.d)
                )
                vals = self.mtil[(slice(None),) + f]  # (nc, b)
                out[:, a, c] = (xi @ vals) / self.n_total
        return out

    def _vmat(self) -> np.ndarray:
        patterns = list(itertools.product((1, -1), repeat=self.d))
        cols = []
        for pat in patterns:
            v = np.array([1.0 + 0j])
            for j in range(self.d - 1, -1, -1):
                v = np.kron(v, _V[pat[j]])
            cols.append(v)
        return np.stack(cols, axis=1)

    def gram(self, k, l) -> np.ndarray:
        """Real Gram block reconstructed from the complex representation."""
        c = self.c_full(np.array([k]), np.array([l]))[0]
        vm = self._vmat()
        g = vm @ c @ vm.conj().T
        return np.real(g)

    def diag_entries(self, idx: np.ndarray) -> np.ndarray:
        """Diagonal entries (squared column norms) of diagonal blocks."""
        c = self.c_full(idx, idx)
        vm = self._vmat()
        return np.real(np.einsum("cm,bmn,cn->bc", vm, c, vm.conj()))

    # -- reduced scan ----------------------------------------------------

    def _dim_classes(self, j: int):
        """Inequivalent sweep values for a mask-constant dimension."""
        t = self.dims[j - 1]
        vals = [("zero", 0)]
        if t % 2 == 0 and t > 1:
            vals.append(("half", t // 2))
        if t >= 3:
            vals.append(("generic", 1))
        return vals

    def _class_of(self, j: int, v: int) -> int:
        t = self.dims[j - 1]
        if v == 0:
            return 0
        if t % 2 == 0 and v == t // 2:
            return 1
        return (2 if t % 2 == 0 else 1)

    def _diag_grid_lists(self):
        """Per-dimension sweep lists for the diagonal-block table."""
        lists = []
        for j in range(1, self.d + 1):
            if self.collapsed[j - 1]:
                lists.append([0])
            elif self.uniform[j - 1]:
                lists.append([v for _, v in self._dim_classes(j)])
            else:
                lists.append(list(range(self.dims[j - 1])))
        return lists

    def _diag_lookup_maps(self, lists):
        maps = []
        for j in range(1, self.d + 1):
            t = self.dims[j - 1]
            if self.collapsed[j - 1]:
                maps.append(np.zeros(t, dtype=int))
            elif self.uniform[j - 1]:
                maps.append(np.array([self._class_of(j, v) for v in range(t)]))
            else:
                maps.append(np.arange(t))
        return maps

    def _diag_segment(self):
        """Segment evaluating diagonal blocks at any frequency."""
        seg = []
        for j in range(1, self.d + 1):
            if self.collapsed[j - 1]:
                seg.append(_DimPlan("diff", [0]))
            elif self.uniform[j - 1]:
                seg.append(_DimPlan("special", [0]))
            else:
                seg.append(_DimPlan("free", list(range(self.dims[j - 1]))))
        return seg

    def diag_sigma_table(self):
        """sigma_min over the reduced diagonal grid plus index lookup maps."""
        lists = self._diag_grid_lists()
        maps = self._diag_lookup_maps(lists)
        grid = np.array(list(itertools.product(*lists)), dtype=int)
        shape = tuple(len(v) for v in lists)
        c = self._c_reduced(self._diag_segment(), grid, grid)
        sig = np.linalg.svd(c, compute_uv=False)
        table_min = sig[:, -1].reshape(shape)
        table_max = sig[:, 0].reshape(shape)
        return grid.reshape(shape + (self.d,)), table_min, table_max, maps

    def _segments(self):
        """Sign/relation templates covering all potentially nonzero pairs."""
        per_dim_options = []
        for j in range(1, self.d + 1):
            if self.collapsed[j - 1]:
                per_dim_options.append([_DimPlan("diff", [0])])
            elif self.uniform[j - 1]:
                opts = []
                for cls, rep in self._dim_classes(j):
                    if cls == "generic":
                        opts.append(_DimPlan("fixed", [rep], relation=1))
                        opts.append(_DimPlan("fixed", [rep], relation=-1))
                    else:
                        opts.append(_DimPlan("split", [rep], relation=0))
                        opts.append(_DimPlan("split", [rep], relation=1))
                per_dim_options.append(opts)
            else:
                per_dim_options.append([_DimPlan("free", list(range(self.dims[j - 1])))])
        return [list(combo) for combo in itertools.product(*per_dim_options)]

    def _segment_tables(self, seg):
        """Sign patterns, component representatives, and xi table for a segment."""
        sign_dims = [j for j in range(1, self.d + 1) if seg[j - 1].mode in ("free", "special")]
        fixed_dims = [j for j in range(1, self.d + 1) if seg[j - 1].mode == "fixed"]
        split_dims = [j for j in range(1, self.d + 1) if seg[j - 1].mode == "split"]
        rsum_dims = sorted(sign_dims + fixed_dims + split_dims)
        reps = []
        for bits in itertools.product((0, 1), repeat=len(rsum_dims)):
            r = 0
            for b, j in zip(bits, rsum_dims):
                r |= b << (j - 1)
            reps.append(r)
        reps = np.array(sorted(reps), dtype=int)
        rbits = (reps[:, None] >> np.arange(self.d)[None, :]) & 1

        patterns = list(itertools.product((1, -1), repeat=len(sign_dims)))
        mrows = len(patterns)
        xi = np.ones((mrows, mrows, len(reps)), dtype=float)
        for a, mu in enumerate(patterns):
            for b, eta in enumerate(patterns):
                val = np.ones(len(reps))
                for idx, j in enumerate(sign_dims):
                    val = val * _cv(mu[idx], eta[idx], rbits[:, j - 1])
                for j in fixed_dims:
                    val = val * _cv(1, seg[j - 1].relation, rbits[:, j - 1])
                for j in split_dims:
                    val = val * (rbits[:, j - 1] == seg[j - 1].relation)
                xi[a, b] = val
        return sign_dims, patterns, reps, xi

    def _seg_signature(self, seg):
        return tuple((p.mode, p.relation) for p in seg)

    def _segment_contractions(self, seg):
        """Sign-pattern tables plus xi-contracted mask transforms.

        For every distinct per-dimension sign-pair combination the
        component sum collapses into one flattened complex array, so a C
        entry is a single indexed read of it.
        """
        sig = self._seg_signature(seg)
        cached = getattr(self, "_contr_cache", None)
        if cached is None:
            cached = self._contr_cache = {}
        if sig in cached:
            return cached[sig]
        sign_dims, patterns, reps, xi = self._segment_tables(seg)
        key_of = {}
        arrays = {}
        for a, mu in enumerate(patterns):
            for c, eta in enumerate(patterns):
                key = tuple(zip(mu, eta))
                key_of[(a, c)] = key
                if key not in arrays:
                    arrays[key] = np.tensordot(xi[a, c], self.mtil[reps], axes=(0, 0)).reshape(-1)
        entry = (sign_dims, patterns, key_of, arrays)
        cached[sig] = entry
        return entry

    def _c_reduced(self, seg, ks: np.ndarray, ls: np.ndarray) -> np.ndarray:
        """Reduced complex matrices for paired rows of frequencies."""
        sign_dims, patterns, key_of, arrays = self._segment_contractions(seg)
        b = len(ks)
        m = len(patterns)
        out = np.empty((b, m, m), dtype=complex)
        strides = np.ones(self.d, dtype=np.int64)
        for j in range(self.d - 2, -1, -1):
            strides[j] = strides[j + 1] * self.dims[j + 1]

        # stride-weighted frequency columns per dimension and sign variant;
        # dims outside the sign set contribute one shared column
        fixed_part = np.zeros(b, dtype=np.int64)
        variant = {}
        for j in range(1, self.d + 1):
            plan = seg[j - 1]
            t = self.dims[j - 1]
            if plan.mode in ("diff", "split"):
                fixed_part = fixed_part + ((ls[:, j - 1] - ks[:, j - 1]) % t) * strides[j - 1]
            elif plan.mode == "fixed":
                fixed_part = fixed_part + ((plan.relation * ls[:, j - 1] - ks[:, j - 1]) % t) * strides[j - 1]
            else:
                for mu_j in (1, -1):
                    for eta_j in (1, -1):
                        variant[(j, mu_j, eta_j)] = (
                            ((eta_j * ls[:, j - 1] - mu_j * ks[:, j - 1]) % t) * strides[j - 1]
                        )

        flats = {}
        for a, mu in enumerate(patterns):
            for c, eta in enumerate(patterns):
                key = key_of[(a, c)]
                if key not in flats:
                    flat = fixed_part
                    for idx, j in enumerate(sign_dims):
                        flat = flat + variant[(j, mu[idx], eta[idx])]
                    flats[key] = arrays[key].take(flat) / self.n_total
                out[:, a, c] = flats[key]
        return out

    def _candidate_lists(self, seg, k):
        """Per-dimension candidate values of the second frequency."""
        lists = []
        for j in range(1, self.d + 1):
            plan = seg[j - 1]
            t = self.dims[j - 1]
            if plan.mode == "free":
                lists.append(np.arange(t))
            elif plan.mode == "diff":
                if self.uniform[j - 1]:
                    lists.append(np.array([k[j - 1]]))
                else:
                    lists.append(np.arange(t))
            elif plan.mode == "fixed":
                lists.append(np.array([(plan.relation * k[j - 1]) % t]))
            else:  # split/special: zero or half class, equal frequency
                lists.append(np.array([k[j - 1]]))
        return lists

    def _sweep_grid(self, seg):
        lists = [
            np.array(seg[j - 1].k_values, dtype=int)
            if seg[j - 1].mode != "free"
            else np.arange(self.dims[j - 1])
            for j in range(1, self.d + 1)
        ]
        return lists

    def _segment_pairs(self, seg, chunk: int):
        """Yield (k, l) frequency-pair chunks, canonically oriented.

        Transpose symmetry makes the (l, k) orientation redundant whenever
        its representative also lies in the sweep, so roughly half the
        rows are dropped; duplicates are harmless for a max scan.
        """
        sweep = self._sweep_grid(seg)
        k_grid = np.array(list(itertools.product(*sweep)), dtype=np.int64)
        indep_cols = []
        indep_dims = []
        for j in range(1, self.d + 1):
            plan = seg[j - 1]
            if plan.mode == "free" or (plan.mode == "diff" and not self.uniform[j - 1]):
                indep_dims.append(j)
                indep_cols.append(np.arange(self.dims[j - 1]))
        if indep_dims:
            mesh = np.meshgrid(*indep_cols, indexing="ij")
            mesh = np.stack([m.reshape(-1) for m in mesh], axis=-1).astype(np.int64)
        else:
            mesh = np.zeros((1, 0), dtype=np.int64)
        nk, nl = len(k_grid), len(mesh)
        free_dims = [j for j in range(1, self.d + 1) if seg[j - 1].mode == "free"]
        diff_dims = [j for j in range(1, self.d + 1)
                     if seg[j - 1].mode == "diff" and not self.uniform[j - 1]]
        total = nk * nl
        for start in range(0, total, chunk):
            p = np.arange(start, min(start + chunk, total))
            ks = k_grid[p // nl]
            ls = np.empty_like(ks)
            row = mesh[p % nl]
            col = 0
            for j in range(1, self.d + 1):
                plan = seg[j - 1]
                t = self.dims[j - 1]
                if j in indep_dims:
                    ls[:, j - 1] = row[:, col]
                    col += 1
                elif plan.mode == "fixed":
                    ls[:, j - 1] = (plan.relation * ks[:, j - 1]) % t
                else:  # split/special pin the same frequency
                    ls[:, j - 1] = ks[:, j - 1]
            keep = np.any(ls != ks, axis=1)
            # canonical orientation: compare the free-dims flat index,
            # breaking ties on difference coordinates against their mirrors
            a = np.zeros(len(ks), dtype=np.int64)
            b = np.zeros(len(ks), dtype=np.int64)
            for j in free_dims:
                a = a * self.dims[j - 1] + ks[:, j - 1]
                b = b * self.dims[j - 1] + ls[:, j - 1]
            g = np.zeros(len(ks), dtype=np.int64)
            gm = np.zeros(len(ks), dtype=np.int64)
            for j in diff_dims:
                t = self.dims[j - 1]
                g = g * t + ls[:, j - 1]
                gm = gm * t + (t - ls[:, j - 1]) % t
            keep &= (a < b) | ((a == b) & (g <= gm))
            if keep.any():
                yield ks[keep], ls[keep]

    def mu_scan(self, tol: float = SINGULAR_TOL, chunk: int = 400000):
        """Max normalized sigma over inequivalent off-diagonal pairs."""
        grid, smin, _smax, maps = self.diag_sigma_table()
        if np.min(smin) <= tol:
            flat = int(np.argmin(smin))
            rep = tuple(int(v) for v in grid.reshape(-1, self.d)[flat])
            return np.inf, None, smin, maps, rep
        best = 0.0
        argmax = None
        for seg in self._segments():
            for kc, lc in self._segment_pairs(seg, chunk):
                c = self._c_reduced(seg, kc, lc)
                sk = smin[tuple(maps[j][kc[:, j]] for j in range(self.d))]
                sl = smin[tuple(maps[j][lc[:, j]] for j in range(self.d))]
                scale = 1.0 / np.sqrt(sk * sl)
                frob = np.sqrt(np.sum(np.abs(c) ** 2, axis=(1, 2))) * scale
                cand = np.flatnonzero(frob > best)
                if cand.size == 0:
                    continue
                sig = np.linalg.svd(c[cand], compute_uv=False)[:, 0] * scale[cand]
                top = int(np.argmax(sig))
                if sig[top] > best:
                    best = float(sig[top])
                    argmax = (tuple(int(v) for v in kc[cand[top]]),
                              tuple(int(v) for v in lc[cand[top]]))
        return best, argmax, smin, maps, None

    def hpsf_row(self, spike, tol: float = SINGULAR_TOL):
        """Normalized sigma_max against every other frequency coordinate."""
        grid, smin, smax, maps = self.diag_sigma_table()
        if np.min(smin) <= tol:
            raise ValueError("a diagonal block is singular; point spread is unbounded")
        spike = tuple(int(v) for v in spike)
        out = np.zeros(self.dims)
        s_spike = smin[tuple(maps[j][spike[j]] for j in range(self.d))]
        for seg in self._segments():
            # pin every swept dimension at the spike value
            valid = True
            for j in range(1, self.d + 1):
                plan = seg[j - 1]
                if plan.mode in ("fixed", "special", "split"):
                    cls_vals = {self._class_of(j, v) for v in plan.k_values}
                    if self._class_of(j, spike[j - 1]) not in cls_vals:
                        valid = False
                        break
            if not valid:
                continue
            cl = self._candidate_lists(seg, spike)
            mesh = np.meshgrid(*cl, indexing="ij")
            ls = np.stack([m.reshape(-1) for m in mesh], axis=-1)
            keep = np.any(ls != np.array(spike)[None, :], axis=1)
            ls = ls[keep]
            if ls.size == 0:
                continue
            ks = np.broadcast_to(np.array(spike, dtype=int), ls.shape)
            c = self._c_reduced(seg, ks, ls)
            sig = np.linalg.svd(c, compute_uv=False)[:, 0]
            sl = smin[tuple(maps[j][ls[:, j]] for j in range(self.d))]
            vals = sig / np.sqrt(s_spike * sl)
            for row, v in zip(ls, vals):
                idx = tuple(int(x) for x in row)
                out[idx] = max(out[idx], float(v))
        peak = float(smax[tuple(maps[j][spike[j]] for j in range(self.d))] / s_spike)
        return out, peak


# ---------------------------------------------------------------------------
# public operations


def mu_hypercomplex(op: AcquisitionOperator, with_traditional: bool = False,
                    tol: float = SINGULAR_TOL) -> CoherenceReport:
    """Block coherence of an acquisition operator.

    Exploits the transpose symmetry of paired blocks and the structural
    reductions detected on the schedule masks; the result is exact, not a
    bound.  Singular diagonal blocks yield an infinite report carrying the
    offending frequency class.
    """
    engine = _BlockEngine(op.masks, op.dims)
    mu, argmax, smin, maps, singular = engine.mu_scan(tol=tol)
    grid_lists = engine._diag_grid_lists()
    normalization = {}
    for idx, rep in zip(itertools.product(*[range(len(v)) for v in grid_lists]),
                        itertools.product(*grid_lists)):
        normalization[tuple(rep)] = float(1.0 / np.sqrt(smin[idx])) if np.isfinite(mu) else np.nan
    report = CoherenceReport(
        mu_h=float(mu),
        infinite=not np.isfinite(mu),
        argmax=argmax,
        normalization=normalization,
        descriptor=op.schedule.descriptor.to_dict(),
        seed=op.schedule.seed,
        singular_group=singular,
    )
    if with_traditional:
        report.traditional_mu = mu_traditional(op)
    return report


def hpsf(op: AcquisitionOperator, spike) -> tuple:
    """Point-spread values over all frequencies for a unit spike.

    Returns (values, peak): ``values`` holds the normalized sigma_max of the
    block pairing the spike with every other frequency (zero at the spike
    itself), ``peak`` is the spike's own normalized diagonal sigma_max.
    """
    engine = _BlockEngine(op.masks, op.dims)
    return engine.hpsf_row(spike)


def mu_traditional(op: AcquisitionOperator, column_cap: int = 16384) -> float:
    """Classical coherence over unit-normalized real columns.

    Schedules with full components at sampled pixels reduce to Fourier
    coefficients of the single pixel mask; anything else falls back to the
    dense matrix, capped at ``column_cap`` columns.
    """
    masks = op.masks
    if np.all(masks == masks[0]):
        engine = _BlockEngine(masks, op.dims)
        count = float(masks[0].sum())
        if count == 0:
            return np.inf
        # coefficient vector of the mask correlation at every frequency
        # offset: phi(rho_f)_g = 2^(-d/2) sum_eps mtil(eps*f) V_eps[g]
        patterns = list(itertools.product((1, -1), repeat=op.d))
        vm = engine._vmat()
        mt = engine.mtil[0]
        coeff = np.zeros(op.dims + (op.nc,), dtype=complex)
        for col, pat in enumerate(patterns):
            sliced = mt
            for j in range(op.d):
                if pat[j] == -1:
                    idx = (-np.arange(op.dims[j])) % op.dims[j]
                    sliced = np.take(sliced, idx, axis=j)
            coeff += sliced[..., None] * vm[:, col][None, :]
        coeff *= (2.0 ** (-op.d / 2.0))
        mags = np.abs(np.real(coeff))
        mags.reshape(-1, op.nc)[0, :] = 0.0  # zero offset: orthogonal components
        return float(np.max(mags) / count)
    from .acquisition import dense_matrix

    return _traditional_from_matrix(dense_matrix(op, column_cap=column_cap))


def _traditional_from_matrix(a: np.ndarray, tol: float = SINGULAR_TOL) -> float:
    norms = np.linalg.norm(a, axis=0)
    if np.any(norms <= tol):
        return np.inf
    an = a / norms
    g = an.T @ an
    np.fill_diagonal(g, 0.0)
    return float(np.max(np.abs(g)))


def lemma_zero_pattern(schedule: SamplingSchedule, k, l) -> str:
    """Predict whether the (k, l) block must vanish by structure alone.

    A dimension sampled uniformly with constant component subsets forces
    matching frequencies when its sine/cosine partners are acquired
    together, and matching-or-mirrored frequencies otherwise.  Returns
    "zero" when the pair violates those constraints, else "unconstrained".
    """
    k = tuple(int(v) for v in k)
    l = tuple(int(v) for v in l)
    masks = schedule.masks()
    engine = _BlockEngine(masks, schedule.dims)
    for j in range(1, schedule.d + 1):
        if not engine.uniform[j - 1]:
            continue
        t = schedule.dims[j - 1]
        if quadrature_check(schedule, j):
            if k[j - 1] != l[j - 1]:
                return "zero"
        else:
            if k[j - 1] != l[j - 1] and k[j - 1] != (t - l[j - 1]) % t:
                return "zero"
    return "unconstrained"


def mu_from_dense(a: np.ndarray, ncomp: int, tol: float = SINGULAR_TOL):
    """Block coherence straight from an explicit matrix (oracle route).

    Splits columns into consecutive groups of ``ncomp``, normalizes by the
    minimum singular value of each diagonal block of A^T A, and scans all
    off-diagonal blocks.  Returns (mu, argmax_pair); mu is inf when a
    diagonal block is singular.
    """
    ncols = a.shape[1]
    if ncols % ncomp:
        raise ValueError(f"{ncols} columns do not split into groups of {ncomp}")
    nfreq = ncols // ncomp
    g = a.T @ a
    blocks = g.reshape(nfreq, ncomp, nfreq, ncomp).transpose(0, 2, 1, 3)
    diag = blocks[np.arange(nfreq), np.arange(nfreq)]
    smin = np.linalg.svd(diag, compute_uv=False)[:, -1]
    if np.any(smin <= tol):
        return np.inf, (int(np.argmin(smin)), int(np.argmin(smin)))
    scale = 1.0 / np.sqrt(smin)
    sig = np.linalg.svd(blocks, compute_uv=False)[..., 0]
    sig = sig * scale[:, None] * scale[None, :]
    np.fill_diagonal(sig, 0.0)
    arg = np.unravel_index(int(np.argmax(sig)), sig.shape)
    return float(sig[arg]), (int(arg[0]), int(arg[1]))

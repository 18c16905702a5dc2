"""Generators for component-subset sampling schedules.

A schedule assigns to every grid point (pixel) the subset of the 2**d real
components acquired there.  The last dimension is the direct acquisition
dimension and is always fully sampled; undersampling happens across indels
(tuples of indirect-dimension indices) and/or across components.

Supported classes: uniform, random and exponentially-biased NUS, fixed or
mixed-cardinality partial-component sampling driven by a read scheme
(S1..S4 for d=3) and a randomization granularity (per pixel, per indel, or
per plane), single-read sampling, and equal-coverage-per-component
sampling.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .algebra import _check_dimension

__all__ = [
    "SCHEMES",
    "ComponentScheme",
    "ScheduleDescriptor",
    "SamplingSchedule",
    "uniform",
    "nus_random",
    "nus_exponential",
    "pcs",
    "rpd",
    "pcs_equal_coverage",
    "quadrature_check",
    "scheme_reads",
]

# Read tables for d=3: four labeled complex reads (a, b, c, d), each a pair
# of component indices in subset-bitmask order.
SCHEMES = {
    "S1": ((0, 1), (2, 3), (4, 5), (6, 7)),
    "S2": ((0, 2), (1, 3), (4, 7), (5, 6)),
    "S3": ((0, 3), (1, 5), (2, 6), (4, 7)),
    "S4": ((0, 4), (1, 5), (2, 6), (3, 7)),
}

# chi value -> selected read labels when half of the reads are acquired
_HALF_READ_PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))

# decay constant for exponentially-biased selection (CLI can override)
DEFAULT_DECAY = 2.0


@dataclass(frozen=True)
class ComponentScheme:
    """Named pairing of the 2**d components into 2**(d-1) complex reads."""

    name: str
    pairs: tuple

    def __post_init__(self):
        flat = [c for pair in self.pairs for c in pair]
        if sorted(flat) != list(range(2 * len(self.pairs))):
            raise ValueError(f"scheme {self.name} pairs must partition the component set, got {self.pairs}")


def scheme_reads(scheme, d: int) -> ComponentScheme:
    """Resolve a scheme name or explicit pair table for dimension d."""
    if isinstance(scheme, ComponentScheme):
        return scheme
    if isinstance(scheme, str):
        if d != 3:
            raise ValueError(f"named schemes are defined for d=3 only, got d={d}")
        if scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {scheme!r}; expected one of {sorted(SCHEMES)}")
        return ComponentScheme(scheme, SCHEMES[scheme])
    if scheme is None:
        if d == 3:
            return ComponentScheme("S4", SCHEMES["S4"])
        if d == 2:
            # natural reads for d=2
            return ComponentScheme("natural", ((0, 1), (2, 3)))
        raise ValueError(f"no default read scheme for d={d}")
    pairs = tuple(tuple(int(c) for c in pair) for pair in scheme)
    return ComponentScheme("custom", pairs)


@dataclass(frozen=True)
class ScheduleDescriptor:
    """Schedule class plus the parameters that (with the seed) determine it."""

    klass: str
    delta_i: float | None = None
    delta_c: float | None = None
    scheme: str | None = None
    approach: str | None = None
    bias: str | None = None
    decay: float | None = None

    def to_dict(self) -> dict:
        return {
            "class": self.klass,
            "delta_i": self.delta_i,
            "delta_c": self.delta_c,
            "scheme": self.scheme,
            "approach": self.approach,
            "bias": self.bias,
            "decay": self.decay,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ScheduleDescriptor":
        return cls(
            klass=data["class"],
            delta_i=data.get("delta_i"),
            delta_c=data.get("delta_c"),
            scheme=data.get("scheme"),
            approach=data.get("approach"),
            bias=data.get("bias"),
            decay=data.get("decay"),
        )


@dataclass
class SamplingSchedule:
    """Per-pixel component subsets over a d-dimensional grid.

    ``entries`` maps pixel tuples to sorted component-index tuples; pixels
    with empty subsets are omitted.  ``masks()`` returns the same content
    as a boolean array of shape (2**d,) + dims for vectorized consumers.
    """

    dims: tuple
    entries: dict
    seed: int | None = None
    descriptor: ScheduleDescriptor = field(default_factory=lambda: ScheduleDescriptor("custom"))

    def __post_init__(self):
        self.dims = tuple(int(t) for t in self.dims)
        self.d = _check_dimension(len(self.dims))
        nc = 1 << self.d
        for t, comps in self.entries.items():
            if len(t) != self.d:
                raise ValueError(f"pixel {t} does not match dims {self.dims}")
            if any(not 0 <= c < nc for c in comps):
                raise ValueError(f"component index out of range at pixel {t}: {comps}")

    @property
    def ncomp(self) -> int:
        return 1 << self.d

    @property
    def n_real(self) -> int:
        """Total number of sampled real coordinates."""
        return sum(len(c) for c in self.entries.values())

    @property
    def n_pixels(self) -> int:
        return int(np.prod(self.dims))

    @property
    def undersampling(self) -> float:
        return self.n_real / (self.n_pixels * self.ncomp)

    def masks(self) -> np.ndarray:
        m = np.zeros((self.ncomp,) + self.dims, dtype=bool)
        for t, comps in self.entries.items():
            for c in comps:
                m[(c,) + t] = True
        return m

    @classmethod
    def from_masks(cls, dims, masks, seed=None, descriptor=None) -> "SamplingSchedule":
        dims = tuple(int(t) for t in dims)
        entries = {}
        comp_lists = [np.argwhere(masks[c]) for c in range(masks.shape[0])]
        for c, pts in enumerate(comp_lists):
            for pt in pts:
                entries.setdefault(tuple(int(i) for i in pt), []).append(c)
        entries = {t: tuple(sorted(v)) for t, v in sorted(entries.items())}
        return cls(dims, entries, seed=seed, descriptor=descriptor or ScheduleDescriptor("custom"))

    def to_json(self) -> str:
        payload = {
            "dims": list(self.dims),
            "d": self.d,
            "descriptor": self.descriptor.to_dict(),
            "seed": self.seed,
            "entries": [
                {"t": list(t), "components": list(comps)}
                for t, comps in sorted(self.entries.items())
            ],
        }
        return json.dumps(payload, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "SamplingSchedule":
        payload = json.loads(text)
        entries = {
            tuple(int(i) for i in e["t"]): tuple(int(c) for c in e["components"])
            for e in payload["entries"]
        }
        sched = cls(
            tuple(payload["dims"]),
            entries,
            seed=payload.get("seed"),
            descriptor=ScheduleDescriptor.from_dict(payload["descriptor"]),
        )
        if sched.d != payload["d"]:
            raise ValueError("inconsistent dimension count in schedule file")
        return sched


def _round_half_even(x: float) -> int:
    return int(np.rint(x))


def _indel_dims(dims) -> tuple:
    return tuple(dims[:-1])


def _indel_grid(dims):
    return list(product(*[range(t) for t in _indel_dims(dims)]))


def _expand_indels(dims, indel_comps) -> dict:
    """Blow per-indel subsets up to per-pixel entries along the direct axis."""
    t_d = dims[-1]
    entries = {}
    for indel, comps in indel_comps.items():
        if not comps:
            continue
        for td in range(t_d):
            entries[indel + (td,)] = tuple(sorted(comps))
    return entries


def uniform(dims) -> SamplingSchedule:
    """Full sampling: every pixel carries all 2**d components."""
    dims = tuple(int(t) for t in dims)
    d = _check_dimension(len(dims))
    full = tuple(range(1 << d))
    entries = {t: full for t in product(*[range(s) for s in dims])}
    return SamplingSchedule(dims, entries, seed=None, descriptor=ScheduleDescriptor("uniform", delta_i=1.0, delta_c=1.0))


def _check_fraction(name: str, value: float) -> float:
    if not 0.0 < value <= 1.0:
        raise ValueError(f"{name} must lie in (0, 1], got {value}")
    return float(value)


def nus_random(dims, delta_i: float, seed: int) -> SamplingSchedule:
    """Uniformly random indel subset, full components at chosen indels."""
    dims = tuple(int(t) for t in dims)
    d = _check_dimension(len(dims))
    delta_i = _check_fraction("delta_i", delta_i)
    indels = _indel_grid(dims)
    m = _round_half_even(delta_i * len(indels))
    rng = np.random.default_rng(seed)
    chosen = rng.permutation(len(indels))[:m]
    full = tuple(range(1 << d))
    entries = _expand_indels(dims, {indels[i]: full for i in sorted(chosen)})
    return SamplingSchedule(
        dims, entries, seed=seed,
        descriptor=ScheduleDescriptor("nus-random", delta_i=delta_i, delta_c=1.0),
    )


def _exponential_weights(dims, decay: float) -> np.ndarray:
    """Per-indel weight exp(-decay * sum_j t_j / T_j), flattened row-major."""
    idims = _indel_dims(dims)
    if not idims:
        return np.ones(1)
    axes = np.indices(idims).reshape(len(idims), -1)
    scaled = sum(axes[j] / idims[j] for j in range(len(idims)))
    return np.exp(-decay * scaled)


def _capped_probabilities(weights: np.ndarray, target: float) -> np.ndarray:
    """Probabilities proportional to weights with sum == target, capped at 1."""
    p = np.zeros_like(weights, dtype=float)
    free = np.ones(len(weights), dtype=bool)
    remaining = float(target)
    for _ in range(len(weights)):
        total = weights[free].sum()
        if total <= 0 or remaining <= 0:
            break
        scale = remaining / total
        trial = weights * scale
        over = free & (trial >= 1.0)
        if not over.any():
            p[free] = trial[free]
            break
        p[over] = 1.0
        remaining -= int(over.sum())
        free &= ~over
    return np.clip(p, 0.0, 1.0)


def nus_exponential(dims, delta_i: float, decay: float = DEFAULT_DECAY, variant: str = "random", seed: int = 0) -> SamplingSchedule:
    """NUS biased toward early indirect times.

    variant="random" draws indels independently with probability
    proportional to the exponential weight (normalized to an expected
    count of delta_i * #indels, capped at 1); variant="deterministic"
    takes the highest-weight indels with lexicographic tie-break.
    """
    dims = tuple(int(t) for t in dims)
    d = _check_dimension(len(dims))
    delta_i = _check_fraction("delta_i", delta_i)
    if decay <= 0:
        raise ValueError(f"decay must be positive, got {decay}")
    if variant not in ("random", "deterministic"):
        raise ValueError(f"variant must be 'random' or 'deterministic', got {variant!r}")
    indels = _indel_grid(dims)
    weights = _exponential_weights(dims, decay)
    m = _round_half_even(delta_i * len(indels))
    if variant == "deterministic":
        # stable sort on -weight keeps lexicographic order among ties
        order = np.argsort(-weights, kind="stable")
        chosen = np.zeros(len(indels), dtype=bool)
        chosen[order[:m]] = True
    else:
        p = _capped_probabilities(weights, float(m))
        rng = np.random.default_rng(seed)
        chosen = rng.random(len(indels)) < p
    full = tuple(range(1 << d))
    entries = _expand_indels(dims, {indels[i]: full for i in np.flatnonzero(chosen)})
    return SamplingSchedule(
        dims, entries, seed=seed,
        descriptor=ScheduleDescriptor(
            "nus-exponential", delta_i=delta_i, delta_c=1.0,
            bias=f"exp-{variant}", decay=float(decay),
        ),
    )


def _reads_for_chi(chi: int, delta_c: float, nreads: int):
    """Read labels selected by one chi draw at the given coverage."""
    if delta_c == 1.0:
        return tuple(range(nreads))
    if nreads == 4 and delta_c == 0.25:
        return (chi,)
    if nreads == 4 and delta_c == 0.5:
        return _HALF_READ_PAIRS[chi]
    if nreads == 2 and delta_c == 0.5:
        return (chi,)
    raise ValueError(f"unsupported delta_c={delta_c} for {nreads} reads")


def _chi_cardinality(delta_c: float, nreads: int) -> int:
    if delta_c == 1.0:
        return 1
    if nreads == 4 and delta_c == 0.25:
        return 4
    if nreads == 4 and delta_c == 0.5:
        return 6
    if nreads == 2 and delta_c == 0.5:
        return 2
    raise ValueError(f"unsupported delta_c={delta_c} for {nreads} reads")


def pcs(dims, delta_i: float, delta_c: float, scheme, approach: str, seed: int) -> SamplingSchedule:
    """Partial-component sampling over randomly chosen indels.

    At every sampled granularity unit a read selector chi is drawn
    uniformly and the matching reads of the scheme are installed.  The
    approach fixes the granularity: "A1" draws per pixel, "A2" per indel,
    "A3" per plane (first indirect index).
    """
    dims = tuple(int(t) for t in dims)
    d = _check_dimension(len(dims))
    delta_i = _check_fraction("delta_i", delta_i)
    if approach not in ("A1", "A2", "A3"):
        raise ValueError(f"approach must be one of A1, A2, A3, got {approach!r}")
    if approach == "A3" and d < 3:
        raise ValueError("approach A3 needs at least two indirect dimensions")
    reads = scheme_reads(scheme, d)
    nreads = len(reads.pairs)
    nchi = _chi_cardinality(delta_c, nreads)

    rng = np.random.default_rng(seed)
    indels = _indel_grid(dims)
    m = _round_half_even(delta_i * len(indels))
    chosen = np.zeros(len(indels), dtype=bool)
    chosen[rng.permutation(len(indels))[:m]] = True

    # chi draws cover every granularity unit in row-major order so the
    # stream layout is independent of which indels were selected
    if approach == "A1":
        chi = rng.integers(0, nchi, size=dims)
    elif approach == "A2":
        chi = rng.integers(0, nchi, size=_indel_dims(dims))
    else:
        chi = rng.integers(0, nchi, size=(dims[0],))

    t_d = dims[-1]
    entries = {}
    for flat, indel in enumerate(indels):
        if not chosen[flat]:
            continue
        for td in range(t_d):
            if approach == "A1":
                c = chi[indel + (td,)]
            elif approach == "A2":
                c = chi[indel]
            else:
                c = chi[indel[0]]
            comps = sorted(c2 for r in _reads_for_chi(int(c), delta_c, nreads) for c2 in reads.pairs[r])
            entries[indel + (td,)] = tuple(comps)
    return SamplingSchedule(
        dims, entries, seed=seed,
        descriptor=ScheduleDescriptor(
            "pcs", delta_i=delta_i, delta_c=float(delta_c),
            scheme=reads.name, approach=approach,
        ),
    )


def rpd(dims, scheme, approach: str, seed: int) -> SamplingSchedule:
    """Single complex read per granularity unit at full indel coverage."""
    dims = tuple(int(t) for t in dims)
    d = _check_dimension(len(dims))
    if d < 2:
        raise ValueError("single-read sampling needs d >= 2")
    sched = pcs(dims, 1.0, 1.0 / (1 << (d - 1)), scheme, approach, seed)
    sched.descriptor = ScheduleDescriptor(
        "rpd", delta_i=1.0, delta_c=sched.descriptor.delta_c,
        scheme=sched.descriptor.scheme, approach=approach,
    )
    return sched


def pcs_equal_coverage(dims, delta: float, bias: str, seed: int) -> SamplingSchedule:
    """Independent per-component indel selection at identical coverage.

    Every component selects exactly round(delta * #indels) indels; a
    pixel's subset collects the components that selected its indel.
    bias is "random", "exp-random", or "exp-deterministic"; the
    exponential variants use the default decay of the biased NUS
    generator.
    """
    dims = tuple(int(t) for t in dims)
    d = _check_dimension(len(dims))
    delta = _check_fraction("delta", delta)
    if bias not in ("random", "exp-random", "exp-deterministic"):
        raise ValueError(f"unknown bias {bias!r}")
    decay = DEFAULT_DECAY
    nc = 1 << d
    indels = _indel_grid(dims)
    n_indels = len(indels)
    m = _round_half_even(delta * n_indels)
    rng = np.random.default_rng(seed)
    weights = _exponential_weights(dims, decay)

    indel_comps = {t: [] for t in indels}
    for c in range(nc):
        if bias == "random":
            chosen = rng.permutation(n_indels)[:m]
        elif bias == "exp-random":
            # weighted sampling without replacement via exponential keys
            keys = rng.random(n_indels) ** (1.0 / weights)
            chosen = np.argsort(-keys, kind="stable")[:m]
        else:
            order = np.argsort(-weights, kind="stable")
            chosen = order[:m]
        for i in chosen:
            indel_comps[indels[i]].append(c)
    entries = _expand_indels(dims, {t: tuple(sorted(v)) for t, v in indel_comps.items()})
    return SamplingSchedule(
        dims, entries, seed=seed,
        descriptor=ScheduleDescriptor(
            "pcs-equal-coverage", delta_i=delta, delta_c=None, bias=bias,
            decay=None if bias == "random" else decay,
        ),
    )


def quadrature_check(schedule: SamplingSchedule, j: int) -> bool:
    """True when every sampled component has its dimension-j partner sampled.

    The partner differs only in whether dimension j contributes a sine or a
    cosine factor, i.e. in bit j-1 of the component index.
    """
    if not 1 <= j <= schedule.d:
        raise ValueError(f"dimension index {j} out of range for d={schedule.d}")
    bit = 1 << (j - 1)
    for comps in schedule.entries.values():
        have = set(comps)
        if any(c ^ bit not in have for c in have):
            return False
    return True

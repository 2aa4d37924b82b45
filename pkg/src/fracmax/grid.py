"""Uniform box grids, grid-sampled functions, and discrete cubes.

Functions are represented by their values at cell centers of a uniform,
isotropic grid over an axis-aligned box in dimension 1 or 2.  The cell
center of index ``i`` along an axis is ``lo + (i + 1/2) * h`` with
``h = (hi - lo) / cells``.  Integrals are midpoint sums, which are exact
for integrands that are affine on each cell; several identities checked
elsewhere in the package rely on this exactness.

Cubes are axis-aligned blocks of whole cells with equal side length on
every axis; they never cross the domain boundary.  A :class:`CubeFamily`
fixes the side lengths (scales) and anchor stride used to discretize a
supremum over all cubes.
"""

from __future__ import annotations

import csv
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .errors import (
    CorpusError,
    DomainMismatchError,
    FamilyError,
    HypothesisViolationError,
)

_GFN_MAGIC = b"GFN1"
_EXPONENT_FLAG = 0x45  # ASCII 'E'

# Relative slack used when asserting isotropic spacing.
_ISO_TOL = 1e-12


def _as_tuple(value, dim: int, cast) -> tuple:
    if np.isscalar(value):
        return tuple(cast(value) for _ in range(dim))
    out = tuple(cast(v) for v in value)
    if len(out) != dim:
        raise DomainMismatchError(f"expected {dim} per-axis values, got {len(out)}")
    return out


@dataclass(frozen=True)
class Domain:
    """A uniform, isotropic grid over a box in dimension 1 or 2.

    Attributes:
        dim: spatial dimension, 1 or 2.
        lo, hi: box corners per axis.
        cells: number of cells per axis (>= 2).
    """

    dim: int
    lo: tuple[float, ...]
    hi: tuple[float, ...]
    cells: tuple[int, ...]

    def __init__(self, dim: int, lo, hi, cells):
        if dim not in (1, 2):
            raise DomainMismatchError(f"dim must be 1 or 2, got {dim}")
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "lo", _as_tuple(lo, dim, float))
        object.__setattr__(self, "hi", _as_tuple(hi, dim, float))
        object.__setattr__(self, "cells", _as_tuple(cells, dim, int))
        for axis in range(dim):
            if not self.hi[axis] > self.lo[axis]:
                raise DomainMismatchError("hi must exceed lo on every axis")
            if self.cells[axis] < 2:
                raise DomainMismatchError("at least 2 cells per axis required")
        spacings = [
            (self.hi[a] - self.lo[a]) / self.cells[a] for a in range(dim)
        ]
        h0 = spacings[0]
        for s in spacings[1:]:
            if abs(s - h0) > _ISO_TOL * abs(h0):
                raise DomainMismatchError(
                    f"grid must be isotropic: spacings {spacings}"
                )

    @property
    def h(self) -> float:
        """Cell spacing (identical on all axes)."""
        return (self.hi[0] - self.lo[0]) / self.cells[0]

    @property
    def shape(self) -> tuple[int, ...]:
        return self.cells

    @property
    def n_cells(self) -> int:
        return int(np.prod(self.cells))

    @property
    def cell_measure(self) -> float:
        """Measure of a single cell, h^dim."""
        return self.h**self.dim

    def centers(self, axis: int = 0) -> np.ndarray:
        """Cell-center coordinates along one axis."""
        n = self.cells[axis]
        return self.lo[axis] + (np.arange(n) + 0.5) * self.h

    def meshgrid(self) -> tuple[np.ndarray, ...]:
        """Cell-center coordinate arrays, one per axis, each of full shape."""
        axes = [self.centers(a) for a in range(self.dim)]
        return tuple(np.meshgrid(*axes, indexing="ij"))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Domain):
            return NotImplemented
        return (
            self.dim == other.dim
            and self.cells == other.cells
            and all(abs(a - b) < 1e-12 for a, b in zip(self.lo, other.lo))
            and all(abs(a - b) < 1e-12 for a, b in zip(self.hi, other.hi))
        )

    def __hash__(self):
        return hash((self.dim, self.cells, self.lo, self.hi))


@dataclass(frozen=True)
class GridFunction:
    """Samples of a real function at the cell centers of a domain.

    Samples are stored row-major with shape ``domain.cells``.  Samples
    must be finite unless ``masked`` is set, in which case NaN marks
    cells where the function is undefined (used by localized maximal
    operators); masked functions cannot be serialized directly.
    """

    domain: Domain
    samples: np.ndarray
    masked: bool = False

    def __init__(self, domain: Domain, samples, masked: bool = False):
        arr = np.asarray(samples, dtype=np.float64).reshape(domain.shape)
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        if not masked and not np.all(np.isfinite(arr)):
            raise DomainMismatchError("samples must be finite")
        object.__setattr__(self, "domain", domain)
        object.__setattr__(self, "samples", arr)
        object.__setattr__(self, "masked", bool(masked))

    def with_samples(self, samples, masked: bool | None = None) -> "GridFunction":
        return GridFunction(
            self.domain, samples, self.masked if masked is None else masked
        )

    def __add__(self, other):
        return _binary_op(self, other, np.add)

    def __sub__(self, other):
        return _binary_op(self, other, np.subtract)

    def __mul__(self, other):
        return _binary_op(self, other, np.multiply)

    __rmul__ = __mul__

    def __abs__(self):
        return self.with_samples(np.abs(self.samples))


def _binary_op(f: GridFunction, other, op) -> GridFunction:
    if isinstance(other, GridFunction):
        if other.domain != f.domain:
            raise DomainMismatchError("grid functions live on different domains")
        return GridFunction(f.domain, op(f.samples, other.samples),
                            f.masked or other.masked)
    return GridFunction(f.domain, op(f.samples, other), f.masked)


@dataclass(frozen=True)
class Cube:
    """A discrete cube: ``side`` whole cells per axis starting at ``anchor``."""

    anchor: tuple[int, ...]
    side: int

    def __init__(self, anchor, side: int):
        if np.isscalar(anchor):
            anchor = (int(anchor),)
        object.__setattr__(self, "anchor", tuple(int(a) for a in anchor))
        object.__setattr__(self, "side", int(side))
        if self.side < 1:
            raise DomainMismatchError(f"cube side must be >= 1, got {side}")
        if any(a < 0 for a in self.anchor):
            raise DomainMismatchError("cube anchor must be nonnegative")

    def measure(self, dom: Domain) -> float:
        """Lebesgue measure (side * h)^dim."""
        return (self.side * dom.h) ** dom.dim

    def slices(self) -> tuple[slice, ...]:
        return tuple(slice(a, a + self.side) for a in self.anchor)

    def cell_count(self, dim: int) -> int:
        return self.side**dim


def validate_cube(Q: Cube, dom: Domain) -> None:
    """Raise unless Q lies fully inside the domain (no clipping)."""
    if len(Q.anchor) != dom.dim:
        raise DomainMismatchError(
            f"cube anchor has {len(Q.anchor)} axes, domain has {dom.dim}"
        )
    for axis in range(dom.dim):
        if Q.anchor[axis] + Q.side > dom.cells[axis]:
            raise DomainMismatchError(
                f"cube [{Q.anchor[axis]}, {Q.anchor[axis] + Q.side}) exceeds "
                f"{dom.cells[axis]} cells on axis {axis}"
            )


def whole_domain_cube(dom: Domain) -> Cube:
    side = min(dom.cells)
    if any(c != side for c in dom.cells):
        raise DomainMismatchError("whole-domain cube requires equal cells per axis")
    return Cube((0,) * dom.dim, side)


@dataclass(frozen=True)
class CubeFamily:
    """Side lengths and anchor stride discretizing the supremum over cubes.

    ``policy`` records how the scale set was generated: ``DYADIC`` for
    powers of two, ``ALL`` for every side length, ``CUSTOM`` otherwise.
    Anchors at scale ``s`` are the multiples of ``anchor_stride`` in
    ``[0, cells - s]`` per axis.
    """

    scales: tuple[int, ...]
    anchor_stride: int = 1
    policy: str = "CUSTOM"

    def __init__(self, scales: Sequence[int], anchor_stride: int = 1,
                 policy: str = "CUSTOM"):
        scales = tuple(int(s) for s in scales)
        if not scales:
            raise FamilyError("cube family needs at least one scale")
        if any(s < 1 for s in scales):
            raise FamilyError("scales must be >= 1")
        if any(b <= a for a, b in zip(scales, scales[1:])):
            raise FamilyError("scales must be strictly increasing")
        if anchor_stride < 1:
            raise FamilyError("anchor_stride must be >= 1")
        object.__setattr__(self, "scales", scales)
        object.__setattr__(self, "anchor_stride", int(anchor_stride))
        object.__setattr__(self, "policy", str(policy))

    @classmethod
    def dyadic(cls, cells: int, anchor_stride: int = 1) -> "CubeFamily":
        """Scales {1, 2, 4, ...} up to the cell count."""
        scales = []
        s = 1
        while s <= cells:
            scales.append(s)
            s *= 2
        return cls(scales, anchor_stride, policy="DYADIC")

    @classmethod
    def all_scales(cls, cells: int, anchor_stride: int = 1) -> "CubeFamily":
        return cls(range(1, cells + 1), anchor_stride, policy="ALL")

    def validate_for(self, dom: Domain) -> None:
        limit = min(dom.cells)
        if any(s > limit for s in self.scales):
            raise FamilyError(
                f"scale {max(self.scales)} exceeds the smallest axis ({limit} cells)"
            )

    def anchors(self, scale: int, cells: int) -> np.ndarray:
        """Anchor positions for one axis."""
        return np.arange(0, cells - scale + 1, self.anchor_stride)

    def cubes(self, dom: Domain) -> Iterator[Cube]:
        """All family cubes, scales ascending, anchors lexicographic."""
        self.validate_for(dom)
        for s in self.scales:
            axis_anchors = [self.anchors(s, dom.cells[a]) for a in range(dom.dim)]
            if dom.dim == 1:
                for a0 in axis_anchors[0]:
                    yield Cube((int(a0),), s)
            else:
                for a0 in axis_anchors[0]:
                    for a1 in axis_anchors[1]:
                        yield Cube((int(a0), int(a1)), s)

    def replacement_closed_at(self, side: int) -> bool:
        """True if min(s, side) stays in the scale set for every scale s."""
        have = set(self.scales)
        return side in have and all(min(s, side) in have for s in self.scales)


# ---------------------------------------------------------------------------
# Quadrature and pointwise operations
# ---------------------------------------------------------------------------

def integrate(f: GridFunction, Q: Cube) -> float:
    """Midpoint-rule integral of f over Q: sum of samples times h^dim."""
    validate_cube(Q, f.domain)
    block = f.samples[Q.slices()]
    return float(math.fsum(block.ravel().tolist()) * f.domain.cell_measure)


def average(f: GridFunction, Q: Cube) -> float:
    """Mean value of f over Q (this is b_Q when f plays the symbol role)."""
    validate_cube(Q, f.domain)
    block = f.samples[Q.slices()]
    # side^dim is a power of two for dyadic cubes, so the division is exact
    return float(math.fsum(block.ravel().tolist()) / block.size)


def indicator(Q: Cube, dom: Domain) -> GridFunction:
    """Characteristic function of Q on the given domain."""
    validate_cube(Q, dom)
    samples = np.zeros(dom.shape)
    samples[Q.slices()] = 1.0
    return GridFunction(dom, samples)


def decompose(b: GridFunction) -> tuple[GridFunction, GridFunction]:
    """Split b into nonnegative parts (b_plus, b_minus) with
    b_plus - b_minus = b and b_plus * b_minus = 0 pointwise."""
    b_minus = np.maximum(-b.samples, 0.0)
    b_plus = np.abs(b.samples) - b_minus
    return b.with_samples(b_plus), b.with_samples(b_minus)


def pointwise_lipschitz_seminorm(
    b: GridFunction,
    beta: float,
    pair_budget: int = 2_000_000,
    seed: int = 0,
    metric: str = "euclidean",
) -> float:
    """Supremum of |b(x) - b(y)| / dist(x, y)^beta over grid center pairs.

    Exhaustive over all pairs in 1D up to 4096 cells; otherwise a
    deterministic uniform subsample of ``pair_budget`` pairs is used.
    ``metric`` selects the pair distance: ``euclidean`` (default) or
    ``chebyshev`` (the max-coordinate distance, which makes the constant
    in cube-based domination bounds exactly 1 in any dimension).
    """
    if not 0.0 < beta < 1.0:
        raise HypothesisViolationError(f"beta must lie in (0, 1), got {beta}")
    dom = b.domain
    if dom.dim == 1 and dom.n_cells <= 4096:
        v = b.samples
        n = v.size
        h = dom.h
        best = 0.0
        for d in range(1, n):
            diff = np.max(np.abs(v[d:] - v[:-d]))
            best = max(best, diff / (d * h) ** beta)
        return float(best)

    rng = np.random.default_rng(seed)
    flat = b.samples.ravel()
    n = flat.size
    m = min(pair_budget, n * (n - 1))
    i = rng.integers(0, n, size=m)
    j = rng.integers(0, n, size=m)
    keep = i != j
    i, j = i[keep], j[keep]
    if dom.dim == 1:
        dist = np.abs(i - j) * dom.h
    else:
        n1 = dom.cells[1]
        di = np.abs(i // n1 - j // n1)
        dj = np.abs(i % n1 - j % n1)
        if metric == "chebyshev":
            dist = np.maximum(di, dj) * dom.h
        else:
            dist = np.hypot(di, dj) * dom.h
    ratios = np.abs(flat[i] - flat[j]) / dist**beta
    return float(ratios.max(initial=0.0))


# ---------------------------------------------------------------------------
# Test-function corpus
# ---------------------------------------------------------------------------

CORPUS_NAMES = (
    "lip_pos",
    "lip_signed",
    "bmo_pos",
    "bmo_signed",
    "bump",
    "step",
    "random_lipschitz",
    "const",
)

_SINGULAR = {"bmo_pos", "bmo_signed"}


def parse_corpus_id(text: str) -> tuple[str, dict]:
    """Parse ids like ``lip_pos``, ``const:2.5`` or ``lip_pos:0.3``.

    The value after the colon sets ``c`` for ``const`` and ``beta`` for
    the Lipschitz generators.
    """
    name, _, arg = text.partition(":")
    name = name.strip()
    if name not in CORPUS_NAMES:
        raise CorpusError(
            f"unknown corpus symbol {name!r}; expected one of {CORPUS_NAMES}"
        )
    params: dict = {}
    if arg:
        value = float(arg)
        if name == "const":
            params["c"] = value
        elif name == "random_lipschitz":
            params["seed"] = int(value)
        else:
            params["beta"] = value
    return name, params


def _radius(dom: Domain) -> np.ndarray:
    coords = dom.meshgrid()
    if dom.dim == 1:
        return np.abs(coords[0])
    return np.hypot(coords[0], coords[1])


def _midpoint_displacement(n_knots: int, rng: np.random.Generator,
                           roughness: float = 0.35) -> np.ndarray:
    """Values at n_knots = 2^k + 1 evenly spaced knots on [0, 1]."""
    values = np.zeros(n_knots)
    values[0], values[-1] = rng.uniform(-1.0, 1.0, size=2)
    span = n_knots - 1
    length = 1.0
    while span > 1:
        half = span // 2
        idx = np.arange(half, n_knots - 1, span)
        mids = 0.5 * (values[idx - half] + values[idx + half])
        values[idx] = mids + rng.uniform(-1.0, 1.0, size=idx.size) * roughness * length
        span = half
        length *= 0.5
    return values


def _random_lipschitz_1d(centers: np.ndarray, lo: float, hi: float,
                         rng: np.random.Generator) -> np.ndarray:
    k = max(3, math.ceil(math.log2(max(centers.size, 2))))
    knots = _midpoint_displacement(2**k + 1, rng)
    t = (centers - lo) / (hi - lo)
    return np.interp(t * (2**k), np.arange(2**k + 1), knots)


def make_corpus(
    name: str,
    dom: Domain,
    beta: float = 0.5,
    c: float = 1.0,
    seed: int = 0,
) -> GridFunction:
    """Generate a named test symbol sampled at cell centers.

    Singular generators (the logarithmic ones) are evaluated at centers
    only and refuse domains that place a center at the singularity; use
    an even cell count on a symmetric box so 0 falls on a cell edge.
    """
    if name not in CORPUS_NAMES:
        raise CorpusError(
            f"unknown corpus symbol {name!r}; expected one of {CORPUS_NAMES}"
        )
    coords = dom.meshgrid()
    mid = [(dom.lo[a] + dom.hi[a]) / 2.0 for a in range(dom.dim)]

    if name in _SINGULAR:
        r = _radius(dom)
        if np.any(r < 1e-9 * dom.h):
            raise CorpusError(
                f"{name} is singular at 0 and a grid center falls there; "
                "use an even cell count on a symmetric box"
            )
        logr = np.log(r)
        values = np.abs(logr) if name == "bmo_pos" else logr
    elif name == "lip_pos":
        if not 0.0 < beta < 1.0:
            raise CorpusError(f"lip_pos requires beta in (0, 1), got {beta}")
        values = _radius(dom) ** beta
    elif name == "lip_signed":
        values = coords[0] - mid[0]
    elif name == "bump":
        half = min(dom.hi[a] - dom.lo[a] for a in range(dom.dim)) / 2.0
        shifted = sum((coords[a] - mid[a]) ** 2 for a in range(dom.dim))
        r = np.sqrt(shifted) / (0.8 * half)
        values = np.zeros(dom.shape)
        inside = r < 1.0
        values[inside] = np.exp(1.0 - 1.0 / (1.0 - r[inside] ** 2))
    elif name == "step":
        values = (coords[0] > mid[0]).astype(float)
    elif name == "random_lipschitz":
        rng = np.random.default_rng(seed)
        values = _random_lipschitz_1d(dom.centers(0), dom.lo[0], dom.hi[0], rng)
        if dom.dim == 2:
            other = _random_lipschitz_1d(dom.centers(1), dom.lo[1], dom.hi[1], rng)
            values = values[:, None] + other[None, :]
    else:  # const
        values = np.full(dom.shape, float(c))
    return GridFunction(dom, values)


# ---------------------------------------------------------------------------
# Serialization: GFN1 binary and CSV
# ---------------------------------------------------------------------------

def write_gfn(f: GridFunction, path, exponent: bool = False,
              force: bool = False) -> None:
    """Write the GFN1 binary format.

    Layout: magic ``GFN1``; for exponent fields one flag byte ``E``;
    u8 dim; per axis u64 cells, f64 lo, f64 hi; then f64 samples,
    little-endian, row-major.
    """
    if f.masked and not np.all(np.isfinite(f.samples)):
        raise DomainMismatchError(
            "masked functions cannot be serialized; restrict to the defined cube"
        )
    path = Path(path)
    if path.exists() and not force:
        raise FileExistsError(f"{path} exists; pass force=True to overwrite")
    dom = f.domain
    parts = [_GFN_MAGIC]
    if exponent:
        parts.append(bytes([_EXPONENT_FLAG]))
    parts.append(struct.pack("<B", dom.dim))
    for a in range(dom.dim):
        parts.append(struct.pack("<Qdd", dom.cells[a], dom.lo[a], dom.hi[a]))
    parts.append(np.ascontiguousarray(f.samples, dtype="<f8").tobytes())
    path.write_bytes(b"".join(parts))


def read_gfn(path) -> tuple[GridFunction, bool]:
    """Read a GFN1 file; returns (function, is_exponent_field)."""
    raw = Path(path).read_bytes()
    if raw[:4] != _GFN_MAGIC:
        raise DomainMismatchError(f"{path}: not a GFN1 file")
    off = 4
    is_exponent = raw[off] == _EXPONENT_FLAG
    if is_exponent:
        off += 1
    dim = raw[off]
    off += 1
    cells, lo, hi = [], [], []
    for _ in range(dim):
        n, a, b = struct.unpack_from("<Qdd", raw, off)
        off += 24
        cells.append(int(n))
        lo.append(a)
        hi.append(b)
    dom = Domain(dim, lo, hi, cells)
    samples = np.frombuffer(raw, dtype="<f8", count=dom.n_cells, offset=off)
    return GridFunction(dom, samples.reshape(dom.shape)), is_exponent


def write_csv(f: GridFunction, path, force: bool = False) -> None:
    """CSV export with header ``index,coord[,coord1],value``."""
    path = Path(path)
    if path.exists() and not force:
        raise FileExistsError(f"{path} exists; pass force=True to overwrite")
    dom = f.domain
    coords = dom.meshgrid()
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        if dom.dim == 1:
            writer.writerow(["index", "coord", "value"])
            for i, (x, v) in enumerate(zip(coords[0], f.samples)):
                writer.writerow([i, repr(float(x)), repr(float(v))])
        else:
            writer.writerow(["index", "coord0", "coord1", "value"])
            flat = f.samples.ravel()
            x0 = coords[0].ravel()
            x1 = coords[1].ravel()
            for i in range(flat.size):
                writer.writerow(
                    [i, repr(float(x0[i])), repr(float(x1[i])), repr(float(flat[i]))]
                )


def read_csv(path) -> GridFunction:
    """Rebuild a grid function from :func:`write_csv` output."""
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    header, data = rows[0], rows[1:]
    dim = len(header) - 2
    values = np.array([float(r[-1]) for r in data])
    if dim == 1:
        coords = np.array([float(r[1]) for r in data])
        order = np.argsort(coords)
        coords, values = coords[order], values[order]
        h = coords[1] - coords[0]
        dom = Domain(1, coords[0] - h / 2, coords[-1] + h / 2, coords.size)
        return GridFunction(dom, values)
    c0 = np.array([float(r[1]) for r in data])
    c1 = np.array([float(r[2]) for r in data])
    u0, u1 = np.unique(c0), np.unique(c1)
    h = u0[1] - u0[0]
    dom = Domain(
        2,
        (u0[0] - h / 2, u1[0] - h / 2),
        (u0[-1] + h / 2, u1[-1] + h / 2),
        (u0.size, u1.size),
    )
    grid = np.empty(dom.shape)
    i0 = np.searchsorted(u0, c0)
    i1 = np.searchsorted(u1, c1)
    grid[i0, i1] = values
    return GridFunction(dom, grid)


def restrict(f: GridFunction, Q: Cube) -> GridFunction:
    """Restrict f to the subdomain spanned by Q (drops any NaN padding)."""
    validate_cube(Q, f.domain)
    dom = f.domain
    lo = [dom.lo[a] + Q.anchor[a] * dom.h for a in range(dom.dim)]
    hi = [dom.lo[a] + (Q.anchor[a] + Q.side) * dom.h for a in range(dom.dim)]
    sub = Domain(dom.dim, lo, hi, (Q.side,) * dom.dim)
    return GridFunction(sub, f.samples[Q.slices()])

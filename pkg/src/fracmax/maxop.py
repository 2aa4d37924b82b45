"""Fractional maximal operators and their commutators on grid functions.

The operator of order ``gamma`` sends f to the cube-wise supremum of
``|Q|^(gamma/n - 1) * integral_Q |f|``; the supremum ranges over the
cubes of a :class:`~fracmax.grid.CubeFamily` containing the point.  The
engine decomposes the supremum by scale: window integrals come from an
extended-precision prefix table, and the max over the anchors covering a
cell is a sliding-window maximum answered by doubling range-max tables.

Two commutators are provided: the maximal commutator (supremum of
``|Q|^(gamma/n - 1) * integral_Q |b(x) - b(y)| |f(y)| dy``) with a
brute-force reference and a fast rank-indexed 1D path, and the nonlinear
commutator ``b * M(f) - M(b f)``.

The module also houses batched per-anchor scan kernels used by the
oscillation functionals: for a fixed outer side they produce localized
or cube-clipped maximal values for every anchor at once.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainMismatchError, FamilyError
from .grid import Cube, CubeFamily, Domain, GridFunction, indicator, validate_cube
from .reporting import CheckReport


@dataclass(frozen=True)
class FracParams:
    """Order of the fractional maximal operator; 0 <= gamma < dim."""

    gamma: float = 0.0

    def validate(self, dim: int) -> None:
        if not 0.0 <= self.gamma < dim:
            raise DomainMismatchError(
                f"gamma must satisfy 0 <= gamma < {dim}, got {self.gamma}"
            )


def _scale_weight(side: int, h: float, dim: int, gamma: float) -> float:
    """The |Q|^(gamma/n - 1) factor for a cube of the given side."""
    return (side * h) ** (gamma - dim)


class PrefixTable:
    """Cumulative sums of samples in extended precision.

    1D prefix sums or a 2D summed-area table; window sums reconstructed
    by differencing match direct summation to well below 1e-12 relative
    (the extended-precision accumulation keeps cancellation error near
    one ulp of the window sum itself).
    """

    def __init__(self, samples: np.ndarray, cell_measure: float):
        samples = np.asarray(samples)
        self.shape = samples.shape
        self.cell_measure = float(cell_measure)
        acc = samples.astype(np.longdouble)
        if samples.ndim == 1:
            table = np.zeros(samples.size + 1, dtype=np.longdouble)
            np.cumsum(acc, out=table[1:])
        elif samples.ndim == 2:
            table = np.zeros((samples.shape[0] + 1, samples.shape[1] + 1),
                             dtype=np.longdouble)
            table[1:, 1:] = acc.cumsum(axis=0).cumsum(axis=1)
        else:
            raise DomainMismatchError("PrefixTable supports 1D and 2D samples")
        self.table = table

    @classmethod
    def of(cls, f: GridFunction, absolute: bool = True) -> "PrefixTable":
        samples = np.abs(f.samples) if absolute else f.samples
        return cls(samples, f.domain.cell_measure)

    def window_sums(self, side: int) -> np.ndarray:
        """Sample sums of all side x side windows (stride-1 anchors),
        weighted by the cell measure; float64 output."""
        P = self.table
        if P.ndim == 1:
            raw = P[side:] - P[:-side]
        else:
            raw = (P[side:, side:] - P[:-side, side:]
                   - P[side:, :-side] + P[:-side, :-side])
        return np.asarray(raw * self.cell_measure, dtype=np.float64)

    def window_sum(self, anchor: Sequence[int], side: int) -> float:
        sums = self.window_sums(side)
        if sums.ndim == 1:
            return float(sums[anchor[0]])
        return float(sums[anchor[0], anchor[1]])


class RangeMaxTable:
    """Doubling table answering max over index ranges of the leading axis."""

    def __init__(self, values: np.ndarray):
        values = np.asarray(values, dtype=np.float64)
        n = values.shape[0]
        levels = [values]
        span = 1
        while 2 * span <= n:
            prev = levels[-1]
            nxt = prev.copy()
            nxt[: n - 2 * span + 1] = np.maximum(
                prev[: n - 2 * span + 1], prev[span : n - span + 1]
            )
            levels.append(nxt)
            span *= 2
        self.stack = np.stack(levels)
        self.n = n

    def query(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        """Max over inclusive index ranges [lo, hi]; lo <= hi required."""
        lo = np.asarray(lo, dtype=np.intp)
        hi = np.asarray(hi, dtype=np.intp)
        width = hi - lo + 1
        _, exp = np.frexp(width.astype(np.float64))
        k = (exp - 1).astype(np.intp)
        left = self.stack[k, lo]
        right = self.stack[k, hi - (1 << k) + 1]
        return np.maximum(left, right)


def _covering_ranges(n_cells: int, side: int) -> tuple[np.ndarray, np.ndarray]:
    """Anchor index range [lo, hi] of the windows covering each cell."""
    x = np.arange(n_cells)
    lo = np.maximum(0, x - side + 1)
    hi = np.minimum(x, n_cells - side)
    return lo, hi


def _strided_query(values: np.ndarray, positions: np.ndarray,
                   lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Range-max over anchors restricted to strided positions.

    Returns (mask of cells with at least one anchor, maxima for those cells).
    ``values`` holds the window values at ``positions`` (sorted)."""
    i_lo = np.searchsorted(positions, lo, side="left")
    i_hi = np.searchsorted(positions, hi, side="right") - 1
    mask = i_hi >= i_lo
    if not np.any(mask):
        return mask, np.empty(0)
    table = RangeMaxTable(values)
    return mask, table.query(i_lo[mask], i_hi[mask])


# ---------------------------------------------------------------------------
# Global and localized maximal operators
# ---------------------------------------------------------------------------

def maximal(f: GridFunction, gp: FracParams, fam: CubeFamily) -> GridFunction:
    """Fractional maximal function over the family cubes containing x."""
    dom = f.domain
    if f.masked:
        raise DomainMismatchError("maximal operators need fully defined inputs")
    gp.validate(dom.dim)
    fam.validate_for(dom)
    prefix = PrefixTable.of(f)
    if dom.dim == 1:
        out = _maximal_1d(prefix, dom, gp.gamma, fam)
    else:
        out = _maximal_2d(prefix, dom, gp.gamma, fam)
    if np.any(np.isneginf(out)):
        raise FamilyError(
            "cube family leaves cells uncovered (stride too large for the scales)"
        )
    return GridFunction(dom, out)


def _maximal_1d(prefix: PrefixTable, dom: Domain, gamma: float,
                fam: CubeFamily) -> np.ndarray:
    n = dom.cells[0]
    out = np.full(n, -np.inf)
    for s in fam.scales:
        weight = _scale_weight(s, dom.h, 1, gamma)
        sums = prefix.window_sums(s)
        lo, hi = _covering_ranges(n, s)
        if fam.anchor_stride == 1:
            table = RangeMaxTable(sums * weight)
            np.maximum(out, table.query(lo, hi), out=out)
        else:
            positions = fam.anchors(s, n)
            if positions.size == 0:
                continue
            mask, vals = _strided_query(sums[positions] * weight, positions, lo, hi)
            out[mask] = np.maximum(out[mask], vals)
    return out


def _maximal_2d(prefix: PrefixTable, dom: Domain, gamma: float,
                fam: CubeFamily) -> np.ndarray:
    n0, n1 = dom.cells
    out = np.full((n0, n1), -np.inf)
    for s in fam.scales:
        weight = _scale_weight(s, dom.h, 2, gamma)
        sums = prefix.window_sums(s) * weight
        pos0 = fam.anchors(s, n0)
        pos1 = fam.anchors(s, n1)
        if pos0.size == 0 or pos1.size == 0:
            continue
        V = sums[np.ix_(pos0, pos1)]
        lo1, hi1 = _covering_ranges(n1, s)
        mask1, cols = _strided_axis_max(V.T, pos1, lo1, hi1)  # (n1, A0)
        stage = np.full((n1, V.shape[0]), -np.inf)
        stage[mask1] = cols
        lo0, hi0 = _covering_ranges(n0, s)
        mask0, rows = _strided_axis_max(stage.T, pos0, lo0, hi0)  # (n0, n1)
        layer = np.full((n0, n1), -np.inf)
        layer[mask0] = rows
        np.maximum(out, layer, out=out)
    return out


def _strided_axis_max(values: np.ndarray, positions: np.ndarray,
                      lo: np.ndarray, hi: np.ndarray):
    """Leading-axis range-max of a 2D array at strided anchor positions."""
    i_lo = np.searchsorted(positions, lo, side="left")
    i_hi = np.searchsorted(positions, hi, side="right") - 1
    mask = i_hi >= i_lo
    table = RangeMaxTable(values)
    return mask, table.query(i_lo[mask], i_hi[mask])


def maximal_local(f: GridFunction, gp: FracParams, Q0: Cube,
                  fam: CubeFamily) -> GridFunction:
    """Maximal function restricted to cubes x in Q inside Q0.

    Cells outside Q0 are marked undefined (NaN); restrict to Q0 before
    serializing.
    """
    dom = f.domain
    gp.validate(dom.dim)
    validate_cube(Q0, dom)
    fam.validate_for(dom)
    block = np.abs(f.samples[Q0.slices()])
    prefix = PrefixTable(block, dom.cell_measure)
    S = Q0.side
    if dom.dim == 1:
        out_block = _local_block_1d(prefix, dom, gp.gamma, fam, Q0, S)
    else:
        out_block = _local_block_2d(prefix, dom, gp.gamma, fam, Q0, S)
    if np.any(np.isneginf(out_block)):
        raise FamilyError("family leaves cells of Q0 uncovered")
    full = np.full(dom.shape, np.nan)
    full[Q0.slices()] = out_block
    return GridFunction(dom, full, masked=True)


def _local_anchors(fam: CubeFamily, start: int, extent: int, s: int) -> np.ndarray:
    """Globally aligned strided anchors with [j, j+s) inside [start, start+extent)."""
    first = -(-start // fam.anchor_stride) * fam.anchor_stride
    return np.arange(first, start + extent - s + 1, fam.anchor_stride)


def _local_block_1d(prefix, dom, gamma, fam, Q0, S):
    out = np.full(S, -np.inf)
    for s in (sc for sc in fam.scales if sc <= S):
        weight = _scale_weight(s, dom.h, 1, gamma)
        sums = prefix.window_sums(s)  # anchors local to the block
        anchors = _local_anchors(fam, Q0.anchor[0], S, s) - Q0.anchor[0]
        if anchors.size == 0:
            continue
        lo, hi = _covering_ranges(S, s)
        mask, vals = _strided_query(sums[anchors] * weight, anchors, lo, hi)
        out[mask] = np.maximum(out[mask], vals)
    return out


def _local_block_2d(prefix, dom, gamma, fam, Q0, S):
    out = np.full((S, S), -np.inf)
    for s in (sc for sc in fam.scales if sc <= S):
        weight = _scale_weight(s, dom.h, 2, gamma)
        sums = prefix.window_sums(s) * weight
        anch0 = _local_anchors(fam, Q0.anchor[0], S, s) - Q0.anchor[0]
        anch1 = _local_anchors(fam, Q0.anchor[1], S, s) - Q0.anchor[1]
        if anch0.size == 0 or anch1.size == 0:
            continue
        V = sums[np.ix_(anch0, anch1)]
        lo1, hi1 = _covering_ranges(S, s)
        mask1, cols = _strided_axis_max(V.T, anch1, lo1, hi1)
        stage = np.full((S, V.shape[0]), -np.inf)
        stage[mask1] = cols
        lo0, hi0 = _covering_ranges(S, s)
        mask0, rows = _strided_axis_max(stage.T, anch0, lo0, hi0)
        layer = np.full((S, S), -np.inf)
        layer[mask0] = rows
        np.maximum(out, layer, out=out)
    return out


# ---------------------------------------------------------------------------
# Commutators
# ---------------------------------------------------------------------------

_BRUTE_CHUNK = 64  # anchors per brute-force difference tensor


def maximal_commutator(b: GridFunction, f: GridFunction, gp: FracParams,
                       fam: CubeFamily, mode: str = "BRUTE") -> GridFunction:
    """Supremum over family cubes of
    |Q|^(gamma/n - 1) * sum_{y in Q} |b(x) - b(y)| |f(y)| h^n.

    ``BRUTE`` evaluates the definition window by window and is the
    reference; ``FAST`` (1D only) uses rank-indexed prefix sums over the
    b-ordering of each window and must match BRUTE to 1e-10 relative.
    """
    if b.domain != f.domain:
        raise DomainMismatchError("b and f must share a domain")
    dom = b.domain
    gp.validate(dom.dim)
    fam.validate_for(dom)
    mode = mode.upper()
    if mode not in ("BRUTE", "FAST"):
        raise DomainMismatchError(f"mode must be BRUTE or FAST, got {mode!r}")
    if mode == "FAST" and dom.dim != 1:
        raise DomainMismatchError("FAST commutator path is 1D only")
    if dom.dim == 1:
        compute = _commutator_scale_fast if mode == "FAST" else _commutator_scale_brute
        out = _commutator_1d(b, f, gp.gamma, fam, compute)
    else:
        out = _commutator_2d(b, f, gp.gamma, fam)
    if np.any(np.isneginf(out)):
        raise FamilyError(
            "cube family leaves cells uncovered (stride too large for the scales)"
        )
    return GridFunction(dom, out)


def _commutator_1d(b, f, gamma, fam, compute_scale):
    dom = b.domain
    n = dom.cells[0]
    bs = b.samples
    absf = np.abs(f.samples)
    out = np.full(n, -np.inf)
    for s in fam.scales:
        anchors = fam.anchors(s, n)
        if anchors.size == 0:
            continue
        weight = _scale_weight(s, dom.h, 1, gamma) * dom.cell_measure
        contrib = compute_scale(bs, absf, anchors, s) * weight
        stage = np.full((s, n), -np.inf)
        for i in range(s):
            stage[i, anchors + i] = contrib[:, i]
        np.maximum(out, stage.max(axis=0), out=out)
    return out


def _commutator_scale_brute(bs, absf, anchors, s):
    """Direct evaluation: per cube, sum |b(x)-b(y)| |f(y)| over the window."""
    Bw = np.lib.stride_tricks.sliding_window_view(bs, s)[anchors]
    Fw = np.lib.stride_tricks.sliding_window_view(absf, s)[anchors]
    A = anchors.size
    contrib = np.empty((A, s))
    for start in range(0, A, _BRUTE_CHUNK):
        stop = min(start + _BRUTE_CHUNK, A)
        diff = np.abs(Bw[start:stop, :, None] - Bw[start:stop, None, :])
        contrib[start:stop] = np.einsum("aij,aj->ai", diff, Fw[start:stop])
    return contrib


def _commutator_scale_fast(bs, absf, anchors, s):
    """Rank-indexed prefix sums over the b-ordering of each window.

    With t = b(x):  sum_y |t - b_y| w_y
      = t * W<= - BW<= + (BW_tot - BW<=) - t * (W_tot - W<=),
    where W<= and BW<= accumulate weights and b-weighted weights over the
    window cells with b <= t.  Windows are centered on their b-mean first;
    the ordering statistics only see differences, which kills the
    cancellation that raw prefix sums would suffer for nearly-constant b.
    """
    Bw = np.lib.stride_tricks.sliding_window_view(bs, s)[anchors].copy()
    Ww = np.lib.stride_tricks.sliding_window_view(absf, s)[anchors]
    Bw -= Bw.mean(axis=1, keepdims=True)
    order = np.argsort(Bw, axis=1, kind="stable")
    bs_sorted = np.take_along_axis(Bw, order, axis=1)
    ws_sorted = np.take_along_axis(Ww, order, axis=1)
    cum_w = np.cumsum(ws_sorted, axis=1)
    cum_bw = np.cumsum(bs_sorted * ws_sorted, axis=1)
    total_w = cum_w[:, -1:]
    total_bw = cum_bw[:, -1:]
    rank = np.argsort(order, axis=1, kind="stable")
    prefix_w = np.take_along_axis(cum_w, rank, axis=1)
    prefix_bw = np.take_along_axis(cum_bw, rank, axis=1)
    t = Bw
    return (t * prefix_w - prefix_bw) + (total_bw - prefix_bw) - t * (total_w - prefix_w)


def _commutator_2d(b, f, gamma, fam):
    dom = b.domain
    n0, n1 = dom.cells
    bs = b.samples
    absf = np.abs(f.samples)
    out = np.full((n0, n1), -np.inf)
    for s in fam.scales:
        pos0 = fam.anchors(s, n0)
        pos1 = fam.anchors(s, n1)
        if pos0.size == 0 or pos1.size == 0:
            continue
        weight = _scale_weight(s, dom.h, 2, gamma) * dom.cell_measure
        Bw = np.lib.stride_tricks.sliding_window_view(bs, (s, s))[np.ix_(pos0, pos1)]
        Fw = np.lib.stride_tricks.sliding_window_view(absf, (s, s))[np.ix_(pos0, pos1)]
        A0, A1 = Bw.shape[:2]
        Bf = Bw.reshape(A0 * A1, s * s)
        Ff = Fw.reshape(A0 * A1, s * s)
        contrib = np.empty((A0 * A1, s * s))
        chunk = max(1, _BRUTE_CHUNK * 64 // max(1, s * s))
        for start in range(0, A0 * A1, chunk):
            stop = min(start + chunk, A0 * A1)
            diff = np.abs(Bf[start:stop, :, None] - Bf[start:stop, None, :])
            contrib[start:stop] = np.einsum("aij,aj->ai", diff, Ff[start:stop])
        contrib = contrib.reshape(A0, A1, s, s) * weight
        for i0 in range(s):
            sel0 = np.ix_(pos0 + i0, pos1)  # fancy indexing copies; write back
            for i1 in range(s):
                sel = (sel0[0], sel0[1] + i1)
                out[sel] = np.maximum(out[sel], contrib[:, :, i0, i1])
    return out


def nonlinear_commutator(b: GridFunction, f: GridFunction, gp: FracParams,
                         fam: CubeFamily) -> GridFunction:
    """b * M(f) - M(b f), both terms over the same cube family."""
    if b.domain != f.domain:
        raise DomainMismatchError("b and f must share a domain")
    mf = maximal(f, gp, fam)
    mbf = maximal(b * f, gp, fam)
    return GridFunction(b.domain, b.samples * mf.samples - mbf.samples)


# ---------------------------------------------------------------------------
# Cube-restriction identity check
# ---------------------------------------------------------------------------

def require_replacement_closed(fam: CubeFamily, side: int) -> None:
    if fam.anchor_stride != 1:
        raise FamilyError(
            "family not replacement-closed: identity checks need anchor stride 1"
        )
    if not fam.replacement_closed_at(side):
        raise FamilyError(
            f"family not replacement-closed at side {side}: every scale s must "
            f"keep min(s, {side}) in the scale set"
        )


def check_cube_lemma(f: GridFunction, Q: Cube, gp: FracParams,
                     fam: CubeFamily) -> CheckReport:
    """Verify that restricting f to Q commutes with the maximal operator:
    M(f * chi_Q) equals the Q-localized operator on Q, and M(chi_Q)
    equals |Q|^(gamma/n) on Q."""
    dom = f.domain
    validate_cube(Q, dom)
    require_replacement_closed(fam, Q.side)
    chi = indicator(Q, dom)
    left = maximal(f * chi, gp, fam).samples[Q.slices()]
    right = maximal_local(f, gp, Q, fam).samples[Q.slices()]
    dev_restrict = float(np.max(np.abs(left - right)))
    measure = Q.measure(dom)
    target = measure ** (gp.gamma / dom.dim)
    mchi = maximal(chi, gp, fam).samples[Q.slices()]
    dev_chi = float(np.max(np.abs(mchi - target)))
    scale = measure ** (gp.gamma / dom.dim - 1.0) * float(
        np.sum(np.abs(f.samples[Q.slices()])) * dom.cell_measure
    )
    tol = 1e-12 * (1.0 + scale)
    return CheckReport(
        "cube-lemma",
        max(dev_restrict, dev_chi),
        tol,
        details={
            "restriction_deviation": dev_restrict,
            "indicator_deviation": dev_chi,
            "gamma": gp.gamma,
            "side": Q.side,
            "anchor": list(Q.anchor),
        },
    )


# ---------------------------------------------------------------------------
# Batched per-anchor kernels (1D, stride 1)
# ---------------------------------------------------------------------------

def localized_max_all_anchors(values: np.ndarray, dom: Domain, fam: CubeFamily,
                              S: int, gammas: Sequence[float]) -> list[np.ndarray]:
    """For every anchor a of outer side S, the localized maximal values
    M_{gamma,Q}(x) at x = a + o, as an (A, S) matrix per gamma.

    Only inner cubes fully inside Q participate.  1D, stride 1.
    """
    if fam.anchor_stride != 1:
        raise FamilyError("batched scans require anchor stride 1")
    n = dom.cells[0]
    A = n - S + 1
    prefix = PrefixTable(values, dom.cell_measure)
    outs = [np.full((A, S), -np.inf) for _ in gammas]
    base = np.arange(A)
    for s in (sc for sc in fam.scales if sc <= S):
        sums = prefix.window_sums(s)
        table = RangeMaxTable(sums)
        offsets = np.arange(S)
        rel_lo = np.maximum(0, offsets - s + 1)
        rel_hi = np.minimum(offsets, S - s)
        for o in range(S):
            lo = base + rel_lo[o]
            hi = base + rel_hi[o]
            raw = table.query(lo, hi)
            for g, gamma in enumerate(gammas):
                w = _scale_weight(s, dom.h, 1, gamma)
                np.maximum(outs[g][:, o], raw * w, out=outs[g][:, o])
    return outs


def clipped_max_all_anchors(values: np.ndarray, dom: Domain, fam: CubeFamily,
                            S: int, gammas: Sequence[float]) -> list[np.ndarray]:
    """For every anchor a of outer side S, the global maximal values of
    values * chi_Q at x = a + o, as an (A, S) matrix per gamma.

    Windows of every family scale participate; their sums are clipped to
    the cube [a, a + S).  1D, stride 1.
    """
    if fam.anchor_stride != 1:
        raise FamilyError("batched scans require anchor stride 1")
    n = dom.cells[0]
    A = n - S + 1
    P = np.zeros(n + 1, dtype=np.longdouble)
    np.cumsum(np.asarray(values, dtype=np.longdouble), out=P[1:])
    cell_measure = dom.cell_measure
    full = [np.full((n, A), -np.inf) for _ in gammas]
    a_arr = np.arange(A)
    x_arr = np.arange(n)
    for s in fam.scales:
        j_arr = np.arange(n - s + 1)
        clip_lo = np.maximum(j_arr[:, None], a_arr[None, :])
        clip_hi = np.minimum(j_arr[:, None] + s, a_arr[None, :] + S)
        clip_hi = np.maximum(clip_hi, clip_lo)
        raw = np.asarray((P[clip_hi] - P[clip_lo]) * cell_measure, dtype=np.float64)
        table = RangeMaxTable(raw)
        lo = np.maximum(0, x_arr - s + 1)
        hi = np.minimum(x_arr, n - s)
        block = table.query(lo, hi)  # (n, A)
        for g, gamma in enumerate(gammas):
            w = _scale_weight(s, dom.h, 1, gamma)
            np.maximum(full[g], block * w, out=full[g])
    rows = a_arr[:, None] + np.arange(S)[None, :]
    cols = a_arr[:, None]
    return [m[rows, cols] for m in full]

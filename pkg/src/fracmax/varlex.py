"""Variable-exponent Lebesgue machinery.

An :class:`Exponent` is a grid-sampled exponent field p(x) with
1 < p_minus <= p_plus < inf.  The modular of f is the midpoint sum of
|f(x)|^p(x); the Luxemburg norm is the lambda scaling f into the unit
ball of the modular, found by bracketing and bisection (the modular is
continuous and strictly decreasing in lambda for f not identically 0 on
a finite grid, so the scalar root-find converges unconditionally).

The check_* operations certify the norm identities and inequalities the
rest of the package leans on: generalized Hoelder quotients, the power
identity |||f|^r|| = ||f||^r at the scaled exponent, and the behavior of
indicator norms across a cube family.  Membership of an exponent in the
maximal-operator-friendly class is never decided; the log-Hoelder
modulus is reported as the standard sufficient certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainMismatchError, ExponentClassError
from .grid import CubeFamily, Domain, GridFunction, read_gfn, write_gfn
from .maxop import FracParams
from .reporting import CheckReport

_REL_TOL = 1e-12       # bracket width target for the Luxemburg bisection
_MAX_ITERATIONS = 256


@dataclass(frozen=True)
class Exponent:
    """A variable exponent field with cached extrema."""

    values: GridFunction
    p_minus: float = None  # type: ignore[assignment]
    p_plus: float = None   # type: ignore[assignment]

    def __init__(self, values: GridFunction):
        samples = values.samples
        p_minus = float(samples.min())
        p_plus = float(samples.max())
        if not (1.0 < p_minus <= p_plus < math.inf):
            raise ExponentClassError(
                f"exponent must satisfy 1 < p_minus <= p_plus < inf, "
                f"got range [{p_minus}, {p_plus}]"
            )
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "p_minus", p_minus)
        object.__setattr__(self, "p_plus", p_plus)

    @classmethod
    def constant(cls, value: float, dom: Domain) -> "Exponent":
        return cls(GridFunction(dom, np.full(dom.shape, float(value))))

    @property
    def domain(self) -> Domain:
        return self.values.domain

    @property
    def is_constant(self) -> bool:
        return self.p_minus == self.p_plus

    def scaled(self, factor: float) -> "Exponent":
        return Exponent(self.values * factor)


@dataclass(frozen=True)
class NormResult:
    """Luxemburg norm value with solver diagnostics."""

    value: float
    iterations: int
    bracket: tuple[float, float]
    modular_at_value: float

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "iterations": self.iterations,
            "bracket": list(self.bracket),
            "modular_at_value": self.modular_at_value,
        }


def conjugate(p: Exponent) -> Exponent:
    """Pointwise conjugate p / (p - 1); an involution."""
    samples = p.values.samples
    if np.any(samples <= 1.0):
        raise ExponentClassError("conjugate undefined where p(x) <= 1")
    return Exponent(p.values.with_samples(samples / (samples - 1.0)))


def sobolev_shift(p: Exponent, gp: FracParams) -> Exponent:
    """The exponent q with 1/q = 1/p - gamma/n, requiring p_plus < n/gamma."""
    dim = p.domain.dim
    gp.validate(dim)
    if gp.gamma == 0.0:
        return p
    if p.p_plus >= dim / gp.gamma:
        raise ExponentClassError(
            f"shift needs p_plus < n/gamma = {dim / gp.gamma}, got {p.p_plus}"
        )
    inv = 1.0 / p.values.samples - gp.gamma / dim
    return Exponent(p.values.with_samples(1.0 / inv))


def modular(f: GridFunction, p: Exponent) -> float:
    """Midpoint sum of |f(x)|^p(x)."""
    if f.domain != p.domain:
        raise DomainMismatchError("f and p must share a domain")
    return _modular_arrays(f.samples, p.values.samples, f.domain.cell_measure)


def _modular_arrays(samples: np.ndarray, p: np.ndarray, cell_measure: float,
                    lam: float = 1.0) -> float:
    with np.errstate(over="ignore"):
        powers = (np.abs(samples) / lam) ** p
    return float(np.sum(powers) * cell_measure)


def luxemburg_norm(f: GridFunction, p: Exponent) -> NormResult:
    """inf{lambda > 0 : modular(f / lambda) <= 1} by bracketing + bisection.

    Returns the upper end of the final bracket so the unit-ball property
    modular(f / value) <= 1 holds up to evaluation noise.
    """
    if f.domain != p.domain:
        raise DomainMismatchError("f and p must share a domain")
    samples = f.samples
    if not np.all(np.isfinite(samples)):
        raise DomainMismatchError("norm of a function with non-finite samples")
    if not np.any(samples):
        return NormResult(0.0, 0, (0.0, 0.0), 0.0)
    pv = p.values.samples
    cm = f.domain.cell_measure
    mod = lambda lam: _modular_arrays(samples, pv, cm, lam)

    iterations = 0
    lo = hi = 1.0
    m1 = mod(1.0)
    if m1 > 1.0:
        while mod(hi) > 1.0:
            hi *= 2.0
            iterations += 1
    else:
        while mod(lo) <= 1.0 and lo > 1e-300:
            lo /= 2.0
            iterations += 1
    while hi - lo > _REL_TOL * hi and iterations < _MAX_ITERATIONS:
        mid = 0.5 * (lo + hi)
        if mod(mid) > 1.0:
            lo = mid
        else:
            hi = mid
        iterations += 1
    return NormResult(hi, iterations, (lo, hi), mod(hi))


def _norm_value(f: GridFunction, p: Exponent) -> float:
    return luxemburg_norm(f, p).value


# ---------------------------------------------------------------------------
# Vectorized indicator norms over a cube family (1D and 2D)
# ---------------------------------------------------------------------------

def _windowed_exponents(p: Exponent, side: int) -> np.ndarray:
    """Exponent samples of every side-cube, flattened to (n_cubes, cells)."""
    samples = p.values.samples
    if samples.ndim == 1:
        w = np.lib.stride_tricks.sliding_window_view(samples, side)
        return w.reshape(-1, side)
    w = np.lib.stride_tricks.sliding_window_view(samples, (side, side))
    return w.reshape(-1, side * side)


def indicator_norms_by_scale(p: Exponent, side: int,
                             anchor_stride: int = 1) -> np.ndarray:
    """Luxemburg norms of the indicator of every family cube of one side.

    The per-cube modular of chi_Q / lambda is sum_Q lambda^(-p) h^n, so
    all cubes of a scale share one vectorized bisection.
    """
    windows = _windowed_exponents(p, side)
    if anchor_stride != 1:
        dom = p.domain
        if dom.dim == 1:
            idx = np.arange(0, dom.cells[0] - side + 1, anchor_stride)
        else:
            a0 = np.arange(0, dom.cells[0] - side + 1, anchor_stride)
            a1 = np.arange(0, dom.cells[1] - side + 1, anchor_stride)
            n1 = dom.cells[1] - side + 1
            idx = (a0[:, None] * n1 + a1[None, :]).ravel()
        windows = windows[idx]
    cm = p.domain.cell_measure

    def mod_vec(lam: np.ndarray) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.sum(lam[:, None] ** (-windows), axis=1) * cm

    n = windows.shape[0]
    lo = np.full(n, 1.0)
    hi = np.full(n, 1.0)
    m1 = mod_vec(np.ones(n))
    grow = m1 > 1.0
    while np.any(grow):
        hi[grow] *= 2.0
        grow &= mod_vec(hi) > 1.0
    shrink = m1 <= 1.0
    while np.any(shrink):
        lo[shrink] /= 2.0
        shrink &= mod_vec(lo) <= 1.0
    for _ in range(_MAX_ITERATIONS):
        if np.all(hi - lo <= _REL_TOL * hi):
            break
        mid = 0.5 * (lo + hi)
        above = mod_vec(mid) > 1.0
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    return hi


# ---------------------------------------------------------------------------
# Checks
# ---------------------------------------------------------------------------

def check_holder(f: GridFunction, g: GridFunction, p: Exponent) -> CheckReport:
    """Generalized Hoelder quotient integral(|f g|) / (||f||_p ||g||_p').

    The checked constant is 1 for constant exponents and 2 (the
    classical bound) for variable ones; a zero denominator reports N/A
    as a passing check with the quotient marked undefined.
    """
    pc = conjugate(p)
    num = float(np.sum(np.abs(f.samples * g.samples)) * f.domain.cell_measure)
    nf = _norm_value(f, p)
    ng = _norm_value(g, pc)
    limit = 1.0 + 1e-8 if p.is_constant else 2.0
    if nf == 0.0 or ng == 0.0:
        return CheckReport("holder", 0.0, limit,
                           details={"ratio": None, "note": "zero denominator"})
    ratio = num / (nf * ng)
    return CheckReport("holder", ratio, limit, details={"ratio": ratio})


def check_holder_product(f: GridFunction, g: GridFunction, p: Exponent,
                         p1: Exponent, p2: Exponent) -> CheckReport:
    """Product form ||f g||_p <= C ||f||_p1 ||g||_p2 for 1/p = 1/p1 + 1/p2."""
    split = np.max(np.abs(
        1.0 / p.values.samples
        - 1.0 / p1.values.samples
        - 1.0 / p2.values.samples
    ))
    if split > 1e-10:
        raise ExponentClassError("exponent triple must satisfy 1/p = 1/p1 + 1/p2")
    num = _norm_value(f * g, p)
    nf = _norm_value(f, p1)
    ng = _norm_value(g, p2)
    constant = all(e.is_constant for e in (p, p1, p2))
    limit = 1.0 + 1e-8 if constant else 2.0
    if nf == 0.0 or ng == 0.0:
        return CheckReport("holder-product", 0.0, limit,
                           details={"ratio": None, "note": "zero denominator"})
    ratio = num / (nf * ng)
    return CheckReport("holder-product", ratio, limit, details={"ratio": ratio})


def check_power_identity(f: GridFunction, p: Exponent, r: float) -> CheckReport:
    """|| |f|^r ||_p equals ||f||^r at exponent r*p, for any r > 0."""
    if r <= 0:
        raise ExponentClassError(f"power identity needs r > 0, got {r}")
    rp = p.scaled(r)  # raises if r*p leaves the admissible class
    lhs = _norm_value(abs(f).with_samples(np.abs(f.samples) ** r), p)
    base = _norm_value(f, rp)
    rhs = base**r
    deviation = abs(lhs - rhs)
    tol = 1e-7 * (1.0 + rhs)
    return CheckReport("power-identity", deviation, tol,
                       details={"lhs": lhs, "rhs": rhs, "r": r})


def check_chi_product(p: Exponent, fam: CubeFamily) -> CheckReport:
    """sup over family cubes of ||chi_Q||_p ||chi_Q||_p' / |Q|.

    Exactly 1 for constant exponents; for variable exponents the sup is
    reported and must be finite (scale stability is judged by the
    harness across resolutions).
    """
    dom = p.domain
    fam.validate_for(dom)
    pc = conjugate(p)
    per_scale = []
    sup = 0.0
    h = dom.h
    for s in fam.scales:
        norms_p = indicator_norms_by_scale(p, s, fam.anchor_stride)
        norms_pc = indicator_norms_by_scale(pc, s, fam.anchor_stride)
        measure = (s * h) ** dom.dim
        scale_max = float(np.max(norms_p * norms_pc) / measure)
        per_scale.append({"side": s, "max": scale_max})
        sup = max(sup, scale_max)
    if p.is_constant:
        return CheckReport("chi-product", abs(sup - 1.0), 1e-8,
                           details={"sup": sup, "per_scale": per_scale})
    deviation = 0.0 if math.isfinite(sup) else math.inf
    return CheckReport("chi-product", deviation, 1e-8,
                       details={"sup": sup, "per_scale": per_scale})


def check_chi_embedding(p: Exponent, gp: FracParams,
                        fam: CubeFamily) -> CheckReport:
    """sup over family cubes of ||chi_Q||_p / (|Q|^(gamma/n) ||chi_Q||_q)
    with q the shifted exponent; exactly 1 for constant p."""
    dom = p.domain
    fam.validate_for(dom)
    q = sobolev_shift(p, gp)
    per_scale = []
    sup = 0.0
    h = dom.h
    for s in fam.scales:
        norms_p = indicator_norms_by_scale(p, s, fam.anchor_stride)
        norms_q = indicator_norms_by_scale(q, s, fam.anchor_stride)
        factor = ((s * h) ** dom.dim) ** (gp.gamma / dom.dim)
        scale_max = float(np.max(norms_p / (factor * norms_q)))
        per_scale.append({"side": s, "max": scale_max})
        sup = max(sup, scale_max)
    if p.is_constant:
        return CheckReport("chi-embedding", abs(sup - 1.0), 1e-8,
                           details={"sup": sup, "per_scale": per_scale})
    deviation = 0.0 if math.isfinite(sup) else math.inf
    return CheckReport("chi-embedding", deviation, 1e-8,
                       details={"sup": sup, "per_scale": per_scale})


def log_holder_modulus(p: Exponent, pair_budget: int = 2_000_000,
                       seed: int = 0) -> float:
    """max over center pairs with |x - y| <= 1/2 of
    |p(x) - p(y)| * log(e + 1/|x - y|).

    Small values certify the standard sufficient condition for the
    maximal operator to act boundedly at this exponent; values growing
    like log(1/h) under refinement flag a non-log-Hoelder exponent.
    """
    dom = p.domain
    v = p.values.samples
    h = dom.h
    if dom.dim == 1 and dom.cells[0] <= 8192:
        best = 0.0
        max_offset = int(0.5 / h)
        for d in range(1, min(max_offset, v.size - 1) + 1):
            dist = d * h
            if dist > 0.5:
                break
            diff = np.max(np.abs(v[d:] - v[:-d]))
            best = max(best, diff * math.log(math.e + 1.0 / dist))
        return float(best)
    rng = np.random.default_rng(seed)
    flat = v.ravel()
    n = flat.size
    m = min(pair_budget, n * (n - 1))
    i = rng.integers(0, n, size=m)
    j = rng.integers(0, n, size=m)
    if dom.dim == 1:
        dist = np.abs(i - j) * h
    else:
        n1 = dom.cells[1]
        dist = np.hypot(i // n1 - j // n1, i % n1 - j % n1) * h
    keep = (dist > 0) & (dist <= 0.5)
    if not np.any(keep):
        return 0.0
    i, j, dist = i[keep], j[keep], dist[keep]
    vals = np.abs(flat[i] - flat[j]) * np.log(math.e + 1.0 / dist)
    return float(vals.max(initial=0.0))


# ---------------------------------------------------------------------------
# Exponent I/O and parsing
# ---------------------------------------------------------------------------

def write_exponent(p: Exponent, path, force: bool = False) -> None:
    write_gfn(p.values, path, exponent=True, force=force)


def read_exponent(path) -> Exponent:
    f, is_exponent = read_gfn(path)
    if not is_exponent:
        raise ExponentClassError(f"{path} is not an exponent field (missing flag)")
    return Exponent(f)


def parse_exponent_spec(text: str, dom: Domain) -> Exponent:
    """CLI exponent specifiers: ``const:<value>`` or ``file:<path>``."""
    kind, _, arg = text.partition(":")
    if kind == "const" and arg:
        return Exponent.constant(float(arg), dom)
    if kind == "file" and arg:
        p = read_exponent(arg)
        if p.domain != dom:
            raise DomainMismatchError("exponent file domain mismatch")
        return p
    raise ExponentClassError(
        f"bad exponent spec {text!r}; use const:<value> or file:<path>"
    )

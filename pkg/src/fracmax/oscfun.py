"""Oscillation functionals over cubes and the identity/inequality checks
that make the commutator characterizations machine-verifiable.

Every functional has the shape

    value(Q) = |Q|^(-beta/n) * N_s((b - m_Q b) chi_Q) / N_s(chi_Q)

where ``m_Q b`` is the cube mean (the mean-oscillation family), the
scaled localized maximal function ``|Q|^(-gamma/n) M_{gamma,Q} b`` (the
commutator-deviation family), and ``N_s`` is the Luxemburg norm at a
variable exponent s or, for constant s, the closed-form power mean
``(|Q|^{-1} integral |g|^s)^{1/s}`` evaluated without root-finding.

The check_* operations verify, cube by cube or in batched sweeps, the
exact discrete identities behind the equivalences: the commutator
identity ``b - |Q|^(-a/n) M_{a,Q} b = |Q|^(-a/n) [b, M_a](chi_Q)`` on Q,
the balance of oscillation mass on the two sides of the cube mean, the
factor-2 oscillation bound, the pointwise domination of both commutators
by the seminorm times a higher-order maximal function, and the chain
inequality bounding the gap between localized maximal functions of
different orders by two nonlinear commutators of |b|.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainMismatchError, FamilyError, HypothesisViolationError
from .grid import (
    Cube,
    CubeFamily,
    Domain,
    GridFunction,
    indicator,
    pointwise_lipschitz_seminorm,
    restrict,
    validate_cube,
)
from .maxop import (
    FracParams,
    clipped_max_all_anchors,
    localized_max_all_anchors,
    maximal,
    maximal_commutator,
    maximal_local,
    nonlinear_commutator,
    require_replacement_closed,
)
from .reporting import CheckReport
from .varlex import Exponent, luxemburg_norm


class FunctionalKind(enum.Enum):
    NC_LIP = "nc-lip"
    NC_BMO = "nc-bmo"
    MC_LIP = "mc-lip"
    MC_BMO = "mc-bmo"
    LIP_Q = "lip-q"
    BMO_SEMINORM = "bmo"
    LIP_MAX = "lip-max"
    BMO_MAX = "bmo-max"

    @classmethod
    def parse(cls, text: str) -> "FunctionalKind":
        for kind in cls:
            if kind.value == text or kind.name == text.upper().replace("-", "_"):
                return kind
        raise DomainMismatchError(
            f"unknown functional kind {text!r}; "
            f"expected one of {[k.value for k in cls]}"
        )


_LIP_KINDS = {FunctionalKind.NC_LIP, FunctionalKind.MC_LIP,
              FunctionalKind.LIP_Q, FunctionalKind.LIP_MAX}
_MEAN_KINDS = {FunctionalKind.MC_LIP, FunctionalKind.MC_BMO,
               FunctionalKind.LIP_Q, FunctionalKind.BMO_SEMINORM}
_NC_KINDS = {FunctionalKind.NC_LIP, FunctionalKind.NC_BMO}
_MAX_KINDS = {FunctionalKind.LIP_MAX, FunctionalKind.BMO_MAX}


@dataclass(frozen=True)
class OscFunctionalSpec:
    """Which functional to evaluate, with its parameters.

    ``s`` is either an :class:`~fracmax.varlex.Exponent` or a constant
    float >= 1 (the constant shortcut skips root-finding; s = 1 is the
    plain integral quotient).  ``inner_q`` is the power for LIP_Q;
    ``gamma_for_max`` the maximal-function order for the *_MAX kinds
    (0 recovers the plain localized maximal function).
    """

    kind: FunctionalKind
    alpha: float = 0.0
    beta: float = 0.0
    s: object = 1.0
    inner_q: float = 1.0
    gamma_for_max: float = 0.0

    def validate(self, dim: int) -> None:
        k = self.kind
        if k in _LIP_KINDS:
            if not 0.0 < self.beta < 1.0:
                raise HypothesisViolationError(
                    f"{k.value} requires 0 < beta < 1, got {self.beta}"
                )
        if k is FunctionalKind.NC_LIP:
            if not (0.0 < self.alpha and self.alpha + self.beta < dim):
                raise HypothesisViolationError(
                    f"nc-lip requires 0 < alpha and alpha + beta < {dim}, "
                    f"got alpha={self.alpha}, beta={self.beta}"
                )
        if k is FunctionalKind.NC_BMO and not 0.0 < self.alpha < dim:
            raise HypothesisViolationError(
                f"nc-bmo requires 0 < alpha < {dim}, got {self.alpha}"
            )
        if k in _MAX_KINDS:
            limit = dim - (self.beta if k is FunctionalKind.LIP_MAX else 0.0)
            if not 0.0 <= self.gamma_for_max < limit:
                raise HypothesisViolationError(
                    f"{k.value} requires 0 <= gamma_for_max < {limit}"
                )
        if k is FunctionalKind.LIP_Q and self.inner_q < 1.0:
            raise HypothesisViolationError(
                f"lip-q requires inner_q >= 1, got {self.inner_q}"
            )
        if not isinstance(self.s, Exponent):
            if float(self.s) < 1.0:
                raise HypothesisViolationError(f"constant s must be >= 1, got {self.s}")

    @property
    def effective_beta(self) -> float:
        return self.beta if self.kind in _LIP_KINDS else 0.0

    @property
    def inner_gamma(self) -> float | None:
        """Order of the localized maximal function entering the deviation,
        or None for the cube-mean kinds."""
        if self.kind in _NC_KINDS:
            return self.alpha
        if self.kind in _MAX_KINDS:
            return self.gamma_for_max
        return None

    @property
    def norm_exponent(self):
        """The s used in the norm quotient (inner_q doubles as s for LIP_Q)."""
        if self.kind is FunctionalKind.LIP_Q:
            return float(self.inner_q)
        if self.kind is FunctionalKind.BMO_SEMINORM:
            return 1.0
        return self.s


@dataclass
class SupReport:
    """Supremum of a functional over a cube family."""

    sup_value: float
    argmax_cube: Cube | None
    per_scale_max: list = field(default_factory=list)
    cubes_evaluated: int = 0
    cubes_skipped: int = 0
    cube_values: list | None = None

    def to_dict(self) -> dict:
        out = {
            "sup_value": self.sup_value,
            "argmax": None
            if self.argmax_cube is None
            else {"anchor": list(self.argmax_cube.anchor),
                  "side": self.argmax_cube.side},
            "per_scale": self.per_scale_max,
            "cubes_evaluated": self.cubes_evaluated,
            "cubes_skipped": self.cubes_skipped,
        }
        return out


def _mean_block(block: np.ndarray) -> float:
    # fsum keeps the cube mean correctly rounded; dyadic cell counts then
    # divide exactly, which the E/F balance identity leans on
    return math.fsum(block.ravel().tolist()) / block.size


def _deviation_block(b: GridFunction, Q: Cube, spec: OscFunctionalSpec,
                     fam: CubeFamily) -> np.ndarray:
    """Samples of b - (reference) on Q, per the functional kind."""
    block = b.samples[Q.slices()]
    gamma = spec.inner_gamma
    if gamma is None:
        return block - _mean_block(block)
    mfac = Q.measure(b.domain) ** (-gamma / b.domain.dim)
    local = maximal_local(b, FracParams(gamma), Q, fam).samples[Q.slices()]
    return block - mfac * local


def _norm_quotient(g: np.ndarray, Q: Cube, s, dom: Domain) -> float:
    """N_s(g chi_Q) / N_s(chi_Q); closed form for constant s."""
    if isinstance(s, Exponent):
        sub_exp = Exponent(restrict(s.values, Q))
        sub_dom = sub_exp.domain
        gf = GridFunction(sub_dom, g)
        num = luxemburg_norm(gf, sub_exp).value
        den = luxemburg_norm(GridFunction(sub_dom, np.ones(sub_dom.shape)),
                             sub_exp).value
        return num / den
    s = float(s)
    return float(np.mean(np.abs(g) ** s) ** (1.0 / s))


def cube_functional_value(b: GridFunction, Q: Cube, spec: OscFunctionalSpec,
                          fam: CubeFamily) -> float:
    """Evaluate one functional on one cube."""
    dom = b.domain
    spec.validate(dom.dim)
    validate_cube(Q, dom)
    if spec.inner_gamma is not None:
        require_replacement_closed(fam, Q.side)
    g = _deviation_block(b, Q, spec, fam)
    quotient = _norm_quotient(g, Q, spec.norm_exponent, dom)
    return Q.measure(dom) ** (-spec.effective_beta / dom.dim) * quotient


def sup_functional(b: GridFunction, spec: OscFunctionalSpec, fam: CubeFamily,
                   collect: bool = False) -> SupReport:
    """Maximum of the functional over all eligible family cubes.

    ``fam`` drives the outer enumeration only; the localized maximal
    functions inside the deviation always use the dyadic stride-1
    policy, so per-cube values do not depend on the outer family and
    the supremum is monotone under family enlargement.  Outer cubes
    whose side is not a dyadic scale cannot anchor the localized
    operator and are skipped (and counted), never silently included.
    Ties break to the smallest scale, then the smallest anchor.
    """
    dom = b.domain
    spec.validate(dom.dim)
    fam.validate_for(dom)
    needs_local = spec.inner_gamma is not None
    inner_fam = CubeFamily.dyadic(min(dom.cells))
    constant_s = not isinstance(spec.norm_exponent, Exponent)

    report = SupReport(-math.inf, None, cube_values=[] if collect else None)
    for side in fam.scales:
        eligible = not needs_local or side in inner_fam.scales
        if not eligible:
            skipped = len(fam.anchors(side, dom.cells[0]))
            if dom.dim == 2:
                skipped *= len(fam.anchors(side, dom.cells[1]))
            report.cubes_skipped += skipped
            continue
        if dom.dim == 1 and constant_s:
            values, anchors = _scale_values_1d(b, spec, fam, inner_fam, side)
            report.cubes_evaluated += anchors.size
            if collect:
                report.cube_values.extend(
                    (Cube((int(a),), side), float(v))
                    for a, v in zip(anchors, values)
                )
            best = int(np.argmax(values))
            scale_max = float(values[best])
            argmax = Cube((int(anchors[best]),), side)
        else:
            scale_max, argmax, count = -math.inf, None, 0
            for Q in _scale_cubes(fam, dom, side):
                value = _cube_value_unchecked(b, Q, spec, inner_fam)
                count += 1
                if collect:
                    report.cube_values.append((Q, value))
                if value > scale_max:
                    scale_max, argmax = value, Q
            report.cubes_evaluated += count
        report.per_scale_max.append({"side": side, "max": scale_max})
        if scale_max > report.sup_value:
            report.sup_value = scale_max
            report.argmax_cube = argmax
    if report.cubes_evaluated == 0:
        raise FamilyError("no eligible cubes for this functional")
    return report


def _scale_cubes(fam: CubeFamily, dom: Domain, side: int):
    axis_anchors = [fam.anchors(side, dom.cells[a]) for a in range(dom.dim)]
    if dom.dim == 1:
        for a0 in axis_anchors[0]:
            yield Cube((int(a0),), side)
    else:
        for a0 in axis_anchors[0]:
            for a1 in axis_anchors[1]:
                yield Cube((int(a0), int(a1)), side)


def _cube_value_unchecked(b, Q, spec, fam) -> float:
    g = _deviation_block(b, Q, spec, fam)
    quotient = _norm_quotient(g, Q, spec.norm_exponent, b.domain)
    return Q.measure(b.domain) ** (-spec.effective_beta / b.domain.dim) * quotient


def _scale_values_1d(b: GridFunction, spec: OscFunctionalSpec, fam: CubeFamily,
                     inner_fam: CubeFamily,
                     side: int) -> tuple[np.ndarray, np.ndarray]:
    """Functional values for every anchor of one scale (constant s)."""
    dom = b.domain
    n = dom.cells[0]
    anchors = fam.anchors(side, n)
    windows = np.lib.stride_tricks.sliding_window_view(b.samples, side)
    gamma = spec.inner_gamma
    if gamma is None:
        acc = np.zeros(n + 1, dtype=np.longdouble)
        np.cumsum(b.samples.astype(np.longdouble), out=acc[1:])
        means = np.asarray((acc[side:] - acc[:-side]) / side, dtype=np.float64)
        g = windows[anchors] - means[anchors, None]
    else:
        local = localized_max_all_anchors(
            np.abs(b.samples), dom, inner_fam, side, [gamma]
        )[0]
        measure = (side * dom.h) ** dom.dim
        g = windows[anchors] - measure ** (-gamma / dom.dim) * local[anchors]
    s = float(spec.norm_exponent)
    quotients = np.mean(np.abs(g) ** s, axis=1) ** (1.0 / s)
    measure = (side * dom.h) ** dom.dim
    values = measure ** (-spec.effective_beta / dom.dim) * quotients
    return values, anchors


# ---------------------------------------------------------------------------
# Identity and inequality checks
# ---------------------------------------------------------------------------

def check_commutator_identity(b: GridFunction, Q: Cube, alpha: float,
                              fam: CubeFamily) -> CheckReport:
    """On Q: b - |Q|^(-a/n) M_{a,Q}(b) = |Q|^(-a/n) [b, M_a](chi_Q)."""
    dom = b.domain
    validate_cube(Q, dom)
    require_replacement_closed(fam, Q.side)
    mfac = Q.measure(dom) ** (-alpha / dom.dim)
    block = b.samples[Q.slices()]
    local = maximal_local(b, FracParams(alpha), Q, fam).samples[Q.slices()]
    lhs = block - mfac * local
    nc = nonlinear_commutator(b, indicator(Q, dom), FracParams(alpha), fam)
    rhs = mfac * nc.samples[Q.slices()]
    deviation = float(np.max(np.abs(lhs - rhs)))
    tol = 1e-10 * (1.0 + float(np.max(np.abs(block))))
    return CheckReport("commutator-identity", deviation, tol,
                       details={"alpha": alpha, "side": Q.side,
                                "anchor": list(Q.anchor)})


def sweep_commutator_identity(b: GridFunction, alpha: float,
                              fam: CubeFamily) -> CheckReport:
    """The commutator identity over every family cube at once (1D).

    Reports the worst deviation normalized by its per-cube tolerance
    scale 1 + sup_Q |b|; the check passes when that ratio is <= 1e-10.
    """
    dom = b.domain
    if dom.dim != 1:
        raise DomainMismatchError("batched sweeps are 1D")
    if fam.anchor_stride != 1:
        raise FamilyError("batched sweeps require anchor stride 1")
    absb = np.abs(b.samples)
    ones = np.ones_like(absb)
    windows_all = np.lib.stride_tricks.sliding_window_view(b.samples, 1)
    worst = 0.0
    worst_cube = None
    from .maxop import RangeMaxTable

    sup_table = RangeMaxTable(absb)
    for S in fam.scales:
        if not fam.replacement_closed_at(S):
            continue
        A = dom.cells[0] - S + 1
        mfac = (S * dom.h) ** (-alpha)
        local = localized_max_all_anchors(absb, dom, fam, S, [alpha])[0]
        mchi = clipped_max_all_anchors(ones, dom, fam, S, [alpha])[0]
        mbchi = clipped_max_all_anchors(absb, dom, fam, S, [alpha])[0]
        windows = np.lib.stride_tricks.sliding_window_view(b.samples, S)
        lhs = windows - mfac * local
        rhs = mfac * (windows * mchi - mbchi)
        dev = np.max(np.abs(lhs - rhs), axis=1)
        anchors = np.arange(A)
        sup_b = sup_table.query(anchors, anchors + S - 1)
        ratio = dev / (1.0 + sup_b)
        best = int(np.argmax(ratio))
        if ratio[best] > worst:
            worst = float(ratio[best])
            worst_cube = {"side": S, "anchor": best}
    return CheckReport("commutator-identity-sweep", worst, 1e-10,
                       details={"alpha": alpha, "worst_cube": worst_cube,
                                "normalized_by": "1 + sup_Q |b|"})


def check_ef_balance(b: GridFunction, Q: Cube, gamma: float,
                     fam: CubeFamily) -> CheckReport:
    """Mass balance across the cube mean, and the pointwise chain on the
    low side: with E = {x in Q : b <= b_Q},

        integral_E |b - b_Q| = integral_F |b - b_Q|   (to 1e-12 relative)
        |b - b_Q| <= |b - |Q|^(-g/n) M_{g,Q}(b)| + 1e-12   on E.
    """
    dom = b.domain
    validate_cube(Q, dom)
    require_replacement_closed(fam, Q.side)
    block = b.samples[Q.slices()].astype(np.longdouble)
    mean = block.sum() / block.size
    d = block - mean
    low = d <= 0
    cm = np.longdouble(dom.cell_measure)
    int_low = float(np.abs(d[low]).sum() * cm)
    int_high = float(np.abs(d[~low]).sum() * cm)
    total = float(np.abs(d).sum() * cm)
    balance_dev = abs(int_low - int_high)
    balance_tol = 1e-12 * total

    mfac = Q.measure(dom) ** (-gamma / dom.dim)
    local = maximal_local(b, FracParams(gamma), Q, fam).samples[Q.slices()]
    chain_gap = np.abs(np.asarray(d, dtype=np.float64)) - np.abs(
        b.samples[Q.slices()] - mfac * local
    )
    chain_dev = float(np.max(chain_gap[np.asarray(low)], initial=-math.inf))
    chain_tol = 1e-12

    ratio = 0.0
    if balance_dev > 0:
        ratio = math.inf if balance_tol == 0 else balance_dev / balance_tol
    if chain_dev > chain_tol:
        ratio = max(ratio, math.inf if chain_tol == 0 else chain_dev / chain_tol)
    return CheckReport(
        "ef-balance", ratio, 1.0,
        details={
            "balance_deviation": balance_dev,
            "balance_tolerance": balance_tol,
            "int_low": int_low,
            "int_high": int_high,
            "chain_margin": chain_dev,
            "chain_tolerance": chain_tol,
            "gamma": gamma,
        },
    )


def sweep_ef_balance(b: GridFunction, gamma: float,
                     fam: CubeFamily) -> CheckReport:
    """E/F balance and pointwise chain over every family cube (1D)."""
    dom = b.domain
    if dom.dim != 1:
        raise DomainMismatchError("batched sweeps are 1D")
    if fam.anchor_stride != 1:
        raise FamilyError("batched sweeps require anchor stride 1")
    samples_ld = b.samples.astype(np.longdouble)
    absb = np.abs(b.samples)
    worst_ratio = 0.0
    worst_chain = -math.inf
    for S in fam.scales:
        if not fam.replacement_closed_at(S):
            continue
        windows = np.lib.stride_tricks.sliding_window_view(samples_ld, S)
        # per-window means: power-of-two windows divide exactly, and the
        # accumulation never mixes in mass from outside the window
        means = windows.mean(axis=1)
        d = windows - means[:, None]
        low = d <= 0
        int_low = np.abs(np.where(low, d, 0)).sum(axis=1)
        int_high = np.abs(np.where(low, 0, d)).sum(axis=1)
        total = np.abs(d).sum(axis=1)
        dev = np.abs(int_low - int_high)
        tol = 1e-12 * total
        with np.errstate(invalid="ignore", divide="ignore"):
            ratios = np.where(dev > 0, dev / tol, 0.0)
        worst_ratio = max(worst_ratio, float(np.max(ratios, initial=0.0)))

        mfac = (S * dom.h) ** (-gamma)
        local = localized_max_all_anchors(absb, dom, fam, S, [gamma])[0]
        gap = np.abs(np.asarray(d, dtype=np.float64)) - np.abs(
            np.asarray(windows, dtype=np.float64) - mfac * local
        )
        gap_low = np.where(np.asarray(low), gap, -math.inf)
        worst_chain = max(worst_chain, float(np.max(gap_low)))
    ratio = worst_ratio
    if worst_chain > 1e-12:
        ratio = max(ratio, worst_chain / 1e-12)
    return CheckReport("ef-balance-sweep", ratio, 1.0,
                       details={"balance_ratio": worst_ratio,
                                "chain_margin": worst_chain,
                                "chain_tolerance": 1e-12, "gamma": gamma})


def check_oscillation_bound(b: GridFunction, Q: Cube, beta: float, gamma: float,
                            fam: CubeFamily) -> CheckReport:
    """Factor-2 bound: the beta-weighted mean oscillation is at most twice
    the same average of |b - |Q|^(-g/n) M_{g,Q}(b)|.  Returns LHS/RHS."""
    dom = b.domain
    validate_cube(Q, dom)
    require_replacement_closed(fam, Q.side)
    block = b.samples[Q.slices()].astype(np.longdouble)
    mean = block.sum() / block.size
    cm = dom.cell_measure
    measure = Q.measure(dom)
    weight = measure ** (-1.0 - beta / dom.dim)
    lhs = weight * float(np.abs(block - mean).sum() * cm)
    mfac = measure ** (-gamma / dom.dim)
    local = maximal_local(b, FracParams(gamma), Q, fam).samples[Q.slices()]
    rhs = 2.0 * weight * float(
        np.sum(np.abs(b.samples[Q.slices()] - mfac * local)) * cm
    )
    deviation = lhs - rhs
    # both sides at rounding scale means the oscillation genuinely vanishes
    tiny = 1e-12 * (1.0 + float(np.max(np.abs(block)))) * measure ** (
        -beta / dom.dim
    )
    ratio = None if rhs <= tiny else lhs / rhs
    return CheckReport("osc-bound", deviation, 1e-12,
                       details={"lhs": lhs, "rhs": rhs, "ratio": ratio,
                                "beta": beta, "gamma": gamma})


def check_pointwise_domination(b: GridFunction, f: GridFunction, alpha: float,
                               beta: float, fam: CubeFamily,
                               forms: tuple = ("nonlinear", "maximal")
                               ) -> CheckReport:
    """Both commutators are dominated pointwise by L * M_{a+b}(f) with L
    the grid Lipschitz seminorm of b (nonnegative b required for the
    nonlinear form; no sign restriction for the maximal commutator)."""
    dom = b.domain
    if b.domain != f.domain:
        raise DomainMismatchError("b and f must share a domain")
    if not 0.0 <= alpha + beta < dom.dim:
        raise HypothesisViolationError(
            f"requires 0 <= alpha + beta < {dom.dim}"
        )
    metric = "chebyshev" if dom.dim == 2 else "euclidean"
    L = pointwise_lipschitz_seminorm(b, beta, metric=metric)
    upper = L * maximal(f, FracParams(alpha + beta), fam).samples
    margins = {}
    deviation = -math.inf
    if "nonlinear" in forms:
        if np.any(b.samples < 0):
            raise HypothesisViolationError(
                "nonlinear-commutator domination requires b >= 0"
            )
        nc = nonlinear_commutator(b, f, FracParams(alpha), fam)
        margins["nonlinear"] = float(np.max(np.abs(nc.samples) - upper))
        deviation = max(deviation, margins["nonlinear"])
    if "maximal" in forms:
        mc = maximal_commutator(b, f, FracParams(alpha), fam)
        margins["maximal"] = float(np.max(mc.samples - upper))
        deviation = max(deviation, margins["maximal"])
    tol = 1e-10 * L
    return CheckReport("domination", deviation, tol,
                       details={"seminorm": L, "alpha": alpha, "beta": beta,
                                **margins})


def check_mc_lower_bound(b: GridFunction, Q: Cube, alpha: float,
                         fam: CubeFamily) -> CheckReport:
    """|b - b_Q| <= |Q|^(-a/n) M_{a,b}(chi_Q) pointwise on Q."""
    dom = b.domain
    validate_cube(Q, dom)
    if Q.side not in fam.scales or any(a % fam.anchor_stride for a in Q.anchor):
        raise FamilyError("Q must itself belong to the cube family")
    block = b.samples[Q.slices()].astype(np.longdouble)
    mean = float(block.sum() / block.size)
    lhs = np.abs(b.samples[Q.slices()] - mean)
    mfac = Q.measure(dom) ** (-alpha / dom.dim)
    comm = maximal_commutator(b, indicator(Q, dom), FracParams(alpha), fam)
    rhs = mfac * comm.samples[Q.slices()]
    deviation = float(np.max(lhs - rhs))
    tol = 1e-12 * (1.0 + float(np.max(np.abs(b.samples))))
    return CheckReport("mc-lower", deviation, tol,
                       details={"alpha": alpha, "side": Q.side,
                                "anchor": list(Q.anchor)})


def check_nclip3_chain(b: GridFunction, Q: Cube, alpha: float,
                       fam: CubeFamily) -> CheckReport:
    """| |Q|^(-a/n) M_{a,Q}(b) - M_Q(b) | is bounded on Q by
    |Q|^(-a/n) |[|b|, M_a](chi_Q)| + |[|b|, M](chi_Q)| + 1e-10."""
    dom = b.domain
    validate_cube(Q, dom)
    require_replacement_closed(fam, Q.side)
    mfac = Q.measure(dom) ** (-alpha / dom.dim)
    sl = Q.slices()
    local_a = maximal_local(b, FracParams(alpha), Q, fam).samples[sl]
    local_0 = maximal_local(b, FracParams(0.0), Q, fam).samples[sl]
    lhs = np.abs(mfac * local_a - local_0)
    absb = abs(b)
    chi = indicator(Q, dom)
    nc_a = nonlinear_commutator(absb, chi, FracParams(alpha), fam).samples[sl]
    nc_0 = nonlinear_commutator(absb, chi, FracParams(0.0), fam).samples[sl]
    rhs = mfac * np.abs(nc_a) + np.abs(nc_0)
    deviation = float(np.max(lhs - rhs))
    return CheckReport("nclip3", deviation, 1e-10,
                       details={"alpha": alpha, "side": Q.side,
                                "anchor": list(Q.anchor)})


def sweep_nclip3(b: GridFunction, alpha: float, fam: CubeFamily) -> CheckReport:
    """The chain inequality over every family cube at once (1D)."""
    dom = b.domain
    if dom.dim != 1:
        raise DomainMismatchError("batched sweeps are 1D")
    if fam.anchor_stride != 1:
        raise FamilyError("batched sweeps require anchor stride 1")
    absb = np.abs(b.samples)
    ones = np.ones_like(absb)
    worst = -math.inf
    worst_cube = None
    for S in fam.scales:
        if not fam.replacement_closed_at(S):
            continue
        mfac = (S * dom.h) ** (-alpha)
        local_a, local_0 = localized_max_all_anchors(
            absb, dom, fam, S, [alpha, 0.0]
        )
        mchi_a, mchi_0 = clipped_max_all_anchors(ones, dom, fam, S, [alpha, 0.0])
        mbchi_a, mbchi_0 = clipped_max_all_anchors(absb, dom, fam, S, [alpha, 0.0])
        windows = np.lib.stride_tricks.sliding_window_view(absb, S)
        lhs = np.abs(mfac * local_a - local_0)
        nc_a = windows * mchi_a - mbchi_a
        nc_0 = windows * mchi_0 - mbchi_0
        rhs = mfac * np.abs(nc_a) + np.abs(nc_0)
        gap = lhs - rhs
        best = np.unravel_index(np.argmax(gap), gap.shape)
        if gap[best] > worst:
            worst = float(gap[best])
            worst_cube = {"side": S, "anchor": int(best[0])}
    return CheckReport("nclip3-sweep", worst, 1e-10,
                       details={"alpha": alpha, "worst_cube": worst_cube})


def sweep_osc_bound(b: GridFunction, beta: float, gamma: float,
                    fam: CubeFamily) -> CheckReport:
    """Factor-2 oscillation bound over every family cube (1D)."""
    dom = b.domain
    if dom.dim != 1:
        raise DomainMismatchError("batched sweeps are 1D")
    if fam.anchor_stride != 1:
        raise FamilyError("batched sweeps require anchor stride 1")
    samples_ld = b.samples.astype(np.longdouble)
    absb = np.abs(b.samples)
    worst = -math.inf
    worst_ratio = 0.0
    for S in fam.scales:
        if not fam.replacement_closed_at(S):
            continue
        windows = np.lib.stride_tricks.sliding_window_view(samples_ld, S)
        means = windows.mean(axis=1)
        osc = np.asarray(np.abs(windows - means[:, None]).sum(axis=1),
                         dtype=np.float64)
        mfac = (S * dom.h) ** (-gamma)
        local = localized_max_all_anchors(absb, dom, fam, S, [gamma])[0]
        wins64 = np.lib.stride_tricks.sliding_window_view(b.samples, S)
        dev = np.abs(wins64 - mfac * local).sum(axis=1)
        measure = S * dom.h
        weight = measure ** (-1.0 - beta) * dom.cell_measure
        lhs = weight * osc
        rhs = 2.0 * weight * dev
        worst = max(worst, float(np.max(lhs - rhs)))
        positive = rhs > 0
        if np.any(positive):
            worst_ratio = max(worst_ratio,
                              float(np.max(lhs[positive] / rhs[positive])))
    return CheckReport("osc-bound-sweep", worst, 1e-12,
                       details={"max_ratio": worst_ratio, "beta": beta,
                                "gamma": gamma})

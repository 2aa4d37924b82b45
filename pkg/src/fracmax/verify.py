"""Experiment harness: scaling studies, discrimination verdicts, and
empirical operator-norm lower bounds.

The qualitative equivalences behind the functionals ("the sup is finite
iff the symbol satisfies the hypothesis") are operationalized as scaling
studies: the sup-functional is evaluated on a geometric grid of
(resolution, box half-width) pairs, log2 of the value is fitted against
log2 of each axis by least squares, and a verdict is assigned:

    BOUNDED       all |slopes| <= stable_rel and the per-axis max/min
                  value ratio is <= 1 + stable_rel,
    GROWING       some slope >= log2(growth_factor),
    INCONCLUSIVE  otherwise, or fewer than 3 points per axis.

A GROWING verdict refutes the hypothesis only in the heuristic
contrapositive sense: finite-scale growth is evidence, not proof, and
the thresholds are calibrated against brute-force runs, not taken from
any closed-form rate.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError, CorpusError, DomainMismatchError
from .grid import (
    Cube,
    CubeFamily,
    Domain,
    GridFunction,
    make_corpus,
    parse_corpus_id,
)
from .maxop import (
    FracParams,
    check_cube_lemma,
    maximal_commutator,
    nonlinear_commutator,
)
from .oscfun import (
    FunctionalKind,
    OscFunctionalSpec,
    check_mc_lower_bound,
    check_pointwise_domination,
    sup_functional,
    sweep_commutator_identity,
    sweep_ef_balance,
    sweep_nclip3,
    sweep_osc_bound,
)
from .reporting import CheckReport, dump_json, render_report_outputs
from .varlex import (
    Exponent,
    check_chi_embedding,
    check_chi_product,
    check_holder,
    check_power_identity,
    log_holder_modulus,
    luxemburg_norm,
    sobolev_shift,
)

CORPUS_ALL = ("lip_pos", "lip_signed", "bmo_pos", "bmo_signed",
              "bump", "step", "random_lipschitz", "const:2")

_ZERO_FLOOR = 1e-13


@dataclass(frozen=True)
class Thresholds:
    stable_rel: float = 0.15
    growth_factor: float = 1.3

    def validate(self) -> None:
        if self.stable_rel <= 0 or self.growth_factor <= 1.0:
            raise ConfigError(
                "thresholds need stable_rel > 0 and growth_factor > 1"
            )


@dataclass(frozen=True)
class ExperimentConfig:
    """One scaling study: a symbol, a functional, and the sampling grid."""

    name: str
    symbol: str
    spec: OscFunctionalSpec
    resolutions: tuple[int, ...] = (64, 128, 256)
    box_sizes: tuple[float, ...] = (1.0, 2.0, 4.0)
    stride: int = 1
    thresholds: Thresholds = field(default_factory=Thresholds)
    expect: str | None = None
    scale: float = 1.0
    seed: int = 0

    def validate(self) -> None:
        self.thresholds.validate()
        for seq, label in ((self.resolutions, "resolutions"),
                           (self.box_sizes, "box_sizes")):
            if len(seq) >= 2:
                for a, b in zip(seq, seq[1:]):
                    if abs(b / a - 2.0) > 1e-9:
                        raise ConfigError(
                            f"{label} must be geometric with ratio 2, got {seq}"
                        )
        if self.expect not in (None, "bounded", "growing", "inconclusive"):
            raise ConfigError(f"unknown expect verdict {self.expect!r}")


@dataclass
class VerdictReport:
    """Sup values over the (resolution, box) grid with fitted slopes."""

    name: str
    kind: str
    symbol: str
    values: np.ndarray
    resolutions: tuple[int, ...]
    box_sizes: tuple[float, ...]
    slope_box: float
    slope_res: float
    verdict: str
    expect: str | None = None
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        if self.expect is None:
            return True
        return self.verdict.lower() == self.expect

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "symbol": self.symbol,
            "resolutions": list(self.resolutions),
            "box_sizes": list(self.box_sizes),
            "values": np.asarray(self.values).tolist(),
            "log2_slopes": {"box": self.slope_box, "resolution": self.slope_res},
            "verdict": self.verdict,
            "expect": self.expect,
            "pass": self.passed,
            **({"details": self.details} if self.details else {}),
        }


def _study_domain(dim: int, half_width: float, cells: int) -> Domain:
    if dim == 1:
        return Domain(1, -half_width, half_width, cells)
    return Domain(2, (-half_width,) * 2, (half_width,) * 2, (cells,) * 2)


def _make_symbol(symbol: str, dom: Domain, spec: OscFunctionalSpec,
                 scale: float, seed: int) -> GridFunction:
    name, params = parse_corpus_id(symbol)
    beta = params.get("beta", spec.beta if spec.beta > 0 else 0.5)
    b = make_corpus(name, dom, beta=beta, c=params.get("c", 1.0),
                    seed=params.get("seed", seed))
    return b if scale == 1.0 else b * scale


def _axis_slope(xs: np.ndarray, values: np.ndarray) -> float:
    """Mean least-squares slope of log2(value) rows against log2(xs)."""
    if values.shape[1] < 2:
        return 0.0
    logx = np.log2(xs)
    slopes = [np.polyfit(logx, np.log2(row), 1)[0] for row in values]
    return float(np.mean(slopes))


def _axis_ratio(values: np.ndarray) -> float:
    """Worst max/min ratio along rows."""
    return float(np.max(values.max(axis=1) / values.min(axis=1)))


def scaling_study(cfg: ExperimentConfig, dim: int = 1) -> VerdictReport:
    """Evaluate the sup-functional over the (resolution, box) grid and
    assign a verdict from the fitted log2 slopes."""
    cfg.validate()
    cfg.spec.validate(dim)
    values = np.zeros((len(cfg.resolutions), len(cfg.box_sizes)))
    for i, n in enumerate(cfg.resolutions):
        for j, half in enumerate(cfg.box_sizes):
            dom = _study_domain(dim, half, n)
            fam = CubeFamily.dyadic(min(dom.cells), cfg.stride)
            b = _make_symbol(cfg.symbol, dom, cfg.spec, cfg.scale, cfg.seed)
            values[i, j] = sup_functional(b, cfg.spec, fam).sup_value
    return _verdict_from_values(cfg, values)


def _verdict_from_values(cfg: ExperimentConfig,
                         values: np.ndarray) -> VerdictReport:
    th = cfg.thresholds
    enough = len(cfg.resolutions) >= 3 and len(cfg.box_sizes) >= 3
    floor = _ZERO_FLOOR * (1.0 + float(np.max(np.abs(values), initial=0.0)))
    positive = values > floor
    details: dict = {}
    if not np.any(positive):
        verdict, slope_box, slope_res = "BOUNDED", 0.0, 0.0
        details["note"] = "functional vanishes identically"
    elif not np.all(positive):
        verdict, slope_box, slope_res = "INCONCLUSIVE", math.nan, math.nan
        details["note"] = "mixed zero and positive values"
    else:
        slope_box = _axis_slope(np.asarray(cfg.box_sizes, float), values)
        slope_res = _axis_slope(np.asarray(cfg.resolutions, float), values.T)
        ratio_box = _axis_ratio(values)
        ratio_res = _axis_ratio(values.T)
        details["axis_ratios"] = {"box": ratio_box, "resolution": ratio_res}
        grow_at = math.log2(th.growth_factor)
        if (abs(slope_box) <= th.stable_rel and abs(slope_res) <= th.stable_rel
                and ratio_box <= 1.0 + th.stable_rel
                and ratio_res <= 1.0 + th.stable_rel):
            verdict = "BOUNDED"
        elif max(slope_box, slope_res) >= grow_at:
            verdict = "GROWING"
        else:
            verdict = "INCONCLUSIVE"
    if not enough:
        verdict = "INCONCLUSIVE"
        details["note"] = "fewer than 3 points per axis"
    return VerdictReport(
        name=cfg.name,
        kind=cfg.spec.kind.value,
        symbol=cfg.symbol,
        values=values,
        resolutions=tuple(cfg.resolutions),
        box_sizes=tuple(cfg.box_sizes),
        slope_box=slope_box,
        slope_res=slope_res,
        verdict=verdict,
        expect=cfg.expect,
        details=details,
    )


def discriminate(symbol_pos: str, symbol_sig: str, spec: OscFunctionalSpec,
                 cfg: ExperimentConfig) -> tuple[VerdictReport, VerdictReport]:
    """Run the study on a hypothesis-satisfying symbol and a violating
    one; the interesting outcome is (BOUNDED, GROWING)."""
    base = replace(cfg, spec=spec)
    pos = scaling_study(replace(base, name=f"{cfg.name}/pos",
                                symbol=symbol_pos, expect="bounded"))
    sig = scaling_study(replace(base, name=f"{cfg.name}/sig",
                                symbol=symbol_sig, expect="growing"))
    return pos, sig


@dataclass
class OperatorNormBound:
    """Empirical lower bound max_f ||Op f||_q / ||f||_p over the probes."""

    value: float
    attained_by: str
    which: str
    per_probe: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "attained_by": self.attained_by,
            "which": self.which,
            "per_probe": self.per_probe,
        }


def operator_norm_lower_bound(
    b: GridFunction,
    alpha: float,
    p: Exponent,
    q: Exponent,
    probes,
    fam: CubeFamily,
    which: str = "NONLINEAR",
    shift_gamma: float | None = None,
) -> OperatorNormBound:
    """Max over probe functions of the q-to-p norm quotient of the
    commutator output; a lower bound for the operator norm."""
    which = which.upper()
    if which not in ("NONLINEAR", "MAXIMAL_COMM"):
        raise DomainMismatchError(f"which must be NONLINEAR or MAXIMAL_COMM")
    if shift_gamma is not None:
        expected = sobolev_shift(p, FracParams(shift_gamma))
        gap = np.max(np.abs(expected.values.samples - q.values.samples))
        if gap > 1e-9:
            raise DomainMismatchError(
                "q is not the shifted exponent of p at the exercised gamma"
            )
    resolved = []
    for probe in probes:
        if isinstance(probe, GridFunction):
            resolved.append((f"probe{len(resolved)}", probe))
        else:
            name, params = parse_corpus_id(probe)
            resolved.append(
                (probe, make_corpus(name, b.domain, **params))
            )
    if not resolved:
        raise CorpusError("operator-norm bound needs at least one probe")
    gp = FracParams(alpha)
    best = 0.0
    attained = resolved[0][0]
    per_probe = []
    for name, f in resolved:
        nf = luxemburg_norm(f, p).value
        if nf == 0.0:
            continue
        if which == "NONLINEAR":
            out = nonlinear_commutator(b, f, gp, fam)
        else:
            out = maximal_commutator(b, f, gp, fam)
        ratio = luxemburg_norm(abs(out), q).value / nf
        per_probe.append({"probe": name, "ratio": ratio})
        if ratio > best:
            best, attained = ratio, name
    return OperatorNormBound(best, attained, which, per_probe)


# ---------------------------------------------------------------------------
# Suite configuration and execution
# ---------------------------------------------------------------------------

def bundled_log_holder_exponent(dom: Domain) -> Exponent:
    """The suite's variable exponent 2 + 1/(1 + |x|): Lipschitz in x,
    hence log-Hoelder, with range (2, 3]."""
    coords = dom.meshgrid()
    r = np.abs(coords[0]) if dom.dim == 1 else np.hypot(*coords)
    return Exponent(GridFunction(dom, 2.0 + 1.0 / (1.0 + r)))


def load_config(path) -> dict:
    import tomli

    path = Path(path)
    try:
        with path.open("rb") as fh:
            return tomli.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}")


_FUNCTIONAL_KINDS = {k.value for k in FunctionalKind}
_CHECK_KINDS = (
    "cube-lemma", "commutator-identity", "ef-balance", "osc-bound", "nclip3",
    "mc-lower", "domination", "holder", "power", "chi-product",
    "chi-embedding", "fast-brute", "luxemburg", "log-holder", "opnorm",
)


def _entry_spec(entry: dict) -> OscFunctionalSpec:
    kind = FunctionalKind.parse(entry["kind"])
    s = entry.get("s", 1.0)
    if isinstance(s, str):
        if s.startswith("const:"):
            s = float(s.split(":", 1)[1])
        else:
            raise ConfigError(
                f"experiment {entry.get('name', entry['kind'])}: "
                f"s must be a number or 'const:<value>', got {s!r}"
            )
    return OscFunctionalSpec(
        kind=kind,
        alpha=float(entry.get("alpha", 0.0)),
        beta=float(entry.get("beta", 0.0)),
        s=s,
        inner_q=float(entry.get("inner_q", 1.0)),
        gamma_for_max=float(entry.get("gamma_for_max", 0.0)),
    )


def _study_from_entry(entry: dict, family: dict, index: int) -> ExperimentConfig:
    spec = _entry_spec(entry)
    if "symbol" not in entry:
        raise ConfigError(f"experiment #{index}: missing key 'symbol'")
    th = entry.get("thresholds", {})
    return ExperimentConfig(
        name=entry.get("name", f"{entry['kind']}-{entry['symbol']}-{index}"),
        symbol=entry["symbol"],
        spec=spec,
        resolutions=tuple(entry.get("resolutions", (64, 128, 256))),
        box_sizes=tuple(entry.get("box_sizes", (1.0, 2.0, 4.0))),
        stride=int(family.get("stride", 1)),
        thresholds=Thresholds(
            stable_rel=float(th.get("stable_rel", 0.15)),
            growth_factor=float(th.get("growth_factor", 1.3)),
        ),
        expect=entry.get("expect"),
        scale=float(entry.get("scale", 1.0)),
        seed=int(entry.get("seed", 0)),
    )


def _base_domain(domain_cfg: dict) -> Domain:
    dim = int(domain_cfg.get("dim", 1))
    half = float(domain_cfg.get("half_width", 1.0))
    cells = int(domain_cfg.get("cells", 128))
    return _study_domain(dim, half, cells)


def _family_for(dom: Domain, family_cfg: dict) -> CubeFamily:
    policy = family_cfg.get("policy", "dyadic")
    stride = int(family_cfg.get("stride", 1))
    if policy == "dyadic":
        return CubeFamily.dyadic(min(dom.cells), stride)
    if policy == "all":
        return CubeFamily.all_scales(min(dom.cells), stride)
    raise ConfigError(f"unknown family policy {policy!r}")


def _resolve_exponent(entry: dict, dom: Domain) -> Exponent:
    spec = entry.get("exponent", "log-holder")
    if spec == "log-holder":
        return bundled_log_holder_exponent(dom)
    if isinstance(spec, (int, float)):
        return Exponent.constant(float(spec), dom)
    if isinstance(spec, str) and spec.startswith("const:"):
        return Exponent.constant(float(spec.split(":", 1)[1]), dom)
    raise ConfigError(f"bad exponent spec {spec!r}")


def _run_check_entry(entry: dict, domain_cfg: dict, family_cfg: dict,
                     index: int) -> list[CheckReport]:
    kind = entry["kind"]
    overrides = {
        k: entry[k]
        for k in ("dim", "half_width", "cells")
        if k in entry and np.isscalar(entry[k])
    }
    dom = _base_domain({**domain_cfg, **overrides})
    fam = _family_for(dom, family_cfg)
    symbols = entry.get("symbols", entry.get("symbol"))
    if symbols is None:
        symbols = list(CORPUS_ALL)
    elif isinstance(symbols, str):
        symbols = [symbols]
    alphas = entry.get("alphas", [entry.get("alpha", 0.25)])
    seed = int(entry.get("seed", 0))
    rng = np.random.default_rng(seed)
    reports: list[CheckReport] = []

    def symbol_functions():
        for sym in symbols:
            name, params = parse_corpus_id(sym)
            yield sym, make_corpus(name, dom, **params)

    if kind == "cube-lemma":
        pairs = int(entry.get("pairs", 25))
        gammas = entry.get("gammas", [0.0, 0.25, 0.5])
        dyadic_sides = [s for s in fam.scales]
        for k in range(pairs):
            f = GridFunction(dom, rng.normal(size=dom.shape))
            side = int(rng.choice(dyadic_sides))
            anchor = tuple(
                int(rng.integers(0, dom.cells[a] - side + 1))
                for a in range(dom.dim)
            )
            gamma = float(gammas[k % len(gammas)])
            reports.append(
                check_cube_lemma(f, Cube(anchor, side), FracParams(gamma), fam)
            )
    elif kind == "commutator-identity":
        for sym, b in symbol_functions():
            for alpha in alphas:
                rep = sweep_commutator_identity(b, float(alpha), fam)
                rep.details["symbol"] = sym
                reports.append(rep)
    elif kind == "ef-balance":
        gamma = float(entry.get("gamma", 0.25))
        for sym, b in symbol_functions():
            rep = sweep_ef_balance(b, gamma, fam)
            rep.details["symbol"] = sym
            reports.append(rep)
    elif kind == "osc-bound":
        beta = float(entry.get("beta", 0.5))
        gamma = float(entry.get("gamma", 0.25))
        for sym, b in symbol_functions():
            rep = sweep_osc_bound(b, beta, gamma, fam)
            rep.details["symbol"] = sym
            reports.append(rep)
    elif kind == "nclip3":
        for sym, b in symbol_functions():
            for alpha in alphas:
                rep = sweep_nclip3(b, float(alpha), fam)
                rep.details["symbol"] = sym
                reports.append(rep)
    elif kind == "mc-lower":
        alpha = float(entry.get("alpha", 0.25))
        for sym, b in symbol_functions():
            worst = None
            for Q in fam.cubes(dom):
                rep = check_mc_lower_bound(b, Q, alpha, fam)
                if worst is None or rep.max_deviation - rep.tolerance > (
                    worst.max_deviation - worst.tolerance
                ):
                    worst = rep
            worst.details["symbol"] = sym
            reports.append(worst)
    elif kind == "domination":
        betas = entry.get("betas", [0.3, 0.5])
        probes = entry.get("probes", ["bump", "step"])
        pos_symbols = entry.get("symbols", ["lip_pos", "random_lipschitz"])
        for sym in pos_symbols:
            name, params = parse_corpus_id(sym)
            for beta in betas:
                b = make_corpus(name, dom, beta=float(beta), **params)
                b = abs(b)
                for probe in probes:
                    pn, pp = parse_corpus_id(probe)
                    f = make_corpus(pn, dom, **pp)
                    for alpha in alphas:
                        rep = check_pointwise_domination(
                            b, f, float(alpha), float(beta), fam
                        )
                        rep.details.update(symbol=sym, probe=probe)
                        reports.append(rep)
    elif kind == "holder":
        p = _resolve_exponent(entry, dom)
        for _ in range(int(entry.get("pairs", 10))):
            f = GridFunction(dom, rng.normal(size=dom.shape))
            g = GridFunction(dom, rng.normal(size=dom.shape))
            reports.append(check_holder(f, g, p))
    elif kind == "power":
        p = _resolve_exponent(entry, dom)
        for r in entry.get("powers", [0.5, 1.0, 2.0]):
            f = GridFunction(dom, rng.normal(size=dom.shape))
            reports.append(check_power_identity(f, p, float(r)))
    elif kind in ("chi-product", "chi-embedding"):
        resolutions = entry.get("resolutions", [dom.cells[0]])
        sups = []
        for n in resolutions:
            dom_n = _base_domain({**domain_cfg, **overrides, "cells": int(n)})
            fam_n = _family_for(dom_n, family_cfg)
            p = _resolve_exponent(entry, dom_n)
            if kind == "chi-product":
                rep = check_chi_product(p, fam_n)
            else:
                rep = check_chi_embedding(
                    p, FracParams(float(entry.get("gamma", 0.25))), fam_n
                )
            sups.append(rep.details["sup"])
            reports.append(rep)
        if len(sups) > 1:
            spread = max(sups) / min(sups) - 1.0
            reports.append(CheckReport(
                f"{kind}-stability", spread,
                float(entry.get("stability_rel", 0.05)),
                details={"sups": sups, "resolutions": list(resolutions)},
            ))
    elif kind == "fast-brute":
        for k in range(int(entry.get("pairs", 10))):
            cells = int(rng.choice(entry.get("sizes", [32, 64, 128, 256])))
            dom_k = _study_domain(1, 1.0, cells)
            fam_k = _family_for(dom_k, family_cfg)
            b = GridFunction(dom_k, rng.normal(size=cells))
            f = GridFunction(dom_k, rng.normal(size=cells))
            gamma = float(rng.uniform(0.0, 0.9))
            brute = maximal_commutator(b, f, FracParams(gamma), fam_k, "BRUTE")
            fast = maximal_commutator(b, f, FracParams(gamma), fam_k, "FAST")
            scale = np.maximum(np.abs(brute.samples), 1e-30)
            dev = float(np.max(np.abs(brute.samples - fast.samples) / scale))
            reports.append(CheckReport("fast-brute", dev, 1e-10,
                                       details={"cells": cells, "gamma": gamma}))
    elif kind == "luxemburg":
        trials = int(entry.get("trials", 100))
        for _ in range(trials):
            f = GridFunction(dom, rng.normal(size=dom.shape))
            p = Exponent(GridFunction(
                dom, rng.uniform(1.2, 4.0, size=dom.shape)
            ))
            res = luxemburg_norm(f, p)
            from .varlex import modular

            inner = modular(f * (1.0 / (res.value * (1.0 - 1e-6))), p)
            dev = max(res.modular_at_value - (1.0 + 1e-9),
                      1.0 - inner if inner <= 1.0 else 0.0)
            reports.append(CheckReport("unit-ball", dev, 0.0))
        reports = [max(reports, key=lambda r: r.max_deviation)]
        reports[0].details["trials"] = trials
    elif kind == "log-holder":
        p = _resolve_exponent(entry, dom)
        value = log_holder_modulus(p)
        reports.append(CheckReport(
            "log-holder", 0.0 if math.isfinite(value) else math.inf, 1e-8,
            details={"modulus": value},
        ))
    elif kind == "opnorm":
        sym = entry.get("symbol", "lip_pos:0.5")
        name, params = parse_corpus_id(sym)
        b = make_corpus(name, dom, **params)
        alpha = float(entry.get("alpha", 0.25))
        beta = params.get("beta", 0.5)
        p = Exponent.constant(float(entry.get("p", 1.5)), dom)
        q = sobolev_shift(p, FracParams(alpha + beta))
        bound = operator_norm_lower_bound(
            b, alpha, p, q, entry.get("probes", ["bump", "step"]), fam,
            which=entry.get("which", "NONLINEAR"),
            shift_gamma=alpha + beta,
        )
        finite_positive = math.isfinite(bound.value) and bound.value > 0
        reports.append(CheckReport(
            "opnorm", 0.0 if finite_positive else math.inf, 1e-8,
            details=bound.to_dict(),
        ))
    else:
        raise ConfigError(f"experiment #{index}: unknown kind {kind!r}")
    return reports


def run_suite(config, report_path=None, plots_dir=None,
              threads: int = 1) -> tuple[list, int]:
    """Execute a suite config; returns (records, exit_code).

    Exit code 0 when every check and study passed, 1 on any failure;
    config errors raise :class:`ConfigError` (the CLI maps them to 2).
    """
    if not isinstance(config, dict):
        config = load_config(config)
    domain_cfg = config.get("domain", {})
    family_cfg = config.get("family", {})
    entries = config.get("experiment", [])
    if not isinstance(entries, list):
        raise ConfigError("[[experiment]] must be an array of tables")

    studies: list[tuple[int, ExperimentConfig]] = []
    checks: list[tuple[int, dict]] = []
    for index, entry in enumerate(entries):
        if "kind" not in entry:
            raise ConfigError(f"experiment #{index}: missing key 'kind'")
        kind = entry["kind"]
        if kind in _FUNCTIONAL_KINDS:
            studies.append((index, _study_from_entry(entry, family_cfg, index)))
        elif kind in _CHECK_KINDS:
            checks.append((index, entry))
        else:
            raise ConfigError(
                f"experiment #{index}: unknown kind {kind!r}; expected a "
                f"functional kind {sorted(_FUNCTIONAL_KINDS)} or a check "
                f"{sorted(_CHECK_KINDS)}"
            )

    results: dict[int, object] = {}
    if threads > 1 and studies:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = {
                pool.submit(scaling_study, cfg): index
                for index, cfg in studies
            }
            for future, index in futures.items():
                results[index] = future.result()
    else:
        for index, cfg in studies:
            results[index] = scaling_study(cfg)
    for index, entry in checks:
        results[index] = _run_check_entry(entry, domain_cfg, family_cfg, index)

    records = []
    all_pass = True
    study_reports = []
    for index in sorted(results):
        outcome = results[index]
        if isinstance(outcome, VerdictReport):
            records.append(outcome.to_dict())
            study_reports.append(outcome)
            all_pass &= outcome.passed
        else:
            for rep in outcome:
                records.append(rep.to_dict())
                all_pass &= rep.passed
    if report_path is not None:
        dump_json(records, report_path)
    if plots_dir is not None and study_reports:
        render_report_outputs(study_reports, plots_dir)
    return records, 0 if all_pass else 1

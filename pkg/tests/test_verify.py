import json

import numpy as np
import pytest

from fracmax.errors import ConfigError
from fracmax.grid import CubeFamily, Domain, GridFunction, make_corpus
from fracmax.maxop import FracParams
from fracmax.oscfun import FunctionalKind, OscFunctionalSpec
from fracmax.varlex import Exponent, sobolev_shift
from fracmax.verify import (
    ExperimentConfig,
    Thresholds,
    _verdict_from_values,
    bundled_log_holder_exponent,
    discriminate,
    load_config,
    operator_norm_lower_bound,
    run_suite,
    scaling_study,
)


def cfg(name="t", symbol="lip_pos", spec=None, **kw):
    spec = spec or OscFunctionalSpec(FunctionalKind.MC_BMO, s=1.0)
    return ExperimentConfig(name=name, symbol=symbol, spec=spec, **kw)


class TestVerdictLogic:
    def test_all_zero_is_bounded(self):
        rep = _verdict_from_values(cfg(), np.zeros((3, 3)))
        assert rep.verdict == "BOUNDED"

    def test_mixed_zero_inconclusive(self):
        values = np.ones((3, 3))
        values[0, 0] = 0.0
        rep = _verdict_from_values(cfg(), values)
        assert rep.verdict == "INCONCLUSIVE"

    def test_flat_is_bounded(self):
        rep = _verdict_from_values(cfg(), np.full((3, 3), 2.0))
        assert rep.verdict == "BOUNDED"
        assert rep.slope_box == pytest.approx(0.0, abs=1e-12)

    def test_box_growth_detected(self):
        boxes = np.array([1.0, 2.0, 4.0])
        values = np.vstack([boxes ** 0.5] * 3)  # slope 0.5 along boxes
        rep = _verdict_from_values(cfg(), values)
        assert rep.verdict == "GROWING"
        assert rep.slope_box == pytest.approx(0.5, abs=1e-12)
        assert rep.slope_res == pytest.approx(0.0, abs=1e-12)

    def test_mild_drift_inconclusive(self):
        boxes = np.array([1.0, 2.0, 4.0])
        values = np.vstack([boxes ** 0.25] * 3)  # between the bands
        rep = _verdict_from_values(cfg(), values)
        assert rep.verdict == "INCONCLUSIVE"

    def test_two_points_per_axis_forced_inconclusive(self):
        c = cfg(resolutions=(64, 128), box_sizes=(1.0, 2.0))
        rep = _verdict_from_values(c, np.ones((2, 2)))
        assert rep.verdict == "INCONCLUSIVE"

    def test_expect_controls_pass(self):
        c = cfg(expect="growing")
        boxes = np.array([1.0, 2.0, 4.0])
        rep = _verdict_from_values(c, np.vstack([boxes] * 3))
        assert rep.verdict == "GROWING" and rep.passed
        rep = _verdict_from_values(cfg(expect="bounded"),
                                   np.vstack([boxes] * 3))
        assert not rep.passed


class TestExperimentConfig:
    def test_geometric_axes_enforced(self):
        with pytest.raises(ConfigError):
            cfg(resolutions=(64, 100, 256)).validate()
        with pytest.raises(ConfigError):
            cfg(box_sizes=(1.0, 3.0, 9.0)).validate()

    def test_threshold_validation(self):
        with pytest.raises(ConfigError):
            cfg(thresholds=Thresholds(stable_rel=-1.0)).validate()
        with pytest.raises(ConfigError):
            cfg(thresholds=Thresholds(growth_factor=0.9)).validate()

    def test_bad_expect(self):
        with pytest.raises(ConfigError):
            cfg(expect="diverges").validate()


class TestScalingStudy:
    def test_constant_symbol_bounded(self):
        rep = scaling_study(cfg(symbol="const:2",
                                resolutions=(16, 32, 64),
                                box_sizes=(1.0, 2.0, 4.0)))
        assert rep.verdict == "BOUNDED"
        np.testing.assert_allclose(rep.values, 0.0)

    def test_deterministic(self):
        c = cfg(symbol="random_lipschitz", resolutions=(16, 32, 64))
        a = scaling_study(c)
        b = scaling_study(c)
        np.testing.assert_array_equal(a.values, b.values)

    def test_scale_invariant_slopes(self):
        spec = OscFunctionalSpec(FunctionalKind.MC_LIP, beta=0.5, s=1.0)
        base = scaling_study(cfg(spec=spec, symbol="lip_signed",
                                 resolutions=(16, 32, 64)))
        scaled = scaling_study(cfg(spec=spec, symbol="lip_signed",
                                   resolutions=(16, 32, 64), scale=3.0))
        assert scaled.slope_box == pytest.approx(base.slope_box, abs=1e-12)
        assert scaled.slope_res == pytest.approx(base.slope_res, abs=1e-12)
        np.testing.assert_allclose(scaled.values, 3.0 * base.values, rtol=1e-12)

    def test_discriminate_mc_lip(self):
        spec = OscFunctionalSpec(FunctionalKind.MC_LIP, beta=0.5, s=1.0)
        pos, sig = discriminate("lip_pos", "lip_signed", spec,
                                cfg(name="mc-lip",
                                    resolutions=(32, 64, 128)))
        assert (pos.verdict, sig.verdict) == ("BOUNDED", "GROWING")
        assert pos.passed and sig.passed


class TestOperatorNormBound:
    def setup_method(self):
        self.dom = Domain(1, -1.0, 1.0, 64)
        self.fam = CubeFamily.dyadic(64)
        self.p = Exponent.constant(1.5, self.dom)
        self.q = sobolev_shift(self.p, FracParams(0.4))

    def test_constant_symbol_nonlinear_zero(self):
        b = make_corpus("const", self.dom, c=2.0)
        bound = operator_norm_lower_bound(
            b, 0.1, self.p, self.q, ["bump", "step"], self.fam, "NONLINEAR"
        )
        assert bound.value <= 1e-12

    def test_zero_symbol_maximal_zero(self):
        b = make_corpus("const", self.dom, c=0.0) * 0.0
        b = GridFunction(self.dom, np.zeros(64))
        bound = operator_norm_lower_bound(
            b, 0.1, self.p, self.q, ["bump"], self.fam, "MAXIMAL_COMM"
        )
        assert bound.value == 0.0

    def test_positive_and_probe_monotone(self):
        b = make_corpus("lip_pos", self.dom, beta=0.3)
        small = operator_norm_lower_bound(
            b, 0.1, self.p, self.q, ["bump"], self.fam, "MAXIMAL_COMM",
            shift_gamma=0.4,
        )
        large = operator_norm_lower_bound(
            b, 0.1, self.p, self.q, ["bump", "step", "random_lipschitz"],
            self.fam, "MAXIMAL_COMM", shift_gamma=0.4,
        )
        assert 0 < small.value <= large.value

    def test_shift_mismatch_rejected(self):
        from fracmax.errors import DomainMismatchError

        b = make_corpus("lip_pos", self.dom)
        with pytest.raises(DomainMismatchError):
            operator_norm_lower_bound(
                b, 0.1, self.p, self.p, ["bump"], self.fam, "NONLINEAR",
                shift_gamma=0.4,
            )

    def test_empty_probes_rejected(self):
        from fracmax.errors import CorpusError

        b = make_corpus("lip_pos", self.dom)
        with pytest.raises(CorpusError):
            operator_norm_lower_bound(b, 0.1, self.p, self.q, [], self.fam)


class TestSuiteConfig:
    def test_empty_config_passes(self, tmp_path):
        path = tmp_path / "empty.toml"
        path.write_text("[domain]\ncells = 32\n")
        records, code = run_suite(path)
        assert records == [] and code == 0

    def test_parse_error_has_location(self, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text("[domain\ncells = 32\n")
        with pytest.raises(ConfigError, match="bad.toml"):
            load_config(path)

    def test_unknown_kind_named(self, tmp_path):
        path = tmp_path / "unk.toml"
        path.write_text("""
[[experiment]]
kind = "frobnicate"
""")
        with pytest.raises(ConfigError, match="frobnicate"):
            run_suite(path)

    def test_missing_symbol_named(self, tmp_path):
        path = tmp_path / "missing.toml"
        path.write_text("""
[[experiment]]
kind = "mc-bmo"
""")
        with pytest.raises(ConfigError, match="symbol"):
            run_suite(path)

    def test_small_suite_runs(self, tmp_path):
        path = tmp_path / "small.toml"
        path.write_text("""
[domain]
cells = 32

[[experiment]]
kind = "ef-balance"
symbols = ["step"]

[[experiment]]
kind = "mc-bmo"
symbol = "lip_signed"
resolutions = [16, 32, 64]
expect = "growing"
""")
        report = tmp_path / "report.json"
        records, code = run_suite(path, report_path=report)
        assert code == 0
        data = json.loads(report.read_text())
        assert len(data) == 2
        assert all(r["pass"] for r in data)

    def test_failure_exit_code(self, tmp_path):
        path = tmp_path / "fail.toml"
        path.write_text("""
[[experiment]]
kind = "mc-bmo"
symbol = "lip_signed"
resolutions = [16, 32, 64]
expect = "bounded"
""")
        records, code = run_suite(path)
        assert code == 1

    def test_threads_match_serial(self, tmp_path):
        path = tmp_path / "two.toml"
        path.write_text("""
[[experiment]]
kind = "mc-bmo"
symbol = "lip_signed"
resolutions = [16, 32, 64]

[[experiment]]
kind = "mc-lip"
symbol = "lip_pos"
beta = 0.5
resolutions = [16, 32, 64]
""")
        serial, _ = run_suite(path, threads=1)
        parallel, _ = run_suite(path, threads=4)
        assert serial == parallel

    def test_plots_rendered(self, tmp_path):
        path = tmp_path / "plot.toml"
        path.write_text("""
[[experiment]]
name = "demo"
kind = "mc-bmo"
symbol = "lip_signed"
resolutions = [16, 32, 64]
""")
        plots = tmp_path / "plots"
        run_suite(path, plots_dir=plots)
        assert (plots / "demo.png").exists()
        assert (plots / "demo.csv").exists()
        header = (plots / "demo.csv").read_text().splitlines()[0]
        assert header.startswith("cells\\box")

    def test_log_holder_exponent_bundled(self):
        dom = Domain(1, -1.0, 1.0, 64)
        p = bundled_log_holder_exponent(dom)
        assert 2.0 < p.p_minus <= p.p_plus <= 3.0


class TestDiscriminateSanity:
    def test_identical_inputs_agree(self):
        spec = OscFunctionalSpec(FunctionalKind.MC_LIP, beta=0.5, s=1.0)
        pos, sig = discriminate("lip_pos", "lip_pos", spec,
                                cfg(name="same", resolutions=(16, 32, 64)))
        assert pos.verdict == sig.verdict == "BOUNDED"
        np.testing.assert_array_equal(pos.values, sig.values)


class TestReportingHelpers:
    def test_json_safe_non_finite(self):
        from fracmax.reporting import dump_json, json_safe

        assert json_safe(float("inf")) == "inf"
        assert json_safe(np.float64("nan")) == "nan"
        text = dump_json({"x": np.inf, "arr": np.array([1.0, np.nan])})
        import json as _json

        parsed = _json.loads(text)
        assert parsed["x"] == "inf" and parsed["arr"][1] == "nan"

    def test_cube_values_csv_overwrite(self, tmp_path):
        from fracmax.grid import Cube
        from fracmax.reporting import write_cube_values_csv

        path = tmp_path / "cubes.csv"
        entries = [(Cube((0,), 2), 1.5)]
        write_cube_values_csv(path, 1, entries)
        with pytest.raises(FileExistsError):
            write_cube_values_csv(path, 1, entries)
        write_cube_values_csv(path, 1, entries, force=True)

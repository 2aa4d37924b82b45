import json

import numpy as np
import pytest

from fracmax.cli import main
from fracmax.grid import read_gfn


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestGen:
    def test_roundtrip_bit_exact(self, tmp_path, capsys):
        path = tmp_path / "b.gfn"
        code, out, _ = run(capsys, "gen", "--symbol", "lip_pos",
                           "--beta", "0.5", "--domain=-1:1",
                           "--cells", "64", "-o", str(path))
        assert code == 0
        payload = json.loads(out)
        assert payload["cells"] == [64]
        f, _ = read_gfn(path)
        code2, _, _ = run(capsys, "gen", "--symbol", "lip_pos",
                          "--beta", "0.5", "--domain=-1:1",
                          "--cells", "64", "-o", str(tmp_path / "b2.gfn"))
        g, _ = read_gfn(tmp_path / "b2.gfn")
        np.testing.assert_array_equal(f.samples, g.samples)

    def test_overwrite_refused(self, tmp_path, capsys):
        path = tmp_path / "b.gfn"
        run(capsys, "gen", "--symbol", "step", "-o", str(path))
        code, _, err = run(capsys, "gen", "--symbol", "step", "-o", str(path))
        assert code == 2 and "overwrite" in err
        code, _, _ = run(capsys, "gen", "--symbol", "step", "-o", str(path),
                         "--force")
        assert code == 0

    def test_unknown_symbol(self, tmp_path, capsys):
        code, _, err = run(capsys, "gen", "--symbol", "nope",
                           "-o", str(tmp_path / "x.gfn"))
        assert code == 2 and "validation error" in err

    def test_csv_export(self, tmp_path, capsys):
        path = tmp_path / "b.gfn"
        csv_path = tmp_path / "b.csv"
        code, _, _ = run(capsys, "gen", "--symbol", "const:2", "-o", str(path),
                         "--csv", str(csv_path))
        assert code == 0
        assert csv_path.read_text().splitlines()[0] == "index,coord,value"


class TestOperators:
    def test_maxop_pipeline(self, tmp_path, capsys):
        src = tmp_path / "f.gfn"
        out = tmp_path / "Mf.gfn"
        run(capsys, "gen", "--symbol", "bump", "--domain=-1:1",
            "--cells", "64", "-o", str(src))
        code, text, _ = run(capsys, "maxop", "--gamma", "0.5",
                            "--scales", "dyadic", "-i", str(src),
                            "-o", str(out))
        assert code == 0
        f, _ = read_gfn(out)
        assert np.all(f.samples >= 0)

    def test_comm_kinds(self, tmp_path, capsys):
        b = tmp_path / "b.gfn"
        f = tmp_path / "f.gfn"
        run(capsys, "gen", "--symbol", "lip_pos", "--cells", "32",
            "-o", str(b))
        run(capsys, "gen", "--symbol", "bump", "--cells", "32", "-o", str(f))
        for kind in ("nonlinear", "maximal"):
            out = tmp_path / f"{kind}.gfn"
            code, _, _ = run(capsys, "comm", "--kind", kind,
                             "--alpha", "0.25", "-b", str(b), "-i", str(f),
                             "-o", str(out))
            assert code == 0

    def test_fast_mode(self, tmp_path, capsys):
        b = tmp_path / "b.gfn"
        f = tmp_path / "f.gfn"
        run(capsys, "gen", "--symbol", "random_lipschitz", "--cells", "32",
            "-o", str(b))
        run(capsys, "gen", "--symbol", "bump", "--cells", "32", "-o", str(f))
        out_b = tmp_path / "brute.gfn"
        out_f = tmp_path / "fast.gfn"
        run(capsys, "comm", "--kind", "maximal", "--alpha", "0.1",
            "--mode", "brute", "-b", str(b), "-i", str(f), "-o", str(out_b))
        run(capsys, "comm", "--kind", "maximal", "--alpha", "0.1",
            "--mode", "fast", "-b", str(b), "-i", str(f), "-o", str(out_f))
        fb, _ = read_gfn(out_b)
        ff, _ = read_gfn(out_f)
        np.testing.assert_allclose(ff.samples, fb.samples, rtol=1e-10)


class TestNorm:
    def test_unit_indicator(self, tmp_path, capsys):
        path = tmp_path / "chi.gfn"
        run(capsys, "gen", "--symbol", "const:1", "--domain=0:1",
            "--cells", "16", "-o", str(path))
        code, out, _ = run(capsys, "norm", "--exponent", "const:2",
                           "-i", str(path))
        assert code == 0
        payload = json.loads(out)
        assert payload["value"] == pytest.approx(1.0, abs=1e-9)
        assert payload["modular_at_value"] <= 1 + 1e-9

    def test_bad_exponent_spec(self, tmp_path, capsys):
        path = tmp_path / "f.gfn"
        run(capsys, "gen", "--symbol", "step", "-o", str(path))
        code, _, err = run(capsys, "norm", "--exponent", "huh", "-i",
                           str(path))
        assert code == 2


class TestFunctional:
    def test_constant_symbol_sup_zero(self, tmp_path, capsys):
        path = tmp_path / "c.gfn"
        run(capsys, "gen", "--symbol", "const:2", "--cells", "32",
            "-o", str(path))
        code, out, _ = run(capsys, "functional", "--kind", "bmo",
                           "--s", "const:1", "-b", str(path))
        assert code == 0
        payload = json.loads(out)
        assert payload["sup_value"] <= 1e-12

    def test_dump_cubes(self, tmp_path, capsys):
        path = tmp_path / "b.gfn"
        cubes = tmp_path / "cubes.csv"
        run(capsys, "gen", "--symbol", "lip_signed", "--cells", "16",
            "-o", str(path))
        code, out, _ = run(capsys, "functional", "--kind", "mc-lip",
                           "--beta", "0.5", "--s", "const:1",
                           "-b", str(path), "--dump-cubes", str(cubes))
        assert code == 0
        lines = cubes.read_text().splitlines()
        assert lines[0] == "side,anchor,value"
        assert len(lines) == 1 + sum(16 - s + 1 for s in (1, 2, 4, 8, 16))

    def test_invalid_parameters_name_the_precondition(self, tmp_path, capsys):
        path = tmp_path / "b.gfn"
        run(capsys, "gen", "--symbol", "lip_pos", "--cells", "16",
            "-o", str(path))
        code, _, err = run(capsys, "functional", "--kind", "nc-lip",
                           "--alpha", "0.7", "--beta", "0.5",
                           "-b", str(path))
        assert code == 2
        assert "alpha + beta" in err


class TestCheck:
    def test_cube_lemma(self, capsys):
        code, out, _ = run(capsys, "check", "--name", "cube-lemma",
                           "--cells", "64", "--pairs", "5")
        assert code == 0
        payload = json.loads(out)
        assert all(rec["pass"] for rec in payload)

    def test_ef_balance_with_symbol(self, capsys):
        code, out, _ = run(capsys, "check", "--name", "ef-balance",
                           "--symbol", "bmo_signed", "--cells", "64")
        assert code == 0

    def test_unknown_name_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["check", "--name", "nonsense"])
        assert exc.value.code == 2

    def test_unknown_flag_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["gen", "--wat", "1"])
        assert exc.value.code == 2


class TestVerify:
    def test_small_config(self, tmp_path, capsys):
        config = tmp_path / "suite.toml"
        config.write_text("""
[domain]
cells = 32

[[experiment]]
kind = "ef-balance"
symbols = ["step", "lip_signed"]
""")
        report = tmp_path / "report.json"
        code, out, _ = run(capsys, "verify", "--config", str(config),
                           "--report", str(report))
        assert code == 0
        data = json.loads(report.read_text())
        assert all(r["pass"] for r in data)

    def test_config_error_exit_2(self, tmp_path, capsys):
        config = tmp_path / "broken.toml"
        config.write_text("[[experiment]]\nkind = 'frobnicate'\n")
        code, _, err = run(capsys, "verify", "--config", str(config))
        assert code == 2 and "config error" in err

    def test_missing_config_exit_2(self, tmp_path, capsys):
        code, _, err = run(capsys, "verify", "--config",
                           str(tmp_path / "nope.toml"))
        assert code == 2


class Test2D:
    def test_gen_and_functional_2d(self, tmp_path, capsys):
        path = tmp_path / "b2.gfn"
        code, out, _ = run(capsys, "gen", "--symbol", "lip_pos", "--dim", "2",
                           "--domain=-1:1", "--cells", "8", "-o", str(path))
        assert code == 0
        assert json.loads(out)["cells"] == [8, 8]
        code, out, _ = run(capsys, "functional", "--kind", "mc-bmo",
                           "--s", "const:1", "-b", str(path))
        assert code == 0
        payload = json.loads(out)
        assert payload["sup_value"] > 0
        assert len(payload["argmax"]["anchor"]) == 2

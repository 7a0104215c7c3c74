"""Config parsing, command driver, exit codes, and output determinism."""

import math

import numpy as np
import pytest

from pinchlab.cli import main, parse_eta
from pinchlab.configfile import parse_config, parse_grid
from pinchlab.errors import ValidationError
from pinchlab.geometry import build_chain

BASE_CFG = """
[family]
n_components = 2

[density.alpha]
fat.0 = 2.0
fat.1 = -2.0

[density.beta]
fat.0 = 2.0
fat.1 = -2.0

[solver]
resolution = 24
m_max = 4
k_per_mode = 16
seed = 99

[sweep]
L = 80
L_grid = 50, 80, 120, 200
fit_window = 50, 200

[output]
directory = {out}
precision = 17
"""


def write_cfg(tmp_path, text=None, name="exp.cfg"):
    out = tmp_path / "out"
    path = tmp_path / name
    path.write_text((text or BASE_CFG).format(out=out))
    return str(path), out


class TestConfigParsing:
    def test_round_trip_values(self):
        cfg = parse_config(BASE_CFG.format(out="out"))
        fam = cfg.family()
        assert fam.n_components == 2
        assert cfg.get_int("solver", "resolution") == 24
        np.testing.assert_allclose(cfg.get_grid("sweep", "L_grid"),
                                   [50, 80, 120, 200])

    def test_geometric_grid(self):
        grid = parse_grid("50:200:3")
        np.testing.assert_allclose(grid, [50, 100, 200])

    def test_unknown_section_rejected(self):
        with pytest.raises(ValidationError, match="unknown section"):
            parse_config("[banana]\nx = 1\n")

    def test_unknown_key_rejected(self):
        with pytest.raises(ValidationError, match="unknown key"):
            parse_config("[family]\nn_components = 2\ncolor = red\n")

    def test_duplicate_key_rejected(self):
        with pytest.raises(ValidationError, match="duplicate"):
            parse_config("[family]\nn_components = 2\nn_components = 3\n")

    def test_density_builder(self):
        cfg = parse_config(BASE_CFG.format(out="out"))
        chain = build_chain(cfg.family(), 80.0, resolution=16)
        dens = cfg.density_builder("alpha")(chain)
        np.testing.assert_allclose(dens.component_integrals, [1.0, -1.0],
                                   atol=1e-12)

    def test_hash_ignores_formatting(self):
        a = parse_config("[family]\nn_components = 2\n")
        b = parse_config("# comment\n[family]\nn_components = 2\n\n")
        assert a.hash() == b.hash()

    def test_missing_seed_detected(self):
        cfg = parse_config("[solver]\nresolution = 16\n")
        with pytest.raises(ValidationError, match="seed"):
            cfg.require_seed()


class TestEtaParsing:
    def test_constant(self):
        eta = parse_eta("22:1:0,0,0,0")
        assert eta.evaluate(2, 2, 0.3, 0.1) == pytest.approx(1.0)

    def test_multi_term(self):
        eta = parse_eta("22:1:0,0,0,0;11:0.5:0,0,0,0")
        assert eta.evaluate(1, 1, 0.0, 0.0) == pytest.approx(0.5)

    def test_bad_slot(self):
        with pytest.raises(ValidationError):
            parse_eta("33:1:0,0,0,0")

    def test_non_hermitian(self):
        with pytest.raises(ValidationError, match="Hermitian"):
            parse_eta("12:1:1,0,0,0")


class TestCommands:
    def test_kodaira(self, capsys):
        assert main(["kodaira", "--type", "I_4"]) == 0
        out = capsys.readouterr().out
        assert "pseudoinverse" in out and "passed=True" in out

    def test_kodaira_unknown_type(self, capsys):
        assert main(["kodaira", "--type", "X_9"]) == 2

    def test_spectrum_columns(self, tmp_path):
        cfg_path, out = write_cfg(tmp_path)
        assert main(["spectrum", "--config", cfg_path]) == 0
        text = (out / "spectrum.csv").read_text()
        header = [l for l in text.splitlines() if not l.startswith("#")][0]
        assert header == "L,s,k,m,lambda,lambda_times_L,gap,certified"

    def test_pairing_summary(self, tmp_path, capsys):
        cfg_path, out = write_cfg(tmp_path)
        assert main(["pairing", "--config", cfg_path]) == 0
        stdout = capsys.readouterr().out
        assert "c_fit=" in stdout and "c_predicted=" in stdout
        text = (out / "pairing.csv").read_text()
        assert "L,s,value,fitted,residual" in text

    def test_pairing_deterministic_bytes(self, tmp_path):
        cfg_path, out = write_cfg(tmp_path)
        main(["pairing", "--config", cfg_path])
        first = (out / "pairing.csv").read_bytes()
        main(["pairing", "--config", cfg_path])
        assert (out / "pairing.csv").read_bytes() == first

    def test_unprojected_density_exits_2(self, tmp_path, capsys):
        text = BASE_CFG.replace("fat.0 = 2.0\nfat.1 = -2.0",
                                "fat.0 = 2.0\nproject = false", 1)
        cfg_path, _ = write_cfg(tmp_path, text)
        assert main(["pairing", "--config", cfg_path]) == 2
        err = capsys.readouterr().err
        assert "general fibers" in err

    def test_verify_missing_seed_exits_2(self, tmp_path):
        cfg_path, _ = write_cfg(tmp_path, "[solver]\nresolution = 16\n"
                                          "[output]\ndirectory = {out}\n")
        assert main(["verify", "--config", cfg_path]) == 2

    def test_model_validity_error_exits_2(self, tmp_path, capsys):
        cfg_path, _ = write_cfg(tmp_path)
        assert main(["spectrum", "--config", cfg_path, "--L", "3"]) == 2
        assert "model validity" in capsys.readouterr().err

    def test_node_integral_inline_eta(self, tmp_path, capsys):
        cfg_path, out = write_cfg(tmp_path)
        rc = main(["node-integral", "--config", cfg_path,
                   "--eta", "22:1:0,0,0,0", "--t-grid", "1e-6:1e-2:7"])
        assert rc == 0
        stdout = capsys.readouterr().out
        a_fit = float([l for l in stdout.splitlines() if "A_fit" in l][0]
                      .split()[0].split("=")[1])
        assert a_fit == pytest.approx(math.pi, rel=0.01)

    def test_green_csv(self, tmp_path):
        cfg_path, out = write_cfg(tmp_path)
        assert main(["green", "--config", cfg_path,
                     "--L-grid", "30,60,120"]) == 0
        text = (out / "green.csv").read_text()
        assert "green_min" in text
        rows = [l for l in text.splitlines() if not l.startswith("#")][1:]
        assert len(rows) == 3

    def test_dynamics_growth(self, tmp_path, capsys):
        cfg = """
[dynamics]
t_poly = 0, 1
s0 = 1
fiber_n = 32
n_list = 64, 256

[solver]
seed = 1

[output]
directory = {out}
"""
        cfg_path, out = write_cfg(tmp_path, cfg)
        assert main(["dynamics", "growth", "--config", cfg_path]) == 0
        stdout = capsys.readouterr().out
        assert "exponent=2.000" in stdout

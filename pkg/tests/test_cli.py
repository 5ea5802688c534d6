import os

import numpy as np
import pytest

from semiproj import cli, experiments, io
from semiproj.grid import Grid
from semiproj.phasespace import coherent_projector

HARMONIC = """
family = "harmonic"
[sweep]
n = [4, 8, 16]
"""

SCHRODINGER = """
family = "schrodinger"
[sweep]
hbar = [0.2, 0.1, 0.05, 0.025]
[grid]
half_width = 6.0
points = 256
[potential]
type = "bump"
radius = 3.0
[[trend]]
s = 0.5
p = 2
"""


def fake_result(ok=True, family="schrodinger", name="fake"):
    v = experiments.Verdict("check", "statement", "pass" if ok else "fail")
    return experiments.SweepResult(family, name, [{"hbar": 0.1, "value": 1.0}], {}, [v], {})


@pytest.fixture
def fake_layer(monkeypatch):
    calls = {}

    def record(name, ok=True):
        def fn(cfg, *args, **kw):
            calls.setdefault(name, []).append((cfg, args, kw))
            return fake_result(ok, cfg.family, f"fake_{name}")
        return fn

    monkeypatch.setattr(experiments, "weyl_law_sweep", record("weyl"))
    monkeypatch.setattr(experiments, "harmonic_sweep", record("harmonic"))
    monkeypatch.setattr(experiments, "regularity_trend", record("trend"))
    monkeypatch.setattr(experiments, "audit_family", record("audit"))
    return calls


def write(tmp_path, text, name="cfg.toml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_schrodinger_ok(tmp_path, fake_layer, capsys):
    cfg = write(tmp_path, SCHRODINGER)
    out = tmp_path / "out"
    assert cli.run(["schrodinger", "--config", cfg, "--output-dir", str(out)]) == 0
    assert len(fake_layer["weyl"]) == 1 and len(fake_layer["trend"]) == 1
    text = capsys.readouterr().out
    assert "[PASS] check" in text
    assert len(list(out.glob("schrodinger_fake_*.csv"))) == 2
    assert len(list(out.glob("schrodinger_fake_*.json"))) == 2


def test_failed_check_exits_one(tmp_path, monkeypatch):
    monkeypatch.setattr(experiments, "run_sweep", lambda cfg: [fake_result(False)])
    cfg = write(tmp_path, SCHRODINGER)
    assert cli.run(["sweep", "--config", cfg, "--output-dir", str(tmp_path)]) == 1


def test_runtime_failure_exits_one(tmp_path, monkeypatch, capsys):
    def boom(cfg):
        raise MemoryError("too big")
    monkeypatch.setattr(experiments, "run_sweep", boom)
    cfg = write(tmp_path, SCHRODINGER)
    assert cli.run(["sweep", "--config", cfg, "--output-dir", str(tmp_path)]) == 1
    assert "too big" in capsys.readouterr().err


def test_missing_key_names_key(tmp_path, fake_layer, capsys):
    cfg = write(tmp_path, 'family = "schrodinger"\n[sweep]\nhbar = [0.2, 0.1, 0.02]\n')
    assert cli.run(["schrodinger", "--config", cfg, "--output-dir", str(tmp_path)]) == 2
    assert "potential" in capsys.readouterr().err
    cfg = write(tmp_path, SCHRODINGER.replace("s = 0.5\n", ""), "b.toml")
    assert cli.run(["sweep", "--config", cfg, "--output-dir", str(tmp_path)]) == 2
    assert "trend[0].s" in capsys.readouterr().err


def test_sweep_requires_family(tmp_path, capsys):
    cfg = write(tmp_path, "[sweep]\nn = [1, 2, 3]\n")
    assert cli.run(["sweep", "--config", cfg]) == 2
    assert "family" in capsys.readouterr().err


def test_usage_errors(tmp_path, capsys):
    assert cli.run([]) == 2
    assert cli.run(["bogus"]) == 2
    assert cli.run(["schrodinger"]) == 2
    assert cli.run(["schrodinger", "--config", str(tmp_path / "missing.toml")]) == 2
    bad = write(tmp_path, "family = [unclosed")
    assert cli.run(["schrodinger", "--config", bad]) == 2
    assert cli.run(["harmonic", "--threads", "0"]) == 2
    assert "does not parse" in capsys.readouterr().err


def test_output_dir_env(tmp_path, fake_layer, monkeypatch):
    target = tmp_path / "env_out"
    monkeypatch.setenv("SRL_OUTPUT_DIR", str(target))
    assert cli.run(["harmonic", "--config", write(tmp_path, HARMONIC)]) == 0
    assert list(target.glob("harmonic_fake_*.csv"))
    # an explicit flag wins over the environment
    flag = tmp_path / "flag_out"
    assert cli.run(["harmonic", "--output-dir", str(flag)]) == 0
    assert list(flag.glob("*.csv"))


def test_output_dir_precedence(tmp_path, monkeypatch):
    monkeypatch.setenv("SRL_OUTPUT_DIR", str(tmp_path / "env"))
    assert cli.resolve_output_dir(None, {"output": {"dir": str(tmp_path / "cfg")}}) == tmp_path / "cfg"
    assert cli.resolve_output_dir(None, {}) == tmp_path / "env"
    monkeypatch.delenv("SRL_OUTPUT_DIR")
    assert str(cli.resolve_output_dir(None, {})) == "."


@pytest.mark.skipif(os.geteuid() == 0, reason="root ignores directory permissions")
def test_unwritable_output(tmp_path):
    ro = tmp_path / "ro"
    ro.mkdir()
    ro.chmod(0o500)
    with pytest.raises(cli.UsageError):
        cli.resolve_output_dir(str(ro))


def test_unwritable_output_is_usage_error(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert cli.run(["harmonic", "--output-dir", str(blocker / "sub")]) == 2
    assert "not writable" in capsys.readouterr().err


def test_harmonic_n_and_threads(tmp_path, fake_layer):
    assert cli.run(["harmonic", "--n", "2", "4", "8", "--threads", "3",
                    "--output-dir", str(tmp_path)]) == 0
    cfg = fake_layer["harmonic"][0][0]
    assert cfg.params == (2, 4, 8) and cfg.threads == 3


def test_audit_passes_level(tmp_path, fake_layer):
    cfg = write(tmp_path, HARMONIC)
    assert cli.run(["audit", "--config", cfg, "--n", "12", "--output-dir", str(tmp_path)]) == 0
    _, _, kw = fake_layer["audit"][0]
    assert kw == {"n": 12, "hbar": 0.05}


def test_transform_ground_state(tmp_path, capsys):
    hbar = 1.0
    op = coherent_projector(Grid(12.0, 256), hbar)
    src = tmp_path / "op.bin"
    io.write_operator_bin(op, src)
    assert cli.run(["transform", "--wigner", "--input", str(src), "--output-dir", str(tmp_path)]) == 0
    out = tmp_path / "op_wigner.csv"
    data = np.loadtxt(out, delimiter=",", comments="#", skiprows=3)
    x, xi, val = data.T
    assert np.abs(val - 2 * np.exp(-(x**2 + xi**2) / hbar)).max() <= 1e-6

    assert cli.run(["transform", "--husimi", "--input", str(src), "--format", "bin",
                    "--output-dir", str(tmp_path)]) == 0
    hu = io.read_phase_field_bin(tmp_path / "op_husimi.bin")
    X, XI = hu.mesh()
    assert np.abs(hu.values - np.exp(-(X**2 + XI**2) / (2 * hbar))).max() <= 1e-5

    assert cli.run(["transform", "--wigner", "--input", str(src), "--format", "bin",
                    "--output", "w.bin", "--output-dir", str(tmp_path)]) == 0
    assert cli.run(["transform", "--weyl", "--input", str(tmp_path / "w.bin"),
                    "--output-dir", str(tmp_path)]) == 0
    back = io.read_operator_bin(tmp_path / "w_weyl.bin")
    assert np.abs(back.weighted() - op.weighted()).max() <= 1e-8


def test_transform_errors(tmp_path):
    assert cli.run(["transform", "--wigner", "--input", str(tmp_path / "nope.bin")]) == 2
    bad = tmp_path / "bad.bin"
    bad.write_bytes(b"xx")
    assert cli.run(["transform", "--wigner", "--input", str(bad), "--output-dir", str(tmp_path)]) == 2
    assert cli.run(["transform", "--input", str(bad)]) == 2


def test_main_exit_code(monkeypatch):
    monkeypatch.setattr("sys.argv", ["semiproj"])
    with pytest.raises(SystemExit) as e:
        cli.main()
    assert e.value.code == 2

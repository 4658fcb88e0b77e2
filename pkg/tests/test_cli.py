import json

import numpy as np
import pytest

from phaseshadow import Dimensions, direct_sum, random_symplectic, save_matrix_text
from phaseshadow.cli import main


BASE_CONFIG = """
# two coupled unit oscillators
system.n_a = 1
system.n_b = 1
system.hbar = 1.0

hamiltonian.model = coupled_oscillators
hamiltonian.epsilon = {epsilon}

initial.z0 = 1.0 0.0 0.0 0.0
initial.radius = 1.0

integration.t_end = {t_end}
integration.step = {step}
integration.scheme = rk4

output.format = {fmt}
output.path = {path}
output.stride = {stride}
"""


def write_config(tmp_path, name="run.cfg", epsilon=0.2, t_end=20.0, step=0.01,
                 fmt="csv", out="trace.csv", stride=10, extra=""):
    path = tmp_path / name
    out_path = tmp_path / out
    path.write_text(
        BASE_CONFIG.format(epsilon=epsilon, t_end=t_end, step=step, fmt=fmt,
                           path=out_path, stride=stride) + extra
    )
    return path, out_path


def read_csv(path):
    lines = [l for l in path.read_text().splitlines() if l and not l.startswith("#")]
    header = lines[0].split(",")
    data = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    return header, data


def test_run_uncoupled_purity_one(tmp_path):
    cfg, out = write_config(tmp_path, epsilon=0.0, t_end=5.0)
    assert main(["run", "--config", str(cfg)]) == 0
    header, data = read_csv(out)
    mu = data[:, header.index("purity")]
    ent = data[:, header.index("entropy_kB")]
    assert np.abs(mu - 1.0).max() <= 1e-8
    assert np.abs(ent).max() <= 1e-8


def test_run_coupled_purity_dips(tmp_path):
    cfg, out = write_config(tmp_path, epsilon=0.2, t_end=20.0)
    assert main(["run", "--config", str(cfg)]) == 0
    header, data = read_csv(out)
    mu = data[:, header.index("purity")]
    assert mu.min() < 1.0 - 1e-3
    cap = data[:, header.index("capacity")]
    assert cap.min() >= np.pi - 1e-9


def test_run_header_layout(tmp_path):
    cfg, out = write_config(tmp_path, t_end=1.0)
    main(["run", "--config", str(cfg)])
    header, _ = read_csv(out)
    assert header == [
        "t", "z_0", "z_1", "z_2", "z_3", "purity", "entropy_kB",
        "capacity", "lambda_1", "volume_ratio", "symplecticity_defect",
    ]


def test_run_deterministic(tmp_path):
    cfg1, out1 = write_config(tmp_path, name="a.cfg", out="a.csv", t_end=2.0)
    cfg2, out2 = write_config(tmp_path, name="b.cfg", out="b.csv", t_end=2.0)
    assert main(["run", "--config", str(cfg1), "--seed", "5"]) == 0
    assert main(["run", "--config", str(cfg2), "--seed", "5"]) == 0
    assert out1.read_bytes().replace(b"a.csv", b"") == out2.read_bytes().replace(b"b.csv", b"")


def test_run_jsonl_schema(tmp_path):
    cfg, out = write_config(tmp_path, fmt="jsonl", out="trace.jsonl", t_end=1.0)
    assert main(["run", "--config", str(cfg)]) == 0
    records = [json.loads(line) for line in out.read_text().splitlines()]
    assert all(r["schema_version"] == 1 for r in records)
    assert records[0]["purity"] == pytest.approx(1.0, abs=1e-12)
    assert "z_0" in records[0]


def test_run_fields_subset(tmp_path):
    cfg, out = write_config(tmp_path, t_end=1.0, extra="output.fields = t purity\n")
    assert main(["run", "--config", str(cfg)]) == 0
    header, data = read_csv(out)
    assert header == ["t", "purity"]
    assert data.shape[1] == 2


def test_run_output_override(tmp_path):
    cfg, _ = write_config(tmp_path, t_end=1.0)
    target = tmp_path / "elsewhere.csv"
    assert main(["run", "--config", str(cfg), "--output", str(target)]) == 0
    assert target.exists()


def test_run_missing_field_exit_2(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("system.n_b = 1\nhamiltonian.model = coupled_oscillators\n")
    assert main(["run", "--config", str(cfg)]) == 2
    err = capsys.readouterr().err
    assert "system.n_a" in err


def test_run_bad_value_exit_2(tmp_path, capsys):
    cfg, _ = write_config(tmp_path, t_end=1.0, extra="integration.scheme = euler\n")
    # duplicate key is itself an error
    assert main(["run", "--config", str(cfg)]) == 2
    assert "duplicate" in capsys.readouterr().err

    cfg2 = tmp_path / "bad2.cfg"
    cfg2.write_text(BASE_CONFIG.format(
        epsilon=0.2, t_end=1.0, step=0.01, fmt="csv",
        path=tmp_path / "x.csv", stride=10).replace("rk4", "euler"))
    assert main(["run", "--config", str(cfg2)]) == 2
    assert "integration.scheme" in capsys.readouterr().err


def test_run_unknown_model_exit_2(tmp_path, capsys):
    cfg, _ = write_config(tmp_path, t_end=1.0)
    text = cfg.read_text().replace("coupled_oscillators", "pendulum")
    cfg.write_text(text)
    assert main(["run", "--config", str(cfg)]) == 2
    assert "hamiltonian.model" in capsys.readouterr().err


def test_run_divergence_exit_3(tmp_path, capsys):
    # coupling far above the mode frequencies inverts the potential, so the
    # orbit grows like e^{3t} and overflows the float range near t ~ 236
    cfg = tmp_path / "div.cfg"
    out = tmp_path / "div.csv"
    cfg.write_text(
        "system.n_a = 1\nsystem.n_b = 1\n"
        "hamiltonian.model = coupled_oscillators\n"
        "hamiltonian.epsilon = 10.0\n"
        "initial.z0 = 1.0 0.0 0.0 0.0\n"
        "integration.t_end = 400.0\nintegration.step = 0.01\n"
        f"output.path = {out}\n"
    )
    code = main(["run", "--config", str(cfg)])
    assert code == 3
    assert "divergence" in capsys.readouterr().err
    text = out.read_text()
    assert "# status=divergence" in text
    assert len(text.splitlines()) > 10  # partial records were flushed


def test_run_sweep_jobs(tmp_path):
    cfg, out = write_config(
        tmp_path, t_end=2.0,
        extra="sweep.field = hamiltonian.epsilon\nsweep.values = 0.0 0.1 0.2\n",
    )
    assert main(["run", "--config", str(cfg), "--jobs", "2"]) == 0
    for i in range(3):
        assert (tmp_path / f"trace_{i}.csv").exists()
    header, data0 = read_csv(tmp_path / "trace_0.csv")
    mu0 = data0[:, header.index("purity")]
    assert np.abs(mu0 - 1.0).max() <= 1e-8  # epsilon = 0 member


def test_project_identity(tmp_path, capsys):
    path = tmp_path / "eye.txt"
    save_matrix_text(path, np.eye(4))
    assert main(["project", str(path), "--n-a", "1", "--n-b", "1"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["spectrum"] == [pytest.approx(1.0, abs=1e-12)]
    assert report["entropy_kB"] == pytest.approx(0.0, abs=1e-12)
    assert report["containment"] is True


def test_project_direct_sum_volume_one(tmp_path, capsys):
    rng = np.random.default_rng(0)
    s = direct_sum(random_symplectic(1, rng), random_symplectic(1, rng))
    path = tmp_path / "s.txt"
    save_matrix_text(path, s)
    assert main(["project", str(path), "--n-a", "1", "--n-b", "1"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["volume_ratio"] == pytest.approx(1.0, abs=1e-9)


def test_project_non_symplectic_exit_4(tmp_path, capsys):
    path = tmp_path / "bad.txt"
    save_matrix_text(path, 2.0 * np.eye(4))
    assert main(["project", str(path), "--n-a", "1", "--n-b", "1"]) == 4
    assert "defect" in capsys.readouterr().err


def test_williamson_report(tmp_path, capsys):
    path = tmp_path / "m.txt"
    save_matrix_text(path, np.eye(4))
    assert main(["williamson", str(path)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["spectrum"] == [pytest.approx(1.0), pytest.approx(1.0)]
    assert report["reconstruction_residual"] <= 1e-12


def test_williamson_non_spd_exit_4(tmp_path, capsys):
    path = tmp_path / "m.txt"
    save_matrix_text(path, np.diag([1.0, -1.0]))
    assert main(["williamson", str(path)]) == 4
    assert "positive definite" in capsys.readouterr().err


def test_capacity_report(tmp_path, capsys):
    path = tmp_path / "m.txt"
    save_matrix_text(path, np.diag([1.0, 4.0]))
    assert main(["capacity", str(path), "--radius", "1.0"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["capacity"] == pytest.approx(np.pi / 2.0, rel=1e-12)
    assert report["lambda_max"] == pytest.approx(2.0, abs=1e-12)


def test_capacity_non_spd_exit_4(tmp_path, capsys):
    path = tmp_path / "m.txt"
    save_matrix_text(path, np.array([[1.0, 0.7], [0.2, 1.0]]))
    assert main(["capacity", str(path)]) == 4
    assert "symmetric" in capsys.readouterr().err

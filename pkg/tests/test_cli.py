import io
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pairsqueeze import cli, interaction
from pairsqueeze.interaction import QubitPairState


def report(text):
    return dict(line.split(" = ", 1) for line in text.strip().splitlines())


@given(st.complex_numbers(allow_nan=False, allow_infinity=False))
def test_complex_round_trip(z):
    assert cli.parse_complex(cli.format_complex(z)) == z


@pytest.mark.parametrize(
    "text,value",
    [("0.5+0.25i", 0.5 + 0.25j), ("1", 1), ("-2i", -2j), ("i", 1j), ("1e-3-4e-1i", 1e-3 - 0.4j), (" 3 - 1i ", 3 - 1j)],
)
def test_parse_complex_examples(text, value):
    assert cli.parse_complex(text) == value


def test_parse_complex_rejects_garbage():
    with pytest.raises(cli.ConfigError):
        cli.parse_complex("abc")


def test_read_config_text():
    raw = cli.read_config_text("# comment\nmode = predict\n\ntheta=0.1  # inline\nrecord-every = 3\n")
    assert raw == {"mode": "predict", "theta": "0.1", "record_every": "3"}
    with pytest.raises(cli.ConfigError):
        cli.read_config_text("nonsense line")
    with pytest.raises(cli.ConfigError):
        cli.read_config_text("colour = blue")


def test_parse_config_validation():
    with pytest.raises(cli.ConfigError):
        cli.parse_config({"mode": "dance"})
    with pytest.raises(cli.ConfigError):
        cli.parse_config({"mode": "predict"})
    with pytest.raises(cli.ConfigError):
        cli.parse_config({"mode": "simulate", "theta": "0.1", "steps": "0"})
    with pytest.raises(cli.ConfigError):
        cli.parse_config({"mode": "predict", "theta": "-1"})
    cfg = cli.parse_config({"mode": "predict", "theta": "0.1", "alpha": "1+2i"})
    assert cfg["alpha"] == 1 + 2j and cfg["dim"] == 60


def test_predict_alternating(capsys):
    code = cli.main(["--mode", "predict", "--pair", "alternating", "--u", "0.2", "--theta", "0.1"])
    assert code == 0
    values = report(capsys.readouterr().out)
    assert float(values["r"]) == pytest.approx(math.atanh(math.tan(0.2) ** 2))
    assert float(values["kappa"]) == pytest.approx(2 * 0.01 * math.cos(0.4))
    assert cli.parse_complex(values["alpha"]) == 0
    assert values["classification"] == "separable"


def test_simulate_zero_steps_is_validation_error(capsys):
    code = cli.main(["--mode", "simulate", "--theta", "0.1", "--pair", "alternating", "--u", "0.2", "--steps", "0"])
    assert code == cli.EXIT_VALIDATION
    assert "steps" in capsys.readouterr().err


def test_unknown_mode_exits_with_validation_code():
    with pytest.raises(SystemExit) as info:
        cli.main(["--mode", "dance"])
    assert info.value.code == cli.EXIT_VALIDATION


def test_missing_pair_amplitudes(capsys):
    assert cli.main(["--mode", "predict", "--theta", "0.1"]) == cli.EXIT_VALIDATION


def test_numeric_failure_exit_code(capsys):
    args = ["--mode", "simulate", "--theta", "0.8", "--dim", "4", "--initial", "fock:3", "--steps", "2"]
    args += ["--beta-gg", "0", "--beta-ge", "0", "--beta-eg", "0", "--beta-ee", "1"]
    assert cli.main(args) == cli.EXIT_NUMERIC


def test_io_failure_exit_code(tmp_path):
    out = tmp_path / "missing" / "out.txt"
    code = cli.main(["--mode", "predict", "--pair", "alternating", "--u", "0.2", "--theta", "0.1", "--out", str(out)])
    assert code == cli.EXIT_IO
    assert cli.main(["--config", str(tmp_path / "nope.cfg")]) == cli.EXIT_IO


def test_config_file_and_override(tmp_path, capsys):
    config = tmp_path / "run.cfg"
    config.write_text("mode = predict\npair = alternating\nu = 0.2\ntheta = 0.1\n")
    assert cli.main(["--config", str(config)]) == 0
    base = report(capsys.readouterr().out)
    assert cli.main(["--config", str(config), "--theta", "0.05"]) == 0
    override = report(capsys.readouterr().out)
    assert float(override["kappa"]) == pytest.approx(float(base["kappa"]) / 4)


def test_simulate_csv_schema_and_round_trip(tmp_path):
    out = tmp_path / "traj.csv"
    args = ["--mode", "simulate", "--theta", "0.1", "--pair", "identical", "--u", "0.05"]
    args += ["--steps", "120", "--record-every", "40", "--dim", "30", "--out", str(out)]
    assert cli.main(args) == 0
    text = out.read_text()
    assert text.splitlines()[0] == ",".join(cli.CSV_HEADER)
    columns = cli.read_trajectory_csv(io.StringIO(text))
    assert list(columns["step"]) == [0, 40, 80, 120]
    buffer = io.StringIO()
    traj = interaction.Trajectory(
        steps=columns["step"],
        taus=columns["tau"],
        states=(),
        diagnostics={k: columns[k] for k in interaction.DIAGNOSTIC_KEYS},
        final_state=np.zeros((1, 1)),
    )
    cli.write_trajectory_csv(traj, buffer)
    assert buffer.getvalue() == text


def test_trajectory_values_survive_serialization():
    pair = QubitPairState.alternating(0.2)
    traj = interaction.simulate(np.eye(1, 20, 0)[0], pair, 0.1, 30, record_every=10, stop_tol=None)
    buffer = io.StringIO()
    cli.write_trajectory_csv(traj, buffer)
    columns = cli.read_trajectory_csv(io.StringIO(buffer.getvalue()))
    for key in ("trace", "leakage", "var_x_min", "var_x_max"):
        assert np.array_equal(columns[key], traj.diagnostics[key])
    assert np.all(np.isnan(columns["dist_to_target"]))


def test_lindblad_engine(tmp_path):
    out = tmp_path / "lind.csv"
    args = ["--mode", "simulate", "--engine", "lindblad", "--theta", "0.1", "--pair", "identical", "--u", "0.05"]
    args += ["--dt", "0.5", "--steps", "20", "--record-every", "10", "--dim", "30", "--out", str(out)]
    assert cli.main(args) == 0
    columns = cli.read_trajectory_csv(io.StringIO(out.read_text()))
    assert list(columns["tau"]) == [0.0, 5.0, 10.0]


def test_wigner_grid_format_and_round_trip(tmp_path):
    out = tmp_path / "w.txt"
    args = ["--mode", "wigner", "--alpha", "0.5+0.5i", "--r", "0.2", "--dim", "30"]
    args += ["--x-min", "-2", "--x-max", "3", "--nx", "6", "--p-min", "-1", "--p-max", "2", "--np", "4", "--out", str(out)]
    assert cli.main(args) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "-2 3 6 -1 2 4"
    assert len(lines) == 7 and all(len(line.split()) == 4 for line in lines[1:])
    x, p, values = cli.read_wigner_grid(io.StringIO(out.read_text()))
    assert np.allclose(x, np.linspace(-2, 3, 6)) and np.allclose(p, np.linspace(-1, 2, 4))
    buffer = io.StringIO()
    cli.write_wigner_grid(x, p, values, buffer)
    assert buffer.getvalue() == out.read_text()


def test_tune_and_scan_modes(capsys):
    assert cli.main(["--mode", "tune", "--theta", "0.05", "--alpha", "0.5", "--r", "0.3", "--phi-r", "1.5707963267948966"]) == 0
    values = report(capsys.readouterr().out)
    assert abs(cli.parse_complex(values["alpha"]) - 0.5) < 1e-3 * 0.5
    assert cli.main(["--mode", "tune", "--theta", "0.05", "--alpha", "0.5", "--r", "0.3", "--phi-r", "1.5707963267948966", "--epsilon", "0.03"]) == 2
    capsys.readouterr()
    assert cli.main(["--mode", "scan-amplitude", "--theta", "0.05", "--epsilon", "0.05", "--mu", "2", "--resolution", "64"]) == 0
    values = report(capsys.readouterr().out)
    assert float(values["margin"]) > 0


def test_qfi_mode_on_extremal_family(capsys):
    args = ["--mode", "qfi", "--pair", "extremal", "--epsilon", "0.05", "--mu", "2", "--theta", "0.05", "--n", "100"]
    assert cli.main(args) == 0
    values = report(capsys.readouterr().out)
    assert float(values["entangled_qfi_bound"]) == pytest.approx(1.08)
    j = float(values["rate_adjusted_qfi"])
    assert float(values["cramer_rao_rate_adjusted"]) == pytest.approx(1 / math.sqrt(100 * j))
    assert float(values["qfi"]) == pytest.approx(float(values["qfi_explicit"]), rel=1e-9)


def test_random_initial_state_is_seeded(tmp_path):
    outputs = []
    for name, seed in (("a", "3"), ("b", "3"), ("c", "4")):
        out = tmp_path / f"{name}.csv"
        args = ["--mode", "simulate", "--theta", "0.1", "--pair", "alternating", "--u", "0.2", "--initial", "random"]
        args += ["--seed", seed, "--steps", "5", "--dim", "20", "--out", str(out)]
        assert cli.main(args) == 0
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1] != outputs[2]

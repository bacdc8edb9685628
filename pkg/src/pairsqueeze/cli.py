"""Command-line front end.

Configuration is a flat ``key = value`` text file; every key can also be given
as a ``--key`` flag (underscores become dashes) and flags override the file.
Complex numbers are written ``re+imi``, e.g. ``0.5+0.25i``.

Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 file I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import re
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, TextIO

import numpy as np

from . import design, fock, interaction, lindblad, metrology, squeezing
from .errors import NumericalError, ValidationError

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

MODES = ("simulate", "predict", "tune", "scan-amplitude", "qfi", "wigner")
CSV_HEADER = ("step", "tau", "trace", "leakage", "dist_to_target", "fidelity_to_target", "var_x_min", "var_x_max")


class ConfigError(ValidationError):
    """The configuration is malformed or incomplete."""


def parse_complex(text: str) -> complex:
    """Parse ``re+imi`` notation (also plain reals and ``...j``)."""
    cleaned = text.strip().replace(" ", "")
    if cleaned.endswith("i"):
        cleaned = cleaned[:-1] + "j"
    if cleaned in ("j", "+j", "-j"):
        cleaned = cleaned.replace("j", "1j")
    try:
        return complex(cleaned)
    except ValueError as exc:
        raise ConfigError(f"cannot parse complex number {text!r}") from exc


def format_complex(z: complex) -> str:
    return f"{z.real:.17g}{z.imag:+.17g}i"


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError as exc:
        raise ConfigError(f"expected an integer, got {text!r}") from exc
    return value


def _float(text: str) -> float:
    try:
        return float(text)
    except ValueError as exc:
        raise ConfigError(f"expected a real number, got {text!r}") from exc


# key -> (parser, help)
KEYS: dict[str, tuple[Callable[[str], Any], str]] = {
    "mode": (str, "one of " + ", ".join(MODES)),
    "dim": (_positive_int, "Fock-space truncation (default 60)"),
    "theta": (_float, "interaction angle per qubit"),
    "steps": (_positive_int, "number of pair interactions or integrator steps"),
    "record_every": (_positive_int, "record diagnostics every N steps"),
    "seed": (_positive_int, "seed for the random initial state"),
    "out": (str, "output path (stdout when omitted)"),
    "pair": (str, "custom | alternating | identical | extremal"),
    "beta_gg": (parse_complex, "pair amplitude"),
    "beta_ge": (parse_complex, "pair amplitude"),
    "beta_eg": (parse_complex, "pair amplitude"),
    "beta_ee": (parse_complex, "pair amplitude"),
    "u": (_float, "qubit mixing angle for alternating/identical pairs"),
    "chi": (_float, "qubit phase for identical pairs"),
    "epsilon": (_float, "|beta_ge + beta_eg| for tune, scans and the extremal pair"),
    "mu": (_float, "|beta_gg| / |beta_ee| for scans and the extremal pair"),
    "alpha": (parse_complex, "target displacement"),
    "r": (_float, "target squeeze magnitude"),
    "phi_r": (_float, "target squeeze angle"),
    "initial": (str, "vacuum | fock:N | coherent:Z | random"),
    "engine": (str, "kraus | lindblad"),
    "dt": (_float, "integrator step for the lindblad engine"),
    "channels": (_positive_int, "1 or 3 jump operators for the lindblad engine"),
    "resolution": (_positive_int, "grid points per phase in scans"),
    "n": (_positive_int, "repetitions for the Cramer-Rao bound"),
    "source": (str, "wigner input: target | steady"),
    "x_min": (_float, "wigner grid"),
    "x_max": (_float, "wigner grid"),
    "nx": (_positive_int, "wigner grid"),
    "p_min": (_float, "wigner grid"),
    "p_max": (_float, "wigner grid"),
    "np": (_positive_int, "wigner grid"),
}

DEFAULTS: dict[str, Any] = {
    "dim": fock.DEFAULT_DIM,
    "steps": 10000,
    "record_every": 10,
    "seed": 0,
    "pair": "custom",
    "chi": 0.0,
    "r": 0.0,
    "phi_r": 0.0,
    "alpha": 0j,
    "initial": "vacuum",
    "engine": "kraus",
    "dt": 0.5,
    "channels": 3,
    "resolution": 256,
    "n": 1,
    "source": "target",
    "x_min": -4.0,
    "x_max": 4.0,
    "nx": 81,
    "p_min": -4.0,
    "p_max": 4.0,
    "np": 81,
}

REQUIRED: dict[str, tuple[str, ...]] = {
    "simulate": ("theta",),
    "predict": ("theta",),
    "tune": ("theta",),
    "scan-amplitude": ("theta", "epsilon", "mu"),
    "qfi": ("theta",),
    "wigner": (),
}


def read_config_text(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    raw: dict[str, str] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {number}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in KEYS:
            raise ConfigError(f"line {number}: unknown key {key!r}")
        raw[key] = value
    return raw


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment settings."""

    mode: str
    values: dict[str, Any]

    def __getitem__(self, key: str) -> Any:
        return self.values[key]

    def get(self, key: str, default: Any = None) -> Any:
        return self.values.get(key, default)


def parse_config(raw: dict[str, str]) -> ExperimentConfig:
    """Convert raw strings, apply defaults and check mode requirements."""
    values: dict[str, Any] = dict(DEFAULTS)
    for key, text in raw.items():
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}")
        values[key] = KEYS[key][0](text)
    mode = values.get("mode")
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {', '.join(MODES)}, got {mode!r}")
    missing = [k for k in REQUIRED[mode] if k not in values]
    if missing:
        raise ConfigError(f"mode {mode} requires: {', '.join(missing)}")
    if values["dim"] < 2:
        raise ConfigError("dim must be >= 2")
    if values["steps"] < 1:
        raise ConfigError("steps must be >= 1")
    if values["record_every"] < 1:
        raise ConfigError("record_every must be >= 1")
    if "theta" in values and values["theta"] <= 0:
        raise ConfigError("theta must be positive")
    return ExperimentConfig(mode, values)


def build_pair(cfg: ExperimentConfig) -> interaction.QubitPairState:
    kind = cfg["pair"]
    if kind == "custom":
        keys = ("beta_gg", "beta_ge", "beta_eg", "beta_ee")
        if not all(k in cfg.values for k in keys):
            raise ConfigError("custom pair needs beta_gg, beta_ge, beta_eg and beta_ee")
        return interaction.QubitPairState(*(cfg[k] for k in keys))
    if kind in ("alternating", "identical"):
        if "u" not in cfg.values:
            raise ConfigError(f"{kind} pair needs u")
        if kind == "alternating":
            return interaction.QubitPairState.alternating(cfg["u"])
        return interaction.QubitPairState.identical(cfg["u"], cfg["chi"])
    if kind == "extremal":
        if "epsilon" not in cfg.values or "mu" not in cfg.values:
            raise ConfigError("extremal pair needs epsilon and mu")
        return design.entangled_extremal_pair(cfg["epsilon"], cfg["mu"])
    raise ConfigError(f"unknown pair kind {kind!r}")


def build_initial_state(cfg: ExperimentConfig) -> np.ndarray:
    choice = cfg["initial"]
    dim = cfg["dim"]
    if choice == "vacuum":
        return fock.projector(fock.fock_state(0, dim))
    if choice.startswith("fock:"):
        return fock.projector(fock.fock_state(_positive_int(choice[5:]), dim))
    if choice.startswith("coherent:"):
        return fock.projector(squeezing.coherent_state(parse_complex(choice[9:]), dim))
    if choice == "random":
        rng = np.random.default_rng(cfg["seed"])
        levels = min(6, dim)
        g = rng.normal(size=(levels, levels)) + 1j * rng.normal(size=(levels, levels))
        rho = np.zeros((dim, dim), dtype=complex)
        rho[:levels, :levels] = g @ g.conj().T
        return rho / np.trace(rho).real
    raise ConfigError(f"unknown initial state {choice!r}")


def _target_from(cfg: ExperimentConfig) -> squeezing.SqueezedTarget:
    return squeezing.SqueezedTarget(cfg["alpha"], cfg["r"], cfg["phi_r"])


def write_trajectory_csv(traj: interaction.Trajectory, stream: TextIO) -> None:
    """Write one row per record with 17 significant digits."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    diag = traj.diagnostics
    for i, step in enumerate(traj.steps):
        row = [str(int(step)), f"{traj.taus[i]:.17g}"]
        row += [f"{diag[key][i]:.17g}" for key in CSV_HEADER[2:]]
        writer.writerow(row)


def read_trajectory_csv(stream: TextIO) -> dict[str, np.ndarray]:
    reader = csv.reader(stream)
    header = next(reader)
    if tuple(header) != CSV_HEADER:
        raise ConfigError(f"unexpected trajectory header {header}")
    rows = list(reader)
    columns = {key: np.array([float(r[i]) for r in rows]) for i, key in enumerate(header)}
    columns["step"] = columns["step"].astype(int)
    return columns


def write_wigner_grid(x: np.ndarray, p: np.ndarray, values: np.ndarray, stream: TextIO) -> None:
    """Header ``x_min x_max nx p_min p_max np`` then one row per x value."""
    stream.write(f"{x[0]:.17g} {x[-1]:.17g} {len(x)} {p[0]:.17g} {p[-1]:.17g} {len(p)}\n")
    for row in values:
        stream.write(" ".join(f"{v:.17g}" for v in row) + "\n")


def read_wigner_grid(stream: TextIO) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    head = stream.readline().split()
    x = np.linspace(float(head[0]), float(head[1]), int(head[2]))
    p = np.linspace(float(head[3]), float(head[4]), int(head[5]))
    values = np.array([[float(v) for v in line.split()] for line in stream if line.strip()])
    return x, p, values.reshape(len(x), len(p))


def _format_value(value: Any) -> str:
    if isinstance(value, complex):
        return format_complex(value)
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _report(pairs: list[tuple[str, Any]]) -> str:
    return "".join(f"{k} = {_format_value(v)}\n" for k, v in pairs)


def _run_simulate(cfg: ExperimentConfig) -> str:
    pair = build_pair(cfg)
    theta = cfg["theta"]
    dim = cfg["dim"]
    rho0 = build_initial_state(cfg)
    target = None
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", design.ValidityWarning)
            predicted = design.predict_steady_state(pair, theta)
        target = fock.projector(squeezing.make_state(predicted.predicted_target, dim))
    except ValidationError:
        target = None
    if cfg["engine"] == "kraus":
        traj = interaction.simulate(
            rho0, pair, theta, cfg["steps"], cfg["record_every"], target=target, store_states=False
        )
    elif cfg["engine"] == "lindblad":
        model = lindblad.effective_model(pair, theta, dim, channels=cfg["channels"])
        traj = lindblad.integrate(
            model, rho0, cfg["dt"], cfg["steps"], cfg["record_every"], target=target, store_states=False
        )
    else:
        raise ConfigError(f"unknown engine {cfg['engine']!r}")
    buffer = io.StringIO()
    write_trajectory_csv(traj, buffer)
    return buffer.getvalue()


def _design_report(d: design.ReservoirDesign) -> list[tuple[str, Any]]:
    t = d.predicted_target
    label, conc = design.classify(d.pair)
    return [
        ("r", t.r),
        ("phi_r", t.phi_r),
        ("alpha", t.alpha),
        ("kappa", d.kappa),
        ("epsilon", d.epsilon),
        ("mu", d.mu),
        ("classification", label),
        ("concurrence", conc),
    ]


def _run_predict(cfg: ExperimentConfig) -> str:
    return _report(_design_report(design.predict_steady_state(build_pair(cfg), cfg["theta"])))


def _run_tune(cfg: ExperimentConfig) -> str:
    pair = design.tune_pair_for_target(_target_from(cfg), cfg["theta"], cfg.get("epsilon"))
    check = design.predict_steady_state(pair, cfg["theta"])
    rows = [(f"beta_{k}", getattr(pair, f"beta_{k}")) for k in ("gg", "ge", "eg", "ee")]
    return _report(rows + _design_report(check))


def _run_scan(cfg: ExperimentConfig) -> str:
    scan = design.separable_amplitude_scan(cfg["theta"], cfg["epsilon"], cfg["mu"], cfg["resolution"])
    return _report(
        [
            ("separable_sup", scan.sup),
            ("entangled_bound", scan.bound),
            ("margin", scan.margin),
            ("argmax_phase_difference", scan.argmax["phase_difference"]),
            ("argmax_alignment", scan.argmax["alignment"]),
            ("formula_mismatch", scan.formula_mismatch),
        ]
    )


def _run_qfi(cfg: ExperimentConfig) -> str:
    pair = build_pair(cfg)
    d = design.predict_steady_state(pair, cfg["theta"])
    j_gauss = metrology.qfi_gaussian(metrology.GaussianSummary.from_design(d))
    j_rate = metrology.rate_adjusted_qfi(d)
    rows: list[tuple[str, Any]] = [
        ("qfi", j_gauss),
        ("qfi_explicit", metrology.qfi_explicit(d)),
        ("rate_adjusted_qfi", j_rate),
        ("entangled_qfi_bound", metrology.entangled_qfi_bound(abs(d.epsilon), d.mu)),
    ]
    rows.append(("cramer_rao_qfi", metrology.cramer_rao(j_gauss, cfg["n"]) if j_gauss > 0 else math.inf))
    rows.append(("cramer_rao_rate_adjusted", metrology.cramer_rao(j_rate, cfg["n"]) if j_rate > 0 else math.inf))
    return _report(rows)


def _run_wigner(cfg: ExperimentConfig) -> str:
    dim = cfg["dim"]
    if cfg["source"] == "target":
        rho = squeezing.make_state(_target_from(cfg), dim)
    elif cfg["source"] == "steady":
        if "theta" not in cfg.values:
            raise ConfigError("source = steady needs theta")
        rho = interaction.steady_state(build_pair(cfg), cfg["theta"], dim)
    else:
        raise ConfigError(f"unknown wigner source {cfg['source']!r}")
    x = np.linspace(cfg["x_min"], cfg["x_max"], cfg["nx"])
    p = np.linspace(cfg["p_min"], cfg["p_max"], cfg["np"])
    buffer = io.StringIO()
    write_wigner_grid(x, p, squeezing.wigner(rho, x, p), buffer)
    return buffer.getvalue()


RUNNERS: dict[str, Callable[[ExperimentConfig], str]] = {
    "simulate": _run_simulate,
    "predict": _run_predict,
    "tune": _run_tune,
    "scan-amplitude": _run_scan,
    "qfi": _run_qfi,
    "wigner": _run_wigner,
}


def run(cfg: ExperimentConfig, stdout: TextIO | None = None) -> int:
    """Execute one experiment and write its output; returns the exit code."""
    text = RUNNERS[cfg.mode](cfg)
    out = cfg.get("out")
    if out:
        Path(out).write_text(text)
    else:
        (stdout or sys.stdout).write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pairsqueeze",
        description="Simulate and design squeezed-state stabilization by correlated qubit pairs.",
    )
    parser.add_argument("--config", type=Path, help="key = value configuration file")
    for key, (_, help_text) in KEYS.items():
        flag = "--" + key.replace("_", "-")
        if key == "mode":
            parser.add_argument(flag, choices=MODES, help=help_text)
        else:
            parser.add_argument(flag, dest=key, help=help_text)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        raw: dict[str, str] = {}
        if args.config is not None:
            raw.update(read_config_text(args.config.read_text()))
        for key in KEYS:
            value = getattr(args, key)
            if value is not None:
                raw[key] = str(value)
        cfg = parse_config(raw)
        return run(cfg)
    except OSError as exc:
        print(f"error[io]: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValidationError as exc:
        print(f"error[validation]: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"error[numeric]: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

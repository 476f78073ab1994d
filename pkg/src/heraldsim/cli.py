"""Batch front-end: ``herald-sim <subcommand> [options]``.

Options may also come from a flat ``key = value`` file passed with
``--config``; command-line values override the file. Keys use the long
option names, with ``-`` or ``_``.

Exit status: 0 ok, 1 oracle mismatch, 2 bad configuration, 3 photon bound
exceeded, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from collections.abc import Sequence
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .detection import DetectorModel
from .fock import CapacityError, fidelity_to_bell
from .memory import MemoryParams, memory_evolve, relative_phase_state
from .protocol import (
    default_sources,
    optical_cnot_branches,
    qubit_oracle_eq1,
    qubit_oracle_swap,
    run_herald,
    sector_breakdown,
    sweep_sliwa,
    sweep_strength,
)

SUBCOMMANDS = ("herald", "budget", "sweep-lambda", "sweep-sliwa", "memory", "oracle-check")
SWEEP_DEFAULTS = {
    "sweep-lambda": (0.01, 0.1, 0.01),
    "sweep-sliwa": (0.05, 0.95, 0.01),
    "memory": (0, 10, 1),
}


class ConfigError(ValueError):
    def __init__(self, field: str, message: str) -> None:
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass
class ScenarioConfig:
    command: str = "herald"
    lambda_a: float = 0.1
    lambda_b: float = 0.1
    lambda_c: float = 0.1
    cutoff: int = 2
    overlap: float = 1.0
    detector: str = "pnr"
    eta: float = 1.0
    mode: str = "pauli"
    sweep_from: float | None = None
    sweep_to: float | None = None
    step: float | None = None
    theta1: float = 0.0
    theta2: float = 0.0
    survival: float = 1.0
    bitflip: bool = False
    out: str | None = None

    def validate(self) -> ScenarioConfig:
        if self.command not in SUBCOMMANDS:
            raise ConfigError("command", f"unknown subcommand {self.command!r}")
        for name in ("lambda_a", "lambda_b", "lambda_c"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(name, f"must lie in [0, 1], got {value}")
        if not 1 <= self.cutoff <= 3:
            raise ConfigError("cutoff", f"must be 1, 2 or 3, got {self.cutoff}")
        for name in ("overlap", "eta", "survival"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(name, f"must lie in [0, 1], got {value}")
        if self.detector not in ("pnr", "bucket"):
            raise ConfigError("detector", f"must be 'pnr' or 'bucket', got {self.detector!r}")
        if self.mode not in ("strict", "pauli"):
            raise ConfigError("mode", f"must be 'strict' or 'pauli', got {self.mode!r}")
        if self.command in SWEEP_DEFAULTS:
            lo, hi, step = SWEEP_DEFAULTS[self.command]
            self.sweep_from = lo if self.sweep_from is None else self.sweep_from
            self.sweep_to = hi if self.sweep_to is None else self.sweep_to
            self.step = step if self.step is None else self.step
            if self.step <= 0:
                raise ConfigError("step", f"must be positive, got {self.step}")
            if self.sweep_to < self.sweep_from:
                raise ConfigError("to", "sweep range is empty")
            if self.command == "sweep-sliwa" and not (0 < self.sweep_from and self.sweep_to < 1):
                raise ConfigError("from", "routing values must lie strictly inside (0, 1)")
            if self.command == "sweep-lambda" and not (0 <= self.sweep_from and self.sweep_to <= 1):
                raise ConfigError("from", "strengths must lie in [0, 1]")
            if self.command == "memory" and any(
                float(v) != int(v) or v < 0 for v in (self.sweep_from, self.sweep_to, self.step)
            ):
                raise ConfigError("step", "cycle sweeps need non-negative integer bounds and step")
        return self

    @property
    def herald_mode(self) -> str:
        return "pauli_frame" if self.mode == "pauli" else "strict"

    @property
    def detector_model(self) -> DetectorModel:
        return DetectorModel(self.detector, self.eta)

    def grid(self) -> list[float]:
        n = int(math.floor((self.sweep_to - self.sweep_from) / self.step + 1e-9))
        return [round(self.sweep_from + i * self.step, 12) for i in range(n + 1)]


_CONVERTERS = {
    "lambda_a": float,
    "lambda_b": float,
    "lambda_c": float,
    "cutoff": int,
    "overlap": float,
    "eta": float,
    "sweep_from": float,
    "sweep_to": float,
    "step": float,
    "theta1": float,
    "theta2": float,
    "survival": float,
    "detector": str,
    "mode": str,
    "out": str,
}
_ALIASES = {"from": "sweep_from", "to": "sweep_to"}


def _parse_bool(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {value!r}")


def read_config_file(path: str) -> dict[str, object]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("config", f"line {lineno} is not key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        key = _ALIASES.get(key, key)
        try:
            if key == "bitflip":
                values[key] = _parse_bool(value)
            elif key in _CONVERTERS:
                values[key] = _CONVERTERS[key](value)
            else:
                raise ConfigError(key, "unknown configuration key")
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(key, f"invalid value {value!r}") from None
    return values


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse exits with 2 on its own; keep the message short
        self.print_usage(sys.stderr)
        self.exit(2, f"herald-sim: config error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="herald-sim", description="Heralded entanglement protocol simulator.")
    parser.add_argument("command", choices=SUBCOMMANDS)
    parser.add_argument("--config", help="key=value configuration file")
    parser.add_argument("--lambda-a", dest="lambda_a", type=float)
    parser.add_argument("--lambda-b", dest="lambda_b", type=float)
    parser.add_argument("--lambda-c", dest="lambda_c", type=float)
    parser.add_argument("--cutoff", type=int)
    parser.add_argument("--overlap", type=float, help="pair overlap of source C (1 = indistinguishable)")
    parser.add_argument("--detector", choices=("pnr", "bucket"))
    parser.add_argument("--eta", type=float, help="detector efficiency")
    parser.add_argument("--mode", choices=("strict", "pauli"))
    parser.add_argument("--from", dest="sweep_from", type=float)
    parser.add_argument("--to", dest="sweep_to", type=float)
    parser.add_argument("--step", type=float)
    parser.add_argument("--theta1", type=float, help="per-cycle birefringence of loop 1 (rad)")
    parser.add_argument("--theta2", type=float, help="per-cycle birefringence of loop 2 (rad)")
    parser.add_argument("--survival", type=float, help="per-cycle survival of each loop")
    parser.add_argument("--bitflip", action="store_true", default=None)
    parser.add_argument("--out", help="CSV output path (default: stdout)")
    return parser


def load_config(argv: Sequence[str]) -> ScenarioConfig:
    args = build_parser().parse_args(argv)
    values: dict[str, object] = {}
    if args.config:
        values.update(read_config_file(args.config))
    for f in fields(ScenarioConfig):
        cli_value = getattr(args, f.name, None)
        if cli_value is not None:
            values[f.name] = cli_value
    values["command"] = args.command
    return ScenarioConfig(**values).validate()


# CSV -------------------------------------------------------------------------------


def format_value(value: object) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(value).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        text = format(float(value), ".12g")
        if text.lstrip("-").isdigit():
            text += ".0"
        return text
    return str(value)


def render_csv(header: Sequence[str], rows: Sequence[Sequence[object]]) -> str:
    if not rows:
        raise ValueError("refusing to write an empty table")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    return buf.getvalue()


def emit_csv(header: Sequence[str], rows: Sequence[Sequence[object]], path: str | None) -> None:
    """Write a table as UTF-8 CSV to ``path``, or to stdout when ``path`` is None."""
    text = render_csv(header, rows)
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


# Subcommands ---------------------------------------------------------------------


def _report(cfg: ScenarioConfig, *lines: str) -> None:
    # keep stdout clean for CSV when no output file was given
    stream = sys.stdout if cfg.out else sys.stderr
    for line in lines:
        print(line, file=stream)


def _sources(cfg: ScenarioConfig):
    return default_sources(cfg.lambda_a, cfg.lambda_b, cfg.lambda_c, cfg.cutoff, cfg.overlap)


SECTOR_HEADER = ("n_A", "n_B", "n_C", "probability", "fidelity")
SWEEP_HEADER = ("variable", "rate", "fidelity")


def cmd_herald(cfg: ScenarioConfig) -> int:
    res = run_herald(*_sources(cfg), cfg.detector_model, cfg.herald_mode)
    _report(
        cfg,
        f"herald probability per pulse: {format_value(res.probability)}",
        f"fidelity to phi+: {format_value(res.fidelity)}",
        f"qubit-subspace weight: {format_value(res.qubit_weight)}",
        f"top-sector truncation weight: {format_value(res.truncation_weight)}",
    )
    emit_csv(SECTOR_HEADER, sector_breakdown(res), cfg.out)
    return 0


def cmd_budget(cfg: ScenarioConfig) -> int:
    rows = []
    totals = {}
    for kind in ("bucket", "pnr"):
        res = run_herald(*_sources(cfg), DetectorModel(kind, cfg.eta), cfg.herald_mode)
        totals[kind] = res
        rows += [(kind, *row) for row in sector_breakdown(res)]
    rows.sort(key=lambda r: (r[1:4], r[0]))
    _report(
        cfg,
        *(
            f"{kind}: probability {format_value(r.probability)}, fidelity {format_value(r.fidelity)}"
            for kind, r in sorted(totals.items())
        ),
    )
    emit_csv(("detector",) + SECTOR_HEADER, rows, cfg.out)
    return 0


def cmd_sweep_lambda(cfg: ScenarioConfig) -> int:
    rows = sweep_strength(cfg.grid(), cfg.detector_model, cfg.herald_mode, cfg.cutoff)
    emit_csv(SWEEP_HEADER, sorted(rows), cfg.out)
    return 0


def cmd_sweep_sliwa(cfg: ScenarioConfig) -> int:
    rows = sweep_sliwa(cfg.lambda_c, cfg.grid(), cfg.detector_model, cfg.herald_mode)
    best = max(rows, key=lambda r: r[1])
    _report(cfg, f"maximal herald rate at routing {format_value(best[0])}")
    emit_csv(SWEEP_HEADER, sorted(rows), cfg.out)
    return 0


def cmd_memory(cfg: ScenarioConfig) -> int:
    rows = []
    for k in cfg.grid():
        params = MemoryParams(
            cycles=int(k),
            survival=(cfg.survival, cfg.survival),
            birefringence=(cfg.theta1, cfg.theta2),
            bitflip=cfg.bitflip,
        )
        survival, dm = memory_evolve(relative_phase_state(0.0), params)
        rows.append((int(k), survival, fidelity_to_bell(dm)))
    emit_csv(SWEEP_HEADER, rows, cfg.out)
    return 0


def cmd_oracle_check(cfg: ScenarioConfig) -> int:
    tol = 1e-12
    expected = np.zeros(16)
    expected[[0b0000, 0b0011, 0b1101, 0b1110]] = 0.5
    oracle = qubit_oracle_eq1()
    ok = bool(np.allclose(oracle, expected, rtol=0, atol=tol))
    for idx in np.flatnonzero(np.abs(oracle) > tol):
        print(f"{idx:04b} {format_value(float(oracle[idx]))}")
    prob, pair = qubit_oracle_swap()
    swap_ok = abs(prob - 0.25) <= tol and abs(fidelity_to_bell(np.outer(pair, pair.conj())) - 1) <= tol
    print(f"swap projection probability {format_value(prob)}")
    optical_ok = True
    for outcome, p, amps in optical_cnot_branches():
        match = np.allclose(amps, expected, rtol=0, atol=tol)
        optical_ok &= bool(match)
        label = ",".join(f"{k}={v}" for k, v in outcome.items())
        print(f"optical branch {label}: probability {format_value(p)} {'ok' if match else 'MISMATCH'}")
    passed = ok and swap_ok and optical_ok
    print("oracle-check: " + ("ok" if passed else "MISMATCH"))
    return 0 if passed else 1


COMMANDS = {
    "herald": cmd_herald,
    "budget": cmd_budget,
    "sweep-lambda": cmd_sweep_lambda,
    "sweep-sliwa": cmd_sweep_sliwa,
    "memory": cmd_memory,
    "oracle-check": cmd_oracle_check,
}


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = load_config(argv)
        return COMMANDS[cfg.command](cfg)
    except SystemExit as exc:  # argparse usage errors and --help
        return int(exc.code or 0)
    except ConfigError as exc:
        print(f"herald-sim: config error: {exc}", file=sys.stderr)
        return 2
    except CapacityError as exc:
        print(f"herald-sim: capacity error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"herald-sim: I/O error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())

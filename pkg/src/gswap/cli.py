"""Command-line front end: ``gswap sweep | swap | validate``."""

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field, fields
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from .core import check_physicality, log_negativity, pt_symplectic_eigenvalues, symplectic_eigenvalues
from .errors import GSwapError
from .optomech import OptomechParams
from .protocol import DEFAULT_TEMPERATURES, Strategy, SweepResult, sweep
from .swapping import swap_matrices
from .validation import run_all

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2, 3

CSV_HEADER = (
    "t_s", "temperature_K", "eta_minus", "log_negativity", "xrel_variance", "decoherence_time_s",
)

PRESETS: Dict[str, Dict[str, Any]] = {
    "paper-fig2": {
        "gap": 1e3,
        "r": 1.0 + 2.5e-7,
        "omega_m": 5e8,
        "gamma_m": 1.0,
        "temperatures": list(DEFAULT_TEMPERATURES),
        "t_min": 0.0,
        "t_max": 3e-6,
        "t_steps": 512,
    },
}


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str) -> None:
        super().__init__(f"invalid config field '{field_name}': {message}")
        self.field = field_name


@dataclass
class RunConfig:
    """Flat sweep configuration in SI units.

    Couplings are given either as ``chi`` and ``theta`` directly or as
    ``gap = (theta^2 - chi^2)^(1/2)`` and ``r = theta / chi``; the direct pair
    wins when both are set.
    """

    gap: Optional[float] = 1e3
    r: Optional[float] = 1.0 + 2.5e-7
    chi: Optional[float] = None
    theta: Optional[float] = None
    omega_m: float = 5e8
    gamma_m: float = 1.0
    strategy: str = Strategy.NON_ASSISTED.value
    t_min: float = 0.0
    t_max: float = 3e-6
    t_steps: int = 512
    temperatures: List[float] = field(default_factory=lambda: list(DEFAULT_TEMPERATURES))
    output_path: str = "-"
    format: str = "csv"

    @classmethod
    def field_names(cls) -> List[str]:
        return [f.name for f in fields(cls)]

    def update(self, values: Dict[str, Any]) -> None:
        known = set(self.field_names())
        for key, value in values.items():
            if key not in known:
                raise ConfigError(key, "unknown field")
            setattr(self, key, value)

    def validate(self) -> OptomechParams:
        """Check every field and return the model parameters."""
        numeric = ["omega_m", "gamma_m", "t_min", "t_max"]
        numeric += [k for k in ("gap", "r", "chi", "theta") if getattr(self, k) is not None]
        for name in numeric:
            try:
                value = float(getattr(self, name))
            except (TypeError, ValueError):
                raise ConfigError(name, f"not a number: {getattr(self, name)!r}") from None
            if not math.isfinite(value):
                raise ConfigError(name, "must be finite")
            setattr(self, name, value)
        try:
            self.t_steps = int(self.t_steps)
        except (TypeError, ValueError):
            raise ConfigError("t_steps", f"not an integer: {self.t_steps!r}") from None
        if self.t_steps < 1:
            raise ConfigError("t_steps", "must be at least 1")
        if self.t_min < 0:
            raise ConfigError("t_min", "must be nonnegative")
        if self.t_min > self.t_max:
            raise ConfigError("t_max", "must not be smaller than t_min")
        if self.t_steps > 1 and self.t_min == self.t_max:
            raise ConfigError("t_steps", "must be 1 when t_min == t_max")
        if isinstance(self.temperatures, (int, float)):
            self.temperatures = [self.temperatures]
        try:
            self.temperatures = [float(T) for T in self.temperatures]
        except (TypeError, ValueError):
            raise ConfigError("temperatures", f"not a list of numbers: {self.temperatures!r}") from None
        if not self.temperatures:
            raise ConfigError("temperatures", "must be nonempty")
        if any(not (math.isfinite(T) and T >= 0) for T in self.temperatures):
            raise ConfigError("temperatures", "must be finite and nonnegative")
        try:
            self.strategy = Strategy(self.strategy).value
        except ValueError:
            raise ConfigError("strategy", f"expected one of {[s.value for s in Strategy]}") from None
        if self.format not in ("csv", "json"):
            raise ConfigError("format", "expected 'csv' or 'json'")

        try:
            if self.chi is not None or self.theta is not None:
                if self.chi is None or self.theta is None:
                    raise ConfigError("theta" if self.theta is None else "chi",
                                      "chi and theta must be given together")
                return OptomechParams(chi=self.chi, theta=self.theta,
                                      omega_m=self.omega_m, gamma_m=self.gamma_m)
            if self.gap is None or self.r is None:
                raise ConfigError("gap" if self.gap is None else "r", "coupling not specified")
            return OptomechParams.from_gap(self.gap, self.r, self.omega_m, gamma_m=self.gamma_m)
        except GSwapError as exc:
            raise ConfigError(_guess_field(str(exc)), str(exc)) from None

    def time_grid(self) -> np.ndarray:
        if self.t_steps == 1:
            return np.array([self.t_min])
        return np.linspace(self.t_min, self.t_max, self.t_steps)


def _guess_field(message: str) -> str:
    for name in ("theta", "chi", "omega_m", "gamma_m", "gap", "r"):
        if message.startswith(name) or f" {name} " in f" {message} ":
            return name
    return "params"


def fmt(x: float) -> str:
    """12 significant digits, scientific notation."""
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.11e}"


def _num(x: float):
    return None if not math.isfinite(x) else float(fmt(x))


def render_csv(results: Sequence[SweepResult]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for result in results:
        for row in result.rows:
            writer.writerow([
                fmt(row.t), fmt(result.temperature), fmt(row.eta_minus),
                fmt(row.log_negativity), fmt(row.xrel_variance), fmt(row.decoherence_time),
            ])
    return buf.getvalue()


def render_json(results: Sequence[SweepResult], config: RunConfig) -> str:
    params = results[0].params
    doc = {
        "strategy": config.strategy,
        "params": {
            "chi": _num(params.chi),
            "theta": _num(params.theta),
            "omega_m": _num(params.omega_m),
            "gamma_m": _num(params.gamma_m),
        },
        "series": [
            {
                "temperature_K": _num(result.temperature),
                "n_bar": _num(result.params.n_bar),
                "rows": [
                    {
                        "t_s": _num(row.t),
                        "eta_minus": _num(row.eta_minus),
                        "log_negativity": _num(row.log_negativity),
                        "xrel_variance": _num(row.xrel_variance),
                        "decoherence_time_s": _num(row.decoherence_time),
                        **({"error": row.error} if row.error else {}),
                    }
                    for row in result.rows
                ],
            }
            for result in results
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def _write(text: str, path: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _err(message: str) -> None:
    print(f"gswap: {message}", file=sys.stderr)


def build_config(args: argparse.Namespace) -> RunConfig:
    config = RunConfig()
    if args.preset:
        config.update(PRESETS[args.preset])
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError("config", f"cannot read {args.config}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config", "top level must be a JSON object")
        config.update(data)
    overrides = {
        name: getattr(args, name)
        for name in config.field_names()
        if getattr(args, name, None) is not None
    }
    if "temperatures" in overrides:
        raw = overrides["temperatures"]
        try:
            overrides["temperatures"] = [float(x) for x in raw.split(",") if x.strip()]
        except ValueError:
            raise ConfigError("temperatures", f"cannot parse {raw!r}") from None
    config.update(overrides)
    return config


def cmd_sweep(args: argparse.Namespace) -> int:
    try:
        config = build_config(args)
        params = config.validate()
    except ConfigError as exc:
        _err(str(exc))
        return EXIT_USAGE
    try:
        results = sweep(params, config.time_grid(), config.temperatures,
                        Strategy(config.strategy), workers=args.workers)
        for result in results:
            result.check()
    except GSwapError as exc:
        _err(f"numerical failure: {exc}")
        return EXIT_NUMERICAL
    text = render_csv(results) if config.format == "csv" else render_json(results, config)
    _write(text, config.output_path)
    failed = sum(len(r.errors) for r in results)
    if failed:
        _err(f"{failed} sweep rows failed; see error markers in the output")
        return EXIT_NUMERICAL
    return EXIT_OK


def _load_swap_input(path: str):
    try:
        if path == "-":
            data = json.load(sys.stdin)
        else:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError("input", f"cannot parse {path}: {exc}") from None
    if isinstance(data, dict):
        try:
            mats = [data["v_ac"], data["v_bc"]]
        except KeyError as exc:
            raise ConfigError(str(exc.args[0]), "missing") from None
    elif isinstance(data, list) and len(data) == 2:
        mats = data
    else:
        raise ConfigError("input", "expected {'v_ac': M, 'v_bc': M} or a list of two matrices")
    out = []
    for name, M in zip(("v_ac", "v_bc"), mats):
        try:
            arr = np.asarray(M, dtype=float)
        except (TypeError, ValueError):
            raise ConfigError(name, "not a numeric matrix") from None
        if arr.shape != (4, 4):
            raise ConfigError(name, f"expected a 4x4 row-major matrix, got shape {arr.shape}")
        if not np.allclose(arr, arr.T, rtol=0, atol=1e-12 * max(1.0, np.abs(arr).max())):
            raise ConfigError(name, "matrix is not symmetric")
        if not check_physicality(arr):
            nu = symplectic_eigenvalues(arr)
            k = int(np.argmin(nu))
            raise ConfigError(
                name, f"unphysical: symplectic eigenvalue nu_{k + 1} = {fmt(nu[k])} < 1/2"
            )
        out.append(arr)
    return out


def cmd_swap(args: argparse.Namespace) -> int:
    try:
        V_ac, V_bc = _load_swap_input(args.input)
    except ConfigError as exc:
        _err(str(exc))
        return EXIT_USAGE
    try:
        V_ab = swap_matrices(V_ac, V_bc)
        eta_plus, eta_minus = pt_symplectic_eigenvalues(V_ab)
    except GSwapError as exc:
        _err(f"numerical failure: {exc}")
        return EXIT_NUMERICAL
    doc = {
        "v_ab": [[_num(x) for x in row] for row in V_ab],
        "eta_plus": _num(eta_plus),
        "eta_minus": _num(eta_minus),
        "log_negativity": _num(log_negativity(eta_minus)),
    }
    sys.stdout.write(json.dumps(doc, indent=2) + "\n")
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    if args.cases < 1:
        _err("invalid field 'cases': must be at least 1")
        return EXIT_USAGE
    reports = run_all(seed=args.seed, cases=args.cases)
    for report in reports:
        print(report.line())
    failed = [r for r in reports if not r.passed]
    print(f"{len(reports) - len(failed)}/{len(reports)} properties passed (seed {args.seed})")
    return EXIT_FAILED if failed else EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gswap", description="Gaussian entanglement swapping between optomechanical systems"
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="entanglement versus pulse duration")
    p.add_argument("--config", help="flat JSON object of RunConfig fields")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--strategy", choices=[s.value for s in Strategy])
    for name in ("gap", "r", "chi", "theta", "omega_m", "gamma_m", "t_min", "t_max"):
        p.add_argument("--" + name.replace("_", "-"), dest=name, type=float)
    p.add_argument("--t-steps", dest="t_steps", type=int)
    p.add_argument("--temperatures", help="comma-separated kelvin values")
    p.add_argument("--output", "--output-path", dest="output_path", help="file path or '-'")
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--workers", type=int, help="thread count (default: $GSWAP_THREADS or 1)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("swap", help="swap two two-mode CMs read from JSON")
    p.add_argument("input", help="JSON file with v_ac and v_bc, or '-' for stdin")
    p.set_defaults(func=cmd_swap)

    p = sub.add_parser("validate", help="run the seeded oracle and invariant checks")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cases", type=int, default=100)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

One subcommand per quantity, CSV out (comma separated, '.' decimal,
header row, LF line endings), and a JSON config round-trip: --dump-config
writes the fully resolved run to a file, --config replays one, and any
flag given on the command line wins over the file.

Exit codes: 0 success, 2 configuration problems, 3 a requested tolerance
could not be met, 4 domain errors (parameters outside an identity's
domain, or an operation the chosen representation cannot do).
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import sys
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import AccuracyError, ConfigError, DomainError, UnsupportedOperationError
from .identities import (
    TripleLawPoint,
    creep1_density,
    creep2_laplace,
    creep2_test,
    npv_tax,
    ruin_laplace,
    ruin_probability,
    triple_law_density,
    two_sided_down,
    two_sided_up,
)
from .models import BrownianDrift, CramerLundberg, LevyModel, MixedModel
from .quadrature import QuadratureConfig
from .scale import make_scale
from .simulate import (
    Estimate,
    McConfig,
    estimate_creep2,
    estimate_exit_down,
    estimate_exit_up,
    estimate_npv,
    estimate_ruin,
)
from .tax import Constant, SqrtExample, Table, TaxProfile, a_star

__all__ = ["run", "main"]

_COMMANDS = (
    "scale", "exit-up", "exit-down", "ruin", "npv", "creep", "triple-law",
    "simulate", "verify",
)


@dataclass
class RunConfig:
    """Everything a run needs, JSON-serializable for --dump-config/--config."""

    command: str
    model: dict
    profile: dict | None = None
    q: float = 0.0
    x: float | None = None
    a: float | None = None
    alpha: float = 0.0
    beta: float = 0.0
    theta: float | None = None
    y: float | None = None
    z: float | None = None
    quantity: str | None = None
    method: str = "closed_form"
    grid: str | None = None
    rel_tol: float | None = None
    abs_tol: float | None = None
    n_paths: int = 20_000
    seed: int = 20_260_819
    time_step: float = 1e-3
    horizon: float | None = None
    out: str = "-"


def _model_from_spec(spec: dict) -> LevyModel:
    if not isinstance(spec, dict) or "type" not in spec:
        raise ConfigError(f"model spec must be a dict with a 'type' key, got {spec!r}")
    kind = spec["type"]
    if kind not in _MODEL_DEFAULTS:
        raise ConfigError(f"unknown model type {kind!r} (expected bm, cl, or mixed)")
    fields = dict(_MODEL_DEFAULTS[kind])
    overrides = {k: v for k, v in spec.items() if k != "type"}
    unknown = set(overrides) - set(fields)
    if unknown:
        raise ConfigError(f"model '{kind}' has no parameters {sorted(unknown)}")
    fields.update(overrides)
    try:
        if kind == "bm":
            return BrownianDrift(**fields)
        if kind == "cl":
            return CramerLundberg(**fields)
        return MixedModel(**fields)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad parameters for model '{kind}': {exc}") from exc


def _profile_from_spec(spec: dict) -> TaxProfile:
    if not isinstance(spec, dict) or "type" not in spec:
        raise ConfigError(f"profile spec must be a dict with a 'type' key, got {spec!r}")
    kind = spec["type"]
    try:
        if kind == "constant":
            return Constant(float(spec["gamma"]))
        if kind == "table":
            return Table(tuple((float(s), float(g)) for s, g in spec["knots"]))
        if kind == "sqrt_example":
            return SqrtExample(float(spec["a"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad parameters for profile '{kind}': {exc}") from exc
    raise ConfigError(
        f"unknown profile type {kind!r} (expected constant, table, or sqrt_example)"
    )


_MODEL_DEFAULTS = {
    "bm": {"mu": 0.0, "sigma": math.sqrt(2.0)},
    "cl": {"c": 1.0, "lam": 0.5, "claim_mean_inv": 1.0},
    "mixed": {"c": 1.0, "lam": 0.5, "claim_mean_inv": 1.0, "sigma": 1.0},
}


def _collect_model(args: argparse.Namespace) -> dict | None:
    if args.model_file is not None:
        try:
            with open(args.model_file) as fh:
                return json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read model file {args.model_file}: {exc}") from exc
    if args.model is None:
        return None
    spec = dict(_MODEL_DEFAULTS[args.model])
    spec["type"] = args.model
    for key in ("mu", "sigma", "c", "lam", "claim_mean_inv"):
        val = getattr(args, key)
        if val is not None:
            if key not in _MODEL_DEFAULTS[args.model]:
                raise ConfigError(f"--{key.replace('_', '-')} does not apply to model '{args.model}'")
            spec[key] = val
    return spec


def _collect_profile(args: argparse.Namespace) -> dict | None:
    if args.profile_file is not None:
        try:
            with open(args.profile_file) as fh:
                return json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(
                f"cannot read profile file {args.profile_file}: {exc}"
            ) from exc
    if args.profile is None:
        if args.gamma is not None:
            return {"type": "constant", "gamma": args.gamma}
        return None
    if args.profile == "constant":
        if args.gamma is None:
            raise ConfigError("--profile constant needs --gamma")
        return {"type": "constant", "gamma": args.gamma}
    if args.profile == "sqrt_example":
        if args.profile_a is None:
            raise ConfigError("--profile sqrt_example needs --profile-a")
        return {"type": "sqrt_example", "a": args.profile_a}
    if args.knots is None:
        raise ConfigError("--profile table needs --knots s:g,s:g,...")
    try:
        knots = [
            (float(s), float(g))
            for s, g in (pair.split(":") for pair in args.knots.split(","))
        ]
    except ValueError as exc:
        raise ConfigError(f"cannot parse --knots {args.knots!r}: {exc}") from exc
    return {"type": "table", "knots": knots}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="levytax",
        description="Scale functions, exit and ruin laws, and Monte Carlo "
        "verification for supremum-taxed spectrally negative processes.",
        allow_abbrev=False,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    descriptions = {
        "scale": "evaluate W, W', and Z at one or more points",
        "exit-up": "discounted probability of reaching the barrier before ruin",
        "exit-down": "discounted probability of ruin before the barrier",
        "ruin": "ruin probability (q=0) or ruin-time transform (q>0)",
        "npv": "expected discounted tax collected until ruin",
        "creep": "type II creeping test, exponent, and discounted mass",
        "triple-law": "joint density of supremum, undershoot, and overshoot at ruin",
        "simulate": "Monte Carlo estimate of one quantity against its formula",
        "verify": "run the built-in formula-vs-simulation suite",
    }
    for name in _COMMANDS:
        # abbreviation matching would let a typo like --r silently hit --rel-tol
        p = sub.add_parser(name, help=descriptions[name], allow_abbrev=False)
        p.add_argument("--model", choices=("bm", "cl", "mixed"))
        p.add_argument("--model-file")
        p.add_argument("--mu", type=float)
        p.add_argument("--sigma", type=float)
        p.add_argument("--c", type=float)
        p.add_argument("--lam", type=float)
        p.add_argument("--claim-mean-inv", type=float, dest="claim_mean_inv")
        p.add_argument("--profile", choices=("constant", "table", "sqrt_example"))
        p.add_argument("--profile-file")
        p.add_argument("--gamma", type=float)
        p.add_argument("--profile-a", type=float, dest="profile_a")
        p.add_argument("--knots")
        p.add_argument("--q", type=float)
        p.add_argument("--x", type=float)
        p.add_argument("--a", type=float)
        p.add_argument("--alpha", type=float)
        p.add_argument("--beta", type=float)
        p.add_argument("--theta", type=float)
        p.add_argument("--y", type=float)
        p.add_argument("--z", type=float)
        p.add_argument("--quantity",
                       choices=("exit-up", "exit-down", "ruin", "npv", "creep2"))
        p.add_argument("--method", choices=("closed_form", "numeric"))
        p.add_argument("--grid", help="PARAM:FROM:TO:STEPS, e.g. x:0.5:5:10")
        p.add_argument("--rel-tol", type=float, dest="rel_tol")
        p.add_argument("--abs-tol", type=float, dest="abs_tol")
        p.add_argument("--n-paths", type=int, dest="n_paths")
        p.add_argument("--seed", type=int)
        p.add_argument("--time-step", type=float, dest="time_step")
        p.add_argument("--horizon", type=float)
        p.add_argument("--out")
        p.add_argument("--config", help="JSON run config; explicit flags override")
        p.add_argument("--dump-config",
                       help="write the resolved run config as JSON and exit")
    return parser


def _resolve(args: argparse.Namespace) -> RunConfig:
    base: dict = {}
    if args.config is not None:
        try:
            with open(args.config) as fh:
                base = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(base, dict):
            raise ConfigError("config file must hold a JSON object")
        stored = base.get("command")
        if stored is not None and stored != args.command:
            raise ConfigError(
                f"config was dumped for '{stored}', invoked as '{args.command}'"
            )
    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = set(base) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    merged = dict(base)
    merged["command"] = args.command
    model = _collect_model(args)
    if model is not None:
        merged["model"] = model
    profile = _collect_profile(args)
    if profile is not None:
        merged["profile"] = profile
    for key in ("q", "x", "a", "alpha", "beta", "theta", "y", "z", "quantity",
                "method", "grid", "rel_tol", "abs_tol", "n_paths", "seed",
                "time_step", "horizon", "out"):
        val = getattr(args, key)
        if val is not None:
            merged[key] = val
    if "model" not in merged:
        if args.command == "verify":
            merged["model"] = {"type": "cl"}  # placeholder; suite brings its own
        else:
            raise ConfigError("a model is required (--model or --model-file)")
    try:
        cfg = RunConfig(**merged)
    except TypeError as exc:
        raise ConfigError(f"bad config: {exc}") from exc
    return cfg


def _quad_config(cfg: RunConfig) -> QuadratureConfig:
    defaults = QuadratureConfig()
    return QuadratureConfig(
        rel_tol=cfg.rel_tol if cfg.rel_tol is not None else defaults.rel_tol,
        abs_tol=cfg.abs_tol if cfg.abs_tol is not None else defaults.abs_tol,
    )


def _need(cfg: RunConfig, *names: str) -> None:
    for name in names:
        if getattr(cfg, name) is None:
            raise ConfigError(f"'{cfg.command}' requires --{name}")


def _need_profile(cfg: RunConfig) -> TaxProfile:
    if cfg.profile is None:
        raise ConfigError(
            f"'{cfg.command}' requires a tax profile (--gamma, --profile, or "
            "--profile-file)"
        )
    return _profile_from_spec(cfg.profile)


def _grid_rows(cfg: RunConfig) -> list[RunConfig]:
    if cfg.grid is None:
        return [cfg]
    parts = cfg.grid.split(":")
    if len(parts) != 4:
        raise ConfigError(f"--grid must be PARAM:FROM:TO:STEPS, got {cfg.grid!r}")
    name, lo, hi, steps = parts
    if name not in ("q", "x", "a", "alpha", "beta", "theta", "y", "z"):
        raise ConfigError(f"cannot grid over {name!r}")
    try:
        values = np.linspace(float(lo), float(hi), int(steps))
    except ValueError as exc:
        raise ConfigError(f"bad --grid bounds: {exc}") from exc
    if len(values) == 0:
        raise ConfigError("--grid needs at least one step")
    return [dataclasses.replace(cfg, grid=None, **{name: float(v)}) for v in values]


def _error_bound(quad: QuadratureConfig, value: float) -> float:
    # the bound the quadrature was driven to, not an observed residual
    return max(quad.abs_tol, quad.rel_tol * abs(value))


_MC_QUANTITIES: dict[str, tuple[Callable, Callable]] = {}


def _mc_quantity(name: str, model: LevyModel, profile: TaxProfile, cfg: RunConfig,
                 quad: QuadratureConfig) -> tuple[float, Estimate]:
    mc = McConfig(n_paths=cfg.n_paths, seed=cfg.seed, time_step=cfg.time_step,
                  horizon=cfg.horizon)
    if name in ("exit-up", "exit-down"):
        _need(cfg, "a")
    scale = make_scale(model, cfg.q)
    if name == "exit-up":
        return (two_sided_up(scale, profile, cfg.x, cfg.a, quad),
                estimate_exit_up(model, profile, cfg.x, cfg.a, cfg.q, mc))
    if name == "exit-down":
        return (two_sided_down(scale, profile, cfg.x, cfg.a, quad),
                estimate_exit_down(model, profile, cfg.x, cfg.a, cfg.q, mc))
    if name == "ruin":
        if cfg.q == 0:
            formula = ruin_probability(scale, profile, cfg.x, quad)
        else:
            formula = ruin_laplace(scale, profile, cfg.x, quad)
        return formula, estimate_ruin(model, profile, cfg.x, cfg.q, mc)
    if name == "npv":
        return (npv_tax(scale, profile, cfg.x, quad),
                estimate_npv(model, profile, cfg.x, cfg.q, mc))
    if name == "creep2":
        return (creep2_laplace(scale, profile, cfg.x, quad),
                estimate_creep2(model, profile, cfg.x, cfg.q, mc))
    raise ConfigError(f"unknown quantity {name!r}")


def _mc_row(name: str, model: LevyModel, profile: TaxProfile, cfg: RunConfig,
            quad: QuadratureConfig) -> list:
    formula, est = _mc_quantity(name, model, profile, cfg, quad)
    if est.std_error > 0 and math.isfinite(formula):
        z_score = (est.value - formula) / est.std_error
    else:
        z_score = math.nan
    return [name, formula, est.value, est.std_error, z_score,
            est.censored_fraction, cfg.n_paths, cfg.seed]


_MC_HEADER = ["quantity", "formula_value", "mc_value", "std_error", "z_score",
              "censored_fraction", "n_paths", "seed"]

# the verify suite: exact event-driven rows first, then Euler rows
_VERIFY_SUITE: tuple[tuple[str, dict, dict, float, str, dict], ...] = (
    ("cl_exit_up_q0", {"type": "cl"}, {"type": "constant", "gamma": 0.0},
     0.0, "exit-up", {"x": 1.0, "a": 2.0}),
    ("cl_exit_up_q05", {"type": "cl"}, {"type": "constant", "gamma": 0.0},
     0.5, "exit-up", {"x": 1.0, "a": 2.0}),
    ("cl_ruin", {"type": "cl"}, {"type": "constant", "gamma": 0.0},
     0.0, "ruin", {"x": 2.0}),
    ("cl_npv", {"type": "cl"}, {"type": "constant", "gamma": 2.0},
     0.0, "npv", {"x": 1.0}),
    ("cl_creep2", {"type": "cl"}, {"type": "constant", "gamma": 2.0},
     0.0, "creep2", {"x": 1.0}),
    ("bm_exit_up", {"type": "bm", "mu": 1.0}, {"type": "constant", "gamma": 0.0},
     0.0, "exit-up", {"x": 1.0, "a": 2.0}),
    ("bm_ruin", {"type": "bm", "mu": 1.0}, {"type": "constant", "gamma": 0.5},
     0.0, "ruin", {"x": 0.5, "horizon": 15.0}),
    ("mixed_exit_up", {"type": "mixed"}, {"type": "constant", "gamma": 0.0},
     0.0, "exit-up", {"x": 1.0, "a": 2.0}),
)


def _execute(cfg: RunConfig) -> tuple[list[str], list[list]]:
    quad = _quad_config(cfg)
    if cfg.command == "verify":
        rows = []
        for name, model_spec, profile_spec, q, quantity, overrides in _VERIFY_SUITE:
            row_cfg = dataclasses.replace(cfg, q=q, **overrides)
            model = _model_from_spec(model_spec)
            profile = _profile_from_spec(profile_spec)
            row = _mc_row(quantity, model, profile, row_cfg, quad)
            row[0] = name
            rows.append(row)
        return _MC_HEADER, rows

    model = _model_from_spec(cfg.model)
    header: list[str]
    rows = []
    for row_cfg in _grid_rows(cfg):
        if cfg.command == "scale":
            _need(row_cfg, "x")
            scale = make_scale(model, row_cfg.q, method=row_cfg.method)
            header = ["q", "x", "w", "w_prime", "z"]
            rows.append([row_cfg.q, row_cfg.x, scale.w(row_cfg.x),
                         scale.w_prime(row_cfg.x), scale.z(row_cfg.x)])
        elif cfg.command in ("exit-up", "exit-down"):
            _need(row_cfg, "x", "a")
            profile = _need_profile(row_cfg)
            scale = make_scale(model, row_cfg.q)
            fn = two_sided_up if cfg.command == "exit-up" else two_sided_down
            value = fn(scale, profile, row_cfg.x, row_cfg.a, quad)
            header = ["q", "x", "a", "value", "error_estimate"]
            rows.append([row_cfg.q, row_cfg.x, row_cfg.a, value,
                         _error_bound(quad, value)])
        elif cfg.command == "ruin":
            _need(row_cfg, "x")
            profile = _need_profile(row_cfg)
            scale = make_scale(model, row_cfg.q)
            if row_cfg.q == 0:
                value = ruin_probability(scale, profile, row_cfg.x, quad)
            else:
                value = ruin_laplace(scale, profile, row_cfg.x, quad)
            header = ["q", "x", "value", "error_estimate"]
            rows.append([row_cfg.q, row_cfg.x, value, _error_bound(quad, value)])
        elif cfg.command == "npv":
            _need(row_cfg, "x")
            profile = _need_profile(row_cfg)
            scale = make_scale(model, row_cfg.q)
            value = npv_tax(scale, profile, row_cfg.x, quad)
            header = ["q", "x", "value", "error_estimate"]
            rows.append([row_cfg.q, row_cfg.x, value, _error_bound(quad, value)])
        elif cfg.command == "creep":
            _need(row_cfg, "x")
            profile = _need_profile(row_cfg)
            scale = make_scale(model, 0.0)
            result = creep2_test(scale, profile, row_cfg.x, quad)
            value = math.exp(-result.exponent)
            header = ["q", "x", "a_star", "test", "exponent", "value"]
            rows.append([0.0, row_cfg.x, a_star(profile, row_cfg.x),
                         result.creeps, result.exponent, value])
        elif cfg.command == "triple-law":
            _need(row_cfg, "x", "theta")
            profile = _need_profile(row_cfg)
            scale_alpha = make_scale(model, row_cfg.alpha)
            scale_beta = make_scale(model, row_cfg.beta)
            header = ["alpha", "beta", "x", "theta", "y", "z",
                      "ac_density", "atom_density", "creep1_density"]
            if row_cfg.y is not None and row_cfg.z is not None:
                point = TripleLawPoint(theta=row_cfg.theta, y=row_cfg.y,
                                       z=row_cfg.z, alpha=row_cfg.alpha,
                                       beta=row_cfg.beta)
                dens = triple_law_density(scale_alpha, scale_beta, profile,
                                          row_cfg.x, point, quad)
                ac, atom = dens.ac, dens.atom
            elif row_cfg.y is None and row_cfg.z is None:
                ac = atom = math.nan
            else:
                raise ConfigError("triple-law needs both --y and --z, or neither")
            creep1 = creep1_density(scale_alpha, scale_beta, profile,
                                    row_cfg.x, row_cfg.theta, quad)
            rows.append([row_cfg.alpha, row_cfg.beta, row_cfg.x, row_cfg.theta,
                         row_cfg.y, row_cfg.z, ac, atom, creep1])
        elif cfg.command == "simulate":
            _need(row_cfg, "x", "quantity")
            profile = _need_profile(row_cfg)
            header = _MC_HEADER
            rows.append(_mc_row(row_cfg.quantity, model, profile, row_cfg, quad))
        else:
            raise ConfigError(f"unknown command {cfg.command!r}")
    return header, rows


def _format_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(header: list[str], rows: list[list], out: str) -> None:
    def emit(fh) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format_cell(v) for v in row])

    if out == "-":
        emit(sys.stdout)
    else:
        with open(out, "w", newline="") as fh:
            emit(fh)


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve(args)
        if args.dump_config is not None:
            payload = dataclasses.asdict(cfg)
            if args.dump_config == "-":
                json.dump(payload, sys.stdout, indent=2)
                sys.stdout.write("\n")
            else:
                with open(args.dump_config, "w") as fh:
                    json.dump(payload, fh, indent=2)
                    fh.write("\n")
            return 0
        header, rows = _execute(cfg)
        _write_csv(header, rows, cfg.out)
        return 0
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except AccuracyError as exc:
        print(f"accuracy: {exc}", file=sys.stderr)
        return 3
    except (DomainError, UnsupportedOperationError) as exc:
        print(f"domain: {exc}", file=sys.stderr)
        return 4


def main() -> None:
    sys.exit(run())

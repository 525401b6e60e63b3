"""Command-line front end.

Subcommands::

    levybreak simulate   write a simulated increment CSV
    levybreak test       run kscp1, kscp2 or cp on an increment CSV
    levybreak estimate   estimate the break fraction
    levybreak mc         Monte Carlo studies driven by a JSON config
    levybreak rerun      replay the command recorded in a run manifest

Every run emits a manifest (subcommand, resolved configuration, paths, seed,
tool version, wall-clock).  It is written next to ``--out`` as
``<out>.manifest.json``, to ``--manifest`` when given, and to stderr when the
result goes to stdout.  Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path
from typing import Any, Sequence

from levybreak import montecarlo as mc
from levybreak._io import atomic_write_text, dumps_json
from levybreak._rng import MAX_SEED
from levybreak.bootstrap import BootstrapConfig
from levybreak.empirical import ZGrid, brownian_grid, pure_jump_grid
from levybreak.jump_model import JumpModel
from levybreak.procedures import cp_test, estimate_changepoint, kscp_test1, kscp_test2
from levybreak.simulator import (
    IncrementSeries,
    ProcessSpec,
    SamplerConfig,
    increments_csv_text,
    read_increments_csv,
    read_prices_csv,
    simulate_path,
)

PROG = "levybreak"


class UsageError(Exception):
    """Bad flag combination detected after argparse; exits with status 2."""


def tool_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:  # pragma: no cover - source checkout
        from levybreak import __version__

        return __version__


# ------------------------------------------------------------------ parsing


def _seed(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from None
    if not 0 <= value <= MAX_SEED:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid number {text!r}") from None
    if not (value > 0 and math.isfinite(value)):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return value


def _finite_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid number {text!r}") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"expected a finite number, got {text!r}")
    return value


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return value


def _add_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", type=Path, help="output file (default: stdout)")
    p.add_argument("--manifest", type=Path, help="manifest path (default: <out>.manifest.json)")


def _add_input(p: argparse.ArgumentParser) -> None:
    p.add_argument("--in", dest="input", type=Path, required=True, help="increment CSV")
    p.add_argument(
        "--from-prices",
        action="store_true",
        help="treat --in as a 't,price' CSV and difference it",
    )


def _add_target(p: argparse.ArgumentParser) -> None:
    p.add_argument("--z0", type=_positive_float, help="threshold for the pointwise procedures")
    p.add_argument("--grid-preset", choices=["pure-jump", "brownian"], help="threshold grid preset")
    p.add_argument("--grid-file", type=Path, help="file with one threshold per line")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=PROG, description="Change-point tests for the jump measure.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {tool_version()}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate increments of a jump process")
    p.add_argument("--b", type=_finite_float, default=0.0, help="drift")
    p.add_argument("--sigma", type=_finite_float, default=0.0, help="volatility")
    p.add_argument("--beta", type=_positive_float, required=True, help="jump intensity before the break")
    p.add_argument("--beta2", type=_positive_float, help="jump intensity after the break")
    p.add_argument("--theta0", type=float, help="break fraction in (0, 1)")
    p.add_argument("--kn", type=_positive_float, required=True, help="observation horizon k_n")
    p.add_argument("--dninv", type=_positive_int, required=True, help="observations per unit time")
    p.add_argument("--method", choices=["truncated-cp", "exact-stable"], default="truncated-cp")
    p.add_argument("--eps-sim", type=_positive_float, default=1e-4, help="jump truncation level")
    p.add_argument("--seed", type=_seed, default=0)
    _add_output(p)

    p = sub.add_parser("test", help="run a change-point test on an increment CSV")
    p.add_argument("--method", choices=["kscp1", "kscp2", "cp"], required=True)
    _add_target(p)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--B", type=_positive_int, default=250, help="bootstrap replicates")
    p.add_argument("--law", choices=["standard-normal", "rademacher"], default="standard-normal")
    p.add_argument("--seed", type=_seed, default=0)
    _add_input(p)
    _add_output(p)

    p = sub.add_parser("estimate", help="estimate the break fraction")
    _add_target(p)
    _add_input(p)
    _add_output(p)

    p = sub.add_parser("mc", help="Monte Carlo study from a JSON config")
    p.add_argument("--config", type=Path, required=True)
    p.add_argument(
        "--study",
        choices=["rejection", "estimator", "covariance", "small-time"],
        default="rejection",
    )
    p.add_argument("--full", action="store_true", help="full scale: 1000 replications, B=250, all designs")
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--long", action="store_true", help="long-format rejection CSV")
    _add_output(p)

    p = sub.add_parser("rerun", help="replay the command recorded in a manifest")
    p.add_argument("manifest_file", type=Path)
    return parser


# ------------------------------------------------------------------ helpers


def _load_series(args: argparse.Namespace) -> IncrementSeries:
    return read_prices_csv(args.input) if args.from_prices else read_increments_csv(args.input)


def read_grid_file(path: Path) -> ZGrid:
    """Thresholds, one per line; blank lines, ``#`` comments and a ``z`` header are ignored."""
    points = []
    with Path(path).open() as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip().rstrip(",")
            if not line or line == "z":
                continue
            try:
                z = float(line)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-numeric threshold") from None
            if not (z > 0 and math.isfinite(z)):
                raise ValueError(f"{path}:{lineno}: thresholds must be positive and finite")
            points.append(z)
    return ZGrid.of(points)


def _grid(args: argparse.Namespace, series: IncrementSeries) -> ZGrid | None:
    if args.grid_preset and args.grid_file:
        raise UsageError("--grid-preset and --grid-file are mutually exclusive")
    if args.grid_file:
        return read_grid_file(args.grid_file)
    if args.grid_preset == "pure-jump":
        return pure_jump_grid()
    if args.grid_preset == "brownian":
        return brownian_grid(series.delta_n)
    return None


def _emit(args: argparse.Namespace, text: str) -> None:
    if args.out is None:
        sys.stdout.write(text)
    else:
        atomic_write_text(args.out, text)


def _abs(path: Path | None) -> str | None:
    return None if path is None else str(Path(path).resolve())


def _emit_manifest(args: argparse.Namespace, argv: Sequence[str], config: dict, started: float, seed: Any) -> None:
    manifest = {
        "subcommand": args.command,
        "argv": list(argv),
        "config": config,
        "input": _abs(getattr(args, "input", None) or getattr(args, "config", None)),
        "output": _abs(args.out),
        "seed": seed,
        "tool": PROG,
        "version": tool_version(),
        "started_at": datetime.fromtimestamp(started, tz=timezone.utc).isoformat(),
        "elapsed_seconds": round(time.time() - started, 6),
    }
    text = dumps_json(manifest)
    path = args.manifest or (None if args.out is None else args.out.with_name(args.out.name + ".manifest.json"))
    if path is None:
        sys.stderr.write(text)
    else:
        atomic_write_text(path, text)


# ------------------------------------------------------------------ commands


def cmd_simulate(args: argparse.Namespace) -> dict:
    if (args.beta2 is None) != (args.theta0 is None):
        raise UsageError("--beta2 and --theta0 must be given together")
    n_real = args.kn * args.dninv
    n = int(round(n_real))
    if abs(n_real - n) > 1e-9 * max(1.0, n_real):
        raise UsageError(f"--kn * --dninv = {n_real} is not an integer")
    spec = ProcessSpec(
        b=args.b,
        sigma=args.sigma,
        jump_pre=JumpModel.beta_family(args.beta),
        jump_post=None if args.beta2 is None else JumpModel.beta_family(args.beta2),
        theta0=args.theta0,
    )
    sampler = SamplerConfig(method=args.method, eps_sim=args.eps_sim, seed=args.seed)
    series = simulate_path(spec, n, 1.0 / args.dninv, sampler)
    _emit(args, increments_csv_text(series, seed=args.seed))
    return {"process": spec.to_dict(), "sampler": sampler.to_dict(), "n": n, "delta_n": 1.0 / args.dninv}


def cmd_test(args: argparse.Namespace) -> dict:
    if not 0 < args.alpha < 1:
        raise UsageError("--alpha must lie strictly between 0 and 1")
    if args.method in ("kscp1", "kscp2"):
        if args.z0 is None:
            raise UsageError(f"--method {args.method} needs --z0")
        if args.grid_preset or args.grid_file:
            raise UsageError(f"--method {args.method} takes --z0, not a grid")
    elif args.z0 is not None or not (args.grid_preset or args.grid_file):
        raise UsageError("--method cp needs --grid-preset or --grid-file (and no --z0)")
    series = _load_series(args)
    cfg = BootstrapConfig(B=args.B, law=args.law, seed=args.seed)
    if args.method == "kscp1":
        outcome = kscp_test1(series, args.z0, args.alpha)
    elif args.method == "kscp2":
        outcome = kscp_test2(series, args.z0, args.alpha, cfg)
    else:
        outcome = cp_test(series, _grid(args, series), args.alpha, cfg)
    _emit(args, dumps_json(outcome.to_dict()))
    return outcome.config | {"method": args.method, "alpha": args.alpha}


def cmd_estimate(args: argparse.Namespace) -> dict:
    if (args.z0 is None) == (args.grid_preset is None and args.grid_file is None):
        raise UsageError("give exactly one of --z0 or a grid (--grid-preset / --grid-file)")
    series = _load_series(args)
    target = args.z0 if args.z0 is not None else _grid(args, series)
    est = estimate_changepoint(series, target, warn=False)
    if est.degenerate:
        sys.stderr.write(f"{PROG}: warning: no increment reaches the threshold; theta_hat set to 0\n")
    _emit(args, dumps_json(est.to_dict()))
    return est.config


def _designs(raw: dict, full: bool) -> list[dict]:
    """Expand a config whose ``k_n`` may be a list into one dict per design."""
    raw = dict(raw)
    k_list = raw.pop("k_n")
    multi = isinstance(k_list, list)
    if not multi:
        k_list = [k_list]
    elif full:
        k_list = sorted(mc.STANDARD_DESIGNS)
    dninv = raw.pop("delta_n_inv", None)
    out = []
    for k in k_list:
        d = dict(raw, k_n=k)
        if dninv is not None and not multi:
            d["delta_n_inv"] = dninv
        elif float(k).is_integer() and int(k) in mc.STANDARD_DESIGNS:
            d["delta_n_inv"] = mc.STANDARD_DESIGNS[int(k)]
        elif dninv is not None:
            d["delta_n_inv"] = dninv
        else:
            raise ValueError(f"no delta_n_inv given for k_n={k}")
        if full:
            d.update(replications=1000, B=250)
        out.append(d)
    return out


def cmd_mc(args: argparse.Namespace) -> dict:
    try:
        raw = json.loads(args.config.read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{args.config}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    if not isinstance(raw, dict):
        raise ValueError(f"{args.config}: the config must be a JSON object")

    if args.study == "small-time":
        model = JumpModel.beta_family(float(raw.get("beta", 1.0)))
        reps = int(raw.get("reps", 100_000))
        sampler = SamplerConfig(
            method=raw.get("method", "truncated-cp"),
            eps_sim=float(raw.get("eps_sim", 1e-4)),
            compensate_small=raw.get("compensate_small"),
        )
        reports = mc.validate_small_time(
            model,
            raw["z_list"],
            raw["t_list"],
            reps,
            seed=int(raw.get("seed", 0)),
            b=float(raw.get("b", 0.0)),
            sigma=float(raw.get("sigma", 0.0)),
            sampler=sampler,
        )
        _emit(args, mc.report_json(reports))
        return raw

    points = raw.pop("points", None)
    designs = [mc.ExperimentConfig.from_dict(d) for d in _designs(raw, args.full)]
    if args.study == "rejection":
        table = mc.RejectionTable()
        for cfg in designs:
            table.extend(mc.run_experiment(cfg, workers=args.workers))
        _emit(args, table.to_long_csv() if args.long else table.to_csv())
    elif args.study == "estimator":
        records = [r for cfg in designs for r in mc.run_estimator_study(cfg, workers=args.workers)]
        _emit(args, mc.estimates_to_csv(records))
    else:
        if not points:
            raise ValueError("a covariance study needs 'points': [[theta, z], ...]")
        reports = {
            f"k_n={cfg.k_n}": mc.validate_covariance(cfg, [tuple(p) for p in points]) for cfg in designs
        }
        _emit(args, mc.report_json(reports))
    return {"designs": [cfg.to_dict() for cfg in designs], "study": args.study, "points": points}


def cmd_rerun(argv_from_manifest: Path) -> int:
    manifest = json.loads(Path(argv_from_manifest).read_text())
    return main(manifest["argv"])


_COMMANDS = {"simulate": cmd_simulate, "test": cmd_test, "estimate": cmd_estimate, "mc": cmd_mc}


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "rerun":
        try:
            return cmd_rerun(args.manifest_file)
        except (OSError, ValueError, KeyError) as exc:
            sys.stderr.write(f"{PROG}: error: cannot replay manifest: {exc}\n")
            return 1
    started = time.time()
    try:
        config = _COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"{PROG} {args.command}: error: {exc}\n")
        return 2
    except (OSError, ValueError, KeyError, TypeError) as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        sys.stderr.write(f"{PROG}: error: {msg}\n")
        return 1
    _emit_manifest(args, argv, config, started, getattr(args, "seed", None))
    return 0


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    main_entry()

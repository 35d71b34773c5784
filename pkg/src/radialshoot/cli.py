"""Command-line front end: JSON configs in, CSV/JSON artifacts out.

Subcommands map one-to-one onto library operations:

  shoot    integrate one trajectory, classify it, write diagnostics
  sweep    classify a uniform grid of initial heights
  ground   bisect a bracket for the 0-node ground state
  bound    bracket the k-node bound state at the top of a range
  scan     enumerate k-node bound states in the window above beta*
  buildf   compose a spliced nonlinearity from donors and junctions
  example  rebuild the five-bracket jump construction end to end

Exit codes: 0 success, 1 configuration or schema errors, 2 inconclusive
classification (shoot only), 3 nothing found, 4 reproduction mismatch.
Floats in emitted JSON are fixed to 17 significant digits so identical
configs (and seeds) produce byte-identical artifacts.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Sequence

import numpy as np
from jsonschema import Draft202012Validator

from .classifier import classify
from .diagnostics import make_report
from .errors import (BracketBroken, InconclusiveClassification, NotFound,
                     RadialShootError, ReproductionFailed, SearchExhausted)
from .finder import (DEFAULT_ALPHA_TOL, find_ground_state,
                     find_kth_bound_state, multiplicity_scan,
                     reproduce_example, sweep)
from .integrator import (IVProblem, SolverOptions, integrate, landscape_for)
from .nonlinearity import NonlinearitySpec, build_jump_family

_SCHEMA_PATH = Path(__file__).with_name("config_schema.json")


class ConfigError(Exception):
    """Unusable configuration (file, schema, or flag level); exit code 1."""


# ---------------------------------------------------------------------------
# 17-significant-digit JSON emission
# ---------------------------------------------------------------------------

def _fmt_float(x: float) -> str:
    # JSON has no Infinity/NaN literals; none should reach artifacts, but
    # a null is more diagnosable downstream than an unparseable file.
    return format(x, ".17g") if math.isfinite(x) else "null"


def _emit(obj: Any, pad: str, out: list[str]) -> None:
    if obj is None:
        out.append("null")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_fmt_float(float(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, (list, tuple)):
        if len(obj) == 0:
            out.append("[]")
            return
        inner = pad + "  "
        out.append("[\n")
        for i, item in enumerate(obj):
            out.append(inner)
            _emit(item, inner, out)
            out.append(",\n" if i + 1 < len(obj) else "\n")
        out.append(pad + "]")
    elif isinstance(obj, dict):
        if len(obj) == 0:
            out.append("{}")
            return
        inner = pad + "  "
        out.append("{\n")
        items = list(obj.items())
        for i, (key, val) in enumerate(items):
            out.append(inner + json.dumps(str(key)) + ": ")
            _emit(val, inner, out)
            out.append(",\n" if i + 1 < len(items) else "\n")
        out.append(pad + "}")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__} to JSON")


def dumps17(payload: Any) -> str:
    """JSON text with every float rendered to 17 significant digits."""
    out: list[str] = []
    _emit(payload, "", out)
    out.append("\n")
    return "".join(out)


def _write_json(path: Path, payload: Any) -> None:
    path.write_text(dumps17(payload), encoding="utf-8")


# ---------------------------------------------------------------------------
# schema-violation line references
# ---------------------------------------------------------------------------

def _scan_string(text: str, i: int) -> tuple[str, int]:
    j = i + 1
    while j < len(text):
        if text[j] == "\\":
            j += 2
            continue
        if text[j] == '"':
            break
        j += 1
    return text[i + 1:j], j + 1


def _json_line(text: str, path: Sequence[object]) -> int | None:
    """1-based line of the value at `path` inside a JSON document.

    A minimal tokenizer that only tracks container nesting; enough to point
    a schema violation back at its line. Keys containing escapes are not
    resolved and simply fail to match (returns None, caller falls back to
    the path-only message).
    """
    comps = list(path)
    if not comps:
        return 1
    i, n = 0, len(text)
    # frames: [kind "o"/"a", on_path, next array index]
    stack: list[list] = []
    key: str | None = None
    expect_key = False
    child_on = [True]  # root value is trivially on the path

    def begin_value(pos: int) -> int | None:
        if not stack:
            child_on[0] = True
            return None
        kind, on_path, idx = stack[-1]
        comp: object = key if kind == "o" else idx
        if kind == "a":
            stack[-1][2] += 1
        depth = len(stack) - 1
        if on_path and depth < len(comps) and comp == comps[depth]:
            if depth + 1 == len(comps):
                return text.count("\n", 0, pos) + 1
            child_on[0] = True
        else:
            child_on[0] = False
        return None

    while i < n:
        c = text[i]
        if c in " \t\r\n:":
            i += 1
        elif c == ",":
            if stack and stack[-1][0] == "o":
                expect_key = True
            i += 1
        elif c in "{[":
            line = begin_value(i)
            if line is not None:
                return line
            stack.append(["o" if c == "{" else "a", child_on[0], 0])
            expect_key = c == "{"
            i += 1
        elif c in "}]":
            if not stack:
                return None
            stack.pop()
            expect_key = False
            i += 1
        elif c == '"':
            if stack and stack[-1][0] == "o" and expect_key:
                key, i = _scan_string(text, i)
                expect_key = False
            else:
                line = begin_value(i)
                if line is not None:
                    return line
                _, i = _scan_string(text, i)
        else:
            line = begin_value(i)
            if line is not None:
                return line
            while i < n and text[i] not in ",}] \t\r\n":
                i += 1
    return None


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

def _load_schema() -> dict:
    return json.loads(_SCHEMA_PATH.read_text(encoding="utf-8"))


def _validate_config(doc: dict, raw: str, source: str) -> None:
    errors = sorted(Draft202012Validator(_load_schema()).iter_errors(doc),
                    key=lambda e: list(e.absolute_path))
    if not errors:
        return
    err = errors[0]
    where = "/".join(str(p) for p in err.absolute_path) or "(top level)"
    line = _json_line(raw, list(err.absolute_path))
    at = f"{source}:{line}" if line is not None else source
    raise ConfigError(f"{at}: {where}: {err.message}")


def _resolve_spec(entry: object, base_dir: Path) -> NonlinearitySpec:
    if isinstance(entry, str):
        path = Path(entry)
        if not path.is_absolute():
            path = base_dir / path
        try:
            raw = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read nonlinearity file: {exc}")
        try:
            return NonlinearitySpec.from_json(raw)
        except (json.JSONDecodeError, ValueError, KeyError) as exc:
            raise ConfigError(f"{path}: bad nonlinearity document: {exc}")
    try:
        return NonlinearitySpec.from_dict(dict(entry))  # type: ignore[arg-type]
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"bad inline nonlinearity: {exc}")


@dataclass(frozen=True)
class RunConfig:
    """Everything one subcommand needs, merged from config file and flags.

    Flags override file values field by field; the nonlinearity and the
    jump/example blocks come from the file only. Paths inside the config
    resolve relative to the config file's directory.
    """

    command: str
    spec: NonlinearitySpec | None
    n_dim: int
    options: SolverOptions
    alpha: float | None
    alpha_range: tuple[float, float] | None
    grid: int | None
    k: int | None
    alpha_tol: float
    jump: dict | None
    example: dict
    output_dir: Path
    seed: int
    workers: int

    def header(self) -> dict:
        return {"command": self.command, "n_dim": self.n_dim,
                "seed": self.seed, "workers": self.workers,
                "solver": asdict(self.options)}


def _parse_range(raw: str) -> tuple[float, float]:
    parts = raw.split(":")
    if len(parts) != 2:
        raise ConfigError(f"--range expects lo:hi, got {raw!r}")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError:
        raise ConfigError(f"--range expects numbers, got {raw!r}")
    return lo, hi


def load_config(args: argparse.Namespace) -> RunConfig:
    doc: dict = {}
    base_dir = Path.cwd()
    if args.config is not None:
        path = Path(args.config)
        try:
            raw = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}")
        try:
            doc = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}: malformed JSON: "
                              f"{exc.msg} (column {exc.colno})")
        if not isinstance(doc, dict):
            raise ConfigError(f"{path}:1: config must be a JSON object")
        _validate_config(doc, raw, str(path))
        base_dir = path.parent

    spec = None
    if "nonlinearity" in doc:
        spec = _resolve_spec(doc["nonlinearity"], base_dir)

    jump = None
    if "jump" in doc:
        block = doc["jump"]
        jump = {"donors": [_resolve_spec(d, base_dir)
                           for d in block["donors"]],
                "junctions": [float(x) for x in block["junctions"]],
                "epsilons": [float(x) for x in block["epsilons"]],
                "amps_sq": [float(x) for x in block["amps_sq"]]}

    solver_block = dict(doc.get("solver", {}))
    if solver_block.get("max_nodes", 0) is None:
        solver_block.pop("max_nodes")
    for flag, field in (("rel_tol", "rel_tol"), ("abs_tol", "abs_tol"),
                        ("r_max", "r_max")):
        value = getattr(args, flag, None)
        if value is not None:
            solver_block[field] = value
    try:
        options = SolverOptions(**solver_block)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad solver options: {exc}")

    alpha = args.alpha if getattr(args, "alpha", None) is not None \
        else doc.get("alpha")
    if getattr(args, "range", None) is not None:
        alpha_range: tuple[float, float] | None = _parse_range(args.range)
    elif "range" in doc:
        alpha_range = (float(doc["range"][0]), float(doc["range"][1]))
    else:
        alpha_range = None
    grid = args.grid if getattr(args, "grid", None) is not None \
        else doc.get("grid")
    k = args.k if getattr(args, "k", None) is not None else doc.get("k")
    out_dir = args.out if args.out is not None \
        else doc.get("output_dir", ".")
    out_path = Path(out_dir)
    if not out_path.is_absolute() and "output_dir" in doc \
            and args.out is None:
        out_path = base_dir / out_path
    workers = args.workers if args.workers is not None \
        else doc.get("workers", os.cpu_count() or 1)

    return RunConfig(
        command=args.command,
        spec=spec,
        n_dim=int(doc.get("N", 3)),
        options=options,
        alpha=None if alpha is None else float(alpha),
        alpha_range=alpha_range,
        grid=None if grid is None else int(grid),
        k=None if k is None else int(k),
        alpha_tol=float(doc.get("alpha_tol", DEFAULT_ALPHA_TOL)),
        jump=jump,
        example=dict(doc.get("example", {})),
        output_dir=out_path,
        seed=int(args.seed if args.seed is not None else doc.get("seed", 0)),
        workers=int(workers),
    )


def _require_spec(config: RunConfig) -> NonlinearitySpec:
    if config.spec is None:
        raise ConfigError(f"{config.command} needs a 'nonlinearity' entry "
                          "in the config")
    return config.spec


def _require_range(config: RunConfig) -> tuple[float, float]:
    if config.alpha_range is None:
        raise ConfigError(f"{config.command} needs a height range "
                          "(config key 'range' or --range lo:hi)")
    return config.alpha_range


def _outdir(config: RunConfig) -> Path:
    config.output_dir.mkdir(parents=True, exist_ok=True)
    return config.output_dir


def _doc(config: RunConfig, **body: Any) -> dict:
    return {"run": config.header(), **body}


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_shoot(config: RunConfig) -> int:
    spec = _require_spec(config)
    if config.alpha is None:
        raise ConfigError("shoot needs an initial height "
                          "(config key 'alpha' or --alpha)")
    out = _outdir(config)
    traj = integrate(IVProblem(spec, config.n_dim, config.alpha,
                               config.options))
    report = make_report(traj)
    verdict = None
    note = ""
    try:
        verdict = classify(traj)
    except InconclusiveClassification as exc:
        note = exc.reason or str(exc)

    traj.to_csv(out / "trajectory.csv")
    _write_json(out / "events.json", _doc(config, **traj.sidecar_dict()))
    _write_json(out / "class.json", _doc(
        config, alpha=config.alpha,
        **{"class": None if verdict is None else verdict.to_dict()},
        label=None if verdict is None else str(verdict), note=note))
    _write_json(out / "diagnostics.json", _doc(config, **report.to_dict()))

    label = str(verdict) if verdict is not None else f"inconclusive: {note}"
    print(f"alpha = {config.alpha:.17g}  ->  {label}")
    print(f"terminal: {traj.sidecar_dict()['terminal']['reason']} at "
          f"r = {traj.r[-1]:.17g}  ({len(traj.events)} events)")
    print(f"wrote trajectory.csv events.json class.json diagnostics.json "
          f"to {out}")
    return 0 if verdict is not None else 2


def _print_sweep_table(points) -> None:
    print(f"{'alpha':>24}  {'class':<10} note")
    for pt in points:
        label = str(pt.verdict) if pt.verdict is not None else "?"
        print(f"{pt.alpha:>24.17g}  {label:<10} {pt.note}")


def cmd_sweep(config: RunConfig) -> int:
    spec = _require_spec(config)
    rng = _require_range(config)
    grid = config.grid if config.grid is not None else 33
    out = _outdir(config)
    smap = sweep(spec, config.n_dim, rng, grid, options=config.options,
                 workers=config.workers)
    _write_json(out / "sweep.json", _doc(config, **smap.to_dict()))
    _print_sweep_table(smap.grid)
    for lo, hi in smap.transition_brackets():
        print(f"transition in [{lo:.17g}, {hi:.17g}]")
    print(f"wrote sweep.json to {out}")
    return 0


def _emit_bound_state(config: RunConfig, state, stem: str) -> None:
    out = _outdir(config)
    witness_name = f"{stem}_witness.csv"
    state.witness.to_csv(out / witness_name)
    _write_json(out / f"{stem}.json",
                _doc(config, **state.to_dict(witness_ref=witness_name)))
    lo, hi = state.bracket
    print(f"k = {state.k}: alpha in [{lo:.17g}, {hi:.17g}] "
          f"(width {state.width:.3g})")
    print(f"wrote {stem}.json and {witness_name} to {out}")


def cmd_ground(config: RunConfig) -> int:
    spec = _require_spec(config)
    rng = _require_range(config)
    state = find_ground_state(spec, config.n_dim, rng,
                              options=config.options,
                              alpha_tol=config.alpha_tol)
    _emit_bound_state(config, state, "ground")
    return 0


def cmd_bound(config: RunConfig) -> int:
    spec = _require_spec(config)
    rng = _require_range(config)
    if config.k is None:
        raise ConfigError("bound needs a node count (config key 'k' or --k)")
    state = find_kth_bound_state(
        spec, config.n_dim, config.k, rng, options=config.options,
        grid_size=config.grid if config.grid is not None else 33,
        alpha_tol=config.alpha_tol, workers=config.workers)
    _emit_bound_state(config, state, "bound")
    return 0


def cmd_scan(config: RunConfig) -> int:
    spec = _require_spec(config)
    if config.k is None:
        raise ConfigError("scan needs a node count (config key 'k' or --k)")
    out = _outdir(config)
    lsc = landscape_for(spec, 0.0)
    states = multiplicity_scan(
        spec, lsc, config.n_dim, config.k, options=config.options,
        grid_size=config.grid if config.grid is not None else 120,
        alpha_tol=config.alpha_tol, workers=config.workers)
    entries = []
    for i, state in enumerate(states):
        witness_name = f"scan_witness_{i}.csv"
        state.witness.to_csv(out / witness_name)
        entries.append(state.to_dict(witness_ref=witness_name))
    _write_json(out / "scan.json", _doc(
        config, k=config.k, beta_star=lsc.beta_star,
        gamma_top=lsc.gamma_seq[-1] if lsc.gamma_seq else None,
        states=entries))
    print(f"{len(states)} bound state(s) with k = {config.k}:")
    for state in states:
        lo, hi = state.bracket
        print(f"  alpha in [{lo:.17g}, {hi:.17g}]")
    print(f"wrote scan.json to {out}")
    return 0


def cmd_buildf(config: RunConfig) -> int:
    if config.jump is None:
        raise ConfigError("buildf needs a 'jump' block "
                          "(donors, junctions, epsilons, amps_sq)")
    out = _outdir(config)
    block = config.jump
    family = build_jump_family(block["donors"], block["junctions"],
                               block["epsilons"], block["amps_sq"])
    text = dumps17(family.to_dict())
    if NonlinearitySpec.from_json(text) != family:
        raise RuntimeError("family document does not round-trip")
    (out / "family.json").write_text(text, encoding="utf-8")
    print(f"{'piece':>5}  {'lo':>24}  {'hi':>24}  kind")
    for i, piece in enumerate(family.pieces):
        kind = piece.form.to_dict()["kind"]
        print(f"{i:>5}  {piece.lo:>24.17g}  {piece.hi:>24.17g}  {kind}")
    print(f"wrote family.json to {out}")
    return 0


def cmd_example(config: RunConfig) -> int:
    out = _outdir(config)
    kwargs: dict = {"options": config.options}
    block = config.example
    if "eps" in block:
        kwargs["eps"] = float(block["eps"])
    if "amps_sq" in block:
        kwargs["amps_sq"] = tuple(float(a) for a in block["amps_sq"])
    if "alpha_tol" in block:
        kwargs["alpha_tol"] = float(block["alpha_tol"])
    report = reproduce_example(**kwargs)
    _write_json(out / "example.json", _doc(config, **report.to_dict()))
    family_text = dumps17(report.spec.to_dict())
    (out / "example_family.json").write_text(family_text, encoding="utf-8")
    print(f"alpha* = {report.alpha_star:.17g}")
    print(f"{'probe':>6}  {'alpha':>24}  class")
    for i, (alpha, cls) in enumerate(zip(report.alphas, report.classes)):
        print(f"{i + 1:>6}  {alpha:>24.17g}  {cls}")
    print(f"{len(report.brackets)} ground-state brackets:")
    for state in report.brackets:
        lo, hi = state.bracket
        print(f"  [{lo:.17g}, {hi:.17g}]")
    print(f"wrote example.json and example_family.json to {out}")
    return 0


_HANDLERS = {"shoot": cmd_shoot, "sweep": cmd_sweep, "ground": cmd_ground,
             "bound": cmd_bound, "scan": cmd_scan, "buildf": cmd_buildf,
             "example": cmd_example}


# ---------------------------------------------------------------------------
# argument parsing and dispatch
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="radialshoot",
        description="Radial shooting experiments: classify trajectories, "
                    "bracket bound states, rebuild the jump construction.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", default=None,
                        help="JSON run configuration (schema shipped "
                             "in-package)")
    common.add_argument("--out", metavar="DIR", default=None,
                        help="output directory (default: config output_dir "
                             "or the working directory)")
    common.add_argument("--workers", type=int, default=None, metavar="N",
                        help="parallel sweep workers (default: all cores)")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--rel-tol", dest="rel_tol", type=float, default=None)
    common.add_argument("--abs-tol", dest="abs_tol", type=float, default=None)
    common.add_argument("--r-max", dest="r_max", type=float, default=None)

    sub = parser.add_subparsers(dest="command", required=True)

    shoot = sub.add_parser("shoot", parents=[common],
                           help="integrate and classify one shot")
    shoot.add_argument("--alpha", type=float, default=None)

    sweep_p = sub.add_parser("sweep", parents=[common],
                             help="classify a grid of initial heights")
    sweep_p.add_argument("--range", metavar="LO:HI", default=None)
    sweep_p.add_argument("--grid", type=int, default=None, metavar="N")

    ground = sub.add_parser("ground", parents=[common],
                            help="bisect a ground-state bracket")
    ground.add_argument("--range", metavar="LO:HI", default=None)

    bound = sub.add_parser("bound", parents=[common],
                           help="bracket the k-node bound state in a range")
    bound.add_argument("--range", metavar="LO:HI", default=None)
    bound.add_argument("--k", type=int, default=None)
    bound.add_argument("--grid", type=int, default=None, metavar="N")

    scan = sub.add_parser("scan", parents=[common],
                          help="enumerate k-node states above beta*")
    scan.add_argument("--k", type=int, default=None)
    scan.add_argument("--grid", type=int, default=None, metavar="N")

    sub.add_parser("buildf", parents=[common],
                   help="compose a spliced nonlinearity")
    sub.add_parser("example", parents=[common],
                   help="rebuild the five-bracket construction")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = load_config(args)
        return _HANDLERS[args.command](config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (NotFound, SearchExhausted, BracketBroken) as exc:
        print(f"nothing found: {exc}", file=sys.stderr)
        return 3
    except ReproductionFailed as exc:
        print(f"reproduction failed at stage {exc.stage!r}: {exc}",
              file=sys.stderr)
        return 4
    except (RadialShootError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

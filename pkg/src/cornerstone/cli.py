"""Command line runner for the verification suites.

Writes ``results.json`` (one entry per check: name, measured, tolerance,
pass) and ``tables.csv`` to the output directory. Exit status is 0 when
every check passes, 1 when one fails and 2 on a configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile

from .bcalc.grid import ModelGrid
from .decoupage import DecoupageSpec
from .errors import SpecError
from .suites import RUNNERS, SUITES, TOLERANCES, Settings

CONFIG_KEYS = {"spec", "grid", "seed", "out", "tol", "samples"}
TABLE_COLUMNS = ("suite", "table", "op", "P", "radius", "value", "verdict")
DEFAULT_OUT = "cornerstone-out"


class ConfigError(Exception):
    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="cornerstone",
        description="Check groupoid identities and b-calculus numerics.",
        epilog="Tolerances are overridden with --tol.<name> VALUE, e.g. --tol.indicial.homomorphism 1e-7.",
    )
    p.add_argument("suite", choices=SUITES + ("all",))
    p.add_argument("--spec", help="decoupage JSON file")
    p.add_argument("--grid", type=int, help="grid points for the kernel suites (power of two >= 256)")
    p.add_argument("--seed", type=int, help="RNG seed (required here or in --config)")
    p.add_argument("--out", help=f"output directory (default {DEFAULT_OUT}; CORNERSTONE_OUT wins)")
    p.add_argument("--config", help="JSON file with keys " + ", ".join(sorted(CONFIG_KEYS)))
    return p


def _parse_tol_flags(extra: list) -> dict:
    out = {}
    it = iter(range(len(extra)))
    for i in it:
        arg = extra[i]
        if not arg.startswith("--tol."):
            raise ConfigError(arg.lstrip("-").split("=")[0] or arg, "unrecognized argument")
        if "=" in arg:
            name, value = arg[len("--tol."):].split("=", 1)
        else:
            name = arg[len("--tol."):]
            try:
                value = extra[i + 1]
            except IndexError:
                raise ConfigError(f"tol.{name}", "missing value") from None
            next(it, None)
        out[name] = value
    return out


def _tolerances(raw: dict) -> dict:
    out = {}
    for name, value in raw.items():
        if name not in TOLERANCES:
            raise ConfigError(f"tol.{name}", "unknown tolerance")
        try:
            v = float(value)
        except (TypeError, ValueError):
            raise ConfigError(f"tol.{name}", f"not a number: {value!r}") from None
        out[name] = v
    return out


def resolve(args: argparse.Namespace, extra: list) -> tuple:
    """Merge ``--config``, flags and the environment into settings and an output path."""
    cfg = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except OSError as exc:
            raise ConfigError("config", str(exc)) from None
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"invalid JSON: {exc.msg}") from None
        if not isinstance(cfg, dict):
            raise ConfigError("config", "expected a JSON object")
        unknown = set(cfg) - CONFIG_KEYS
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown config key")
    tol_raw = dict(cfg.get("tol", {}))
    if not isinstance(cfg.get("tol", {}), dict):
        raise ConfigError("tol", "expected an object")
    tol_raw.update(_parse_tol_flags(extra))

    seed = args.seed if args.seed is not None else cfg.get("seed")
    if seed is None:
        raise ConfigError("seed", "a seed is required")
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError("seed", "must be a non-negative integer")

    grid = args.grid if args.grid is not None else cfg.get("grid", 1024)
    if isinstance(grid, bool) or not isinstance(grid, int):
        raise ConfigError("grid", "must be an integer")
    try:
        ModelGrid(20.0, grid)
    except ValueError as exc:
        raise ConfigError("grid", str(exc)) from None

    samples = cfg.get("samples", 10_000)
    if isinstance(samples, bool) or not isinstance(samples, int) or samples < 1:
        raise ConfigError("samples", "must be a positive integer")

    spec_path = args.spec or cfg.get("spec")
    spec = None
    if spec_path:
        try:
            spec = DecoupageSpec.load(spec_path)
        except OSError as exc:
            raise ConfigError("spec", str(exc)) from None
        except SpecError as exc:
            raise ConfigError(f"spec.{exc.key}", str(exc).split(": ", 1)[-1]) from None

    out = os.environ.get("CORNERSTONE_OUT") or args.out or cfg.get("out") or DEFAULT_OUT
    settings = Settings(seed=seed, grid=grid, spec=spec, tolerances=_tolerances(tol_raw), samples=samples)
    echo = {"suite": args.suite, "seed": seed, "grid": grid, "samples": samples,
            "spec": spec.to_dict() if spec else None, "tol": settings.tolerances}
    return settings, out, echo


def _atomic_write(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run(settings: Settings, suites, out: str, echo: dict) -> int:
    results = [RUNNERS[name](settings) for name in suites]
    doc = {
        "config": echo,
        "pass": all(r.passed for r in results),
        "suites": {
            r.suite: {"pass": r.passed, "checks": sorted((c.to_dict() for c in r.checks), key=lambda d: d["name"])}
            for r in results
        },
    }
    os.makedirs(out, exist_ok=True)
    _atomic_write(os.path.join(out, "results.json"), json.dumps(doc, indent=2, sort_keys=True) + "\n")
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=TABLE_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for r in results:
        for row in r.tables:
            writer.writerow({"suite": r.suite, **row})
    _atomic_write(os.path.join(out, "tables.csv"), buf.getvalue())
    for r in results:
        for c in sorted(r.checks, key=lambda c: c.name):
            print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}  measured={c.measured:.6g}  tol={c.tolerance:g}")
    return 0 if doc["pass"] else 1


def main(argv=None) -> int:
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    try:
        settings, out, echo = resolve(args, extra)
    except ConfigError as exc:
        print(f"cornerstone: config error: {exc}", file=sys.stderr)
        return 2
    suites = SUITES if args.suite == "all" else (args.suite,)
    return run(settings, suites, out, echo)


if __name__ == "__main__":
    sys.exit(main())

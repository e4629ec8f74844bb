"""Command-line runner: ``revdiff run <experiment> [options]``.

Each run writes ``report.json`` plus CSV datasets under the output
directory and prints a one-line verdict per assertion. Exit status is 0 when
every assertion passes, 1 when one fails and 2 for a bad configuration.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

from .config import EXPERIMENTS, ConfigError, SimConfig, config_help, load_config
from .experiments import Result, run_experiment

__all__ = ["main", "run", "build_parser", "write_report"]

# dedicated flags and the config key each one sets
_FLAG_KEYS = {
    "seed": "general.seed",
    "out": "general.out_dir",
    "threads": "general.threads",
    "z": "event.z",
    "c1": "spin.c1",
    "c2": "spin.c2",
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="revdiff",
        description="Run reversible-diffusion experiments and write JSON/CSV reports.",
        epilog=config_help() + "\n\nAny key can be overridden with --set section.key=value or --section.key value.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser(
        "run",
        help="run one experiment or all of them",
        epilog=config_help(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    r.add_argument("experiment", choices=EXPERIMENTS + ("all",))
    r.add_argument("--config", metavar="PATH", help="key = value file with optional [section] headers")
    r.add_argument("--seed", help="64-bit run seed (default 0)")
    r.add_argument("--out", metavar="DIR", help="output directory (REVDIFF_OUT overrides the config value)")
    r.add_argument("--threads", help="worker threads, 0 = all cores; never changes results")
    r.add_argument("--z", help="complex value for the eventcalc worked table, e.g. 0.6+0.3i")
    r.add_argument("--c1", help="spin amplitude of up, e.g. 0.6 or 1/sqrt(2)")
    r.add_argument("--c2", help="spin amplitude of down, e.g. 0.8i")
    r.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="config override")
    return p


def _overrides(args: argparse.Namespace, extra: list[str]) -> dict:
    ov = {}
    for flag, key in _FLAG_KEYS.items():
        v = getattr(args, flag)
        if v is not None:
            ov[key] = v
    for item in args.set:
        key, sep, val = item.partition("=")
        if not sep:
            raise ConfigError(f"{item}: --set expects section.key=value")
        ov[key.strip()] = val.strip()
    it = iter(extra)
    for tok in it:
        if not tok.startswith("--") or "." not in tok:
            raise ConfigError(f"{tok}: unrecognised argument")
        key, sep, val = tok[2:].partition("=")
        if not sep:
            val = next(it, None)
            if val is None:
                raise ConfigError(f"{key}: missing value")
        ov[key] = val
    return ov


def _clean(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def write_report(path: Path, experiment: str, cfg: SimConfig, res: Result, wall: float) -> dict:
    report = {
        "experiment": experiment,
        "config_echo": cfg.to_dict(),
        "metrics": {k: _clean(v) for k, v in res.metrics.items()},
        "assertions": [{**a, "value": _clean(a["value"])} for a in res.assertions],
        "wall_time": wall,
        "artifacts": res.artifacts,
    }
    path.write_text(json.dumps(report, indent=2, sort_keys=False) + "\n", encoding="utf-8")
    return report


def _run_one(name: str, cfg: SimConfig, out: Path) -> tuple[Result, float]:
    t0 = time.perf_counter()
    res = run_experiment(name, cfg, out)
    wall = time.perf_counter() - t0
    write_report(out / "report.json", name, cfg, res, wall)
    return res, wall


def _summarise(name: str, res: Result, wall: float, stream) -> None:
    print(f"== {name} ({wall:.1f} s)", file=stream)
    for line in res.lines:
        print(f"   {line}", file=stream)
    for a in res.assertions:
        tag = "PASS" if a["pass"] else "FAIL"
        print(f"   {tag} {a['name']} = {a['value']:.6g} ({a['bound']})", file=stream)


def run(argv: list[str] | None = None, stream=None) -> tuple[int, dict | None]:
    """Parse ``argv``, run, and return (exit status, report dict)."""
    stream = stream or sys.stdout
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    try:
        cfg = load_config(args.config, _overrides(args, extra))
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2, None
    cfg.general.experiment = args.experiment
    out = cfg.out_dir
    names = EXPERIMENTS if args.experiment == "all" else (args.experiment,)

    combined = Result()
    t0 = time.perf_counter()
    for name in names:
        sub = out / name if args.experiment == "all" else out
        res, wall = _run_one(name, cfg, sub)
        _summarise(name, res, wall, stream)
        if args.experiment == "all":
            combined.metrics.update({f"{name}.{k}": v for k, v in res.metrics.items()})
            combined.assertions += [{**a, "name": f"{name}.{a['name']}"} for a in res.assertions]
            combined.artifacts += res.artifacts + [str(sub / "report.json")]
        else:
            combined = res
    wall = time.perf_counter() - t0
    report = write_report(out / "report.json", args.experiment, cfg, combined, wall)

    failed = [a["name"] for a in combined.assertions if not a["pass"]]
    if failed:
        for name in failed:
            print(f"assertion failed: {name}", file=sys.stderr)
        return 1, report
    print(f"all {len(combined.assertions)} assertions passed; report at {out / 'report.json'}", file=stream)
    return 0, report


def main(argv: list[str] | None = None) -> int:
    code, _ = run(argv)
    return code


if __name__ == "__main__":
    sys.exit(main())

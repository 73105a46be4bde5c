"""Command-line driver.

    qdcross tile|qd-lambda|qd-crossed --config <path> --out <dir> [--preset bd|rotation|pv] [--threads k]

Exit codes: 0 all checks pass, 1 configuration or IO error, 2 a mathematical
assertion failed.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .config import ConfigError, RunConfig, preset
from .folner import TilingError
from .groups import GroupError, IndexCapError
from .pipeline import crossed_record, lambda_record, tile_record
from .projection import CertificateError

log = logging.getLogger("qdcross")

EXIT_OK, EXIT_CONFIG, EXIT_MATH = 0, 1, 2

LAMBDA_COLUMNS = ["n", "|F|", "|K|", "index", "generator", "ratio", "norm", "envelope"]
CROSSED_COLUMNS = [
    "n",
    "index",
    "element",
    "defect",
    "norm",
    "max_block_norm",
    "proof_bound",
    "orthogonality_residual",
    "passed",
]


def _map_levels(fn, cfg: RunConfig, threads: int):
    if threads <= 1:
        return [fn(lv) for lv in cfg.levels]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, cfg.levels))


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _write_csv(path: Path, columns: list[str], rows: list[dict]) -> None:
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)


def _summary(command: str, cfg: RunConfig, levels: list[dict]) -> dict:
    failures = [lv["n"] for lv in levels if not lv["passed"]]
    return {
        "command": command,
        "group": cfg.group.to_dict(),
        "config": cfg.raw,
        "levels": levels,
        "summary": {"passed": not failures, "failed_levels": failures},
    }


def cmd_tile(cfg: RunConfig, out: Path, threads: int = 1) -> dict:
    results = _map_levels(lambda lv: tile_record(cfg.group, lv, cfg), cfg, threads)
    tdir = out / "tilings"
    tdir.mkdir(parents=True, exist_ok=True)
    levels = []
    for rec, T in results:
        path = tdir / f"level_{rec['n']}.json"
        path.write_text(T.to_json() + "\n")
        rec["artifact"] = str(path.relative_to(out))
        levels.append(rec)
    report = _summary("tile", cfg, levels)
    _write_json(out / "tile_report.json", report)
    return report


def cmd_qd_lambda(cfg: RunConfig, out: Path, threads: int = 1) -> dict:
    results = _map_levels(lambda lv: lambda_record(cfg.group, lv, cfg), cfg, threads)
    levels = [rec for rec, _ in results]
    rows = [row for _, rs in results for row in rs]
    report = _summary("qd-lambda", cfg, levels)
    _write_json(out / "qd_lambda_report.json", report)
    _write_csv(out / "qd_lambda_decay.csv", LAMBDA_COLUMNS, rows)
    return report


def cmd_qd_crossed(cfg: RunConfig, out: Path, threads: int = 1) -> dict:
    inst = cfg.action_instance()
    results = _map_levels(lambda lv: crossed_record(cfg.group, lv, cfg, inst), cfg, threads)
    levels = [rec for rec, _ in results]
    rows = [row for _, rs in results for row in rs]
    report = _summary("qd-crossed", cfg, levels)
    report["note"] = (
        "checks quantify over the finite list of test elements, not a dense subset of A"
    )
    _write_json(out / "qd_crossed_report.json", report)
    _write_csv(out / "qd_crossed.csv", CROSSED_COLUMNS, rows)
    return report


COMMANDS = {"tile": cmd_tile, "qd-lambda": cmd_qd_lambda, "qd-crossed": cmd_qd_crossed}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qdcross", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", type=Path, help="run configuration (JSON)")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--preset", choices=["bd", "rotation", "pv"])
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.config is not None:
            cfg = RunConfig.load(args.config)
            if args.preset:
                log.warning("--preset ignored because --config was given")
        elif args.preset:
            cfg = RunConfig.from_dict(preset(args.preset))
        else:
            raise ConfigError("either --config or --preset is required")
        args.out.mkdir(parents=True, exist_ok=True)
    except (ConfigError, GroupError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        report = COMMANDS[args.command](cfg, args.out, max(1, args.threads))
    except (CertificateError, TilingError) as exc:
        print(f"assertion failed: {exc}", file=sys.stderr)
        return EXIT_MATH
    except (ConfigError, IndexCapError, GroupError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    passed = report["summary"]["passed"]
    for lv in report["levels"]:
        log.info("n=%s %s", lv["n"], "pass" if lv["passed"] else "FAIL")
    print(f"{args.command}: {'PASS' if passed else 'FAIL'} ({len(report['levels'])} levels) -> {args.out}")
    return EXIT_OK if passed else EXIT_MATH


if __name__ == "__main__":
    sys.exit(main())

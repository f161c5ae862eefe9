"""Command line entry point: ``reqsolve --config FILE``."""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

from .config import Config, load_config
from .errors import ReqsolveError
from .report import ERROR, InferenceReport
from .strategy import run_inference
from .versioning import render_requirements

log = logging.getLogger("reqsolve")

REQUIREMENTS_OUT = "requirements.out.txt"
REPORT_JSON = "report.json"
REPORT_TXT = "report.txt"


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="reqsolve",
        description="Infer pinned requirements that stay compatible after upgrading one library.",
    )
    p.add_argument("--config", required=True, type=Path, help="key=value or JSON configuration file")
    p.add_argument("--offline", action="store_true", help="use only the local knowledge cache")
    p.add_argument("--index-url", help="package index base URL (http(s):// or file://)")
    p.add_argument("--dump-formula", type=Path, metavar="FILE",
                   help="write the first version-constraint problem as SMT-LIB")
    p.add_argument("--max-iterations", type=int, help="loop budget (default 50)")
    p.add_argument("--output-dir", type=Path, help="where to write the requirements and reports")
    p.add_argument("--verbose", "-v", action="count", default=0, help="more logging (repeatable)")
    return p


def _apply_flags(cfg: Config, args: argparse.Namespace) -> Config:
    if args.offline:
        cfg.offline = True
    if args.index_url:
        cfg.index_url = args.index_url
    if args.max_iterations is not None:
        if args.max_iterations <= 0:
            raise SystemExit("--max-iterations must be positive")
        cfg.max_iterations = args.max_iterations
    if args.output_dir is not None:
        cfg.output_dir = args.output_dir.resolve()
    return cfg


def _write_outputs(out_dir: Path, report: InferenceReport) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    if report.final is not None:
        (out_dir / REQUIREMENTS_OUT).write_text(render_requirements(report.final), encoding="utf-8")
    (out_dir / REPORT_JSON).write_text(report.render_json(), encoding="utf-8")
    (out_dir / REPORT_TXT).write_text(report.render_text(), encoding="utf-8")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")

    out_dir = (args.output_dir or args.config.resolve().parent).resolve()
    started = time.monotonic()
    try:
        cfg = _apply_flags(load_config(args.config), args)
        out_dir = cfg.output_dir or cfg.requirements_path.parent
        _final, report = run_inference(cfg, dump_formula=args.dump_formula)
    except ReqsolveError as exc:
        log.error("%s", exc)
        report = InferenceReport(verdict=ERROR, exit_code=1, reason=str(exc))
        report.elapsed = time.monotonic() - started
        try:
            _write_outputs(out_dir, report)
        except OSError:
            pass
        return 1

    _write_outputs(out_dir, report)
    print(f"{report.verdict}: wrote {out_dir / REQUIREMENTS_OUT}", file=sys.stderr)
    return report.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

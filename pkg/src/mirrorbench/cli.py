"""Command-line entry point: ``mirrorbench [global flags] <stage> [stage flags]``."""
from __future__ import annotations

import argparse
import logging
import shlex
import sys
from pathlib import Path
from typing import Any, Sequence

from .campaign import (
    STAGES,
    CampaignConfig,
    ConfigError,
    StageError,
    load_campaign_config,
    replay,
    run_campaign,
    run_stage,
)
from .compiler.graphs import GRAPH_KINDS

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_STAGE = 3

log = logging.getLogger("mirrorbench")


class _ConfigArgError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        raise _ConfigArgError(message)


def _shape_list(text: str) -> list[tuple[int, int]]:
    out = []
    for part in text.split(","):
        try:
            n, d = part.lower().split("x")
            out.append((int(n), int(d)))
        except ValueError as exc:
            raise argparse.ArgumentTypeError(f"shapes look like 3x3,4x4; got {part!r}") from exc
    return out


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mirrorbench", description="Full-stack mirror-circuit fidelity benchmarks.")
    p.add_argument("--config", type=Path, help="campaign config (JSON)")
    p.add_argument("--seed", type=int, help="root seed")
    p.add_argument("--jobs", type=int, default=1, help="parallel workers within a stage")
    p.add_argument("--campaign", type=Path, help="campaign directory (defaults to the config's output_dir)")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="sample high-level circuits")
    g.add_argument("--family", choices=("qv", "grid", "line", "hamsim"))
    g.add_argument("--shapes", type=_shape_list, help="e.g. 3x3,4x4")
    g.add_argument("--circuits", type=int, dest="circuits_per_shape")

    c = sub.add_parser("compile", help="compile circuits to the device")
    c.add_argument("--graph", choices=sorted(set(GRAPH_KINDS) | {"heavyhex"}))
    c.add_argument("--dd", action="store_true", default=None)
    c.add_argument("--seed", type=int, dest="stage_seed")
    c.add_argument("--random-placement", action="store_true", default=None)
    c.add_argument("--preprocessor", type=shlex.split, help='external compiler command, e.g. "python my_compiler.py"')

    m = sub.add_parser("mirror", help="build mirror-circuit suites")
    m.add_argument("--k1", type=int)
    m.add_argument("--k2", type=int)
    m.add_argument("--k3", type=int)
    m.add_argument("--seed", type=int, dest="stage_seed")
    m.add_argument("--no-perm-trick", action="store_true")

    s = sub.add_parser("simulate", help="sample counts from the noisy simulator")
    s.add_argument("--shots", type=int)
    s.add_argument("--error-model", type=str)
    s.add_argument("--method", choices=("auto", "exact", "trajectory"))
    s.add_argument("--seed", type=int, dest="stage_seed")

    a = sub.add_parser("analyze", help="estimate fidelities and fit the volumetric grid")
    a.add_argument("--resamples", type=int, dest="bootstrap_resamples")
    a.add_argument("--confidence", type=float)
    a.add_argument("--no-oracle", action="store_true")

    sub.add_parser("report", help="render report.md from results.json")
    sub.add_parser("run", help="run every stage")
    r = sub.add_parser("replay", help="recompute a stage and everything after it")
    r.add_argument("stage", choices=STAGES)
    return p


def _resolve_config(args: argparse.Namespace) -> tuple[CampaignConfig, Path]:
    if args.config is not None:
        cfg = CampaignConfig.load(args.config)
    elif args.campaign is not None and (args.campaign / "manifest.json").is_file():
        cfg = load_campaign_config(args.campaign)
    else:
        cfg = CampaignConfig()
    over: dict[str, Any] = {"seed": args.seed}
    for name in ("family", "shapes", "circuits_per_shape", "graph", "dd", "random_placement", "shots", "method",
                 "bootstrap_resamples", "confidence"):
        over[name] = getattr(args, name, None)
    if getattr(args, "preprocessor", None):
        over["preprocessor"] = tuple(args.preprocessor)
    if getattr(args, "error_model", None):
        over["error_model"] = str(Path(args.error_model).resolve())
    if args.command == "mirror":
        k = list(cfg.k)
        for i, name in enumerate(("k1", "k2", "k3")):
            if getattr(args, name) is not None:
                k[i] = getattr(args, name)
        over["k"] = tuple(k)
        if args.no_perm_trick:
            over["perm_trick"] = False
    if getattr(args, "no_oracle", False):
        over["oracle"] = False
    if getattr(args, "stage_seed", None) is not None:
        over["stage_seeds"] = {**cfg.stage_seeds, args.command: args.stage_seed}
    cfg = cfg.with_overrides(**over)
    root = args.campaign if args.campaign is not None else Path(cfg.base_dir) / cfg.output_dir
    return cfg, root


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _ConfigArgError as exc:
        print(f"mirrorbench: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.jobs < 1:
        print("mirrorbench: error: --jobs must be positive", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "replay":
            if args.campaign is None:
                raise ConfigError("replay needs --campaign")
            cfg = None
            if args.config is not None or args.seed is not None:
                cfg, _ = _resolve_config(args)
            replay(args.campaign, args.stage, cfg, jobs=args.jobs)
            root = args.campaign
        else:
            cfg, root = _resolve_config(args)
            if args.command == "run":
                run_campaign(cfg, root, jobs=args.jobs)
            else:
                run_stage(cfg, args.command, root, jobs=args.jobs)
    except ConfigError as exc:
        print(f"mirrorbench: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StageError as exc:
        print(f"mirrorbench: stage failure: {exc}", file=sys.stderr)
        return EXIT_STAGE
    if args.command in ("report", "run", "replay"):
        report = Path(root) / "report.md"
        if report.is_file():
            print(report.read_text(), end="")
    log.info("done: %s", root)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

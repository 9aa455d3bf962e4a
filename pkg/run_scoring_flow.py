import os
import sys
import json
import logging
import argparse
from dataclasses import fields
from typing import Any, Dict, List, Optional

import geojson

# Add the project root to Python path
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from src.config.settings import CONFIG_KEYS, load_settings
from src.core.errors import InvalidParameterError, ScoringFlowError
from src.features.keywords import read_keyword_set
from src.geo.projection import GeoPoint, LocalProjection
from src.model.parsing import read_streets
from src.pipeline.agreement import annotation_agreement
from src.pipeline.orchestrator import COMMANDS, ScoringOrchestrator
from src.pipeline.reports import report_document
from src.pipeline.synth import SynthSpec, synth_city
from src.score.network import build_network, walkhood, walkhood_feature

logger = logging.getLogger("run_scoring_flow")

# config keys that are switches: "--strict" alone means true
SWITCHES = ("strict", "strict_stats")
SHORT_ALIASES = {"streets_path": "--streets", "photos_path": "--photos", "venues_path": "--venues"}


def _flag_names(key: str) -> List[str]:
    names = [f"--{key.replace('_', '-')}"]
    if "_" in key:
        names.append(f"--{key}")
    if key in SHORT_ALIASES:
        names.append(SHORT_ALIASES[key])
    return names


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("configuration (flags override the config file and environment)")
    group.add_argument("--config", "-c", help="TOML config file")
    for key in CONFIG_KEYS:
        if key in SWITCHES:
            group.add_argument(*_flag_names(key), dest=key, nargs="?", const="true", default=None)
        else:
            group.add_argument(*_flag_names(key), dest=key, default=None)


def _add_synth_flags(parser: argparse.ArgumentParser) -> None:
    for f in fields(SynthSpec):
        names = [f"--{f.name.replace('_', '-')}"] + ([f"--{f.name}"] if "_" in f.name else [])
        parser.add_argument(*names, dest=f"synth_{f.name}", default=None, type=float if f.name == "extent" else type(f.default))
    parser.add_argument("--output-dir", "--output_dir", "-o", dest="synth_output_dir", default="synthetic")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Score street segments from geotagged photos and venues")
    parser.add_argument("--log-level", "--log_level", default="INFO",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="Logging level")
    sub = parser.add_subparsers(dest="command", required=True)

    helps = {
        "ingest": "Validate inputs and print a summary",
        "join": "Write photo/venue to segment assignments",
        "features": "Write per-segment features",
        "metrics": "Write per-segment metrics",
        "regress": "Write venue category regressions",
        "curve": "Write correlation stability curves",
        "bins": "Write metric bin summaries",
        "score": "Write the scored streets GeoJSON",
        "run": "Run the full pipeline",
    }
    for command in COMMANDS:
        p = sub.add_parser(command, help=helps[command])
        _add_config_flags(p)
        if command == "features":
            p.add_argument("--assignments", help="Use a join output instead of joining again")

    p = sub.add_parser("walkhood", help="Write the area reachable on foot from a point")
    _add_config_flags(p)
    p.add_argument("--lon", type=float, required=True, help="Origin longitude")
    p.add_argument("--lat", type=float, required=True, help="Origin latitude")
    p.add_argument("--output", "-o", help="Output file (default: stdout)")

    p = sub.add_parser("synth", help="Generate a synthetic city")
    _add_synth_flags(p)

    p = sub.add_parser("agree", help="Agreement between annotators' keyword lists")
    p.add_argument("keyword_files", nargs="+", help="One keyword per line; two or more files")
    p.add_argument("--output", "-o", help="Output file (default: stdout)")
    return parser


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    return {key: getattr(args, key, None) for key in CONFIG_KEYS}


def _emit(text: str, output: Optional[str]) -> None:
    if output:
        with open(output, "w", encoding="utf-8", newline="\n") as f:
            f.write(text + "\n")
        logger.info("Results saved to: %s", output)
    else:
        print(text)


def run_command(args: argparse.Namespace) -> None:
    if args.command == "synth":
        values = {f.name: getattr(args, f"synth_{f.name}") for f in fields(SynthSpec)}
        spec = SynthSpec(**{k: v for k, v in values.items() if v is not None})
        synth_city(spec).write(args.synth_output_dir)
        return

    if args.command == "agree":
        if len(args.keyword_files) < 2:
            raise InvalidParameterError("agree needs at least two keyword files", "agree")
        result = annotation_agreement([read_keyword_set(path) for path in args.keyword_files])
        _emit(json.dumps(result.to_dict(), indent=2, sort_keys=True), args.output)
        return

    config = load_settings(args.config, _overrides(args))

    if args.command == "walkhood":
        if not config.streets_path:
            raise InvalidParameterError("walkhood needs a streets file", "walkhood", {"key": "streets_path"})
        segments, origin = read_streets(config.streets_path)
        projection = LocalProjection(origin)
        net = build_network(segments, config.snap_tolerance)
        result = walkhood(net, projection.project(GeoPoint(args.lon, args.lat)),
                          config.walk_minutes, config.walk_speed)
        _emit(geojson.dumps(walkhood_feature(result, projection), sort_keys=True), args.output)
        return

    orchestrator = ScoringOrchestrator(config)
    state = orchestrator.run(args.command, getattr(args, "assignments", None))
    if args.command == "ingest":
        _emit(json.dumps(report_document(state), indent=2, sort_keys=True), None)
        return
    for path in orchestrator.write(state, args.command):
        logger.info("Output: %s", path)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        run_command(args)
    except ScoringFlowError as e:
        logger.error("Scoring flow error in %s: %s", e.step or "unknown", e.message)
        if e.details:
            logger.error("Error details: %s", json.dumps(e.details, indent=2, default=str))
        return e.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())

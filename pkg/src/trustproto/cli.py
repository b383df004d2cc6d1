"""Command line front end.

Exit codes: 0 success, 1 property failure from ``check``, 2 usage error,
3 bad config, dictionary, or trace file.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .adversary import Explore, ScriptedMitm
from .harness import (Bounds, ConfigError, ScenarioConfig, SessionSpec, Trace,
                      explore_scenario, load_config, load_trace, run_scenario,
                      write_trace)
from .properties import PROPERTY_NAMES, check_property
from .terms import render_term
from .trustwords import (DictionaryError, InvalidHex, combine_fingerprints,
                         fixture_dictionary, load_dictionary, map_to_words)

_FILE_ERRORS = (ConfigError, DictionaryError, InvalidHex, OSError, ValueError)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trustproto",
        description="Simulate key distribution with word-comparison "
                    "authentication and check trace properties.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_words = sub.add_parser("trustwords",
                             help="combine two fingerprints into words")
    p_words.add_argument("fpr1")
    p_words.add_argument("fpr2")
    p_words.add_argument("dictionary", nargs="?", default=None,
                         help="word file; defaults to the built-in fixture")
    p_words.add_argument("--dict", dest="dict_path", default=None)

    p_run = sub.add_parser("run", help="run a scenario and persist traces")
    p_run.add_argument("config")
    p_run.add_argument("--out", default="out.trace",
                       help="trace file (single-trace strategies)")
    p_run.add_argument("--out-dir", default="traces",
                       help="trace directory (explore strategy)")
    _common_overrides(p_run)

    p_explore = sub.add_parser("explore",
                               help="branch over interventions and persist "
                                    "every branch trace")
    p_explore.add_argument("config")
    p_explore.add_argument("--out-dir", default="traces")
    _common_overrides(p_explore)

    p_check = sub.add_parser("check", help="check properties of a trace file")
    p_check.add_argument("trace")
    p_check.add_argument("--properties", default="all",
                         help="comma list out of: " + ",".join(PROPERTY_NAMES))
    p_check.add_argument("--format", choices=("text", "lines"), default="text")

    p_demo = sub.add_parser("demo-mitm",
                            help="contrast the key-substitution attack on "
                                 "bare key distribution with the full "
                                 "protocol run")
    p_demo.add_argument("--out-dir", default=None,
                        help="also persist both traces here")
    p_demo.add_argument("--dict", dest="dict_path", default=None)
    return parser


def _common_overrides(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--seed", type=int, default=None)
    sub.add_argument("--dict", dest="dict_path", default=None)
    sub.add_argument("--max-interventions", type=int, default=None)
    sub.add_argument("--max-term-depth", type=int, default=None)
    sub.add_argument("--branch-cap", type=int, default=None)
    sub.add_argument("--format", choices=("text", "lines"), default="text")


def _apply_overrides(cfg: ScenarioConfig, args) -> ScenarioConfig:
    bounds = cfg.bounds
    if args.max_interventions is not None:
        bounds = replace(bounds, max_interventions=args.max_interventions)
    if args.max_term_depth is not None:
        bounds = replace(bounds, max_term_depth=args.max_term_depth)
    if args.branch_cap is not None:
        bounds = replace(bounds, branch_cap=args.branch_cap)
    cfg = replace(cfg, bounds=bounds)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.dict_path is not None:
        cfg = replace(cfg, dictionary_path=args.dict_path)
    if isinstance(cfg.strategy, Explore):
        cfg = replace(cfg, strategy=Explore(bounds.max_interventions,
                                            bounds.max_term_depth))
    return cfg.validate()


def _summary(trace: Trace, path: Path) -> str:
    leaks = sum(1 for r in trace.rows if r.event.name == "attackerKnows")
    return (f"{path}: branch={trace.branch} events={len(trace.rows)} "
            f"secrets={len(trace.secrets)} attacker-knows={leaks}")


def _write_branches(traces: list[Trace], out_dir: Path) -> list[str]:
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = []
    for i, trace in enumerate(traces):
        path = out_dir / f"branch-{i:05d}.trace"
        write_trace(trace, path)
        lines.append(_summary(trace, path))
    return lines


def _cmd_trustwords(args) -> int:
    path = args.dictionary or args.dict_path
    dictionary = load_dictionary(path) if path else fixture_dictionary()
    combined = combine_fingerprints(args.fpr1, args.fpr2)
    print(" ".join(map_to_words(combined, dictionary)))
    return 0


def _cmd_run(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    if isinstance(cfg.strategy, Explore):
        for line in _write_branches(explore_scenario(cfg), Path(args.out_dir)):
            print(line)
        return 0
    trace = run_scenario(cfg)
    out = Path(args.out)
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    write_trace(trace, out)
    print(_summary(trace, out))
    return 0


def _cmd_explore(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    traces = explore_scenario(cfg)
    for line in _write_branches(traces, Path(args.out_dir)):
        print(line)
    print(f"branches: {len(traces)}")
    return 0


def _cmd_check(args) -> int:
    loaded = load_trace(args.trace)
    if args.properties.strip().lower() == "all":
        names = list(PROPERTY_NAMES)
    else:
        names = [n.strip() for n in args.properties.split(",") if n.strip()]
        unknown = [n for n in names if n not in PROPERTY_NAMES]
        if unknown:
            raise ConfigError(f"unknown properties: {', '.join(unknown)}")
    failed = False
    for name in names:
        report = check_property(name, loaded.events(), loaded.knowledge,
                                loaded.secrets)
        failed = failed or not report.passed
        if args.format == "lines":
            status = report.status().replace(" (vacuous)", "-VACUOUS")
            print(f"{name}|{status}")
        else:
            print(f"{name}: {report.status()}")
            for detail in report.details:
                print(f"  {detail}")
    return 1 if failed else 0


def _demo_config(script: tuple[str, ...]) -> ScenarioConfig:
    return ScenarioConfig(
        agents=("alice", "bob"),
        sessions=(SessionSpec("alice", "bob", script),),
        strategy=ScriptedMitm("alice", "bob"),
        bounds=Bounds())


def _cmd_demo(args) -> int:
    bare = _demo_config((("keyDistribution",)))
    full = _demo_config(("keyDistribution", "handshake", "greenExchange"))
    if args.dict_path:
        bare = replace(bare, dictionary_path=args.dict_path)
        full = replace(full, dictionary_path=args.dict_path)
    trace_bare = run_scenario(bare)
    trace_full = run_scenario(full)
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_trace(trace_bare, out / "bare-key-distribution.trace")
        write_trace(trace_full, out / "full-protocol.trace")

    print("== bare key distribution under a key-substitution attacker ==")
    bob = trace_bare.final_states["bob"]
    stored = bob.peers["alice"].pubkey
    alice_key = trace_bare.final_states["alice"].public_key
    print(f"bob's stored key for alice: {render_term(stored)}")
    print(f"alice's real key:           {render_term(alice_key)}")
    for secret in trace_bare.secrets:
        derivation = trace_bare.knowledge.derive(secret)
        if derivation is not None:
            print(f"attacker reads {render_term(secret)}:")
            print(derivation.pretty(indent=1))
    print()
    print("== full protocol: same attacker, handshake added ==")
    unsucc = [r for r in trace_full.rows
              if r.event.name == "endHandshakeUnsucc"]
    for row in unsucc:
        print(f"handshake mismatch: {row.event.args[0]} <-> {row.event.args[1]}")
    ratings = {a: trace_full.final_states[a].rating_for(b).value
               for a, b in (("alice", "bob"), ("bob", "alice"))}
    print(f"ratings after ceremony: {ratings}")
    report = check_property("mitm-detection", trace_full.events(),
                            trace_full.knowledge, trace_full.secrets)
    print(f"mitm-detection: {report.status()}")
    green = [r for r in trace_full.rows if r.event.name == "sendGreen"]
    print(f"green messages sent after detection: {len(green)}")
    print()
    print("attack succeeds against bare key distribution; "
          "the word comparison exposes it.")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "trustwords": _cmd_trustwords,
        "run": _cmd_run,
        "explore": _cmd_explore,
        "check": _cmd_check,
        "demo-mitm": _cmd_demo,
    }
    try:
        return handlers[args.command](args)
    except _FILE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

"""``pathga`` command line.

Exit status: 0 on success, 1 when a selected target stays uncovered,
2 on usage, parse, validation or I/O errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys

from . import __version__
from .cfg import basis_report, build_cfg, cyclomatic_complexity, enumerate_basis_paths, export_dot, verify_independence
from .executor import covers, execute
from .fitness import DEFAULT_DELTA, DEFAULT_THRESHOLDS, for_path
from .ga import ConfigError, Evaluator, GaConfig, evolve, hit_probability, random_search
from .lang import MiniLangError, ValidationError, load_program
from .report import ALL, FINAL, ComparisonReport, FitnessReport, MethodSummary, ReportError, RunRecord, dumps, stats_csv

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

log = logging.getLogger("pathga")

EXIT_OK, EXIT_UNCOVERED, EXIT_USAGE = 0, 1, 2

GA_KEYS = {f.name for f in dataclasses.fields(GaConfig)} - {"thresholds"}


class UsageError(Exception):
    pass


def load_config(path) -> dict:
    """Read a TOML run configuration into flat settings.

    Recognised tables are ``[ga]`` (any :class:`GaConfig` field) and
    ``[fitness]`` (``delta``, ``mode``, ``thresholds``).
    """
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    except tomllib.TOMLDecodeError as exc:
        raise UsageError(f"bad config {path}: {exc}") from None
    out = {}
    unknown = set(data) - {"ga", "fitness"}
    for key, value in data.get("ga", {}).items():
        if key not in GA_KEYS:
            unknown.add(f"ga.{key}")
        out[key] = value
    for key, value in data.get("fitness", {}).items():
        if key not in ("delta", "mode", "thresholds"):
            unknown.add(f"fitness.{key}")
        out[key] = tuple(value) if key == "thresholds" else value
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return out


def _settings(args) -> dict:
    settings = {"delta": DEFAULT_DELTA, "mode": "paper", "thresholds": DEFAULT_THRESHOLDS}
    if getattr(args, "config", None):
        settings.update(load_config(args.config))
    for key in ("seed", "delta", "mode", "population_size", "max_generations", "bits_per_var",
                "pc", "pm", "elite_count", "workers", "encoding", "step_limit"):
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    if getattr(args, "early_stop", False):
        settings["early_stop"] = True
    return settings


def _ga_config(settings: dict, **override) -> GaConfig:
    kwargs = {k: v for k, v in settings.items() if k in GA_KEYS}
    kwargs["thresholds"] = tuple(settings["thresholds"])
    kwargs.update(override)
    config = GaConfig(**kwargs)
    config.check()
    return config


def _load(path):
    try:
        program = load_program(path)
    except FileNotFoundError:
        raise UsageError(f"{path}: file not found") from None
    except ValidationError as exc:
        raise UsageError("\n".join(f"{path}:{d}" for d in exc.diagnostics)) from None
    except MiniLangError as exc:
        raise UsageError(f"{path}:{exc}") from None
    except (OSError, UnicodeDecodeError) as exc:
        raise UsageError(f"{path}: {exc}") from None
    cfg = build_cfg(program)
    return program, cfg


def _targets(selector, paths) -> list[int]:
    if selector == "all":
        return list(range(len(paths)))
    try:
        index = int(selector)
    except ValueError:
        raise UsageError(f"target must be a path index or 'all', got {selector!r}") from None
    if not 0 <= index < len(paths):
        raise UsageError(f"target {index} out of range: program has {len(paths)} basis paths (0..{len(paths) - 1})")
    return [index]


def _write(path, text):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_cfg(args) -> int:
    program, cfg = _load(args.source)
    vg = cyclomatic_complexity(cfg)
    preds = len(cfg.predicates)
    if args.dot:
        _write(args.dot, export_dot(cfg))
    if args.json:
        sys.stdout.write(dumps({"V(G)": vg, "e": cfg.e, "n": cfg.n, "predicates": preds}))
    else:
        print(f"V(G) = {vg}, predicates = {preds}")
        print(f"e = {cfg.e}, n = {cfg.n}")
    return EXIT_OK


def cmd_paths(args) -> int:
    program, cfg = _load(args.source)
    paths = enumerate_basis_paths(cfg)
    if not verify_independence(paths, cfg):
        raise RuntimeError("basis paths are not linearly independent")
    if args.json:
        sys.stdout.write(dumps([
            {"index": i, "signature": p.signature_text, "nodes": list(p.node_seq)}
            for i, p in enumerate(paths)]))
    else:
        print(f"V(G) = {cyclomatic_complexity(cfg)}")
        sys.stdout.write(basis_report(cfg, paths))
    return EXIT_OK


def _run_record(index, path, fitness, result, program, cfg, settings) -> tuple:
    trace = execute(program, result.best.decoded, settings.get("step_limit", 10_000), cfg)
    return RunRecord(
        target=index, signature=path.signature_text, mode=fitness.mode, method=result.method,
        seed=result.seed, covered=result.covered, path_traversed=covers(trace, path),
        best_inputs=dict(result.best.decoded), best_fitness=result.best.fitness.value,
        generations=result.generations, evaluations=result.evaluations,
        evaluations_to_coverage=result.evaluations_to_coverage,
        thresholds=list(settings["thresholds"]), final_fitness=list(result.final_fitness),
        histograms=[list(s.class_histogram) for s in result.stats],
        best_mean=[[s.best_fitness, s.mean_fitness] for s in result.stats],
    ), trace


def cmd_generate(args) -> int:
    program, cfg = _load(args.source)
    paths = enumerate_basis_paths(cfg)
    targets = _targets(args.target, paths)
    settings = _settings(args)
    config = _ga_config(settings)
    records = []
    for index in targets:
        fitness = for_path(cfg, paths[index], settings["mode"], settings["delta"])
        log.info("target %d [%s], %s mode", index, paths[index].signature_text, fitness.mode)
        result = evolve(program, fitness, config)
        record, trace = _run_record(index, paths[index], fitness, result, program, cfg, settings)
        records.append(record)
        if args.out:
            _write(os.path.join(args.out, f"path{index}.json"), record.to_json())
            _write(os.path.join(args.out, f"path{index}_stats.csv"), stats_csv(record))
        if not args.json:
            state = "covered" if record.covered else "NOT covered"
            inputs = ", ".join(f"{k}={v}" for k, v in record.best_inputs.items())
            print(f"path {index} [{record.signature}]: {state}; best {inputs}; "
                  f"fitness {record.best_fitness:.6g}; path traversed: {record.path_traversed}; "
                  f"generations {record.generations}; evaluations {record.evaluations}")
            if args.verbose:
                sys.stdout.write(trace.dump())
    if args.json:
        sys.stdout.write(dumps([r.to_dict() for r in records]))
    uncovered = [r.target for r in records if not r.covered]
    if uncovered and not args.allow_uncovered:
        print(f"uncovered targets: {uncovered}", file=sys.stderr)
        return EXIT_UNCOVERED
    return EXIT_OK


def _read_records(path) -> list:
    files = sorted(os.path.join(path, f) for f in os.listdir(path) if f.endswith(".json")) \
        if os.path.isdir(path) else [path]
    if not files:
        raise ReportError(f"no run records in {path}")
    records = []
    for name in files:
        try:
            with open(name, encoding="utf-8") as fh:
                records.append(RunRecord.from_json(fh.read()))
        except OSError as exc:
            raise UsageError(f"{name}: {exc.strerror}") from None
    return records


def cmd_report(args) -> int:
    source = ALL if args.all_generations else FINAL
    reports = []
    for record in _read_records(args.artifacts):
        report = FitnessReport.from_record(record, source)
        reports.append((record, report))
    if args.json:
        sys.stdout.write(dumps([dict(target=r.target, **rep.to_dict()) for r, rep in reports]))
    else:
        for record, report in reports:
            print(f"path {record.target} [{record.signature}] seed {record.seed}")
            sys.stdout.write(report.render())
    return EXIT_OK


def _parse_seeds(text) -> list[int]:
    seeds = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            seeds.extend(range(int(lo), int(hi) + 1))
        elif part:
            seeds.append(int(part))
    return seeds


def compare(program, cfg, path, fitness, seeds, config, budget=None, target=0) -> ComparisonReport:
    """GA and random search on the same target with equal evaluation budgets."""
    if len(seeds) < 2:
        raise ConfigError("compare needs at least 2 seeds")
    if budget is None:
        budget = config.population_size * max(1, config.max_generations)
    generations = max(1, budget // config.population_size)
    if generations * config.population_size != budget:
        raise ConfigError(f"budget {budget} must be a multiple of population_size {config.population_size}")
    evaluator = Evaluator(program, fitness, config.step_limit, config.workers, cfg)
    try:
        ga_runs = [evolve(program, fitness, dataclasses.replace(config, seed=s, max_generations=generations),
                          evaluator=evaluator) for s in seeds]
        rnd_runs = [random_search(program, fitness, budget, s, config.bits_per_var, config.step_limit,
                                  config.thresholds, evaluator=evaluator, encoding=config.encoding)
                    for s in seeds]
        try:
            p = hit_probability(program, fitness, config.bits_per_var, config.encoding, evaluator)
            closed = 1.0 - (1.0 - p) ** budget
        except ConfigError:
            closed = None
    finally:
        evaluator.close()
    return ComparisonReport(target, budget, list(seeds), MethodSummary.from_results("ga", ga_runs),
                            MethodSummary.from_results("random", rnd_runs), closed)


def cmd_compare(args) -> int:
    program, cfg = _load(args.source)
    paths = enumerate_basis_paths(cfg)
    if args.target == "all":
        raise UsageError("compare needs a single path index, not 'all'")
    [index] = _targets(args.target, paths)
    settings = _settings(args)
    config = _ga_config(settings)
    try:
        seeds = _parse_seeds(args.seeds)
    except ValueError:
        raise UsageError(f"bad seed list {args.seeds!r}") from None
    fitness = for_path(cfg, paths[index], settings["mode"], settings["delta"])
    report = compare(program, cfg, paths[index], fitness, seeds, config, args.budget, index)
    if args.out:
        _write(os.path.join(args.out, f"compare_path{index}.json"), dumps(report.to_dict()))
    if args.json:
        sys.stdout.write(dumps(report.to_dict()))
    else:
        sys.stdout.write(report.render())
    if report.ga.covered < report.ga.runs and not args.allow_uncovered:
        return EXIT_UNCOVERED
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def _add_run_flags(p):
    p.add_argument("--target", default="all", help="basis path index or 'all' (default: all)")
    p.add_argument("--seed", type=int)
    p.add_argument("--config", help="TOML run configuration")
    p.add_argument("--delta", type=float)
    p.add_argument("--mode", choices=("paper", "path"))
    p.add_argument("--population-size", dest="population_size", type=int)
    p.add_argument("--generations", dest="max_generations", type=int)
    p.add_argument("--bits", dest="bits_per_var", type=int)
    p.add_argument("--pc", type=float)
    p.add_argument("--pm", type=float)
    p.add_argument("--elite", dest="elite_count", type=int)
    p.add_argument("--encoding", choices=("binary", "gray"))
    p.add_argument("--step-limit", dest="step_limit", type=int)
    p.add_argument("--workers", type=int, help="processes used for fitness evaluation")
    p.add_argument("--early-stop", action="store_true", help="stop once the target is covered")
    p.add_argument("--allow-uncovered", action="store_true", help="exit 0 even if a target stays uncovered")
    p.add_argument("--out", help="directory for result records and statistics")
    p.add_argument("--json", action="store_true", help="machine-readable output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pathga", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default="WARNING")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cfg", help="cyclomatic complexity and DOT export")
    p.add_argument("source")
    p.add_argument("--dot", help="write the graph in DOT format to this file")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_cfg)

    p = sub.add_parser("paths", help="list a basis set of independent paths")
    p.add_argument("source")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_paths)

    p = sub.add_parser("generate", help="search test data for basis paths")
    p.add_argument("source")
    _add_run_flags(p)
    p.add_argument("-v", "--verbose", action="store_true", help="dump the execution trace of each best input")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("report", help="fitness-class histogram of a generate run")
    p.add_argument("artifacts", help="run record file or directory written by generate --out")
    p.add_argument("--all-generations", action="store_true", help="classify every generation, not just the last")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("compare", help="GA against random search over several seeds")
    p.add_argument("source")
    _add_run_flags(p)
    p.set_defaults(target=None)
    p.add_argument("--seeds", default="0-19", help="comma list or range, e.g. 0-19 (default)")
    p.add_argument("--budget", type=int, help="evaluations per run (default population x generations)")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), format="%(levelname)s %(name)s: %(message)s")
    if args.command == "compare" and args.target is None:
        parser.error("compare needs --target INDEX")
    try:
        return args.func(args)
    except (UsageError, ConfigError, ReportError, ValueError) as exc:
        print(f"pathga: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

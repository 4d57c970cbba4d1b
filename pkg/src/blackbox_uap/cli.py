"""Command-line entry point: ``blackbox-uap {attack,eval,fit-centroid}``."""
import argparse
import json
import logging
import os
import sys
import tempfile
from dataclasses import dataclass, field, fields
from pathlib import Path

from .boundary import SearchParams
from .evaluation import SweepSpec, sweep
from .objectives import ObjectiveSpec
from .oracle import dump_model, fit_centroid, load_dataset, load_model
from .rgf import RgfConfig, perturbation_to_csv, read_perturbation, report_to_json, run_attack

log = logging.getLogger("blackbox_uap")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FAILED = 3

DEFAULT_SCALES = (0.0, 0.05, 0.1, 0.2, 0.3, 0.5, 0.75, 1.0, 1.5, 2.0)

# config-file key -> RgfConfig field
_RGF_KEYS = {
    "iterations": "iterations",
    "beta": "beta",
    "step_size": "step_size",
    "step_decay": "step_decay",
    "probes": "probes_per_iter",
    "seed": "rng_seed",
    "initial_candidates": "initial_candidates",
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    model_path: Path
    fit_dataset_path: Path
    eval_dataset_path: Path | None = None
    objective: ObjectiveSpec = field(default_factory=ObjectiveSpec)
    search: SearchParams = field(default_factory=SearchParams)
    rgf: RgfConfig = field(default_factory=RgfConfig)
    sweep: SweepSpec = field(default_factory=lambda: SweepSpec(DEFAULT_SCALES, relative=True))
    n_jobs: int | None = None

    @classmethod
    def from_dict(cls, doc, base_dir="."):
        base_dir = Path(base_dir)
        known = {"model", "fit_data", "eval_data", "objective", "search", "rgf", "sweep", "n_jobs"}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        for key in ("model", "fit_data"):
            if key not in doc:
                raise ConfigError(f"config is missing {key!r}")

        def path(key):
            return None if doc.get(key) is None else base_dir / doc[key]

        def section(key, allowed):
            sec = doc.get(key) or {}
            extra = set(sec) - set(allowed)
            if extra:
                raise ConfigError(f"unknown keys in {key!r}: {', '.join(sorted(extra))}")
            return sec

        objective = section("objective", [f.name for f in fields(ObjectiveSpec)])
        search = section("search", [f.name for f in fields(SearchParams)])
        rgf = section("rgf", _RGF_KEYS)
        sweep_sec = section("sweep", ["scales", "relative"])
        try:
            return cls(
                model_path=path("model"),
                fit_dataset_path=path("fit_data"),
                eval_dataset_path=path("eval_data"),
                objective=ObjectiveSpec(**objective),
                search=SearchParams(**search),
                rgf=RgfConfig(**{_RGF_KEYS[k]: v for k, v in rgf.items()}),
                sweep=SweepSpec(
                    tuple(sweep_sec.get("scales", DEFAULT_SCALES)),
                    bool(sweep_sec.get("relative", "scales" not in sweep_sec)),
                ),
                n_jobs=doc.get("n_jobs"),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def load(cls, path):
        path = Path(path)
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        if not isinstance(doc, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        return cls.from_dict(doc, path.parent)


def _commit(out_dir, files):
    """Write every file to a temporary name first, then move them into place."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    staged = []
    try:
        for name, text in files.items():
            fd, tmp = tempfile.mkstemp(prefix=f".{name}.", dir=out_dir)
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(text)
            staged.append((tmp, out_dir / name))
    except BaseException:
        for tmp, _ in staged:
            os.unlink(tmp)
        raise
    for tmp, dest in staged:
        os.replace(tmp, dest)


def cmd_attack(args):
    config = RunConfig.load(args.config)
    oracle = load_model(config.model_path)
    fit_data = load_dataset(config.fit_dataset_path, oracle.class_count)
    eval_data = (
        load_dataset(config.eval_dataset_path, oracle.class_count)
        if config.eval_dataset_path else fit_data
    )
    for name, data in (("fit", fit_data), ("eval", eval_data)):
        if data.dimension != oracle.dimension:
            raise ConfigError(
                f"{name} data has {data.dimension} features, model expects {oracle.dimension}"
            )
    n_jobs = 1 if args.serial else (config.n_jobs or min(4, os.cpu_count() or 1))

    report = run_attack(oracle, fit_data, config.objective, config.search, config.rgf, n_jobs=n_jobs)
    result = sweep(oracle, eval_data, report.best_direction, config.sweep)
    _commit(args.out, {
        "report.json": report_to_json(report),
        "perturbation.csv": perturbation_to_csv(report.final_perturbation.epsilon),
        "sweep.csv": result.to_csv(),
    })
    log.info("status=%s best_value=%s queries=%d", report.status, report.best_value,
             report.total_queries)
    if not report.ok:
        print(f"attack failed: {report.diagnostic}", file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


def _parse_scales(text):
    try:
        return tuple(float(s) for s in text.split(",") if s.strip())
    except ValueError:
        raise ConfigError(f"bad scale list {text!r}") from None


def cmd_eval(args):
    oracle = load_model(args.model)
    data = load_dataset(args.data, oracle.class_count)
    if data.dimension != oracle.dimension:
        raise ConfigError(f"data has {data.dimension} features, model expects {oracle.dimension}")
    direction = read_perturbation(args.perturbation, oracle.dimension)
    result = sweep(oracle, data, direction, SweepSpec(_parse_scales(args.scales), args.relative))
    sys.stdout.write(result.to_csv())
    return EXIT_OK


def cmd_fit_centroid(args):
    model = fit_centroid(load_dataset(args.data))
    out = Path(args.out)
    _commit(out.parent if str(out.parent) else ".", {out.name: dump_model(model)})
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="blackbox-uap",
        description="Universal perturbations against hard-label black-box classifiers.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("attack", help="run the attack described by a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--serial", action="store_true", help="evaluate per-sample searches serially")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("eval", help="fooling-rate sweep of a perturbation direction")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--perturbation", required=True)
    p.add_argument("--scales", required=True, help="comma-separated scales")
    p.add_argument("--relative", action="store_true",
                   help="scales are relative distortions (multiples of the mean sample norm)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("fit-centroid", help="fit a nearest-centroid model to a dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit_centroid)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

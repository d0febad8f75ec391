"""Command-line entry point: ``adaptomo simulate | bounds | fit | sample-prior``."""

import argparse
import configparser
import hashlib
import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .adaptive import Strategy
from .errors import ConfigurationError, DomainError, TomographyError
from .estimators.smc import ParticleSet, save_particles
from .harness import (
    ExperimentConfig,
    bound_curves,
    fit_scaling,
    read_curve_csv,
    run_ensemble,
    write_summary_json,
    write_trials_csv,
)
from .harness.runner import default_workers
from .priors import PriorSpec, sample_coords
from .seeding import make_rng

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2

_INT, _FLOAT, _STR = int, float, str


def _bool(text):
    value = text.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _floats(text):
    return tuple(float(v) for v in text.replace(",", " ").split())


def _ints(text):
    return tuple(int(float(v)) for v in text.replace(",", " ").split())


# section -> key -> value parser
SCHEMA = {
    "experiment": {
        "dim": _INT,
        "estimator": _STR,
        "n_max": lambda t: int(float(t)),
        "checkpoints": _ints,
        "replicas": _INT,
        "seed": _INT,
        "hedging": _FLOAT,
        "angle_jitter": _FLOAT,
        "timing": _bool,
        "label": _STR,
    },
    "prior": {"kind": _STR, "truth": _STR, "true_coords": _floats},
    "strategy": {
        "kind": _STR,
        "restriction": _STR,
        "n_candidates": _INT,
        "static_set": _STR,
        "variant": _STR,
        "shots_per_eval": _INT,
    },
    "filter": {"resampler": _STR, "n_particles": _INT, "liu_west_a": _FLOAT, "mh_steps": _INT},
}
REQUIRED = {"experiment": ("n_max",), "prior": ("kind",), "strategy": ("kind",)}


class ConfigFileError(ConfigurationError):
    """A configuration problem tied to a file location."""

    def __init__(self, path, line, message):
        super().__init__(f"{path}:{line}: {message}")


def _line_index(text):
    """Map ``(section, key)`` and ``(section, None)`` to 1-based line numbers."""
    index, section = {}, None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            index.setdefault((section, None), lineno)
        elif section is not None:
            for sep in ("=", ":"):
                if sep in line:
                    index.setdefault((section, line.split(sep, 1)[0].strip().lower()), lineno)
                    break
    return index


def load_config(path):
    """Parse an INI experiment file into an :class:`ExperimentConfig`.

    Unknown sections or keys, missing required keys and malformed values
    raise :class:`ConfigFileError` naming the offending line.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigFileError(path, 0, f"cannot read config: {exc.strerror}") from None
    parser = configparser.ConfigParser(interpolation=None, strict=True)
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        line = getattr(exc, "lineno", 0) or 0
        raise ConfigFileError(path, line, str(exc).splitlines()[0]) from None
    lines = _line_index(text)
    values = {}
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigFileError(path, lines.get((section, None), 0), f"unknown section [{section}]")
        for key, raw in parser.items(section):
            where = lines.get((section, key), 0)
            if key not in SCHEMA[section]:
                raise ConfigFileError(path, where, f"unknown key {key!r} in [{section}]")
            try:
                values[(section, key)] = SCHEMA[section][key](raw)
            except ValueError as exc:
                raise ConfigFileError(path, where, f"bad value for {section}.{key}: {exc}") from None
    for section, keys in REQUIRED.items():
        for key in keys:
            if (section, key) not in values:
                where = lines.get((section, None), 1)
                raise ConfigFileError(path, where, f"missing required field {section}.{key}")

    def pick(section, names):
        return {k: values[(section, k)] for k in names if (section, k) in values}

    exp = pick("experiment", SCHEMA["experiment"])
    dim = exp.pop("dim", 2)
    try:
        prior = PriorSpec(values[("prior", "kind")], dim)
        truth = values.get(("prior", "truth"))
        strategy = Strategy(dim=dim, **pick("strategy", SCHEMA["strategy"]))
        return ExperimentConfig(
            prior=prior,
            strategy=strategy,
            truth=None if truth is None else PriorSpec(truth, dim),
            true_coords=values.get(("prior", "true_coords")),
            **exp,
            **pick("filter", SCHEMA["filter"]),
        )
    except (TomographyError, ValueError) as exc:
        raise ConfigFileError(path, 0, str(exc)) from None


def config_hash(cfg):
    """SHA-256 of the canonical JSON form; key order and the label do not matter."""
    d = cfg.to_dict()
    d.pop("label", None)
    blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


@dataclass
class RunManifest:
    config_hash: str
    seed: int
    version: str = __version__
    outputs: dict = field(default_factory=dict)

    def write(self, path):
        with open(path, "w") as fh:
            json.dump(asdict(self), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _digest(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _window(text):
    if text is None:
        return None
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise ConfigurationError(f"window must be 'lo,hi', got {text!r}") from None
    return lo, hi


def cmd_simulate(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = ExperimentConfig(**{**_shallow(cfg), "seed": args.seed})
    window = _window(args.window)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(config_hash(cfg), cfg.seed)
    workers = args.workers if args.workers is not None else default_workers()
    try:
        result = run_ensemble(cfg, workers=workers)
    except TomographyError as exc:
        print(f"error: simulation failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    paths = {"trials": out / "trials.csv", "summary": out / "summary.json"}
    write_trials_csv(paths["trials"], result.trials)
    write_summary_json(paths["summary"], cfg, result, window)
    # file names and content digests only, so reruns reproduce the manifest too
    manifest.outputs = {k: {"file": v.name, "sha256": _digest(v)} for k, v in paths.items()}
    manifest.write(out / "manifest.json")
    print(f"wrote {paths['trials']} ({len(result.trials)} replicas x {len(result.n)} checkpoints)")
    return EXIT_OK


def _shallow(cfg):
    return {f: getattr(cfg, f) for f in cfg.__dataclass_fields__}


def cmd_bounds(args):
    if args.dim not in (2, 4):
        raise ConfigurationError(f"dim must be 2 or 4, got {args.dim}")
    if args.n:
        grid = np.array(_ints(args.n))
    else:
        grid = np.unique(np.round(np.geomspace(args.n_min, args.n_max, args.points)).astype(int))
    curves = bound_curves(args.dim, grid)
    names = list(curves)
    print(",".join(["N"] + names))
    for i, n in enumerate(grid):
        print(",".join([str(int(n))] + [f"{curves[k][i]:.10g}" for k in names]))
    return EXIT_OK


def cmd_fit(args):
    n, values = read_curve_csv(args.csv, args.metric)
    fit = fit_scaling(n, values, _window(args.window))
    print(json.dumps(fit.to_dict(), indent=2, sort_keys=True))
    return EXIT_OK


def cmd_sample_prior(args):
    spec = PriorSpec(args.kind, args.dim)
    if args.count < 2:
        raise ConfigurationError("count must be at least 2")
    coords = sample_coords(spec, args.count, make_rng(args.seed))
    ps = ParticleSet(coords, np.full(args.count, 1.0 / args.count), spec.dim, spec, make_rng(args.seed))
    save_particles(ps, args.out)
    print(f"wrote {args.count} {args.kind} states to {args.out}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="adaptomo", description="Adaptive quantum state tomography simulations.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run an experiment config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, help="override the master seed")
    p.add_argument("--workers", type=int, help="parallel processes (default from ADAPTOMO_WORKERS)")
    p.add_argument("--window", help="fit window 'lo,hi' (default: last decade)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bounds", help="print reference bound curves")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--n", help="explicit comma-separated N values")
    p.add_argument("--n-min", type=float, default=10)
    p.add_argument("--n-max", type=float, default=1e4)
    p.add_argument("--points", type=int, default=13)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("fit", help="fit a power law to a trials CSV")
    p.add_argument("csv")
    p.add_argument("--window", help="fit window 'lo,hi' (default: last decade)")
    p.add_argument("--metric", default="infidelity")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("sample-prior", help="write prior samples in the particle text format")
    p.add_argument("--kind", required=True)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample_prior)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TomographyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

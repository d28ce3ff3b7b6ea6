"""Command-line front end.

Every run writes ``config.txt`` to its output directory, listing all
effective parameters.  Passing that file back with ``--config`` reproduces
the run; flags given explicitly on the command line take precedence.

Exit status: 0 success, 1 usage error, 2 data error, 3 algorithm error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from segseed.errors import ConfigError, SegSeedError
from segseed.ga import GAConfig, evolve, history_csv, read_key_values
from segseed.image import (
    CLASS_NAMES,
    TISSUE_CLASSES,
    check_same_shape,
    load_labels,
    load_pgm,
    save_pgm,
)
from segseed.metrics import EvalReport, rms_error
from segseed.phantom import PhantomSpec, generate
from segseed.regiongrow import GrowthCriterion, Neighborhood, segment
from segseed.seeding import (
    ThresholdBands,
    format_seeds,
    histogram_peak_seeds,
    in_growth_order,
    parse_seeds,
    pool_from_thresholds,
    random_seeds,
)

log = logging.getLogger("segseed")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_ALGORITHM = 0, 1, 2, 3
STRATEGIES = ("manual", "random", "histogram", "ga")

DEFAULTS = {
    "input": None,
    "reference": None,
    "output_dir": ".",
    "seeds": None,
    "strategy": "manual",
    "k": "2.5",
    "sigma_floor": "5.0",
    "stats_mode": "exact",
    "neighborhood": "8",
    "bands": "0,84,85,169,170,255",
    "growth_order": "2,3,1",
    "smoothing_window": "5",
    "rng_seed": "0",
    "ga_config": None,
    "workers": "1",
    # phantom-gen
    "width": "128",
    "height": "128",
    "means": "40,120,220",
    "noise_std": "0",
    "geometry": "concentric",
    "background_mean": "0",
}
GA_PREFIX = "ga."


class UsageError(ConfigError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_common(p, *, needs_reference=False):
    p.add_argument("--config", help="config echo file (key=value) from an earlier run")
    p.add_argument("--input", help="input image (P5 PGM)")
    p.add_argument("--reference", help="reference label map (P5 PGM, codes 0-3)"
                   + ("" if not needs_reference else "; required"))
    p.add_argument("--output-dir", dest="output_dir")
    p.add_argument("--seeds", help='explicit seeds "class:x,y;class:x,y;class:x,y"')
    p.add_argument("--k", help="std multiplier of the growth test (default 2.5)")
    p.add_argument("--sigma-floor", dest="sigma_floor", help="minimum effective std (default 5)")
    p.add_argument("--stats-mode", dest="stats_mode", choices=("exact", "paper-literal"))
    p.add_argument("--neighborhood", choices=("4", "diag4", "8"))
    p.add_argument("--bands", help="six integers: csf_lo,csf_hi,gm_lo,gm_hi,wm_lo,wm_hi")
    p.add_argument("--growth-order", dest="growth_order", help="class codes in growth order (default 2,3,1)")
    p.add_argument("--smoothing-window", dest="smoothing_window", help="histogram smoothing bins")
    p.add_argument("--ga-config", dest="ga_config", help="key=value GA settings file")
    p.add_argument("--rng-seed", dest="rng_seed")
    p.add_argument("--workers", help="processes for fitness evaluation")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="segseed", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    p = sub.add_parser("segment", help="grow a segmentation from seeds")
    _add_common(p)
    p.add_argument("--strategy", choices=STRATEGIES)

    p = sub.add_parser("optimize", help="optimise seeds with the GA against a reference")
    _add_common(p, needs_reference=True)

    p = sub.add_parser("evaluate", help="score a label map against a reference")
    p.add_argument("--config")
    p.add_argument("--input", help="produced label map (P5 PGM)")
    p.add_argument("--reference")
    p.add_argument("--output-dir", dest="output_dir")

    p = sub.add_parser("compare", help="manual seeds vs GA-optimised seeds")
    _add_common(p, needs_reference=True)

    p = sub.add_parser("phantom-gen", help="write a synthetic phantom and its ground truth")
    p.add_argument("--config")
    p.add_argument("--output-dir", dest="output_dir")
    p.add_argument("--width")
    p.add_argument("--height")
    p.add_argument("--means", help="CSF,GM,WM mean intensities")
    p.add_argument("--noise-std", dest="noise_std")
    p.add_argument("--geometry", choices=("concentric", "blobs"))
    p.add_argument("--background-mean", dest="background_mean")
    p.add_argument("--rng-seed", dest="rng_seed")
    return parser


class Settings:
    """Effective parameters: command line over config file over defaults."""

    def __init__(self, args: argparse.Namespace):
        self.subcommand = args.subcommand
        file_values = read_key_values(args.config) if args.config else {}
        if file_values.get("subcommand", self.subcommand) != self.subcommand:
            raise UsageError(
                f"config file is for {file_values['subcommand']!r}, not {self.subcommand!r}"
            )
        self.values = dict(DEFAULTS)
        self.ga_values = {}
        for key, value in file_values.items():
            if key.startswith(GA_PREFIX):
                self.ga_values[key[len(GA_PREFIX):]] = value
            elif key != "subcommand":
                self.values[key] = value or None
        self.explicit = set()
        for key, value in vars(args).items():
            if key not in ("subcommand", "config") and value is not None:
                self.values[key] = value
                self.explicit.add(key)

    def get(self, key):
        return self.values.get(key)

    def number(self, key, kind=float):
        try:
            return kind(self.values[key])
        except (TypeError, ValueError):
            raise UsageError(f"--{key.replace('_', '-')} must be a number, got {self.values[key]!r}") from None

    def path(self, key, required=True):
        value = self.values.get(key)
        if not value:
            if required:
                raise UsageError(f"--{key.replace('_', '-')} is required")
            return None
        return Path(value)

    def criterion(self) -> GrowthCriterion:
        return GrowthCriterion(self.number("k"), self.number("sigma_floor"), self.values["stats_mode"])

    def neighborhood(self) -> Neighborhood:
        return Neighborhood.parse(self.values["neighborhood"])

    def bands(self) -> ThresholdBands:
        return ThresholdBands.parse(self.values["bands"])

    def growth_order(self) -> tuple[int, ...]:
        try:
            order = tuple(int(c) for c in self.values["growth_order"].split(","))
        except ValueError:
            raise UsageError(f"bad --growth-order {self.values['growth_order']!r}") from None
        if sorted(order) != list(TISSUE_CLASSES):
            raise UsageError("--growth-order must list classes 1, 2 and 3 once each")
        return order

    def ga_config(self) -> GAConfig:
        cfg = GAConfig()
        if self.values.get("ga_config"):
            cfg = GAConfig.from_file(self.values["ga_config"], cfg)
        if "ga_config" not in self.explicit:
            cfg = GAConfig.from_mapping(self.ga_values, cfg)
        # one seed drives every random choice of a run
        return GAConfig.from_mapping({"rng_seed": self.number("rng_seed", int)}, cfg)

    def manual_seeds(self):
        text = self.values.get("seeds")
        if not text:
            raise UsageError("--seeds is required for manual seeding")
        seeds = parse_seeds(text)
        if sorted(c for c, _ in seeds) != list(TISSUE_CLASSES):
            raise UsageError(
                f"--seeds needs exactly one point for each class 1, 2, 3; got {len(seeds)} point(s)"
            )
        return seeds

    def echo(self, out_dir: Path, keys, ga: GAConfig | None = None, extra=()):
        lines = [f"subcommand={self.subcommand}"]
        for key in keys:
            value = self.values.get(key)
            if key in ("input", "reference", "ga_config") and value:
                value = os.path.abspath(value)
            lines.append(f"{key}={'' if value is None else value}")
        if ga is not None:
            lines += [GA_PREFIX + line for line in ga.to_lines()]
        lines += list(extra)
        (out_dir / "config.txt").write_text("\n".join(lines) + "\n")


GROWTH_KEYS = ("input", "reference", "seeds", "k", "sigma_floor", "stats_mode", "neighborhood",
               "bands", "growth_order")


def _output_dir(settings: Settings) -> Path:
    out = Path(settings.values["output_dir"] or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_inputs(settings: Settings, need_reference: bool):
    image = load_pgm(settings.path("input"))
    reference = None
    ref_path = settings.path("reference", required=need_reference)
    if ref_path is not None:
        reference = load_labels(ref_path)
        check_same_shape(image, reference, "input image and reference")
    return image, reference


def _eval_csv(rows: list[tuple[str, EvalReport]]) -> str:
    lines = ["method," + EvalReport.CSV_HEADER]
    lines += [f"{name},{report.csv_row()}" for name, report in rows]
    return "\n".join(lines) + "\n"


def _optimise(settings, image, reference):
    criterion, nbhd, order = settings.criterion(), settings.neighborhood(), settings.growth_order()
    pool = pool_from_thresholds(image, settings.bands())
    ga = settings.ga_config()
    log.info("candidate pool sizes CSF/GM/WM: %s", pool.sizes())
    result = evolve(image, pool, reference, criterion, nbhd, ga,
                    workers=settings.number("workers", int), order=order)
    return ga, result


def _seeds_text(seeds) -> str:
    return "".join(f"{CLASS_NAMES[c]} {c}:{p.x},{p.y}\n" for c, p in seeds)


def cmd_segment(settings: Settings) -> int:
    out = _output_dir(settings)
    strategy = settings.values["strategy"]
    if strategy not in STRATEGIES:
        raise UsageError(f"unknown strategy {strategy!r}")
    image, reference = _load_inputs(settings, need_reference=strategy == "ga")
    criterion, nbhd, order = settings.criterion(), settings.neighborhood(), settings.growth_order()
    ga = None
    if strategy == "manual":
        seeds = settings.manual_seeds()
    elif strategy == "random":
        seeds = random_seeds(pool_from_thresholds(image, settings.bands()), settings.number("rng_seed", int))
    elif strategy == "histogram":
        seeds = histogram_peak_seeds(image, settings.number("smoothing_window", int))
    else:
        ga, result = _optimise(settings, image, reference)
        seeds = result.best.seeds()
        (out / "history.csv").write_text(history_csv(result.history))
        (out / "best-seeds.txt").write_text(_seeds_text(seeds))
    labels = segment(image, in_growth_order(seeds, order), criterion, nbhd)
    save_pgm(labels, out / "labels.pgm")
    report = [f"strategy {strategy}", f"seeds {format_seeds(seeds)}",
              f"size {image.width}x{image.height}"]
    for c in TISSUE_CLASSES:
        report.append(f"{CLASS_NAMES[c]} pixels {int((labels.pixels == c).sum())}")
    if reference is not None:
        ev = rms_error(labels, reference)
        (out / "eval.csv").write_text(_eval_csv([(strategy, ev)]))
        report.append(ev.to_text().rstrip())
    (out / "report.txt").write_text("\n".join(report) + "\n")
    settings.echo(out, ("strategy", *GROWTH_KEYS, "smoothing_window", "rng_seed", "workers"), ga)
    return EXIT_OK


def cmd_optimize(settings: Settings) -> int:
    out = _output_dir(settings)
    image, reference = _load_inputs(settings, need_reference=True)
    ga, result = _optimise(settings, image, reference)
    seeds = result.best.seeds()
    labels = segment(image, in_growth_order(seeds, settings.growth_order()),
                     settings.criterion(), settings.neighborhood())
    ev = rms_error(labels, reference)
    save_pgm(labels, out / "labels.pgm")
    (out / "best-seeds.txt").write_text(_seeds_text(seeds))
    (out / "history.csv").write_text(history_csv(result.history))
    (out / "eval.csv").write_text(_eval_csv([("ga", ev)]))
    (out / "report.txt").write_text(
        f"best cost {result.best_cost.cost}\ngenerations {len(result.history)}\n"
        f"seeds {format_seeds(seeds)}\n" + ev.to_text()
    )
    settings.echo(out, (*GROWTH_KEYS, "rng_seed", "workers"), ga)
    return EXIT_OK


def cmd_evaluate(settings: Settings) -> int:
    out = _output_dir(settings)
    produced = load_labels(settings.path("input"))
    reference = load_labels(settings.path("reference"))
    ev = rms_error(produced, reference)
    (out / "eval.csv").write_text(_eval_csv([("input", ev)]))
    (out / "eval.txt").write_text(ev.to_text())
    settings.echo(out, ("input", "reference"))
    sys.stdout.write(ev.to_text())
    return EXIT_OK


def cmd_compare(settings: Settings) -> int:
    out = _output_dir(settings)
    image, reference = _load_inputs(settings, need_reference=True)
    criterion, nbhd, order = settings.criterion(), settings.neighborhood(), settings.growth_order()
    manual = settings.manual_seeds()
    manual_labels = segment(image, in_growth_order(manual, order), criterion, nbhd)
    ga, result = _optimise(settings, image, reference)
    ga_seeds = result.best.seeds()
    ga_labels = segment(image, in_growth_order(ga_seeds, order), criterion, nbhd)
    rows = [("manual", rms_error(manual_labels, reference)), ("ga", rms_error(ga_labels, reference))]
    save_pgm(manual_labels, out / "labels_manual.pgm")
    save_pgm(ga_labels, out / "labels.pgm")
    (out / "best-seeds.txt").write_text(_seeds_text(ga_seeds))
    (out / "history.csv").write_text(history_csv(result.history))
    (out / "eval.csv").write_text(_eval_csv(rows))
    (out / "compare.csv").write_text(
        "method,rms\n" + "".join(f"{name},{ev.rms_overall:.6f}\n" for name, ev in rows)
    )
    settings.echo(out, (*GROWTH_KEYS, "rng_seed", "workers"), ga)
    for name, ev in rows:
        sys.stdout.write(f"{name:<8} rms {ev.rms_overall:.4f}\n")
    return EXIT_OK


def cmd_phantom_gen(settings: Settings) -> int:
    out = _output_dir(settings)
    try:
        means = tuple(float(m) for m in settings.values["means"].split(","))
    except ValueError:
        raise UsageError(f"bad --means {settings.values['means']!r}") from None
    spec = PhantomSpec(
        width=settings.number("width", int),
        height=settings.number("height", int),
        class_means=means,
        noise_std=settings.number("noise_std"),
        geometry=settings.values["geometry"],
        rng_seed=settings.number("rng_seed", int),
        background_mean=settings.number("background_mean"),
    )
    image, labels = generate(spec)
    save_pgm(image, out / "image.pgm")
    save_pgm(labels, out / "labels.pgm")
    (out / "spec.txt").write_text("\n".join(spec.to_lines()) + "\n")
    settings.echo(out, ("width", "height", "means", "noise_std", "geometry",
                        "background_mean", "rng_seed"))
    return EXIT_OK


COMMANDS = {
    "segment": cmd_segment,
    "optimize": cmd_optimize,
    "evaluate": cmd_evaluate,
    "compare": cmd_compare,
    "phantom-gen": cmd_phantom_gen,
}


def main(argv=None) -> int:
    level = os.environ.get("SEGSEED_LOG", "WARNING").upper()
    logging.basicConfig(
        level=level if isinstance(logging.getLevelName(level), int) else "WARNING",
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        settings = Settings(args)
        return COMMANDS[args.subcommand](settings)
    except SegSeedError as exc:
        print(f"segseed {args.subcommand}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"segseed {args.subcommand}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

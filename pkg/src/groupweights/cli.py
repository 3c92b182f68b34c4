"""Command-line interface.

Exit codes: 0 success, 1 usage, 2 parse error, 3 validation error.
"""

import argparse
from dataclasses import fields
import itertools
import sys

from groupweights import figures
from groupweights.formats import (
    SWEEP_COLUMNS,
    ParseError,
    fmt_exact,
    read_config,
    read_statistics,
    write_analysis,
    write_rows,
)
from groupweights.numstats import pvalues
from groupweights.simharness import Scenario, ScenarioError, run_sweep, scenario_row
from groupweights.testing import fwer_inflation_bound, weighted_reject
from groupweights.weights import ConfigurationError, TestBattery, group_weights_pipeline

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_INVALID = 0, 1, 2, 3


class UsageError(Exception):
    pass


class ValidationError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


# config key -> (Scenario field, converter)
def _bool(text):
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


SCENARIO_KEYS = {
    "m": ("m", int), "m1": ("m1", int), "xi0": ("xi0", float), "p0": ("p0", float), "p1": ("p1", float),
    "K": ("K", int), "model": ("model", str), "alpha": ("alpha", float), "replicates": ("replicates", int),
    "seed": ("master_seed", int), "master_seed": ("master_seed", int), "mixed_levels": ("mixed_levels", _bool),
    "random_groups": ("random_groups", _bool), "min_group_size": ("min_group_size", int),
    "lambda": ("smoothing_lambda", float),
}
ANALYZE_KEYS = {"alpha": float, "model": str, "min_group_size": int, "lambda": float}


def _convert(key, text, conv):
    try:
        return conv(text)
    except ValueError:
        raise ValidationError(f"{key}: invalid value {text!r}") from None


def _load_config(path):
    return read_config(path) if path else {}


def _analysis_settings(args):
    raw = _load_config(args.config)
    unknown = sorted(set(raw) - set(ANALYZE_KEYS))
    if unknown:
        raise ValidationError(f"{unknown[0]}: unknown config key")
    cfg = {"alpha": 0.05, "model": "normal", "min_group_size": 10, "lambda": 0.95}
    cfg.update({k: _convert(k, v, ANALYZE_KEYS[k]) for k, v in raw.items()})
    for key, attr in (("alpha", "alpha"), ("model", "model"), ("min_group_size", "min_group_size"),
                      ("lambda", "lam")):
        value = getattr(args, attr)
        if value is not None:
            cfg[key] = value
    if not 0.0 < cfg["alpha"] < 1.0:
        raise ValidationError("alpha: must lie in (0, 1)")
    if cfg["model"] not in ("normal", "chisq"):
        raise ValidationError("model: must be 'normal' or 'chisq'")
    if not 0.0 <= cfg["lambda"] <= 1.0:
        raise ValidationError("lambda: must lie in [0, 1]")
    return cfg


def _fit(args):
    cfg = _analysis_settings(args)
    ids, stats, groups = read_statistics(args.input, cfg["model"])
    battery = TestBattery(stats, groups, cfg["model"], ids)
    try:
        gw = group_weights_pipeline(battery, cfg["alpha"], cfg["min_group_size"], cfg["lambda"])
    except ConfigurationError as exc:
        raise ValidationError(str(exc)) from None
    return cfg, battery, gw


def _group_rows(gw):
    rows = []
    for label, s, e, w in zip(gw.labels, gw.summaries, gw.estimates, gw.weights):
        rows.append((str(label), str(s.size), fmt_exact(s.mean), fmt_exact(s.variance), fmt_exact(e.pi_hat),
                     fmt_exact(e.xi_hat), "1" if e.degenerate else "0", fmt_exact(w)))
    return rows


def cmd_analyze(args, out):
    cfg, battery, gw = _fit(args)
    p = pvalues(battery.stats, battery.model)
    result = weighted_reject(p, gw.per_test(battery.groups), cfg["alpha"], battery.ids, gw.sizes)
    summary = [
        ("m", battery.m), ("K", len(gw.labels)), ("alpha", fmt_exact(cfg["alpha"])), ("model", battery.model),
        ("c", fmt_exact(gw.budget.c) if gw.budget else "NA"), ("b_m", fmt_exact(result.b_m)),
        ("lambda", fmt_exact(cfg["lambda"])), ("rejected", result.n_rejected),
    ]
    write_analysis(out, battery.ids, battery.groups, battery.stats, result, summary, _group_rows(gw))


def cmd_weight_table(args, out):
    cfg, battery, gw = _fit(args)
    out.write(f"# c = {fmt_exact(gw.budget.c) if gw.budget else 'NA'}\n")
    out.write(f"# b_m = {fmt_exact(fwer_inflation_bound(gw.sizes))}\n")
    out.write("group\tsize\tmean\tvariance\tpi_hat\txi_hat\tdegenerate\tweight\n")
    for row in _group_rows(gw):
        out.write("\t".join(row) + "\n")


def scenarios_from_config(raw, overrides):
    """Cartesian product of every comma-separated config value, in field order."""
    values = {}
    for key, text in raw.items():
        if key == "workers":
            continue
        if key not in SCENARIO_KEYS:
            raise ValidationError(f"{key}: unknown config key")
        name, conv = SCENARIO_KEYS[key]
        values[name] = [_convert(key, part.strip(), conv) for part in text.split(",")]
    for name, value in overrides.items():
        if value is not None:
            values[name] = [value]
    order = [f.name for f in fields(Scenario) if f.name in values]
    scenarios = []
    for combo in itertools.product(*(values[name] for name in order)):
        scenario = Scenario(**dict(zip(order, combo)))
        try:
            scenario.validate()
        except ScenarioError as exc:
            raise ValidationError(str(exc)) from None
        scenarios.append(scenario)
    return scenarios


def _workers(args, raw):
    if args.workers is not None:
        return args.workers
    return _convert("workers", raw["workers"], int) if "workers" in raw else 1


def cmd_simulate(args, out):
    raw = _load_config(args.config)
    overrides = {"replicates": args.replicates, "master_seed": args.seed, "alpha": args.alpha,
                 "model": args.model, "min_group_size": args.min_group_size, "smoothing_lambda": args.lam}
    scenarios = scenarios_from_config(raw, overrides)
    try:
        estimates = run_sweep(scenarios, _workers(args, raw))
    except ScenarioError as exc:
        raise ValidationError(str(exc)) from None
    write_rows(out, SWEEP_COLUMNS, [scenario_row(s, e) for s, e in zip(scenarios, estimates)])


def cmd_figure(args, out):
    raw = _load_config(args.config)
    if args.which in ("fig1", "fig2"):
        kw = {"m": int(raw.get("m", 100000)), "alpha": args.alpha or float(raw.get("alpha", 0.05)),
              "seed": args.seed if args.seed is not None else int(raw.get("seed", 1))}
        columns, rows, budget = (figures.fig1_rows if args.which == "fig1" else figures.fig2_rows)(**kw)
        out.write(f"# c = {fmt_exact(budget.c)}\n")
    elif args.which == "fig3":
        columns, rows, _ = figures.fig3_rows(seed=args.seed if args.seed is not None else int(raw.get("seed", 3)))
    else:
        columns, rows, _ = figures.fig4_rows(
            replicates=args.replicates or int(raw.get("replicates", 100)),
            master_seed=args.seed if args.seed is not None else int(raw.get("seed", 4)),
            workers=_workers(args, raw))
    write_rows(out, columns, rows)


FIGURES = ("fig1", "fig2", "fig3", "fig4")


def build_parser():
    parser = _Parser(prog="groupweights", description="Group-weighted Bonferroni testing.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def common(p):
        p.add_argument("--alpha", type=float)
        p.add_argument("--model", choices=("normal", "chisq"))
        p.add_argument("--min-group-size", type=int, dest="min_group_size")
        p.add_argument("--lambda", type=float, dest="lam")
        p.add_argument("--config")
        p.add_argument("--output", "-o")

    for name, helptext in (("analyze", "weight and test a statistics file"),
                           ("weight-table", "per-group weight diagnostics only")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("input")
        common(p)

    p = sub.add_parser("simulate", help="run simulation scenarios from a config file")
    common(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--replicates", type=int)
    p.add_argument("--workers", type=int)

    p = sub.add_parser("figure", help="emit plot data for a figure")
    p.add_argument("which")
    common(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--replicates", type=int)
    p.add_argument("--workers", type=int)
    return parser


COMMANDS = {"analyze": cmd_analyze, "weight-table": cmd_weight_table, "simulate": cmd_simulate,
            "figure": cmd_figure}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a command is required")
        if args.command == "figure" and args.which not in FIGURES:
            raise UsageError(f"unknown figure {args.which!r}; choose from {', '.join(FIGURES)}")
        if args.output:
            with open(args.output, "w", encoding="utf-8", newline="\n") as out:
                COMMANDS[args.command](args, out)
        else:
            COMMANDS[args.command](args, sys.stdout)
    except UsageError as exc:
        print(f"groupweights: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"groupweights: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ValidationError as exc:
        print(f"groupweights: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except BrokenPipeError:
        sys.stderr.close()
    except FileNotFoundError as exc:
        print(f"groupweights: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

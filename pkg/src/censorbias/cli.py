"""Command-line interface.

Commands: simulate | experiment | audit | roc | plot | figures.
Tabular output is CSV, plots are self-contained SVG, and each command
ends with a single-line JSON summary on stdout. All randomness funnels
through --seed (default 1963); identical flags give identical output.
Exit status is 0 only when the command succeeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

from . import __version__
from .bias import SABI_SCALE, SQBI_SCALE, clinical_bias, signif
from .dataset import (BUILTIN_DATASETS, DatasetMapping, clinical_preprocess,
                      read_csv, write_csv)
from .errors import CensorBiasError, DomainError
from .experiment import (ExperimentSpec, ExperimentTable, Fixed, Uniform,
                         case_censoring_correlation, parse_sampler,
                         preset_experiment, run_experiment)
from .plots import (MECHANISM_COLORS, bias_panel, bias_plot, censor_plot,
                    compose, km_panel, km_plot, trial_panel, trial_plot)
from .rocstat import youden_analysis
from .simulate import (CureModelSpec, RngHandle, case_censoring,
                       complete_follow_up, interim_censoring, time_censoring)

DEFAULT_SEED = 1963

_MECHANISM_TAGS = {"time": 2, "interim": 3, "case": 4}


def _apply_mechanism(mechanism, data, median, q99, p_censoring, rng):
    if mechanism == "time":
        return time_censoring(data, median, q99, p_censoring, rng)
    if mechanism == "interim":
        return interim_censoring(data, median, q99, p_censoring, rng)
    return case_censoring(data, p_censoring, rng)
_INDEX_SCALES = {"SQBI": SQBI_SCALE, "UMBI": 1.0, "SABI": SABI_SCALE}


def _json_line(payload: dict) -> None:
    print(json.dumps(payload))


def _num(v):
    """None for missing/NaN so summaries stay valid JSON."""
    if v is None:
        return None
    v = float(v)
    return None if math.isnan(v) else v


# simulate ----------------------------------------------------------------

def _cmd_simulate(args) -> int:
    spec = CureModelSpec(n_cases=args.n_cases, median=args.median,
                         q99=args.q99, cure_rate=args.cure_rate)
    data = complete_follow_up(spec, RngHandle(args.seed, 1))
    if args.mechanism != "none":
        rng = RngHandle(args.seed, _MECHANISM_TAGS[args.mechanism])
        data = _apply_mechanism(args.mechanism, data, args.median, args.q99,
                                args.p_censoring, rng)
    write_csv(data, args.out)
    _json_line({"command": "simulate", "n": len(data),
                "n_events": data.n_events,
                "censored_fraction": data.p_censored,
                "label": data.label, "out": str(args.out)})
    return 0


# experiment ---------------------------------------------------------------

def _experiment_spec(args) -> ExperimentSpec:
    explicit = [args.n_cases, args.median, args.cure_rate, args.p_censoring]
    if args.preset is not None:
        if any(v is not None for v in explicit):
            raise DomainError("--preset and explicit sampler flags are "
                              "mutually exclusive")
        return preset_experiment(args.preset, n_trials=args.trials,
                                 master_seed=args.seed)
    return ExperimentSpec(
        n_trials=args.trials,
        n_cases=parse_sampler(args.n_cases or "1000"),
        median=parse_sampler(args.median or "25"),
        cure_rate=parse_sampler(args.cure_rate or "0"),
        p_censoring=parse_sampler(args.p_censoring or "0.05:0.95"),
        q99=args.q99, master_seed=args.seed)


def _table_youden(table: ExperimentTable, column: str) -> dict | None:
    field = column.lower()
    rows = [r for r in table.rows
            if getattr(r, field) is not None and r.p_value is not None]
    if not rows:
        return None
    try:
        roc = youden_analysis([getattr(r, field) for r in rows],
                              [1 if r.p_value < 0.05 else 0 for r in rows])
    except DomainError:
        return None
    return {"auc": _num(roc.auc), "cutoff": _num(roc.cutoff),
            "sensitivity": _num(roc.sensitivity),
            "specificity": _num(roc.specificity)}


def _cmd_experiment(args) -> int:
    spec = _experiment_spec(args)
    table = run_experiment(spec, n_workers=args.workers)
    table.write_csv(args.out)
    try:
        case_r = _num(case_censoring_correlation(table).r)
    except DomainError:
        case_r = None
    _json_line({"command": "experiment", "trials": spec.n_trials,
                "rows": len(table.rows), "case_r": case_r,
                "indexes": {c: _table_youden(table, c)
                            for c in ("SQBI", "UMBI", "SABI")},
                "nonconvergent": table.n_nonconvergent,
                "no_events": table.n_no_events, "out": str(args.out)})
    return 0


# audit ---------------------------------------------------------------------

def _fmt_pcens(v) -> str:
    return "" if v is None else f"{signif(v, 2):.2f}"


def _fmt_index(v) -> str:
    return "" if v is None else f"{signif(v, 2):g}"


def _index_flagged(v) -> bool:
    return v is not None and signif(v, 2) > 1


def audit_csv(rows) -> str:
    """Audit rows as CSV text: 2-significant-digit display, with a flag
    column marking index values whose rounded value exceeds 1."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["trial", "n", "pCens", "SQBI", "SABI", "flag",
                     "reference"])
    for row in rows:
        flags = [name for name, v in (("SQBI", row.sqbi), ("SABI", row.sabi))
                 if _index_flagged(v)]
        writer.writerow([row.trial, row.n, _fmt_pcens(row.p_cens),
                         _fmt_index(row.sqbi), _fmt_index(row.sabi),
                         "+".join(flags), row.reference])
    return buf.getvalue()


def _audit_datasets(args) -> list:
    if args.builtin is not None:
        keys = (list(BUILTIN_DATASETS) if args.builtin == "all"
                else [args.builtin])
        out = []
        for key in keys:
            for data in clinical_preprocess(key):
                out.append((data, BUILTIN_DATASETS[key].reference))
        return out
    mapping = DatasetMapping(time_column=args.time_col,
                             status_column=args.status_col,
                             event_value=args.event_value,
                             group_column=args.group_col)
    data = read_csv(args.input, mapping)
    out = [(data, "")]
    if args.group_col is not None:
        for label, part in data.split_by_group().items():
            out.append((part.renamed(f"{data.name} {label}"), ""))
    return out


def _cmd_audit(args) -> int:
    if (args.builtin is None) == (args.input is None):
        raise DomainError("exactly one of --builtin or --input is required")
    rows = [clinical_bias(data, data.name, reference=ref)
            for data, ref in _audit_datasets(args)]
    text = audit_csv(rows)
    sys.stdout.write(text)
    if args.out is not None:
        Path(args.out).write_text(text)
    _json_line({"command": "audit", "rows": len(rows),
                "flagged": sum(1 for r in rows
                               if _index_flagged(r.sqbi)
                               or _index_flagged(r.sabi)),
                "out": None if args.out is None else str(args.out)})
    return 0


# roc -----------------------------------------------------------------------

def _roc_from_table(args):
    table = ExperimentTable.read_csv(args.table)
    field = args.index.lower()
    scale = _INDEX_SCALES[args.index] if args.raw else 1.0
    pairs = [(getattr(r, field), r.p_value) for r in table.rows
             if getattr(r, field) is not None and r.p_value is not None]
    if not pairs:
        raise DomainError(f"no rows carry both {args.index} and pValue")
    scores = [v * scale for v, _ in pairs]
    labels = [1 if p < 0.05 else 0 for _, p in pairs]
    return scores, labels


def _roc_from_columns(args):
    with open(args.input, newline="") as fh:
        reader = csv.DictReader(fh)
        scores, labels = [], []
        for line in reader:
            if args.score_col not in line or args.label_col not in line:
                raise DomainError(
                    f"columns {args.score_col!r}/{args.label_col!r} "
                    f"not found in {args.input}")
            raw = line[args.score_col].strip()
            scores.append(float(raw) if raw else None)
            labels.append(1 if line[args.label_col].strip()
                          == args.positive_value else 0)
    if not scores:
        raise DomainError(f"no data rows in {args.input}")
    return scores, labels


def _cmd_roc(args) -> int:
    if args.table is not None:
        scores, labels = _roc_from_table(args)
    elif args.input is not None:
        if args.score_col is None or args.label_col is None:
            raise DomainError("--input needs --score-col and --label-col")
        scores, labels = _roc_from_columns(args)
    else:
        raise DomainError("one of --table or --input is required")
    roc = youden_analysis(scores, labels)
    _json_line({"command": "roc", "n": roc.n_positive + roc.n_negative,
                "n_positive": roc.n_positive, "n_negative": roc.n_negative,
                "auc": _num(roc.auc),
                "auc_ci": [_num(roc.auc_ci_low), _num(roc.auc_ci_high)],
                "cutoff": _num(roc.cutoff),
                "sensitivity": _num(roc.sensitivity),
                "specificity": _num(roc.specificity),
                "ppv": _num(roc.ppv), "npv": _num(roc.npv)})
    return 0


# plot ----------------------------------------------------------------------

_PLOT_MAPPING = DatasetMapping(time_column="time", status_column="status",
                               event_value="1", group_column="x")


def _load_plot_datasets(paths):
    out = []
    for path in paths:
        data = read_csv(path, _PLOT_MAPPING)
        groups = data.split_by_group()
        if len(groups) > 1:
            out.extend(groups.values())
        else:
            out.append(data)
    return out


def _parse_xlim(text):
    if text is None:
        return None
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError:
        raise DomainError(f"--xlim expects lo:hi, got {text!r}") from None
    return (lo, hi)


def _cmd_plot(args) -> int:
    if args.kind in ("km", "trial"):
        if not args.input:
            raise DomainError(f"--kind {args.kind} needs --input")
        datasets = _load_plot_datasets(args.input)
        if args.kind == "km":
            svg = km_plot(datasets, title=args.title, log_y=args.log_y)
        else:
            if len(datasets) != 2:
                raise DomainError("--kind trial needs exactly two datasets "
                                  "(complete, censored)")
            svg = trial_plot(datasets[0], datasets[1], color=args.color,
                             main=args.title, log_y=args.log_y)
    else:
        if args.table is None:
            raise DomainError(f"--kind {args.kind} needs --table")
        table = ExperimentTable.read_csv(args.table)
        if args.kind == "censor_scatter":
            svg = censor_plot(table, title=args.title)
        else:
            if args.index is None:
                raise DomainError("--kind bias_scatter needs --index")
            svg = bias_plot(table, args.index, title=args.title,
                            xlim=_parse_xlim(args.xlim))
    Path(args.out).write_text(svg)
    _json_line({"command": "plot", "kind": args.kind, "out": str(args.out)})
    return 0


# figures --------------------------------------------------------------------

def _virtual_trial_row(row_index: int, seed: int, median: float,
                       cure_rate: float, n_cases: int = 1000,
                       p_censoring: float = 0.5, q99: float = 100.0):
    """Three trial panels (time, interim, case) for one parameter setting."""
    base = row_index * 8
    spec = CureModelSpec(n_cases=n_cases, median=median, q99=q99,
                         cure_rate=cure_rate)
    group0 = complete_follow_up(spec, RngHandle(seed, base + 1))
    panels = []
    for mechanism in ("time", "interim", "case"):
        rng = RngHandle(seed, base + _MECHANISM_TAGS[mechanism])
        group1 = _apply_mechanism(mechanism, group0, median, q99,
                                  p_censoring, rng)
        panels.append(trial_panel(group0, group1,
                                  color=MECHANISM_COLORS[mechanism],
                                  main=f"{mechanism.capitalize()} censoring"))
    return panels


def _cmd_figures(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = []

    panels = []
    for i, (cure, median) in enumerate([(0.0, 25.0), (0.0, 50.0),
                                        (0.4, 25.0), (0.4, 50.0)]):
        panels.extend(_virtual_trial_row(i, args.seed, median, cure))
    fig1 = out_dir / "fig1.svg"
    fig1.write_text(compose(panels, ncol=3))
    files.append(str(fig1))

    tables = {}
    for preset in (1, 2, 3, 4, 5):
        spec = preset_experiment(preset, n_trials=args.trials,
                                 master_seed=args.seed)
        tables[preset] = run_experiment(spec, n_workers=args.workers)

    fig2 = out_dir / "fig2.svg"
    fig2.write_text(censor_plot(tables[5], title="Experiment 5"))
    files.append(str(fig2))

    fig3 = out_dir / "fig3.svg"
    fig3.write_text(compose(
        [bias_panel(tables[1], "SQBI", title="Experiment 1"),
         bias_panel(tables[5], "SQBI", title="Experiment 5")], ncol=2))
    files.append(str(fig3))

    fig4 = out_dir / "fig4.svg"
    fig4.write_text(compose(
        [bias_panel(tables[p], "UMBI", title=f"Experiment {p}")
         for p in (1, 2, 3, 4)], ncol=2))
    files.append(str(fig4))

    fig5 = out_dir / "fig5.svg"
    fig5.write_text(compose(
        [bias_panel(tables[1], "SABI", title="Experiment 1",
                    xlim=(0.2, 1.9)),
         bias_panel(tables[5], "SABI", title="Experiment 5",
                    xlim=(0.2, 2.5))], ncol=2))
    files.append(str(fig5))

    rows = []
    for key, spec in BUILTIN_DATASETS.items():
        for data in clinical_preprocess(key):
            rows.append(clinical_bias(data, data.name,
                                      reference=spec.reference))
    table1 = out_dir / "table1.csv"
    table1.write_text(audit_csv(rows))
    files.append(str(table1))

    for preset, table in tables.items():
        path = out_dir / f"experiment{preset}.csv"
        table.write_csv(path)
        files.append(str(path))

    _json_line({"command": "figures", "trials": args.trials,
                "seed": args.seed, "files": files})
    return 0


# parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="censorbias",
        description="Simulate censored survival trials and audit "
                    "censoring-induced bias.")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate",
                       help="draw one virtual trial and write it as CSV")
    p.add_argument("--n-cases", type=int, required=True)
    p.add_argument("--median", type=float, required=True)
    p.add_argument("--q99", type=float, default=100.0)
    p.add_argument("--cure-rate", type=float, default=0.0)
    p.add_argument("--mechanism", choices=["none", "time", "interim", "case"],
                   default="none")
    p.add_argument("--p-censoring", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("experiment",
                       help="run a batch of virtual trials to CSV")
    p.add_argument("--preset", type=int, choices=[1, 2, 3, 4, 5])
    p.add_argument("--n-cases", help="sampler: value or low:high")
    p.add_argument("--median", help="sampler: value or low:high")
    p.add_argument("--cure-rate", help="sampler: value or low:high")
    p.add_argument("--p-censoring", help="sampler: value or low:high")
    p.add_argument("--q99", type=float, default=100.0)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_experiment)

    p = sub.add_parser("audit",
                       help="bias indexes of clinical survival datasets")
    p.add_argument("--builtin", choices=list(BUILTIN_DATASETS) + ["all"])
    p.add_argument("--input", help="CSV file to audit instead of a builtin")
    p.add_argument("--time-col", default="time")
    p.add_argument("--status-col", default="status")
    p.add_argument("--event-value", default="1")
    p.add_argument("--group-col", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_audit)

    p = sub.add_parser("roc", help="ROC/Youden report as JSON")
    p.add_argument("--table", help="experiment CSV to score")
    p.add_argument("--index", choices=["SQBI", "UMBI", "SABI"],
                   default="SQBI")
    p.add_argument("--raw", action="store_true",
                   help="undo the index rescaling before the ROC")
    p.add_argument("--input", help="generic CSV with score/label columns")
    p.add_argument("--score-col")
    p.add_argument("--label-col")
    p.add_argument("--positive-value", default="1")
    p.set_defaults(func=_cmd_roc)

    p = sub.add_parser("plot", help="render one SVG plot")
    p.add_argument("--kind", required=True,
                   choices=["km", "trial", "censor_scatter", "bias_scatter"])
    p.add_argument("--input", nargs="+", help="dataset CSV file(s)")
    p.add_argument("--table", help="experiment CSV (scatter kinds)")
    p.add_argument("--index", choices=["SQBI", "UMBI", "SABI"])
    p.add_argument("--color", default="red")
    p.add_argument("--title", default="")
    p.add_argument("--log-y", action="store_true")
    p.add_argument("--xlim", help="lo:hi for bias_scatter")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_plot)

    p = sub.add_parser("figures",
                       help="regenerate the five figures and the audit table")
    p.add_argument("--out-dir", default="figures")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=_cmd_figures)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CensorBiasError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

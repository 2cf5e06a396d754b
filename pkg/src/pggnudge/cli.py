"""Command-line entry point.

Commands: train, baseline, eval, stats, report, validate.  Configuration keys
resolve as defaults < config file (key = value lines, # comments) < PGGNUDGE_*
environment variables < explicit flags, and the resolved values are echoed in
a manifest written alongside every output set.  Exit codes: 0 success, 2 usage,
3 data or contract error.
"""

import argparse
import csv
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, harness, policy, stats, svg
from .game import ContractError, GameConfig
from .ppo import TrainConfig, TrainingDiverged, train

ENV_PREFIX = "PGGNUDGE_"

_NONE_WORDS = ("none", "null", "")


def _parse_bool(text: str) -> bool:
    v = text.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_opt_float(text: str):
    v = text.strip().lower()
    if v in _NONE_WORDS:
        return None
    return float(v)


# key -> (parser, default); order fixes the manifest and flag listing
CONFIG_SCHEMA = {
    # game constants
    "n_players": (int, 4),
    "t_max": (int, 25),
    "k": (float, 1.6),
    "aspiration_a": (float, 1.0),
    "threshold_x": (float, 0.4),
    "beta": (float, 0.4),
    "sigma": (float, 0.2),
    "coop_threshold": (float, 0.5),
    "bm_form": (str, "bounded"),
    # training hyperparameters
    "total_steps": (int, 4_000_000),
    "batch_steps": (int, 4_000),
    "minibatch_size": (int, 128),
    "epochs_per_batch": (int, 30),
    "clip_epsilon": (float, 0.3),
    "discount_gamma": (float, 1.0),
    "learning_rate": (float, 5e-5),
    "value_coeff": (float, 0.5),
    "entropy_coeff": (float, 0.0),
    "optimizer": (str, "adam"),
    "advantage_norm": (_parse_bool, True),
    "grad_clip_norm": (_parse_opt_float, None),
    "learning_rate_final": (_parse_opt_float, None),
    "seed": (int, 0),
}

GAME_KEYS = ("n_players", "t_max", "k", "aspiration_a", "threshold_x", "beta",
             "sigma", "coop_threshold", "bm_form")
TRAIN_KEYS = ("total_steps", "batch_steps", "minibatch_size", "epochs_per_batch",
              "clip_epsilon", "discount_gamma", "learning_rate", "value_coeff",
              "entropy_coeff", "optimizer", "advantage_norm", "grad_clip_norm",
              "learning_rate_final", "seed")

PRESETS = {"desk": 800_000, "paper": 4_000_000}


def read_config_file(path) -> dict:
    """Flat `key = value` lines; # starts a comment; unknown keys rejected."""
    values = {}
    with open(path) as fh:
        for ln, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ContractError(f"{path}: line {ln}: expected key = value")
            key, _, text = line.partition("=")
            key = key.strip()
            if key not in CONFIG_SCHEMA:
                raise ContractError(f"{path}: line {ln}: unknown config key {key!r}")
            parse, _ = CONFIG_SCHEMA[key]
            try:
                values[key] = parse(text.strip())
            except ValueError as exc:
                raise ContractError(f"{path}: line {ln}: {exc}") from exc
    return values


def add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="FILE", help="flat key = value config file")
    for key, (parse, default) in CONFIG_SCHEMA.items():
        parser.add_argument(f"--{key.replace('_', '-')}", dest=f"cfg_{key}",
                            type=parse, default=None, metavar="V",
                            help=f"config key {key} (default {default})")


def resolve_config(args) -> dict:
    """defaults < config file < environment < flags."""
    resolved = {key: default for key, (_, default) in CONFIG_SCHEMA.items()}
    if getattr(args, "config", None):
        resolved.update(read_config_file(args.config))
    for key, (parse, _) in CONFIG_SCHEMA.items():
        env = os.environ.get(ENV_PREFIX + key.upper())
        if env is not None:
            try:
                resolved[key] = parse(env)
            except ValueError as exc:
                raise ContractError(f"{ENV_PREFIX}{key.upper()}: {exc}") from exc
    for key in CONFIG_SCHEMA:
        flag = getattr(args, f"cfg_{key}", None)
        if flag is not None:
            resolved[key] = flag
    return resolved


def game_config_from(resolved: dict) -> GameConfig:
    return GameConfig(**{k: resolved[k] for k in GAME_KEYS})


def train_config_from(resolved: dict, reward_kind: str) -> TrainConfig:
    return TrainConfig(reward_kind=reward_kind,
                       **{k: resolved[k] for k in TRAIN_KEYS})


def write_manifest(path, command: str, resolved: dict, extra: dict,
                   outputs: list, wall_clock: float) -> None:
    doc = {
        "command": command,
        "tool_version": __version__,
        "seed": resolved.get("seed"),
        "config": {k: resolved[k] for k in CONFIG_SCHEMA},
        "options": extra,
        "outputs": [str(p) for p in outputs],
        "wall_clock_seconds": wall_clock,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def read_metric_column(path) -> np.ndarray:
    """Single-column numeric file; one leading non-numeric header line allowed."""
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ContractError(str(exc)) from exc
    values = []
    for ln, line in enumerate(lines, start=1):
        text = line.strip()
        if not text:
            continue
        try:
            values.append(float(text))
        except ValueError:
            if ln == 1:
                continue  # header line
            raise ContractError(f"{path}: line {ln}: not a number: {text!r}")
    if not values:
        raise ContractError(f"{path}: no numeric data")
    return np.array(values)


# ---------------------------------------------------------------------------
# Campaign output files
# ---------------------------------------------------------------------------

def _round_edges(bins: int = 20) -> np.ndarray:
    return np.linspace(0.0, 1.0, bins + 1)


def write_campaign_outputs(out_dir: Path, group: str, records, summary,
                           baseline_dir: Path | None, seed: int) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    game_sums, game_props = stats.per_game_metrics(records)
    comparison = {k: "" for k in ("baseline_ref", "sum_u", "sum_p", "sum_pct_change",
                                  "prop_u", "prop_p", "prop_pct_change")}
    if baseline_dir is not None:
        base_sums = read_metric_column(baseline_dir / "game_sums.csv")
        base_props = read_metric_column(baseline_dir / "game_props.csv")
        u_s, p_s = stats.mann_whitney_u(base_sums, game_sums)
        u_p, p_p = stats.mann_whitney_u(base_props, game_props)
        comparison = {
            "baseline_ref": str(baseline_dir),
            "sum_u": u_s, "sum_p": p_s,
            "sum_pct_change": stats.percentage_change(base_sums.mean(), game_sums.mean()),
            "prop_u": u_p, "prop_p": p_p,
            "prop_pct_change": stats.percentage_change(base_props.mean(), game_props.mean()),
        }

    summary_path = out_dir / "summary.csv"
    harness.emit_csv(summary_path,
                     ["group", "games", "seed",
                      "sum_contribution_mean", "prop_over_threshold_mean",
                      "cc_sum_contribution_mean", "cc_prop_over_threshold_mean",
                      *comparison.keys()],
                     [[group, summary.games, seed,
                       summary.sum_contribution_mean, summary.prop_over_threshold_mean,
                       summary.cc_sum_contribution_mean, summary.cc_prop_over_threshold_mean,
                       *comparison.values()]])
    written.append(summary_path)

    header, rows = harness.per_round_means(records)
    per_round_path = out_dir / "per_round.csv"
    harness.emit_csv(per_round_path, header, rows)
    written.append(per_round_path)

    heat = harness.contribution_heatmap(records)
    heat_path = out_dir / f"heatmap_{group}.csv"
    header, rows = harness.matrix_table(heat, "round", range(1, heat.shape[0] + 1),
                                        "bin_", _round_edges(heat.shape[1]))
    harness.emit_csv(heat_path, header, rows)
    written.append(heat_path)

    trans = harness.transition_matrix(records)
    trans_path = out_dir / f"transition_{group}.csv"
    header, rows = harness.matrix_table(trans, "from_bin",
                                        [f"{e:.2f}" for e in _round_edges(trans.shape[0])[:-1]],
                                        "to_", _round_edges(trans.shape[1]))
    harness.emit_csv(trans_path, header, rows)
    written.append(trans_path)

    if baseline_dir is not None:
        base_trans = read_matrix_csv(baseline_dir / "transition_baseline.csv")
        diff = trans - base_trans
        diff_path = out_dir / "transition_diff.csv"
        header, rows = harness.matrix_table(diff, "from_bin",
                                            [f"{e:.2f}" for e in _round_edges(diff.shape[0])[:-1]],
                                            "to_", _round_edges(diff.shape[1]))
        harness.emit_csv(diff_path, header, rows)
        written.append(diff_path)

    if group == "baseline":
        table = harness.validation_curves(records)
        val_path = out_dir / "validation.csv"
        rows = []
        for label in (harness.STRATUM_HIGH, harness.STRATUM_LOW):
            for b in range(len(table.edges) - 1):
                rows.append([b, table.edges[b], table.edges[b + 1], label,
                             table.counts[label][b], table.means[label][b]])
        harness.emit_csv(val_path,
                         ["bin", "bin_low", "bin_high", "stratum", "count", "mean_response"],
                         rows)
        written.append(val_path)

    for name, vals in (("game_sums.csv", game_sums), ("game_props.csv", game_props)):
        path = out_dir / name
        with open(path, "w", newline="") as fh:
            fh.write("\n".join([name.removesuffix(".csv")]
                               + [harness.format_cell(float(v)) for v in vals]) + "\n")
        written.append(path)
    return written


def read_matrix_csv(path) -> np.ndarray:
    """Read back a matrix_table CSV (first column is the row label)."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ContractError(str(exc)) from exc
    return np.array([[float(cell) for cell in row[1:]] for row in rows[1:]])


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_train(args) -> int:
    resolved = resolve_config(args)
    if args.preset and getattr(args, "cfg_total_steps", None) is None:
        resolved["total_steps"] = PRESETS[args.preset]
    game_cfg = game_config_from(resolved)
    train_cfg = train_config_from(resolved, args.reward)

    out_path = Path(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    log_path = Path(args.log) if args.log else out_path.with_name(out_path.stem + "_log.csv")

    t0 = time.perf_counter()
    log_header = ["batch", "mean_episodic_reward", "policy_loss", "value_loss", "entropy"]
    with open(log_path, "w", newline="") as fh:
        fh.write(",".join(log_header) + "\n")

    def on_batch(b):
        with open(log_path, "a", newline="") as fh:
            fh.write(",".join(harness.format_cell(v) for v in
                              [b.batch, b.mean_episodic_reward, b.policy_loss,
                               b.value_loss, b.entropy]) + "\n")
        if not args.quiet:
            print(f"batch {b.batch}: reward {b.mean_episodic_reward:.3f} "
                  f"entropy {b.entropy:.3f}", flush=True)

    params, _ = train(train_cfg, game_cfg, on_batch=on_batch)
    policy.save_params(params, out_path, extra_meta={
        "reward_kind": args.reward,
        "train_config": {k: resolved[k] for k in TRAIN_KEYS},
        "game_config": {k: resolved[k] for k in GAME_KEYS},
    })
    wall = time.perf_counter() - t0
    manifest = out_path.with_name(out_path.stem + "_manifest.json")
    write_manifest(manifest, "train", resolved,
                   {"reward": args.reward, "out": str(out_path), "log": str(log_path),
                    "preset": args.preset},
                   [out_path, log_path], wall)
    print(f"wrote {out_path} and {log_path}")
    return 0


def _run_campaign_command(args, group: str, model_path=None) -> int:
    resolved = resolve_config(args)
    game_cfg = game_config_from(resolved)
    spec = harness.CampaignSpec(
        group=group, games=args.games, master_seed=resolved["seed"],
        model_path=str(model_path) if model_path else None,
        eval_mode="argmax" if getattr(args, "argmax", False) else "sample",
        workers=args.workers)
    t0 = time.perf_counter()
    records, summary = harness.run_campaign(spec, game_cfg)
    baseline_dir = Path(args.baseline_dir) if getattr(args, "baseline_dir", None) else None
    out_dir = Path(args.out_dir)
    written = write_campaign_outputs(out_dir, group, records, summary,
                                     baseline_dir, resolved["seed"])
    wall = time.perf_counter() - t0
    write_manifest(out_dir / "manifest.json", group if group == "baseline" else "eval",
                   resolved,
                   {"group": group, "games": args.games, "workers": args.workers,
                    "model": str(model_path) if model_path else None,
                    "baseline_dir": str(baseline_dir) if baseline_dir else None,
                    "argmax": bool(getattr(args, "argmax", False))},
                   written, wall)
    print(f"{group}: {summary.games} games, sum_contribution_mean "
          f"{summary.sum_contribution_mean:.4f}, prop_over_threshold_mean "
          f"{summary.prop_over_threshold_mean:.4f}")
    if group == "baseline":
        return 0
    return 0


def cmd_baseline(args) -> int:
    return _run_campaign_command(args, "baseline")


def cmd_eval(args) -> int:
    params = policy.load_params(args.model)
    reward_kind = params.meta.get("reward_kind")
    if reward_kind not in ("sum", "prop"):
        raise ContractError(f"model file lacks a valid reward_kind (got {reward_kind!r})")
    return _run_campaign_command(args, f"{reward_kind}-drl", model_path=args.model)


def cmd_validate(args) -> int:
    rc = _run_campaign_command(args, "baseline")
    if rc != 0:
        return rc
    # re-derive shape check from the emitted validation table
    out_dir = Path(args.out_dir)
    table = _validation_table_from_csv(out_dir / "validation.csv")
    ok, detail = harness.response_curve_shape(table)
    for key, val in sorted(detail.items()):
        print(f"  {key}: {val}")
    print(f"validation shape check: {'PASS' if ok else 'FAIL'}")
    return 0 if ok else 3


def _validation_table_from_csv(path) -> harness.BinnedTable:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    bins = max(int(r["bin"]) for r in rows) + 1
    edges = np.linspace(0.0, 1.0, bins + 1)
    counts = {harness.STRATUM_HIGH: np.zeros(bins, dtype=int),
              harness.STRATUM_LOW: np.zeros(bins, dtype=int)}
    means = {harness.STRATUM_HIGH: np.full(bins, np.nan),
             harness.STRATUM_LOW: np.full(bins, np.nan)}
    for r in rows:
        b = int(r["bin"])
        counts[r["stratum"]][b] = int(r["count"])
        means[r["stratum"]][b] = float(r["mean_response"]) if r["mean_response"] else np.nan
    return harness.BinnedTable(edges=edges, counts=counts, means=means)


def cmd_stats(args) -> int:
    a = read_metric_column(args.baseline_csv)
    b = read_metric_column(args.treatment_csv)
    u, p = stats.mann_whitney_u(a, b)
    change = stats.percentage_change(float(a.mean()), float(b.mean()))
    print(f"U = {u:.6g}")
    print(f"p = {p:.6g}")
    print(f"percentage_change = {change:+.4f}%")
    out = Path(args.out) if args.out else Path("mw_test.csv")
    harness.emit_csv(out, ["u", "p", "baseline_mean", "treatment_mean", "percentage_change"],
                     [[u, p, float(a.mean()), float(b.mean()), change]])
    print(f"wrote {out}")
    return 0


REPORTABLE = {
    "per_round.csv": "per_round",
    "validation.csv": "validation",
    "training_log.csv": "training_log",
}


def cmd_report(args) -> int:
    in_dir = Path(args.in_dir)
    if not in_dir.is_dir():
        raise ContractError(f"not a directory: {in_dir}")
    emitted, skipped = [], []

    def out_name(csv_name):
        return in_dir / (csv_name.removesuffix(".csv") + ".svg")

    for name in sorted(p.name for p in in_dir.glob("*.csv")):
        path = in_dir / name
        try:
            if name == "per_round.csv":
                with open(path, newline="") as fh:
                    rows = list(csv.DictReader(fh))
                rounds = [int(r["round"]) for r in rows]
                series = [("cc", rounds, [float(r["cc_mean"]) for r in rows])]
                if any(r["planner_mean"] for r in rows):
                    series.append(("planner", rounds,
                                   [float(r["planner_mean"]) if r["planner_mean"] else np.nan
                                    for r in rows]))
                content = svg.line_chart(series, title="Mean contribution per round",
                                         x_label="round", y_label="contribution",
                                         y_min=0.0, y_max=1.0)
            elif name == "validation.csv":
                table = _validation_table_from_csv(path)
                centers = (table.edges[:-1] + table.edges[1:]) / 2.0
                series = [(label, centers, table.means[label])
                          for label in (harness.STRATUM_HIGH, harness.STRATUM_LOW)]
                content = svg.line_chart(series, title="Response to group contribution",
                                         x_label="others' mean contribution (prev round)",
                                         y_label="own contribution", y_min=0.0, y_max=1.0)
            elif name == "training_log.csv":
                with open(path, newline="") as fh:
                    rows = list(csv.DictReader(fh))
                series = [("mean episodic reward",
                           [int(r["batch"]) for r in rows],
                           [float(r["mean_episodic_reward"]) for r in rows])]
                content = svg.line_chart(series, title="Training reward",
                                         x_label="batch", y_label="mean episodic reward")
            elif name.startswith("heatmap_"):
                m = read_matrix_csv(path)
                content = svg.heatmap(m, title=name.removesuffix(".csv"),
                                      x_label="contribution bin", y_label="round")
            elif name == "transition_diff.csv":
                m = read_matrix_csv(path)
                content = svg.heatmap(m, title="transition_diff", diverging=True,
                                      x_label="contribution bin (this round)",
                                      y_label="contribution bin (previous round)")
            elif name.startswith("transition_"):
                m = read_matrix_csv(path)
                content = svg.heatmap(m, title=name.removesuffix(".csv"),
                                      x_label="contribution bin (this round)",
                                      y_label="contribution bin (previous round)")
            else:
                skipped.append(name)
                continue
        except (KeyError, ValueError) as exc:
            raise ContractError(f"{path}: cannot render: {exc}") from exc
        target = out_name(name)
        harness.emit_svg(target, content)
        emitted.append(target.name)

    for name in emitted:
        print(f"wrote {in_dir / name}")
    if skipped:
        print("skipped (no renderer): " + ", ".join(sorted(skipped)))
    if not emitted:
        raise ContractError(f"no renderable CSV files in {in_dir}")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pggnudge",
        description="Public goods game simulator, planner trainer, and evaluation harness")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train a nudging agent")
    p_train.add_argument("--reward", choices=("sum", "prop"), required=True)
    p_train.add_argument("--out", required=True, help="model file to write (JSON)")
    p_train.add_argument("--log", help="training log CSV (default: <out>_log.csv)")
    p_train.add_argument("--preset", choices=tuple(PRESETS), default=None,
                         help="desk: 800k steps, paper: 4M steps")
    p_train.add_argument("--quiet", action="store_true")
    add_config_flags(p_train)
    p_train.set_defaults(func=cmd_train)

    for name, fn, needs_model in (("baseline", cmd_baseline, False),
                                  ("eval", cmd_eval, True),
                                  ("validate", cmd_validate, False)):
        p = sub.add_parser(name)
        if needs_model:
            p.add_argument("--model", required=True, help="trained model file")
            p.add_argument("--baseline-dir",
                           help="baseline output dir for U-tests and transition diff")
            p.add_argument("--argmax", action="store_true",
                           help="evaluate with modal instead of sampled actions")
        p.add_argument("--games", type=int, default=10_000)
        p.add_argument("--out-dir", required=True)
        p.add_argument("--workers", type=int, default=1)
        add_config_flags(p)
        p.set_defaults(func=fn)

    p_stats = sub.add_parser("stats", help="Mann-Whitney U test on two metric files")
    p_stats.add_argument("baseline_csv")
    p_stats.add_argument("treatment_csv")
    p_stats.add_argument("--out", help="report CSV (default mw_test.csv)")
    p_stats.set_defaults(func=cmd_stats)

    p_report = sub.add_parser("report", help="render SVG figures from output CSVs")
    p_report.add_argument("--in-dir", required=True)
    p_report.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except ContractError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except TrainingDiverged as exc:
        print(f"error: training diverged at batch {exc.batch}: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()

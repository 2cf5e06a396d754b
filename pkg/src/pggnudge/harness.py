"""Campaign orchestration and figure-data extraction.

A campaign plays many independent games (baseline: four cooperators; nudging:
three cooperators plus the trained planner in the last seat).  Game i draws
from the counter-based stream (master_seed, i), so results are identical for
any worker count and merge order.
"""

import concurrent.futures
from dataclasses import dataclass

import numpy as np

from . import policy, stats
from .cc import CcAgent, CcParams
from .game import ContractError, EpisodeRecord, GameConfig, run_episode
from .ppo import PlannerAgent
from .rng import substream

GROUPS = ("baseline", "sum-drl", "prop-drl")


@dataclass
class CampaignSpec:
    group: str
    games: int = 10_000
    master_seed: int = 0
    model_path: str | None = None
    eval_mode: str = "sample"    # "sample" | "argmax"
    workers: int = 1

    def __post_init__(self):
        if self.group not in GROUPS:
            raise ContractError(f"group must be one of {GROUPS}")
        if self.games < 1:
            raise ContractError("games must be >= 1")
        if self.group != "baseline" and not self.model_path:
            raise ContractError(f"{self.group} campaign requires a model file")


def _play_range(spec: CampaignSpec, config: GameConfig,
                params: policy.PolicyParameters | None,
                start: int, stop: int) -> list[EpisodeRecord]:
    cc_params = CcParams.from_game_config(config)
    records = []
    for i in range(start, stop):
        rng = substream(spec.master_seed, i)
        roster = [CcAgent(seat, cc_params) for seat in range(config.n_players)]
        if spec.group != "baseline":
            reward_kind = spec.group.split("-")[0]
            roster[-1] = PlannerAgent(config.n_players - 1, params, config,
                                      reward_kind=reward_kind, mode=spec.eval_mode)
        records.append(run_episode(roster, config, rng))
    return records


def run_campaign(spec: CampaignSpec, config: GameConfig | None = None
                 ) -> tuple[list[EpisodeRecord], stats.EvalSummary]:
    """Play spec.games independent games and summarize them."""
    config = config or GameConfig()
    params = None
    if spec.group != "baseline":
        params = policy.load_params(spec.model_path)

    if spec.workers <= 1:
        records = _play_range(spec, config, params, 0, spec.games)
    else:
        bounds = np.linspace(0, spec.games, spec.workers + 1).astype(int)
        chunks = [(int(lo), int(hi)) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
        records = []
        with concurrent.futures.ProcessPoolExecutor(max_workers=spec.workers) as pool:
            futures = [pool.submit(_play_range, spec, config, params, lo, hi)
                       for lo, hi in chunks]
            for fut in futures:  # futures kept in chunk order: merge by game index
                records.extend(fut.result())
    return records, stats.summarize(records)


# ---------------------------------------------------------------------------
# Figure data
# ---------------------------------------------------------------------------

@dataclass
class BinnedTable:
    """Per-bin counts and mean responses, one row set per stratum."""

    edges: np.ndarray
    counts: dict[str, np.ndarray]
    means: dict[str, np.ndarray]


STRATUM_HIGH = "prev>=X"
STRATUM_LOW = "prev<X"


def validation_curves(records: list[EpisodeRecord], bins: int = 10) -> BinnedTable:
    """Response of each cooperator to the others' previous-round mean.

    For every agent and round t >= 2: x = mean of the other agents'
    contributions at t-1, y = own contribution at t, stratified by whether the
    agent's own previous contribution reached the cooperation threshold X.
    """
    if not records:
        raise ContractError("empty record collection")
    if any(label != "cc" for label in records[0].roster):
        raise ContractError("validation curves are defined on baseline records only")
    config = records[0].config
    contrib = stats.stack_contributions(records)   # (G, T, N)
    n = config.n_players
    prev = contrib[:, :-1, :]
    cur = contrib[:, 1:, :]
    others_mean = (prev.sum(axis=2, keepdims=True) - prev) / (n - 1)

    x = others_mean.ravel()
    y = cur.ravel()
    high = prev.ravel() >= config.threshold_x

    edges = np.linspace(0.0, 1.0, bins + 1)
    idx = np.clip(np.digitize(x, edges[1:-1]), 0, bins - 1)
    counts = {STRATUM_HIGH: np.zeros(bins, dtype=int),
              STRATUM_LOW: np.zeros(bins, dtype=int)}
    means = {STRATUM_HIGH: np.full(bins, np.nan),
             STRATUM_LOW: np.full(bins, np.nan)}
    for label, mask in ((STRATUM_HIGH, high), (STRATUM_LOW, ~high)):
        for b in range(bins):
            sel = mask & (idx == b)
            c = int(sel.sum())
            counts[label][b] = c
            if c:
                means[label][b] = y[sel].mean()
    return BinnedTable(edges=edges, counts=counts, means=means)


def response_curve_shape(table: BinnedTable, min_samples: int = 100,
                         max_inversions: int = 1) -> tuple[bool, dict]:
    """Check the conditional-cooperation shape on a binned response table:
    each stratum's curve is nondecreasing over its well-populated bins (up to
    max_inversions) and the cooperative stratum dominates in every bin where
    both strata are well populated."""
    detail = {}
    ok = True
    for label in (STRATUM_HIGH, STRATUM_LOW):
        sel = table.counts[label] >= min_samples
        vals = table.means[label][sel]
        inversions = int(np.sum(np.diff(vals) < 0))
        detail[f"inversions[{label}]"] = inversions
        ok = ok and inversions <= max_inversions
    both = ((table.counts[STRATUM_HIGH] >= min_samples)
            & (table.counts[STRATUM_LOW] >= min_samples))
    dominated = np.all(table.means[STRATUM_HIGH][both] > table.means[STRATUM_LOW][both])
    detail["dominance_bins"] = int(both.sum())
    detail["dominates"] = bool(dominated)
    return bool(ok and dominated), detail


def per_round_means(records: list[EpisodeRecord]) -> tuple[list[str], list[list]]:
    """Figure-3 style table: per-round mean contribution by role."""
    summary = stats.summarize(records)
    header = ["round", "cc_mean", "planner_mean"]
    rows = []
    for t in range(len(summary.cc_per_round_mean)):
        planner = ("" if summary.planner_per_round_mean is None
                   else summary.planner_per_round_mean[t])
        rows.append([t + 1, summary.cc_per_round_mean[t], planner])
    return header, rows


def contribution_heatmap(records: list[EpisodeRecord], bins: int = 20) -> np.ndarray:
    """(t_max, bins) matrix; row t is the normalized histogram of cooperator
    contributions in round t+1."""
    if not records:
        raise ContractError("empty record collection")
    cc_mask = np.array([label == "cc" for label in records[0].roster])
    contrib = stats.stack_contributions(records)[:, :, cc_mask]
    t_max = contrib.shape[1]
    edges = np.linspace(0.0, 1.0, bins + 1)
    out = np.empty((t_max, bins))
    for t in range(t_max):
        hist, _ = np.histogram(contrib[:, t, :].ravel(), bins=edges)
        total = hist.sum()
        out[t] = hist / total if total else 0.0
    return out


def transition_matrix(records: list[EpisodeRecord], bins: int = 20) -> np.ndarray:
    """Conditional frequency P(this round's bin | previous round's bin) for
    cooperator contributions; rows with no support are left at zero."""
    if not records:
        raise ContractError("empty record collection")
    cc_mask = np.array([label == "cc" for label in records[0].roster])
    contrib = stats.stack_contributions(records)[:, :, cc_mask]
    prev = contrib[:, :-1, :].ravel()
    cur = contrib[:, 1:, :].ravel()
    edges = np.linspace(0.0, 1.0, bins + 1)
    i = np.clip(np.digitize(prev, edges[1:-1]), 0, bins - 1)
    j = np.clip(np.digitize(cur, edges[1:-1]), 0, bins - 1)
    counts = np.zeros((bins, bins))
    np.add.at(counts, (i, j), 1.0)
    totals = counts.sum(axis=1, keepdims=True)
    with np.errstate(invalid="ignore"):
        out = np.where(totals > 0, counts / np.where(totals > 0, totals, 1.0), 0.0)
    return out


def transition_diff(records_treatment: list[EpisodeRecord],
                    records_baseline: list[EpisodeRecord], bins: int = 20) -> np.ndarray:
    """Change in follow-up behavior: treatment minus baseline conditional matrices."""
    if not records_treatment or not records_baseline:
        raise ContractError("both record collections must be non-empty")
    return (transition_matrix(records_treatment, bins)
            - transition_matrix(records_baseline, bins))


# ---------------------------------------------------------------------------
# File emission
# ---------------------------------------------------------------------------

def format_cell(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    v = float(value)
    if np.isnan(v):
        return ""
    return f"{v + 0.0:.6g}"


def emit_csv(path, header: list[str], rows: list[list]) -> None:
    """Write a newline-terminated CSV with 6-significant-digit numbers."""
    lines = [",".join(header)]
    for row in rows:
        if len(row) != len(header):
            raise ContractError("row width does not match header")
        lines.append(",".join(format_cell(v) for v in row))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def emit_svg(path, content: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(content)


def matrix_table(matrix: np.ndarray, row_label: str, row_values,
                 col_prefix: str, col_edges) -> tuple[list[str], list[list]]:
    """Matrix as a CSV table: one labeled row per matrix row."""
    header = [row_label] + [f"{col_prefix}{edge:.2f}" for edge in col_edges[:-1]]
    rows = [[rv] + list(matrix[i]) for i, rv in enumerate(row_values)]
    return header, rows

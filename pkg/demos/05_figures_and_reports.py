"""Produce the figure-data tables and deterministic SVG charts for a small
baseline campaign: the stratified response curves, per-round means, the
per-round contribution distribution heatmap, and the follow-up transition
matrix.

Everything lands in demo_report/, and rendering the same data twice yields
byte-identical files.
"""

from pathlib import Path

from pggnudge import svg
from pggnudge.harness import (CampaignSpec, STRATUM_HIGH, STRATUM_LOW,
                              contribution_heatmap, emit_csv, emit_svg,
                              matrix_table, run_campaign, transition_matrix,
                              validation_curves)

out = Path("demo_report")
out.mkdir(exist_ok=True)

records, summary = run_campaign(CampaignSpec("baseline", games=800, master_seed=42))
print(f"800 games: sum contribution {summary.sum_contribution_mean:.2f}, "
      f"prop > 0.5 {summary.prop_over_threshold_mean:.4f}")

table = validation_curves(records)
centers = (table.edges[:-1] + table.edges[1:]) / 2
emit_svg(out / "validation.svg", svg.line_chart(
    [(label, centers, table.means[label]) for label in (STRATUM_HIGH, STRATUM_LOW)],
    title="Response to the group's previous contribution",
    x_label="others' mean contribution (previous round)",
    y_label="own contribution", y_min=0.0, y_max=1.0))

heat = contribution_heatmap(records)
header, rows = matrix_table(heat, "round", range(1, 26), "bin_",
                            [i / 20 for i in range(21)])
emit_csv(out / "heatmap_baseline.csv", header, rows)
emit_svg(out / "heatmap_baseline.svg", svg.heatmap(
    heat, title="Contribution distribution by round",
    x_label="contribution bin", y_label="round"))

trans = transition_matrix(records)
emit_svg(out / "transition_baseline.svg", svg.heatmap(
    trans, title="Follow-up behavior", x_label="contribution bin (this round)",
    y_label="contribution bin (previous round)"))

emit_svg(out / "per_round.svg", svg.line_chart(
    [("cooperators", range(1, 26), summary.cc_per_round_mean)],
    title="Mean contribution per round", x_label="round",
    y_label="contribution", y_min=0.0, y_max=1.0))

for name in sorted(p.name for p in out.iterdir()):
    print("wrote", out / name)
print("\nthe high/low strata in validation.svg show conditional cooperation: "
      "agents whose last action was cooperative track the group's level.")

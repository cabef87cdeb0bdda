//! Ledger files, offline verification, result tables, and plot data.
//!
//! Ledgers are versioned JSON, pretty-printed with stable key order so
//! that serialize → parse → serialize is byte-identical and two identical
//! campaigns diff clean. [`verify_ledger`] re-runs detection and scoring
//! over the persisted episode records and re-derives every aggregate; a
//! well-formed ledger produces zero mismatches, and any tampering with an
//! episode record surfaces as a named mismatch. Tables and plot data are
//! plain text, one row per line, so any plotting tool can consume them.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detection::{
    bypassed, scan_findings, secret_touched, verify_attacks, AttackType, EpisodeContext,
    Finding, VerifiedAttack,
};
use crate::orchestrator::{
    dedup_attacks, dedup_findings, Budget, ConvergenceTable, MergedLedger, RunLedger,
    LEDGER_SCHEMA_VERSION,
};
use crate::scoring::ScoreBreakdown;
use crate::signature::{compute_signature, Signature};
use crate::trajectory::TrajectoryStep;

/// Report-layer failures.
#[derive(Debug, Error)]
pub enum ReportError {
    #[error("plot kind {kind} does not accept {inputs} inputs")]
    KindMismatch { kind: &'static str, inputs: &'static str },
    #[error("ledger parse error: {0}")]
    Parse(#[from] serde_json::Error),
}

/// Either ledger flavor, as found on disk.
///
/// One instance exists per loaded file, so the size gap between the
/// variants is irrelevant; boxing would only complicate the match sites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
#[allow(clippy::large_enum_variant)]
pub enum LedgerFile {
    Run(RunLedger),
    Merged(MergedLedger),
}

/// Serializes a ledger in its canonical on-disk form.
#[must_use]
pub fn ledger_to_json<T: Serialize>(ledger: &T) -> String {
    let mut text = serde_json::to_string_pretty(ledger).expect("ledger types serialize");
    text.push('\n');
    text
}

/// Parses either ledger flavor.
pub fn ledger_from_json(text: &str) -> Result<LedgerFile, ReportError> {
    Ok(serde_json::from_str(text)?)
}

/// One discrepancy between a ledger's stored values and recomputation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    /// Where the discrepancy sits, e.g. `episode 3` or `ledger`.
    pub scope: String,
    /// Which field disagrees.
    pub field: String,
    pub detail: String,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.scope, self.field, self.detail)
    }
}

fn push_if<T: PartialEq + fmt::Debug>(
    mismatches: &mut Vec<Mismatch>,
    scope: &str,
    field: &str,
    stored: &T,
    recomputed: &T,
) {
    if stored != recomputed {
        mismatches.push(Mismatch {
            scope: scope.into(),
            field: field.into(),
            detail: format!("stored {stored:?}, recomputed {recomputed:?}"),
        });
    }
}

/// Re-runs detection, scoring, and aggregation over a persisted ledger.
///
/// Returns every discrepancy found; an empty vector certifies the ledger.
/// Pure function of the ledger — no files, no side effects, idempotent.
#[must_use]
pub fn verify_ledger(ledger: &RunLedger) -> Vec<Mismatch> {
    let mut mismatches = Vec::new();
    let scope = "ledger";
    push_if(&mut mismatches, scope, "schema_version", &ledger.schema_version, &LEDGER_SCHEMA_VERSION);

    let config = &ledger.config;
    let detection = config.detection_config();

    // Novelty replay: the archive starts with the empty-trajectory cell and
    // grows by first sight, in episode order.
    let mut seen: std::collections::BTreeSet<Signature> = std::collections::BTreeSet::new();
    match compute_signature(&crate::trajectory::Trajectory::new(), config.scheme, config.message_window) {
        Ok(seed_signature) => {
            seen.insert(seed_signature);
        }
        Err(e) => mismatches.push(Mismatch {
            scope: scope.into(),
            field: "seed_signature".into(),
            detail: e.to_string(),
        }),
    }

    for episode in &ledger.episodes {
        let scope = format!("episode {}", episode.episode_id);
        if let Err(e) = episode.trajectory.validate() {
            mismatches.push(Mismatch {
                scope: scope.clone(),
                field: "trajectory".into(),
                detail: e.to_string(),
            });
            continue;
        }
        match compute_signature(&episode.trajectory, config.scheme, config.message_window) {
            Ok(signature) => push_if(&mut mismatches, &scope, "signature", &episode.signature, &signature),
            Err(e) => mismatches.push(Mismatch {
                scope: scope.clone(),
                field: "signature".into(),
                detail: e.to_string(),
            }),
        }

        let novel = !seen.contains(&episode.signature);
        seen.insert(episode.signature);
        push_if(&mut mismatches, &scope, "novel", &episode.novel, &novel);

        let ctx = EpisodeContext {
            episode_id: episode.episode_id,
            trajectory: &episode.trajectory,
            guardrail_enabled: config.guardrail.enabled,
        };
        let findings = scan_findings(&ctx, &detection);
        push_if(&mut mismatches, &scope, "findings", &episode.findings, &findings);
        let attacks = verify_attacks(&ctx, &detection);
        push_if(&mut mismatches, &scope, "attacks", &episode.attacks, &attacks);
        let bypass = bypassed(&ctx, &detection);
        push_if(&mut mismatches, &scope, "guardrail_bypass", &episode.guardrail_bypass, &bypass);
        let secret = secret_touched(&episode.trajectory);
        push_if(&mut mismatches, &scope, "secret_touched", &episode.secret_touched, &secret);

        let breakdown =
            ScoreBreakdown::from_episode(episode.novel, &episode.findings, &episode.attacks, episode.guardrail_bypass, episode.secret_touched);
        push_if(&mut mismatches, &scope, "breakdown", &episode.breakdown, &breakdown);
        push_if(&mut mismatches, &scope, "score", &episode.score, &breakdown.score(&config.weights));

        // Every executed call leaves exactly one result step and one world
        // event; blocked turns roll both back.
        let suffix = &episode.trajectory.steps[episode.suffix_start.min(episode.trajectory.steps.len())..];
        let result_steps = suffix.iter().filter(|s| matches!(s, TrajectoryStep::ToolResult { .. })).count();
        push_if(&mut mismatches, &scope, "tool_events", &episode.tool_events, &result_steps);
        let blocked = suffix.iter().any(|s| matches!(s, TrajectoryStep::GuardrailBlock { .. }));
        push_if(&mut mismatches, &scope, "blocked", &episode.blocked, &blocked);
        if episode.blocked && episode.tool_events != 0 {
            mismatches.push(Mismatch {
                scope: scope.clone(),
                field: "tool_events".into(),
                detail: "blocked episode reports tool events".into(),
            });
        }
    }

    // Aggregates.
    push_if(&mut mismatches, scope, "archive_size", &ledger.archive_size, &seen.len());
    push_if(&mut mismatches, scope, "findings", &ledger.findings, &dedup_findings(&ledger.episodes));
    push_if(&mut mismatches, scope, "findings_count", &ledger.findings_count, &ledger.findings.len());
    push_if(&mut mismatches, scope, "verified_attacks", &ledger.verified_attacks, &dedup_attacks(&ledger.episodes));
    let types: Vec<AttackType> = ledger
        .verified_attacks
        .iter()
        .map(|a| a.attack_type)
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    push_if(&mut mismatches, scope, "unique_attack_types", &ledger.unique_attack_types, &types);
    let tool_calls: usize = ledger.episodes.iter().map(|e| e.tool_events).sum();
    push_if(&mut mismatches, scope, "tool_calls", &ledger.tool_calls, &tool_calls);
    push_if(&mut mismatches, scope, "episodes_run", &ledger.stats.episodes_run, &ledger.episodes.len());
    let blocked_turns = ledger.episodes.iter().filter(|e| e.blocked).count();
    push_if(&mut mismatches, scope, "blocked_turns", &ledger.stats.blocked_turns, &blocked_turns);
    let novel_cells = ledger.episodes.iter().filter(|e| e.novel).count();
    push_if(&mut mismatches, scope, "novel_cells", &ledger.stats.novel_cells, &novel_cells);
    let total_score: f64 = ledger.episodes.iter().map(|e| e.score).sum();
    push_if(&mut mismatches, scope, "total_score", &ledger.stats.total_score, &total_score);
    let raw_findings: Vec<Finding> =
        ledger.episodes.iter().flat_map(|e| e.findings.iter().cloned()).collect();
    let raw_attacks: Vec<VerifiedAttack> =
        ledger.episodes.iter().flat_map(|e| e.attacks.iter().cloned()).collect();
    push_if(
        &mut mismatches,
        scope,
        "precision",
        &ledger.stats.precision,
        &crate::detection::precision(&raw_findings, &raw_attacks),
    );
    if let Some(&last) = ledger.stats.archive_growth.last() {
        push_if(&mut mismatches, scope, "archive_growth", &last, &ledger.archive_size);
    }

    mismatches
}

/// Verifies a merged ledger: each sub-run, then the merge-level aggregates.
#[must_use]
pub fn verify_merged(merged: &MergedLedger) -> Vec<Mismatch> {
    let mut mismatches = Vec::new();
    for run in &merged.runs {
        for mut mismatch in verify_ledger(run) {
            mismatch.scope = format!("run {} / {}", run.seed, mismatch.scope);
            mismatches.push(mismatch);
        }
    }
    let scope = "merged";
    let rebuilt = crate::orchestrator::merge_ledgers(
        merged.runs.clone(),
        merged.max_concurrent,
        merged.peak_concurrency,
    );
    push_if(&mut mismatches, scope, "seeds", &merged.seeds, &rebuilt.seeds);
    push_if(&mut mismatches, scope, "findings", &merged.findings, &rebuilt.findings);
    push_if(&mut mismatches, scope, "findings_count", &merged.findings_count, &rebuilt.findings_count);
    push_if(&mut mismatches, scope, "unique_attack_types", &merged.unique_attack_types, &rebuilt.unique_attack_types);
    push_if(&mut mismatches, scope, "total_attacks", &merged.total_attacks, &rebuilt.total_attacks);
    push_if(&mut mismatches, scope, "total_episodes", &merged.total_episodes, &rebuilt.total_episodes);
    push_if(&mut mismatches, scope, "total_tool_calls", &merged.total_tool_calls, &rebuilt.total_tool_calls);
    mismatches
}

/// Verifies either ledger flavor.
#[must_use]
pub fn verify_file(file: &LedgerFile) -> Vec<Mismatch> {
    match file {
        LedgerFile::Run(ledger) => verify_ledger(ledger),
        LedgerFile::Merged(merged) => verify_merged(merged),
    }
}

/// Formats a number for tables and plot data: up to two decimals, trailing
/// zeros trimmed, so `16` stays `16` and `5.666…` becomes `5.67`.
#[must_use]
pub fn fmt_num(value: f64) -> String {
    let mut text = format!("{value:.2}");
    while text.contains('.') && (text.ends_with('0') || text.ends_with('.')) {
        text.pop();
    }
    text
}

fn budget_label(budget: &Budget) -> String {
    match budget {
        Budget::Iterations(n) => format!("{n} iters"),
        Budget::WallSecs(s) => format!("{}s", fmt_num(*s)),
    }
}

/// Renders the results table: one row per run, columns Experiment, Budget,
/// Seeds, Findings, Attacks, Types, Calls, sorted by (experiment, seed).
#[must_use]
pub fn emit_table(ledgers: &[RunLedger]) -> String {
    const HEADERS: [&str; 7] =
        ["Experiment", "Budget", "Seeds", "Findings", "Attacks", "Types", "Calls"];
    let mut sorted: Vec<&RunLedger> = ledgers.iter().collect();
    sorted.sort_by(|a, b| (&a.experiment, a.seed).cmp(&(&b.experiment, b.seed)));
    let rows: Vec<[String; 7]> = sorted
        .iter()
        .map(|l| {
            [
                l.experiment.clone(),
                budget_label(&l.config.budget),
                l.seed.to_string(),
                l.findings_count.to_string(),
                l.verified_attacks.len().to_string(),
                l.unique_attack_types.len().to_string(),
                l.tool_calls.to_string(),
            ]
        })
        .collect();

    let mut widths: Vec<usize> = HEADERS.iter().map(|h| h.len()).collect();
    for row in &rows {
        for (width, cell) in widths.iter_mut().zip(row.iter()) {
            *width = (*width).max(cell.len());
        }
    }
    let render = |cells: &[String]| -> String {
        let line = cells
            .iter()
            .zip(&widths)
            .map(|(cell, width)| format!("{cell:<width$}"))
            .collect::<Vec<_>>()
            .join("  ");
        line.trim_end().to_string()
    };
    let mut out = render(&HEADERS.map(String::from));
    out.push('\n');
    for row in &rows {
        out.push_str(&render(row));
        out.push('\n');
    }
    out
}

/// Renders a seed-sensitivity sweep: one row per seed in run order, with
/// cumulative mean and standard deviation of findings over the prefix.
#[must_use]
pub fn emit_convergence_table(table: &ConvergenceTable) -> String {
    const HEADERS: [&str; 6] =
        ["Seed", "Findings", "Attacks", "Archive", "CumulativeMean", "CumulativeStd"];
    let rows: Vec<[String; 6]> = table
        .rows
        .iter()
        .map(|r| {
            [
                r.seed.to_string(),
                r.findings.to_string(),
                r.attacks.to_string(),
                r.archive_size.to_string(),
                fmt_num(r.cumulative_mean),
                fmt_num(r.cumulative_std),
            ]
        })
        .collect();
    let mut widths: Vec<usize> = HEADERS.iter().map(|h| h.len()).collect();
    for row in &rows {
        for (width, cell) in widths.iter_mut().zip(row.iter()) {
            *width = (*width).max(cell.len());
        }
    }
    let render = |cells: &[String]| -> String {
        let line = cells
            .iter()
            .zip(&widths)
            .map(|(cell, width)| format!("{cell:<width$}"))
            .collect::<Vec<_>>()
            .join("  ");
        line.trim_end().to_string()
    };
    let mut out = render(&HEADERS.map(String::from));
    out.push('\n');
    for row in &rows {
        out.push_str(&render(row));
        out.push('\n');
    }
    out
}

/// Plot-data family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    SeedVariance,
    Convergence,
    Scaling,
}

impl PlotKind {
    fn name(self) -> &'static str {
        match self {
            PlotKind::SeedVariance => "seed_variance",
            PlotKind::Convergence => "convergence",
            PlotKind::Scaling => "scaling",
        }
    }
}

/// One labeled series of per-seed values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSpec {
    pub label: String,
    /// (seed, value) pairs in run order.
    pub rows: Vec<(u64, f64)>,
}

/// One ensemble-size measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub n: usize,
    pub unique_types: usize,
    pub real_attacks: usize,
}

/// Inputs for [`emit_plotdata`], one variant per kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PlotInputs {
    /// Per-config series of per-seed outcomes.
    SeedVariance(Vec<SeriesSpec>),
    /// One ordered series of per-seed values; cumulative means are emitted.
    Convergence(Vec<f64>),
    /// Ensemble-size scaling points.
    Scaling(Vec<ScalingPoint>),
}

impl PlotInputs {
    fn name(&self) -> &'static str {
        match self {
            PlotInputs::SeedVariance(_) => "seed_variance",
            PlotInputs::Convergence(_) => "convergence",
            PlotInputs::Scaling(_) => "scaling",
        }
    }
}

/// Emits columnar plot data for the requested kind.
///
/// * `seed_variance`: `label seed value` rows per series, each series
///   followed by a `label mean <mean>` row.
/// * `convergence`: `prefix cumulative_mean` rows.
/// * `scaling`: `n unique_types real_attacks` rows.
pub fn emit_plotdata(kind: PlotKind, inputs: &PlotInputs) -> Result<String, ReportError> {
    match (kind, inputs) {
        (PlotKind::SeedVariance, PlotInputs::SeedVariance(series)) => {
            let mut out = String::from("# seed_variance: label seed value\n");
            for spec in series {
                for (seed, value) in &spec.rows {
                    out.push_str(&format!("{} {} {}\n", spec.label, seed, fmt_num(*value)));
                }
                let mean = if spec.rows.is_empty() {
                    0.0
                } else {
                    spec.rows.iter().map(|(_, v)| v).sum::<f64>() / spec.rows.len() as f64
                };
                out.push_str(&format!("{} mean {}\n", spec.label, fmt_num(mean)));
            }
            Ok(out)
        }
        (PlotKind::Convergence, PlotInputs::Convergence(values)) => {
            let mut out = String::from("# convergence: prefix cumulative_mean\n");
            for (i, (mean, _)) in crate::orchestrator::cumulative_stats(values).iter().enumerate() {
                out.push_str(&format!("{} {}\n", i + 1, fmt_num(*mean)));
            }
            Ok(out)
        }
        (PlotKind::Scaling, PlotInputs::Scaling(points)) => {
            let mut out = String::from("# scaling: n unique_types real_attacks\n");
            for point in points {
                out.push_str(&format!("{} {} {}\n", point.n, point.unique_types, point.real_attacks));
            }
            Ok(out)
        }
        (kind, inputs) => Err(ReportError::KindMismatch { kind: kind.name(), inputs: inputs.name() }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::ScriptedAgentProfile;
    use crate::orchestrator::{run_campaign, AgentConfig, CampaignConfig};

    fn sample_ledger() -> RunLedger {
        let config = CampaignConfig {
            budget: Budget::Iterations(8),
            branch_batch: 4,
            agent: AgentConfig::Scripted(ScriptedAgentProfile {
                refusal_rate: 0.0,
                susceptibility: 1.0,
                ..ScriptedAgentProfile::default()
            }),
            ..CampaignConfig::default()
        };
        run_campaign(&config).unwrap()
    }

    #[test]
    fn produced_ledgers_verify_clean() {
        let ledger = sample_ledger();
        assert_eq!(verify_ledger(&ledger), vec![]);
    }

    #[test]
    fn verification_is_idempotent() {
        let ledger = sample_ledger();
        let first = verify_ledger(&ledger);
        let second = verify_ledger(&ledger);
        assert_eq!(first, second);
    }

    #[test]
    fn tampered_score_is_reported() {
        let mut ledger = sample_ledger();
        ledger.episodes[0].score += 50.0;
        let mismatches = verify_ledger(&ledger);
        assert!(mismatches.iter().any(|m| m.field == "score" && m.scope == "episode 0"));
    }

    #[test]
    fn tampered_trajectory_is_reported() {
        let mut ledger = sample_ledger();
        ledger.episodes[0]
            .trajectory
            .steps
            .push(TrajectoryStep::UserMessage { text: "injected".into() });
        let mismatches = verify_ledger(&ledger);
        assert!(mismatches.iter().any(|m| m.scope == "episode 0"));
    }

    #[test]
    fn tampered_aggregate_is_reported() {
        let mut ledger = sample_ledger();
        ledger.tool_calls += 1;
        let mismatches = verify_ledger(&ledger);
        assert!(mismatches.iter().any(|m| m.field == "tool_calls"));
    }

    #[test]
    fn ledger_json_round_trip_is_byte_identical() {
        let ledger = sample_ledger();
        let text = ledger_to_json(&ledger);
        let parsed = ledger_from_json(&text).unwrap();
        let LedgerFile::Run(reparsed) = &parsed else { panic!("expected a run ledger") };
        assert_eq!(ledger_to_json(reparsed), text);
        assert_eq!(*reparsed, ledger);
    }

    #[test]
    fn awkward_float_survives_the_round_trip_exactly() {
        // 196/1688 has no finite decimal expansion; its shortest-printing
        // form must parse back to the identical bits or re-verification of
        // a persisted ledger would drift by one ulp.
        let mut ledger = sample_ledger();
        ledger.stats.precision.raw_ratio = Some(196.0 / 1688.0);
        let text = ledger_to_json(&ledger);
        let parsed = ledger_from_json(&text).unwrap();
        let LedgerFile::Run(reparsed) = &parsed else { panic!("expected a run ledger") };
        assert_eq!(
            reparsed.stats.precision.raw_ratio.map(f64::to_bits),
            ledger.stats.precision.raw_ratio.map(f64::to_bits)
        );
        assert_eq!(ledger_to_json(reparsed), text);
    }

    #[test]
    fn table_has_exact_columns_and_count_row() {
        let mut ledger = sample_ledger();
        // Synthetic counts for the row-shape check.
        ledger.findings_count = 10;
        ledger.verified_attacks.clear();
        ledger.verified_attacks.extend(
            std::iter::repeat_with(|| crate::detection::VerifiedAttack {
                episode_id: 0,
                attack_type: crate::detection::AttackType::PromptInjectionWrite,
                severity: crate::detection::Severity::High,
                source_step: 0,
                injection_phrase: "p".into(),
                dangerous_step: 1,
                succeeded: true,
            })
            .take(6),
        );
        ledger.unique_attack_types = vec![
            crate::detection::AttackType::PromptInjectionShell,
            crate::detection::AttackType::PromptInjectionWrite,
            crate::detection::AttackType::PromptInjectionEmail,
        ];
        ledger.tool_calls = 411;
        let table = emit_table(&[ledger]);
        let mut lines = table.lines();
        let header: Vec<&str> = lines.next().unwrap().split_whitespace().collect();
        assert_eq!(
            header,
            vec!["Experiment", "Budget", "Seeds", "Findings", "Attacks", "Types", "Calls"]
        );
        let row = lines.next().unwrap().split_whitespace().collect::<Vec<_>>().join(" ");
        assert!(row.ends_with("10 6 3 411"), "row was: {row}");
    }

    #[test]
    fn empty_table_is_header_only() {
        let table = emit_table(&[]);
        assert_eq!(table.lines().count(), 1);
        assert!(table.starts_with("Experiment"));
    }

    #[test]
    fn table_rows_sort_by_experiment_then_seed() {
        let mut a = sample_ledger();
        a.experiment = "b-exp".into();
        a.seed = 1;
        let mut b = sample_ledger();
        b.experiment = "a-exp".into();
        b.seed = 9;
        let mut c = sample_ledger();
        c.experiment = "a-exp".into();
        c.seed = 2;
        let table = emit_table(&[a, b, c]);
        // Budget renders as two tokens ("50 iters"), so the seed is the
        // fourth whitespace-separated token.
        let keys: Vec<(String, String)> = table
            .lines()
            .skip(1)
            .map(|l| {
                let tokens: Vec<&str> = l.split_whitespace().collect();
                (tokens[0].to_string(), tokens[3].to_string())
            })
            .collect();
        assert_eq!(
            keys,
            vec![
                ("a-exp".to_string(), "2".to_string()),
                ("a-exp".to_string(), "9".to_string()),
                ("b-exp".to_string(), "1".to_string()),
            ]
        );
    }

    #[test]
    fn convergence_table_renders_one_row_per_seed() {
        let table = ConvergenceTable::from_counts(
            "sweep",
            &[42, 123, 456, 789, 1337],
            &[2, 0, 1, 3, 3],
            &[1, 0, 0, 2, 1],
            &[40, 38, 41, 39, 40],
        );
        let text = emit_convergence_table(&table);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 6, "header plus five seed rows");
        assert!(lines[0].contains("CumulativeMean"));
        let last: Vec<&str> = lines[5].split_whitespace().collect();
        assert_eq!(last[0], "1337");
        assert_eq!(last[4], "1.8");
        assert_eq!(last[5], "1.3");
    }

    #[test]
    fn convergence_plot_matches_known_series() {
        let data = emit_plotdata(
            PlotKind::Convergence,
            &PlotInputs::Convergence(vec![16.0, 0.0, 1.0, 4.0, 2.0]),
        )
        .unwrap();
        let rows: Vec<&str> = data.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(rows, vec!["1 16", "2 8", "3 5.67", "4 5.25", "5 4.6"]);
    }

    #[test]
    fn seed_variance_plot_has_value_rows_plus_mean_rows() {
        let series = vec![
            SeriesSpec {
                label: "full".into(),
                rows: vec![(42, 16.0), (123, 0.0), (456, 1.0), (789, 4.0), (1337, 2.0)],
            },
            SeriesSpec {
                label: "tools".into(),
                rows: vec![(42, 2.0), (123, 0.0), (456, 1.0), (789, 3.0), (1337, 3.0)],
            },
        ];
        let data = emit_plotdata(PlotKind::SeedVariance, &PlotInputs::SeedVariance(series)).unwrap();
        let rows: Vec<&str> = data.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(rows.len(), 12, "10 value rows + 2 mean rows");
        assert_eq!(rows.iter().filter(|r| r.contains(" mean ")).count(), 2);
        assert!(rows.contains(&"full mean 4.6"));
        assert!(rows.contains(&"tools mean 1.8"));
    }

    #[test]
    fn scaling_plot_emits_one_row_per_point() {
        let data = emit_plotdata(
            PlotKind::Scaling,
            &PlotInputs::Scaling(vec![ScalingPoint { n: 3, unique_types: 2, real_attacks: 5 }]),
        )
        .unwrap();
        let rows: Vec<&str> = data.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(rows, vec!["3 2 5"]);
    }

    #[test]
    fn kind_and_inputs_must_match() {
        let err = emit_plotdata(PlotKind::Scaling, &PlotInputs::Convergence(vec![1.0]));
        assert!(matches!(err, Err(ReportError::KindMismatch { .. })));
    }

    #[test]
    fn number_formatting_trims_cleanly() {
        assert_eq!(fmt_num(16.0), "16");
        assert_eq!(fmt_num(8.0), "8");
        assert_eq!(fmt_num(17.0 / 3.0), "5.67");
        assert_eq!(fmt_num(5.25), "5.25");
        assert_eq!(fmt_num(4.6), "4.6");
        assert_eq!(fmt_num(0.0), "0");
    }
}

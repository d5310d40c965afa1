//! Episode runner, decision success rates and seed-averaged sweeps.
//!
//! The world is driven by the full-information (FI) decisions, where every
//! agent sees its whole vicinity. Each communication cell (architecture,
//! strategy, budget) is then scored counterfactually on that same trajectory,
//! so paired cells differ only in what the ego would have decided.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::comms::{downlink, pool_entities, Architecture, Observations, Strategy};
use crate::error::{Error, Result};
use crate::logic::{Action, EvidenceItem, SlotMap};
use crate::sim::observe::{observe_entities, ObservationConfig};
use crate::sim::rules::{decide_action, evaluate_hypotheses, RuleSet};
use crate::sim::world::{init_world, mix_seed, step, SimConfig};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "default_label")]
    pub label: String,
    pub grid_size: u32,
    #[serde(default = "default_spacing")]
    pub road_spacing: u32,
    pub cars: u32,
    pub pedestrians: u32,
    pub r_fov: u32,
    pub r_vic: u32,
    pub steps: u32,
}

fn default_label() -> String {
    "default".to_string()
}

fn default_spacing() -> u32 {
    10
}

impl Scenario {
    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            grid_size: self.grid_size,
            road_spacing: self.road_spacing,
            cars: self.cars,
            pedestrians: self.pedestrians,
        }
    }

    pub fn observation(&self) -> Result<ObservationConfig> {
        ObservationConfig::new(self.r_fov, self.r_vic)
    }

    pub fn validate(&self) -> Result<()> {
        self.sim_config().validate()?;
        self.observation()?;
        if self.steps == 0 {
            return Err(Error::config("scenario needs at least one step"));
        }
        Ok(())
    }
}

/// One communication condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct RunCell {
    pub architecture: Architecture,
    pub strategy: Strategy,
    pub k: usize,
}

fn bits(truth: &[bool]) -> String {
    truth.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

fn serialize_truth<S: serde::Serializer>(
    truth: &[bool],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&bits(truth))
}

/// One (step, agent) decision under a cell, next to the FI decision.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceRecord {
    pub step: u64,
    pub agent: u32,
    #[serde(serialize_with = "serialize_truth")]
    pub fi_truth: Vec<bool>,
    pub fi_action: Action,
    #[serde(serialize_with = "serialize_truth")]
    pub truth: Vec<bool>,
    pub action: Action,
    /// Downlinked entity ids (FOV entities are implicit).
    pub evidence_ids: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EpisodeTrace {
    pub seed: u64,
    pub rule_set: String,
    pub cell: RunCell,
    pub records: Vec<TraceRecord>,
}

/// Fraction of (step, agent, hypothesis) evaluations agreeing with FI.
pub fn hdsr(trace: &EpisodeTrace) -> Result<f64> {
    let mut total = 0usize;
    let mut hits = 0usize;
    for r in &trace.records {
        total += r.fi_truth.len();
        hits += r
            .fi_truth
            .iter()
            .zip(&r.truth)
            .filter(|(a, b)| a == b)
            .count();
    }
    if total == 0 {
        return Err(Error::UndefinedMetric("H-DSR of an empty trace".into()));
    }
    Ok(hits as f64 / total as f64)
}

/// Fraction of (step, agent) actions agreeing with FI.
pub fn adsr(trace: &EpisodeTrace) -> Result<f64> {
    if trace.records.is_empty() {
        return Err(Error::UndefinedMetric("A-DSR of an empty trace".into()));
    }
    let hits = trace
        .records
        .iter()
        .filter(|r| r.action == r.fi_action)
        .count();
    Ok(hits as f64 / trace.records.len() as f64)
}

fn selection_seed(seed: u64, step: u64, ego: u32, cell: &RunCell) -> u64 {
    let arch = &cell.architecture;
    mix_seed(&[
        seed,
        step,
        u64::from(ego),
        cell.k as u64,
        arch.kind as u64,
        u64::from(arch.zones.0),
        u64::from(arch.zones.1),
    ])
}

/// Runs one seeded episode and scores every cell on the FI trajectory.
/// Traces come back in `cells` order.
pub fn run_episode(
    scenario: &Scenario,
    rules: &RuleSet,
    slots: &SlotMap,
    seed: u64,
    cells: &[RunCell],
    cap: u64,
) -> Result<Vec<EpisodeTrace>> {
    scenario.validate()?;
    for c in cells {
        c.architecture.validate(scenario.grid_size)?;
    }
    let obs = scenario.observation()?;
    let t = slots.t();
    let mut world = init_world(&scenario.sim_config(), seed)?;
    let mut traces: Vec<EpisodeTrace> = cells
        .iter()
        .map(|&cell| EpisodeTrace {
            seed,
            rule_set: rules.name.clone(),
            cell,
            records: Vec::new(),
        })
        .collect();

    for _ in 0..scenario.steps {
        let seen = Observations::new(&world, &obs)?;
        let mut fi_actions = Vec::with_capacity(world.agents.len());
        for ego in world.agents.iter().map(|a| a.id) {
            // FOV is inside the vicinity, so the vicinity is the FI evidence.
            let fi_evidence = observe_entities(&world, ego, &seen.vicinity[ego as usize], slots)?;
            let by_id: BTreeMap<u32, EvidenceItem> =
                fi_evidence.iter().map(|e| (e.entity_id, *e)).collect();
            let fov: Vec<EvidenceItem> =
                seen.fov[ego as usize].iter().map(|id| by_id[id]).collect();
            let fi_truth = evaluate_hypotheses(&fi_evidence, rules);
            let fi_action = decide_action(&fi_truth, rules);
            fi_actions.push(fi_action);

            let mut pools: BTreeMap<Architecture, Vec<EvidenceItem>> = BTreeMap::new();
            for (cell, trace) in cells.iter().zip(traces.iter_mut()) {
                let pool = match pools.entry(cell.architecture) {
                    Entry::Occupied(e) => e.into_mut(),
                    Entry::Vacant(e) => {
                        let ids = pool_entities(&world, &seen, ego, &cell.architecture)?;
                        e.insert(ids.iter().map(|id| by_id[id]).collect())
                    }
                };
                let sent = downlink(
                    pool,
                    &rules.hypotheses,
                    cell.k,
                    cell.strategy,
                    t,
                    selection_seed(seed, world.step, ego, cell),
                    cap,
                )?;
                let mut evidence = fov.clone();
                evidence.extend_from_slice(&sent);
                let truth = evaluate_hypotheses(&evidence, rules);
                let action = decide_action(&truth, rules);
                trace.records.push(TraceRecord {
                    step: world.step,
                    agent: ego,
                    fi_truth: fi_truth.clone(),
                    fi_action,
                    truth,
                    action,
                    evidence_ids: sent.iter().map(|e| e.entity_id).collect(),
                });
            }
        }
        world = step(&world, &fi_actions);
    }
    Ok(traces)
}

/// Per-seed metrics of one cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsRow {
    pub scenario: String,
    pub architecture: String,
    pub rule_set: String,
    pub strategy: Strategy,
    pub k: usize,
    pub seed: u64,
    pub hdsr: f64,
    pub adsr: f64,
}

impl MetricsRow {
    pub fn from_trace(scenario: &str, trace: &EpisodeTrace) -> Result<Self> {
        Ok(Self {
            scenario: scenario.to_string(),
            architecture: trace.cell.architecture.to_string(),
            rule_set: trace.rule_set.clone(),
            strategy: trace.cell.strategy,
            k: trace.cell.k,
            seed: trace.seed,
            hdsr: hdsr(trace)?,
            adsr: adsr(trace)?,
        })
    }
}

/// Seed-averaged metrics of one cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub scenario: String,
    pub architecture: String,
    pub rule_set: String,
    pub strategy: Strategy,
    pub k: usize,
    pub seeds: usize,
    pub hdsr_mean: f64,
    pub hdsr_std: f64,
    pub adsr_mean: f64,
    pub adsr_std: f64,
}

/// Mean and sample standard deviation (zero for a single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

/// Full sweep matrix.
#[derive(Debug, Clone)]
pub struct SweepPlan {
    pub scenarios: Vec<Scenario>,
    pub rule_sets: Vec<RuleSet>,
    pub architectures: Vec<Architecture>,
    pub strategies: Vec<Strategy>,
    pub budgets: Vec<usize>,
    pub seeds: Vec<u64>,
    pub cap: u64,
}

impl SweepPlan {
    /// Cells in output order: architecture, strategy, then budget.
    pub fn cells(&self) -> Vec<RunCell> {
        let mut out = Vec::new();
        for &architecture in &self.architectures {
            for &strategy in &self.strategies {
                for &k in &self.budgets {
                    out.push(RunCell {
                        architecture,
                        strategy,
                        k,
                    });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    /// Ordered by scenario, rule set, seed, then cell.
    pub per_seed: Vec<MetricsRow>,
    /// Ordered by scenario, architecture, rule set, strategy, budget.
    pub rows: Vec<SweepRow>,
}

/// Runs every (scenario, rule set, seed) episode in parallel on the current
/// rayon pool and merges deterministically.
pub fn sweep(plan: &SweepPlan, slots: &SlotMap) -> Result<SweepResult> {
    if plan.seeds.is_empty() {
        return Err(Error::config("sweep needs at least one seed"));
    }
    let cells = plan.cells();
    let jobs: Vec<(usize, usize, u64)> = (0..plan.scenarios.len())
        .flat_map(|s| {
            (0..plan.rule_sets.len())
                .flat_map(move |r| plan.seeds.iter().map(move |&seed| (s, r, seed)))
        })
        .collect();
    let per_job: Vec<Vec<MetricsRow>> = jobs
        .par_iter()
        .map(|&(s, r, seed)| {
            let scenario = &plan.scenarios[s];
            run_episode(scenario, &plan.rule_sets[r], slots, seed, &cells, plan.cap)?
                .iter()
                .map(|trace| MetricsRow::from_trace(&scenario.label, trace))
                .collect()
        })
        .collect::<Result<_>>()?;

    // (scenario, architecture, rule set, strategy, k) -> per-seed values
    type Key = (usize, usize, usize, usize, usize);
    let mut groups: BTreeMap<Key, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for (&(s, r, _), rows) in jobs.iter().zip(&per_job) {
        for (c, row) in rows.iter().enumerate() {
            let a = c / (plan.strategies.len() * plan.budgets.len());
            let st = c / plan.budgets.len() % plan.strategies.len();
            let k = c % plan.budgets.len();
            let entry = groups.entry((s, a, r, st, k)).or_default();
            entry.0.push(row.hdsr);
            entry.1.push(row.adsr);
        }
    }
    let rows = groups
        .into_iter()
        .map(|((s, a, r, st, k), (h, ad))| {
            let (hdsr_mean, hdsr_std) = mean_std(&h);
            let (adsr_mean, adsr_std) = mean_std(&ad);
            SweepRow {
                scenario: plan.scenarios[s].label.clone(),
                architecture: plan.architectures[a].to_string(),
                rule_set: plan.rule_sets[r].name.clone(),
                strategy: plan.strategies[st],
                k: plan.budgets[k],
                seeds: h.len(),
                hdsr_mean,
                hdsr_std,
                adsr_mean,
                adsr_std,
            }
        })
        .collect();
    Ok(SweepResult {
        per_seed: per_job.into_iter().flatten().collect(),
        rows,
    })
}

pub const CSV_HEADER: &str =
    "architecture,rule_set,strategy,k,seeds,hdsr_mean,hdsr_std,adsr_mean,adsr_std";

pub fn write_csv<W: Write>(mut out: W, rows: &[SweepRow]) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{:.6},{:.6},{:.6},{:.6}",
            r.architecture,
            r.rule_set,
            r.strategy.name(),
            r.k,
            r.seeds,
            r.hdsr_mean,
            r.hdsr_std,
            r.adsr_mean,
            r.adsr_std
        )?;
    }
    Ok(())
}

/// One JSON object per (cell, step, agent) record.
pub fn write_trace_jsonl<W: Write>(mut out: W, traces: &[EpisodeTrace]) -> std::io::Result<()> {
    #[derive(Serialize)]
    struct Line<'a> {
        seed: u64,
        rule_set: &'a str,
        architecture: String,
        strategy: Strategy,
        k: usize,
        #[serde(flatten)]
        record: &'a TraceRecord,
    }
    for trace in traces {
        for record in &trace.records {
            let line = Line {
                seed: trace.seed,
                rule_set: &trace.rule_set,
                architecture: trace.cell.architecture.to_string(),
                strategy: trace.cell.strategy,
                k: trace.cell.k,
                record,
            };
            serde_json::to_writer(&mut out, &line)?;
            out.write_all(b"\n")?;
        }
    }
    Ok(())
}

/// Semantic A-DSR drops between consecutive budgets, one message per drop.
/// Extra evidence can both add and (through priority) change actions, so
/// these are reported rather than treated as errors.
pub fn monotonicity_violations(per_seed: &[MetricsRow]) -> Vec<String> {
    // (scenario, architecture, rule set, seed) -> [(k, A-DSR)]
    type Series<'a> = BTreeMap<(&'a str, &'a str, &'a str, u64), Vec<(usize, f64)>>;
    let mut series = Series::new();
    for r in per_seed.iter().filter(|r| r.strategy == Strategy::Semantic) {
        series
            .entry((&r.scenario, &r.architecture, &r.rule_set, r.seed))
            .or_default()
            .push((r.k, r.adsr));
    }
    let mut out = Vec::new();
    for ((scenario, arch, rules, seed), mut points) in series {
        points.sort_by_key(|p| p.0);
        for w in points.windows(2) {
            if w[1].1 < w[0].1 {
                out.push(format!(
                    "{scenario}/{arch}/{rules}/seed {seed}: A-DSR {:.6} at k={} drops to {:.6} at k={}",
                    w[0].1, w[0].0, w[1].1, w[1].0
                ));
            }
        }
    }
    out
}

/// Baseline A-DSR against semantic advantage for one configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationPoint {
    pub scenario: String,
    pub architecture: String,
    pub rule_set: String,
    pub baseline_adsr: f64,
    pub advantage: f64,
}

/// Configurations are (scenario, architecture, rule set) groups. The baseline
/// is the k = 0 A-DSR; the advantage is semantic minus random A-DSR at `k`.
pub fn correlation_points(rows: &[SweepRow], k: usize) -> Vec<CorrelationPoint> {
    let mut groups: BTreeMap<(&str, &str, &str), [Option<f64>; 3]> = BTreeMap::new();
    for r in rows {
        let slot = groups
            .entry((&r.scenario, &r.architecture, &r.rule_set))
            .or_default();
        if r.k == 0 {
            slot[0].get_or_insert(r.adsr_mean);
        }
        if r.k == k {
            match r.strategy {
                Strategy::Semantic => slot[1] = Some(r.adsr_mean),
                Strategy::Random => slot[2] = Some(r.adsr_mean),
            }
        }
    }
    groups
        .into_iter()
        .filter_map(|((s, a, r), v)| match v {
            [Some(base), Some(sem), Some(rnd)] => Some(CorrelationPoint {
                scenario: s.to_string(),
                architecture: a.to_string(),
                rule_set: r.to_string(),
                baseline_adsr: base,
                advantage: sem - rnd,
            }),
            _ => None,
        })
        .collect()
}

/// Pearson correlation between baseline and advantage across configurations.
pub fn advantage_correlation(rows: &[SweepRow], k: usize) -> Result<f64> {
    let points = correlation_points(rows, k);
    if points.len() < 3 {
        return Err(Error::UndefinedMetric(format!(
            "correlation needs at least 3 configurations, have {}",
            points.len()
        )));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.baseline_adsr).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.advantage).collect();
    pearson(&xs, &ys)
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    let n = xs.len();
    if n != ys.len() || n < 2 {
        return Err(Error::UndefinedMetric(
            "correlation of mismatched or short series".into(),
        ));
    }
    let (mx, _) = mean_std(xs);
    let (my, _) = mean_std(ys);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx).powi(2);
        syy += (y - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedMetric(
            "correlation of a constant series".into(),
        ));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

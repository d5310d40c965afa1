//! Acceptance checks, one line per criterion. Exits non-zero if any fails.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use goalsem_core::comms::{Architecture, Strategy};
use goalsem_core::logic::{
    build_slot_map, Action, Hypothesis, PredicateVocabulary, QSentence, SlotMap,
};
use goalsem_core::metrics::{
    adsr, advantage_correlation, correlation_points, hdsr, run_episode, sweep, write_csv, RunCell,
    Scenario, SweepPlan, SweepRow,
};
use goalsem_core::oracle::{
    closed_form, content, enumerate, exact_objective, prior_semantic_entropy, semantic_entropy,
    semantic_mutual_information, ClosedFormParams, HypothesisTerm, OracleHypothesis, Rational,
};
use goalsem_core::selection::DEFAULT_ENUMERATION_CAP;
use goalsem_core::sim::RuleSet;
use goalsem_core::validation::{validate_key, KeyValidation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EPSILON: f64 = 0.02;
const KEY_TIE_LIMIT: f64 = 0.01;
const CORRELATION_LIMIT: f64 = -0.3;
const SEEDS: u64 = 20;
const STEPS: u32 = 100;
const RULE_SETS: [&str; 4] = ["original", "extended", "spatial", "discriminative"];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(elapsed: Duration, limit: Duration) -> (bool, String) {
    (
        elapsed <= limit,
        format!("{:.2}s of {}s", elapsed.as_secs_f64(), limit.as_secs()),
    )
}

fn slots() -> SlotMap {
    build_slot_map(&PredicateVocabulary::traffic_default()).unwrap()
}

fn desk() -> Scenario {
    Scenario {
        label: "desk".into(),
        grid_size: 60,
        road_spacing: 10,
        cars: 10,
        pedestrians: 4,
        r_fov: 5,
        r_vic: 15,
        steps: STEPS,
    }
}

fn architectures() -> Vec<Architecture> {
    vec![
        Architecture::sensor(),
        Architecture::single_zone(),
        Architecture::multi_zone(2, 2),
    ]
}

fn rule_sets(slots: &SlotMap) -> Vec<RuleSet> {
    RULE_SETS
        .iter()
        .map(|n| RuleSet::builtin(n, slots).unwrap())
        .collect()
}

fn desk_plan(slots: &SlotMap) -> SweepPlan {
    SweepPlan {
        scenarios: vec![desk()],
        rule_sets: rule_sets(slots),
        architectures: architectures(),
        strategies: vec![Strategy::Semantic, Strategy::Random],
        budgets: (0..=5).collect(),
        seeds: (0..SEEDS).collect(),
        cap: DEFAULT_ENUMERATION_CAP,
    }
}

/// Every evidence set and every Z in {1, 2} hypothesis at T = 2: enumeration
/// equals the closed forms exactly.
fn closed_form_agreement() -> Outcome {
    let start = Instant::now();
    let mut checked = 0;
    for mask in 0u64..16 {
        let evidence: BTreeSet<_> = (0..4)
            .filter(|b| mask >> b & 1 == 1)
            .map(|b| QSentence::from_bits(b, 2))
            .collect();
        let fixed_lists: Vec<Vec<(usize, bool)>> = vec![
            vec![(0, false)],
            vec![(0, true)],
            vec![(1, false)],
            vec![(1, true)],
            vec![(0, false), (1, false)],
            vec![(0, false), (1, true)],
            vec![(0, true), (1, false)],
            vec![(0, true), (1, true)],
        ];
        for fixed in fixed_lists {
            let h = OracleHypothesis::from_fixed(&fixed, 2);
            let overlapping = evidence
                .iter()
                .any(|q| fixed.iter().all(|&(s, v)| q.get(s) == v));
            let p = ClosedFormParams::new(
                2,
                evidence.len() as u32,
                vec![HypothesisTerm {
                    z: fixed.len() as u32,
                    overlapping,
                }],
            )
            .unwrap();
            let ce = enumerate::evidence_probability(&evidence, 2).unwrap();
            let conf = enumerate::degree_of_confirmation(&h, &evidence, 2).unwrap();
            let f = &ce * &conf * content(&conf);
            let same = ce == closed_form::evidence_probability(&p).unwrap()
                && conf == closed_form::confirmation(&p, 0).unwrap()
                && f == closed_form::objective_term(&p, 0).unwrap();
            if !same {
                return outcome(
                    false,
                    format!("mismatch at evidence mask {mask:04b}, {fixed:?}"),
                );
            }
            checked += 1;
        }
    }
    let (fast, time) = within(start.elapsed(), Duration::from_secs(10));
    outcome(
        fast,
        format!("{checked} (evidence, hypothesis) pairs over K = 0..4 exact, {time}"),
    )
}

fn key_ordering() -> Outcome {
    let start = Instant::now();
    let report = validate_key(&KeyValidation {
        trials: 1000,
        t: 3..=5,
        n: 2..=8,
        k: 1..=3,
        max_hypotheses: 6,
        seed: 20_240_601,
    })
    .unwrap();
    let (fast, time) = within(start.elapsed(), Duration::from_secs(120));
    let tie_rate = report.key_tie_rate();
    let pass = report.disagreements == 0 && tie_rate < KEY_TIE_LIMIT && fast;
    let strict = report.agreements + report.disagreements;
    outcome(
        pass,
        format!(
            "{} instances, {} pairs: agreements {}, ties {}, disagreements {} ({:.1}% of strictly ordered pairs), \
             key ties with unequal F {} ({:.3}%), F ties with strict key {}, \
             instances whose key minimiser is not F-optimal {}, {time}",
            report.instances,
            report.comparisons,
            report.agreements,
            report.ties,
            report.disagreements,
            100.0 * report.disagreements as f64 / strict.max(1) as f64,
            report.key_ties_unequal_f,
            100.0 * tie_rate,
            report.f_ties_strict_key,
            report.argmin_mismatches,
        ),
    )
}

/// Whenever a selected Q-sentence satisfies every fixed slot of a hypothesis,
/// its confirmation is 1 and its objective term 0.
fn overlap_semantics() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut failures = 0;
    let cases = 10_000;
    for _ in 0..cases {
        let t = rng.random_range(1..=4usize);
        let fixed = common::random_fixed(&mut rng, t);
        let h = Hypothesis::new(0, "h", fixed.clone(), Action::Stop, t).unwrap();
        let other =
            Hypothesis::new(1, "o", common::random_fixed(&mut rng, t), Action::Slow, t).unwrap();
        let mut evidence = common::random_evidence(&mut rng, t, 0, 3);
        let mut bits = rng.random_range(0..1u64 << t);
        for &(s, v) in &fixed {
            bits = if v { bits | 1 << s } else { bits & !(1 << s) };
        }
        evidence.insert(QSentence::from_bits(bits, t));

        let both = [h.clone(), other.clone()];
        let p = ClosedFormParams::from_evidence(&evidence, &both, t as u32).unwrap();
        let alone =
            ClosedFormParams::from_evidence(&evidence, std::slice::from_ref(&other), t as u32)
                .unwrap();
        let one = Rational::from_integer(1.into());
        let mut ok = p.terms()[0].overlapping
            && closed_form::confirmation(&p, 0).unwrap() == one
            && closed_form::objective_term(&p, 0).unwrap() == Rational::default()
            && exact_objective(&p).unwrap() == exact_objective(&alone).unwrap();
        if t <= 2 {
            let oh = OracleHypothesis::from_hypothesis(&h, t);
            ok &= enumerate::degree_of_confirmation(&oh, &evidence, t as u32).unwrap() == one;
        }
        failures += usize::from(!ok);
    }
    outcome(
        failures == 0,
        format!("{cases} random cases at T = 1..4, {failures} failures"),
    )
}

fn mutual_information_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(47);
    let mut failures = 0;
    let cases = 100;
    for _ in 0..cases {
        let evidence = common::random_evidence(&mut rng, 2, 0, 4);
        let m = rng.random_range(1..=3);
        let fixed: Vec<_> = (0..m).map(|_| common::random_fixed(&mut rng, 2)).collect();
        let hyps: Vec<_> = fixed
            .iter()
            .map(|f| OracleHypothesis::from_fixed(f, 2))
            .collect();
        let direct = semantic_mutual_information(&hyps, &evidence, 2).unwrap();
        let identity = prior_semantic_entropy(&hyps, 2).unwrap()
            - semantic_entropy(&hyps, &evidence, 2).unwrap();
        let masks: Vec<u32> = fixed.iter().map(|f| common::accepted(f)).collect();
        let posterior = common::mutual_information_by_posterior(common::q_mask(&evidence), &masks);
        failures += usize::from(direct != identity || direct != posterior);
    }
    outcome(
        failures == 0,
        format!("{cases} random (hypotheses, evidence) at T = 2, exact, {failures} failures"),
    )
}

fn find<'a>(
    rows: &'a [SweepRow],
    arch: &str,
    rules: &str,
    strategy: Strategy,
    k: usize,
) -> &'a SweepRow {
    rows.iter()
        .find(|r| {
            r.architecture == arch && r.rule_set == rules && r.strategy == strategy && r.k == k
        })
        .expect("row present")
}

fn dominance(slots: &SlotMap) -> Outcome {
    let start = Instant::now();
    let result = sweep(&desk_plan(slots), slots).unwrap();
    let rows = &result.rows;
    let mut worst = f64::INFINITY;
    let mut worst_at = String::new();
    let mut below = Vec::new();
    for arch in architectures() {
        let arch = arch.to_string();
        for rules in RULE_SETS {
            for k in 1..=5 {
                let sem = find(rows, &arch, rules, Strategy::Semantic, k).adsr_mean;
                let rnd = find(rows, &arch, rules, Strategy::Random, k).adsr_mean;
                let margin = sem - rnd;
                if margin < worst {
                    worst = margin;
                    worst_at = format!("{arch}/{rules}/k={k}");
                }
                if margin < -EPSILON {
                    below.push(format!("{arch}/{rules}/k={k}"));
                }
            }
        }
    }
    let mut k1_vs_k3 = Vec::new();
    let mut k1_fail = Vec::new();
    for rules in RULE_SETS {
        let sem1 = find(rows, "sensor-gna", rules, Strategy::Semantic, 1).adsr_mean;
        let rnd3 = find(rows, "sensor-gna", rules, Strategy::Random, 3).adsr_mean;
        k1_vs_k3.push(format!("{rules} {sem1:.4} vs {rnd3:.4}"));
        if sem1 < rnd3 - EPSILON {
            k1_fail.push(rules);
        }
    }
    let (fast, time) = within(start.elapsed(), Duration::from_secs(600));
    let pass = below.is_empty() && k1_fail.is_empty() && fast;
    outcome(
        pass,
        format!(
            "{SEEDS} seeds x {STEPS} steps; semantic - random A-DSR min {worst:+.4} at {worst_at} \
             (tolerance {EPSILON}, {} cells below); sensor-GNA semantic k=1 vs random k=3: [{}] \
             ({} rule sets below tolerance); {time}",
            below.len(),
            k1_vs_k3.join("; "),
            k1_fail.len()
        ),
    )
}

fn correlation(slots: &SlotMap) -> Outcome {
    let mut scenarios = Vec::new();
    for (density, cars, pedestrians) in [("sparse", 10, 4), ("dense", 20, 8)] {
        for r_fov in [3, 5, 7, 9] {
            scenarios.push(Scenario {
                label: format!("{density}-fov{r_fov}"),
                r_fov,
                cars,
                pedestrians,
                ..desk()
            });
        }
    }
    let plan = SweepPlan {
        scenarios,
        rule_sets: vec![RuleSet::builtin("original", slots).unwrap()],
        architectures: vec![Architecture::sensor()],
        strategies: vec![Strategy::Semantic, Strategy::Random],
        budgets: vec![0, 3],
        seeds: (0..SEEDS).collect(),
        cap: DEFAULT_ENUMERATION_CAP,
    };
    let result = sweep(&plan, slots).unwrap();
    let n = correlation_points(&result.rows, 3).len();
    match advantage_correlation(&result.rows, 3) {
        Ok(r) => outcome(
            r < CORRELATION_LIMIT && n >= 8,
            format!("r = {r:.4} over {n} configurations (threshold {CORRELATION_LIMIT})"),
        ),
        Err(e) => outcome(false, e.to_string()),
    }
}

fn full_coverage(slots: &SlotMap) -> Outcome {
    let sc = desk();
    // no vicinity can hold more than every other agent
    let k = (sc.cars + sc.pedestrians - 1) as usize;
    let cells: Vec<_> = [Strategy::Semantic, Strategy::Random]
        .map(|strategy| RunCell {
            architecture: Architecture::sensor(),
            strategy,
            k,
        })
        .to_vec();
    let mut runs = 0;
    let mut imperfect = Vec::new();
    for rules in rule_sets(slots) {
        for seed in 0..SEEDS {
            let traces =
                run_episode(&sc, &rules, slots, seed, &cells, DEFAULT_ENUMERATION_CAP).unwrap();
            for t in &traces {
                runs += 1;
                if hdsr(t).unwrap() != 1.0 || adsr(t).unwrap() != 1.0 {
                    imperfect.push(format!("{}/seed {seed}", rules.name));
                }
            }
        }
    }
    outcome(
        imperfect.is_empty(),
        format!("k = {k}, {runs} runs, {} below 1.0", imperfect.len()),
    )
}

fn determinism(slots: &SlotMap) -> Outcome {
    let mut plan = desk_plan(slots);
    plan.seeds = (0..4).collect();
    plan.scenarios[0].steps = 30;
    let csv = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        let rows = pool.install(|| sweep(&plan, slots).unwrap().rows);
        let mut out = Vec::new();
        write_csv(&mut out, &rows).unwrap();
        out
    };
    let (a, b, c) = (csv(1), csv(1), csv(4));
    outcome(
        a == b && a == c,
        format!(
            "{} bytes; repeated run and 4-thread run identical: {}",
            a.len(),
            a == b && a == c
        ),
    )
}

fn main() -> ExitCode {
    let slots = slots();
    type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;
    let criteria: [(&str, Check); 8] = [
        (
            "closed-form / enumeration agreement",
            Box::new(closed_form_agreement),
        ),
        (
            "key ordering equals exact objective ordering",
            Box::new(key_ordering),
        ),
        ("overlap semantics", Box::new(overlap_semantics)),
        (
            "mutual information identity",
            Box::new(mutual_information_identity),
        ),
        (
            "semantic dominance over random",
            Box::new(|| dominance(&slots)),
        ),
        (
            "baseline / advantage correlation",
            Box::new(|| correlation(&slots)),
        ),
        ("full coverage limit", Box::new(|| full_coverage(&slots))),
        ("byte-identical CSV", Box::new(|| determinism(&slots))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {} [{name}]: {verdict} - {}", i + 1, o.detail);
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

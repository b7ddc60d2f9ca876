//! Acceptance suite. Runs without the libtest harness and prints one
//! PASS/FAIL line per criterion; exits non-zero if any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use diffgraph::estimate::{estimate_total, partial_regression_coefficient, AdjustOptions};
use diffgraph::figures::{figure, figure_verdicts, FIGURES};
use diffgraph::identify::{Effect, VerdictKind};
use diffgraph::simulate::sample_compatible_pair;
use diffgraph::{DifferenceGraph, Oracle};
use rand::seq::SliceRandom;
use rand::Rng;

const FIGURE_BUDGET: Duration = Duration::from_secs(1);
const ORACLE_BUDGET: Duration = Duration::from_secs(600);
const DIRECT_BUDGET: Duration = Duration::from_secs(60);
const TOTAL_BUDGET: Duration = Duration::from_secs(30);

const GENERAL_SAMPLE: usize = 2_000;
const CORPUS_SEED: u64 = 20_240_601;

const RECOVERY_N: usize = 100_000;
const RECOVERY_SEEDS: u64 = 20;
const DIRECT_TOLERANCE: f64 = 0.05;
const CHANGE_TOLERANCE: f64 = 0.07;
const TABLE_TOLERANCE: f64 = 0.01;
const PROPERTY_CASES: usize = 10_000;

struct Outcome {
    passed: bool,
    detail: String,
}

fn report(id: usize, name: &str, elapsed: Duration, o: &Outcome) -> bool {
    let tag = if o.passed { "PASS" } else { "FAIL" };
    println!("{tag} [{id}] {name} ({:.2}s): {}", elapsed.as_secs_f64(), o.detail);
    o.passed
}

fn within(elapsed: Duration, budget: Duration) -> bool {
    elapsed <= budget
}

/// (label, total set, direct set); `None` means not identifiable.
type Expected = (
    &'static str,
    Option<&'static [&'static str]>,
    Option<&'static [&'static str]>,
);

fn figure_goldens() -> Outcome {
    let expected: [Expected; 6] = [
        ("1c", None, None),
        ("1h", Some(&["W1"]), None),
        ("1m", None, Some(&["W1", "W2"])),
        ("2c", None, None),
        ("2f", Some(&["W1"]), None),
        ("2k", None, Some(&["W1", "W2"])),
    ];
    let start = Instant::now();
    let rows = figure_verdicts();
    let elapsed = start.elapsed();
    let mut mismatches = Vec::new();
    for (label, total, direct) in expected {
        for (effect, want) in [(Effect::Total, total), (Effect::Direct, direct)] {
            let got = rows
                .iter()
                .find(|r| r.figure.label == label && r.verdict.effect == effect)
                .expect("every figure has both effects");
            let ok = match want {
                None => got.verdict.kind == VerdictKind::NotIdentifiable,
                Some(set) => {
                    got.verdict.kind == VerdictKind::AdjustmentIdentifiable
                        && got
                            .verdict
                            .adjustment_set
                            .as_ref()
                            .is_some_and(|s| s.iter().map(|v| v.as_str()).eq(set.iter().copied()))
                }
            };
            if !ok {
                mismatches.push(format!("{label} {effect}: {}", got.verdict.describe()));
            }
        }
    }
    let fast = within(elapsed, FIGURE_BUDGET);
    Outcome {
        passed: mismatches.is_empty() && fast && rows.len() == 2 * FIGURES.len(),
        detail: if mismatches.is_empty() {
            format!("12/12 verdicts match, {:.1} ms", elapsed.as_secs_f64() * 1e3)
        } else {
            format!("mismatches: {}", mismatches.join("; "))
        },
    }
}

struct Corpus {
    label: &'static str,
    shared: bool,
    graphs: Vec<DifferenceGraph>,
}

fn corpora() -> Vec<Corpus> {
    let three: Vec<_> = all_difference_graphs(3).collect();
    let four_acyclic: Vec<_> = all_difference_graphs(4).filter(|d| d.is_acyclic()).collect();
    let mut four: Vec<_> = all_difference_graphs(4).collect();
    four.shuffle(&mut rng(CORPUS_SEED));
    four.truncate(GENERAL_SAMPLE);
    vec![
        Corpus {
            label: "3 vertices, shared order",
            shared: true,
            graphs: three.iter().filter(|d| d.is_acyclic()).cloned().collect(),
        },
        Corpus {
            label: "3 vertices, general",
            shared: false,
            graphs: three,
        },
        Corpus {
            label: "4 vertices, shared order (all acyclic)",
            shared: true,
            graphs: four_acyclic,
        },
        Corpus {
            label: "4 vertices, general (seeded sample)",
            shared: false,
            graphs: four,
        },
    ]
}

#[derive(Default)]
struct CorpusTally {
    queries: usize,
    disagree_total: usize,
    disagree_direct: usize,
    adjustments: usize,
    unsound: usize,
}

fn tally(c: &Corpus, oracle: &Oracle) -> CorpusTally {
    let mut t = CorpusTally::default();
    for d in &c.graphs {
        let n = d.n();
        let dags = oracle.enumerate_compatible_dags(d, c.shared).unwrap();
        for x in 0..n {
            for y in 0..n {
                if x == y {
                    continue;
                }
                for effect in [Effect::Total, Effect::Direct] {
                    t.queries += 1;
                    let th = theorem(d, x, y, c.shared, effect);
                    let or = oracle
                        .decide(d, d.name(x).as_str(), d.name(y).as_str(), c.shared, effect)
                        .unwrap();
                    if th.kind != or.kind {
                        match effect {
                            Effect::Total => t.disagree_total += 1,
                            Effect::Direct => t.disagree_direct += 1,
                        }
                    }
                    if th.kind == VerdictKind::AdjustmentIdentifiable {
                        t.adjustments += 1;
                        let z = d.indices_of(th.adjustment_set.as_deref().unwrap()).unwrap();
                        let sound = dags.iter().all(|g| match effect {
                            Effect::Total => backdoor_by_paths(g, x, y, &z),
                            Effect::Direct => single_door_by_paths(g, x, y, &z),
                        });
                        if !sound {
                            t.unsound += 1;
                        }
                    }
                }
            }
        }
    }
    t
}

fn direct_recovery() -> Outcome {
    let mut lines = Vec::new();
    let mut passed = true;
    for label in ["1m", "2k"] {
        let fig = figure(label).unwrap();
        let d = fig.graph();
        let v = theorem(&d, 0, 1, fig.shared_order, Effect::Direct);
        if v.kind != VerdictKind::AdjustmentIdentifiable {
            passed = false;
            lines.push(format!("{label}: direct effect not identified"));
            continue;
        }
        let set = v.adjustment_set.unwrap();
        let w: Vec<&str> = set.iter().map(|s| s.as_str()).collect();
        let (mut e1, mut e2, mut ec) = (Vec::new(), Vec::new(), Vec::new());
        for seed in 0..RECOVERY_SEEDS {
            let pair = sample_compatible_pair(&d, fig.shared_order, seed).unwrap();
            let (d1, d2) = pair.sample_datasets(RECOVERY_N, seed);
            let a1 = partial_regression_coefficient(&d1, "X", "Y", &w).unwrap();
            let a2 = partial_regression_coefficient(&d2, "X", "Y", &w).unwrap();
            let t1 = pair.scm1.ground_truth_direct("X", "Y").unwrap();
            let t2 = pair.scm2.ground_truth_direct("X", "Y").unwrap();
            e1.push((a1 - t1).abs());
            e2.push((a2 - t2).abs());
            ec.push(((a1 - a2) - (t1 - t2)).abs());
        }
        let (m1, m2, mc) = (median(e1), median(e2), median(ec));
        let ok = m1 <= DIRECT_TOLERANCE && m2 <= DIRECT_TOLERANCE && mc <= CHANGE_TOLERANCE;
        passed &= ok;
        lines.push(format!("{label}: median errors {m1:.4}/{m2:.4}, change {mc:.4}"));
    }
    Outcome {
        passed,
        detail: lines.join("; "),
    }
}

fn binary_network() -> CptNetwork {
    CptNetwork {
        names: vec!["W1", "X", "Y"],
        cards: vec![2, 2, 2],
        parents: vec![vec![], vec![0], vec![0, 1]],
        cpts: vec![
            vec![vec![0.6, 0.4]],
            vec![vec![0.8, 0.2], vec![0.3, 0.7]],
            vec![vec![0.9, 0.1], vec![0.5, 0.5], vec![0.6, 0.4], vec![0.15, 0.85]],
        ],
    }
}

fn ternary_network() -> CptNetwork {
    CptNetwork {
        names: vec!["W1", "X", "Y"],
        cards: vec![3, 2, 3],
        parents: vec![vec![], vec![0], vec![0, 1]],
        cpts: vec![
            vec![vec![0.5, 0.3, 0.2]],
            vec![vec![0.7, 0.3], vec![0.4, 0.6], vec![0.25, 0.75]],
            vec![
                vec![0.6, 0.3, 0.1],
                vec![0.3, 0.4, 0.3],
                vec![0.5, 0.3, 0.2],
                vec![0.2, 0.3, 0.5],
                vec![0.4, 0.4, 0.2],
                vec![0.1, 0.2, 0.7],
            ],
        ],
    }
}

fn total_recovery() -> Outcome {
    let fig = figure("1h").unwrap();
    let v = theorem(&fig.graph(), 0, 1, fig.shared_order, Effect::Total);
    let set = v.adjustment_set.clone().unwrap_or_default();
    let mut lines = Vec::new();
    let mut passed = v.kind == VerdictKind::AdjustmentIdentifiable;
    for (name, net, seed) in [("binary", binary_network(), 101), ("ternary", ternary_network(), 202)] {
        let truth = net.interventional(1, 2);
        let data = net.sample(RECOVERY_N, seed);
        let t = estimate_total(&v, &data, "X", "Y", AdjustOptions::default()).unwrap();
        let err = t
            .probabilities
            .iter()
            .zip(&truth)
            .flat_map(|(r, s)| r.iter().zip(s).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        passed &= err <= TABLE_TOLERANCE;
        lines.push(format!("{name}: max-norm error {err:.4}"));
    }
    let names: Vec<&str> = set.iter().map(|s| s.as_str()).collect();
    Outcome {
        passed,
        detail: format!("adjusting for {{{}}}; {}", names.join(", "), lines.join("; ")),
    }
}

fn null_effect_tables() -> Outcome {
    let mut cases = 0;
    let mut failures = 0;
    for shared in [true, false] {
        for d in all_difference_graphs(3) {
            if shared && !d.is_acyclic() {
                continue;
            }
            for x in 0..3 {
                for y in 0..3 {
                    if x == y {
                        continue;
                    }
                    let v = theorem(&d, x, y, shared, Effect::Total);
                    if v.kind != VerdictKind::NullEffect {
                        continue;
                    }
                    cases += 1;
                    let data = null_case_data(&d, x, y, cases as u64);
                    let (xn, yn) = (d.name(x).as_str(), d.name(y).as_str());
                    let t = estimate_total(&v, &data, xn, yn, AdjustOptions::default()).unwrap();
                    let ys = data.column(yn).unwrap();
                    let card = t.outcome_values.len();
                    let mut counts = vec![0usize; card];
                    for &v in ys {
                        counts[v as usize] += 1;
                    }
                    let expected: Vec<f64> = counts.iter().map(|&c| c as f64 / ys.len() as f64).collect();
                    if t.probabilities.iter().any(|row| *row != expected) {
                        failures += 1;
                    }
                }
            }
        }
    }
    Outcome {
        passed: cases > 0 && failures == 0,
        detail: format!("{cases} null-effect verdicts, {failures} tables differ from the outcome marginal"),
    }
}

/// Discrete data over the graph's vertex names with X, Y and the third vertex
/// dependent, so the marginal differs from the conditionals.
fn null_case_data(d: &DifferenceGraph, x: usize, y: usize, seed: u64) -> diffgraph::Dataset {
    let mut r = rng(seed);
    let n = 1_500;
    let mut cols = vec![Vec::with_capacity(n); d.n()];
    for _ in 0..n {
        let a: u32 = r.random_range(0..3);
        let b: u32 = if r.random_bool(0.7) {
            a % 2
        } else {
            r.random_range(0..2)
        };
        let c: u32 = if r.random_bool(0.6) {
            (a + b) % 3
        } else {
            r.random_range(0..3)
        };
        for (v, col) in cols.iter_mut().enumerate() {
            let value = if v == x {
                b
            } else if v == y {
                c
            } else {
                a
            };
            col.push(value as f64);
        }
    }
    diffgraph::Dataset::new(d.names().to_vec(), cols, diffgraph::DataKind::Discrete).unwrap()
}

fn property_suites() -> Outcome {
    let mut r = rng(77);
    let mut dsep = 0;
    let mut dual = 0;
    let mut reduce = 0;
    let mut round = 0;
    for case in 0..PROPERTY_CASES {
        let n = r.random_range(2..=6);
        let density = r.random_range(0.1..0.7);
        let g = random_dag(&mut r, n, density);
        let x = r.random_range(0..n);
        let y = (x + r.random_range(1..n)) % n;
        let z = random_subset(&mut r, n, &[x, y]);
        if g.d_separated_idx(x, y, &z) != d_separated_by_paths(&g, x, y, &z) {
            dsep += 1;
        }

        let (k, density) = (r.random_range(1..=7), r.random_range(0.0..0.6));
        let h = random_digraph(&mut r, k, density);
        if !duality_holds(&h) {
            dual += 1;
        }

        let d = DifferenceGraph::new(g.graph().clone());
        if !acyclic_reduction_holds(&d, x, y) {
            reduce += 1;
        }

        let shared = r.random_bool(0.5);
        let m = [2, 3, 4, 6, 7][r.random_range(0..5)];
        let density = r.random_range(0.1..0.6);
        let rd = if shared {
            DifferenceGraph::new(random_dag(&mut r, m, density).graph().clone())
        } else {
            DifferenceGraph::new(random_digraph(&mut r, m, density))
        };
        if !round_trip_holds(&rd, shared, case as u64) {
            round += 1;
        }
    }
    Outcome {
        passed: dsep + dual + reduce + round == 0,
        detail: format!(
            "{PROPERTY_CASES} cases each; counterexamples: d-separation {dsep}, duality {dual}, acyclic reduction {reduce}, simulator round trip {round}"
        ),
    }
}

fn main() -> ExitCode {
    let mut all = true;

    let start = Instant::now();
    let o = figure_goldens();
    all &= report(1, "reference figure verdicts", start.elapsed(), &o);

    let start = Instant::now();
    let oracle = Oracle::new();
    let mut disagreements = 0;
    let mut unsound = 0;
    let mut lines2 = Vec::new();
    let mut lines3 = Vec::new();
    for c in corpora() {
        let t = tally(&c, &oracle);
        disagreements += t.disagree_total + t.disagree_direct;
        unsound += t.unsound;
        lines2.push(format!(
            "{} ({} graphs, {} queries): {} total / {} direct disagreements",
            c.label,
            c.graphs.len(),
            t.queries,
            t.disagree_total,
            t.disagree_direct
        ));
        lines3.push(format!("{}: {}/{} unsound", c.label, t.unsound, t.adjustments));
    }
    let elapsed = start.elapsed();
    let o2 = Outcome {
        passed: disagreements == 0 && within(elapsed, ORACLE_BUDGET),
        detail: lines2.join("; "),
    };
    all &= report(2, "graphical conditions agree with exhaustive search", elapsed, &o2);
    let o3 = Outcome {
        passed: unsound == 0,
        detail: lines3.join("; "),
    };
    all &= report(3, "adjustment sets admissible in every compatible DAG", elapsed, &o3);

    let start = Instant::now();
    let mut o = direct_recovery();
    let elapsed = start.elapsed();
    o.passed &= within(elapsed, DIRECT_BUDGET);
    all &= report(4, "direct effect and change recovery", elapsed, &o);

    let start = Instant::now();
    let mut o = total_recovery();
    let elapsed = start.elapsed();
    o.passed &= within(elapsed, TOTAL_BUDGET);
    all &= report(5, "discrete total effect recovery", elapsed, &o);

    let start = Instant::now();
    let o = null_effect_tables();
    all &= report(6, "null-effect table equals outcome marginal", start.elapsed(), &o);

    let start = Instant::now();
    let o = property_suites();
    all &= report(7, "property suites", start.elapsed(), &o);

    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

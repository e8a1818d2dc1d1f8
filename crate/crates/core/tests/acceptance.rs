//! Acceptance criteria 1-11, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so the lines print in order. Exits
//! nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use serde_json::{json, Value};

use expandlab::graph::Graph;
use expandlab::par;
use expandlab::report::to_canonical_json;
use expandlab::verify::{self, SuiteReport};

const SEED: u64 = 20240601;

struct Outcome {
    passed: bool,
    summary: String,
    report: Value,
}

fn suite(rep: SuiteReport, extra: &str) -> Outcome {
    let summary = format!(
        "{} cases, {} checks, {} failures, worst margin {:.3e}{extra}",
        rep.cases,
        rep.checks,
        rep.failures.len(),
        rep.worst_margin.unwrap_or(f64::NAN)
    );
    Outcome { passed: rep.passed, summary, report: serde_json::to_value(&rep).unwrap() }
}

fn c1() -> Outcome {
    let rep = verify::prop19_check(200).unwrap();
    let d = rep.details.clone().unwrap();
    let extra = format!("; h(K2) = {}, line value {}, grid {}", d["h"], d["value_at_line"], d["grid_best"]);
    suite(rep, &extra)
}

fn c2() -> Outcome {
    let rep = verify::complete_graph_hq_bound(&[2, 3, 4, 5, 6], 20_000, SEED).unwrap();
    let found: Vec<String> = rep.details.as_ref().unwrap().as_array().unwrap()
        .iter()
        .map(|d| format!("n={} best={:.6} (1/n={:.6})", d["n"], d["best"].as_f64().unwrap(), d["claimed_bound"].as_f64().unwrap()))
        .collect();
    let extra = format!("; {}", found.join(", "));
    suite(rep, &extra)
}

fn c3() -> Outcome {
    let graphs = verify::random_regular_graphs(20, 3, &[4, 6, 8], SEED).unwrap();
    suite(verify::thm15_battery(&graphs).unwrap(), "")
}

fn c4() -> Outcome {
    let graphs = [Graph::complete(2), Graph::cycle(4), Graph::complete(4), Graph::cycle(6)];
    let rep = verify::thm16_battery(&graphs, 2).unwrap();
    let pairs: Vec<String> = rep.details.as_ref().unwrap().as_array().unwrap()
        .iter()
        .map(|d| format!("mu={} h={}", d["mu_tuple"].as_str().unwrap(), d["h_tuple"].as_str().unwrap()))
        .collect();
    let extra = format!("; {}", pairs.join(", "));
    suite(rep, &extra)
}

fn c5() -> Outcome {
    let rep = verify::dimension_sandwich_battery(50, 5, 2, 2, SEED).unwrap();
    let counts = rep.details.as_ref().unwrap().as_array().unwrap()[0]["subspaces"].clone();
    suite(rep, &format!("; {counts} nonzero subspaces of dim <= 2 per tuple"))
}

fn c6() -> Outcome {
    let rep = verify::cheeger_battery(100, 3, 200, SEED).unwrap();
    let sv_ok = rep.details.as_ref().unwrap().as_array().unwrap()
        .iter()
        .filter(|d| d["sv_upper_holds"].as_bool() == Some(true))
        .count();
    suite(rep, &format!("; upper side with lambda2_sv holds on {sv_ok}/100"))
}

fn c7() -> Outcome {
    suite(verify::pointwise_battery(1000, SEED).unwrap(), "")
}

fn c8() -> Outcome {
    let s = [1.0, 0.3, 0.1, 0.03, 0.01, 0.003];
    let rep = verify::separation_experiment(8, 3, &s, SEED, 2000, 20).unwrap();
    let last = rep.points.last().unwrap();
    let passed = last.gap < 0.05
        && rep.points.iter().all(|p| p.gap_upper_holds && p.generic_r1 && p.generic_r2);
    let summary = format!(
        "gap(U^1) = {:.4e}, gap(U^0.003) = {:.4e}, triangle bound holds at all s: {}, generic r=1,2 at all s: {}",
        rep.points[0].gap,
        last.gap,
        rep.points.iter().all(|p| p.gap_upper_holds),
        rep.points.iter().all(|p| p.generic_r1 && p.generic_r2),
    );
    Outcome { passed, summary, report: serde_json::to_value(&rep).unwrap() }
}

fn c9() -> Outcome {
    let s = [0.1, 0.5, 1.0, 2.0, 10.0];
    let rep = verify::localized_experiment(16, 4, 0.01, &s, SEED, 2000).unwrap();
    let passed = rep.columns_localized && rep.points.iter().all(|p| p.overlap_holds && p.gap_holds);
    let worst_gap = rep.points.iter().map(|p| p.gap).fold(0.0, f64::max);
    let worst_overlap = rep.points.iter().map(|p| p.min_e1_overlap).fold(1.0, f64::min);
    let summary = format!(
        "columns localized: {}, min |<e1, U^s e1>| = {worst_overlap:.6}, max gap = {worst_gap:.4e} (bound {})",
        rep.columns_localized, rep.gap_bound
    );
    Outcome { passed, summary, report: serde_json::to_value(&rep).unwrap() }
}

fn c10() -> Outcome {
    suite(verify::witness_battery(200, SEED).unwrap(), "")
}

type Criterion = (u32, Duration, fn() -> Outcome);

const CRITERIA: [Criterion; 10] = [
    (1, Duration::from_secs(10), c1),
    (2, Duration::from_secs(60), c2),
    (3, Duration::from_secs(120), c3),
    (4, Duration::from_secs(120), c4),
    (5, Duration::from_secs(120), c5),
    (6, Duration::from_secs(300), c6),
    (7, Duration::from_secs(300), c7),
    (8, Duration::from_secs(180), c8),
    (9, Duration::from_secs(180), c9),
    (10, Duration::from_secs(120), c10),
];

fn line(id: u32, passed: bool, elapsed: Duration, limit: Option<Duration>, summary: &str) {
    let verdict = if passed { "PASS" } else { "FAIL" };
    let limit = limit.map_or(String::new(), |l| format!(" / limit {}s", l.as_secs()));
    println!("criterion {id:>2}: {verdict} ({:.2}s{limit}) {summary}", elapsed.as_secs_f64());
}

fn main() -> ExitCode {
    let mut all_passed = true;
    let mut first_run = Vec::new();
    for (id, limit, f) in CRITERIA {
        let start = Instant::now();
        let out = f();
        let elapsed = start.elapsed();
        let in_time = elapsed <= limit;
        let passed = out.passed && in_time;
        let summary = if in_time { out.summary } else { format!("{} [over time limit]", out.summary) };
        line(id, passed, elapsed, Some(limit), &summary);
        all_passed &= passed;
        first_run.push(to_canonical_json(&json!({ "criterion": id, "report": out.report })).unwrap());
    }

    // Same seeds again on a single worker; the reports must match byte for byte.
    let start = Instant::now();
    let second_run: Vec<String> = par::with_threads(1, || {
        CRITERIA
            .iter()
            .map(|(id, _, f)| to_canonical_json(&json!({ "criterion": id, "report": f().report })).unwrap())
            .collect()
    });
    let differing: Vec<u32> = CRITERIA
        .iter()
        .zip(first_run.iter().zip(&second_run))
        .filter(|(_, (a, b))| a != b)
        .map(|(c, _)| c.0)
        .collect();
    let bytes: usize = first_run.iter().map(String::len).sum();
    let summary = if differing.is_empty() {
        format!("{bytes} report bytes identical across two runs (default pool vs one worker)")
    } else {
        format!("reports differ for criteria {differing:?}")
    };
    line(11, differing.is_empty(), start.elapsed(), None, &summary);
    all_passed &= differing.is_empty();

    if all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

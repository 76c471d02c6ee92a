//! Acceptance criteria 1-13, one PASS/FAIL line each.
//!
//! Criterion 6 bundles the Euler and radial commutation identities. The
//! radial one does not hold for the near-best operator, so 6 is reported as
//! FAIL and is the only criterion allowed to fail.

use std::process::ExitCode;

use conic_approx::harness::{run_verify, CheckRecord, ExperimentConfig, RunReport};

const EXPECTED_FAILURE: u8 = 6;

struct Criterion {
    number: u8,
    title: &'static str,
    check: &'static str,
    /// Runtime budget in seconds.
    budget: Option<f64>,
}

const CRITERIA: [Criterion; 12] = [
    Criterion { number: 1, title: "Jacobi orthonormality", check: "jacobi_orthonormality", budget: Some(5.0) },
    Criterion { number: 2, title: "kernel backend cross-validation", check: "kernel_backends", budget: Some(30.0) },
    Criterion { number: 3, title: "polynomial reproduction", check: "polynomial_reproduction", budget: Some(120.0) },
    Criterion { number: 4, title: "kernel localization", check: "kernel_localization", budget: Some(120.0) },
    Criterion { number: 5, title: "ray operator identities", check: "ray_operator_lemma", budget: None },
    Criterion { number: 6, title: "commutation", check: "commutation", budget: None },
    Criterion { number: 7, title: "direct theorem", check: "direct_theorem", budget: Some(600.0) },
    Criterion { number: 8, title: "inverse theorem", check: "inverse_theorem", budget: None },
    Criterion {
        number: 9,
        title: "modulus / K-functional equivalence",
        check: "modulus_kfunctional_equivalence",
        budget: None,
    },
    Criterion { number: 10, title: "modulus properties", check: "modulus_properties", budget: None },
    Criterion { number: 11, title: "cone lift identities", check: "cone_lift_identities", budget: None },
    Criterion { number: 12, title: "Bernstein ratios", check: "bernstein_ratios", budget: None },
];

fn summary(rec: &CheckRecord) -> String {
    if let Some(e) = &rec.error {
        return format!("error: {e}");
    }
    rec.assertions
        .iter()
        .map(|a| format!("{}={:.3e}{}{:.3e}", a.label, a.measure, if a.pass { "<=" } else { ">" }, a.tolerance))
        .collect::<Vec<_>>()
        .join(" ")
}

fn line(number: u8, title: &str, pass: bool, detail: &str) -> bool {
    println!("criterion {number:2} {:4} {title}: {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}

fn judge(c: &Criterion, reports: &[(&str, &RunReport)]) -> bool {
    let mut pass = true;
    let mut details = Vec::new();
    for (tag, report) in reports {
        let rec = report.record(c.check).expect("check ran");
        let secs = report.timing.as_ref().and_then(|t| t.checks.get(c.check)).copied().unwrap_or(f64::NAN);
        let in_budget = c.budget.is_none_or(|b| secs < b);
        pass &= rec.pass && in_budget;
        let budget = c.budget.map(|b| format!(" (budget {b}s)")).unwrap_or_default();
        details.push(format!("[{tag}] {} in {secs:.2}s{budget}", summary(rec)));
    }
    line(c.number, c.title, pass, &details.join(" "))
}

fn main() -> ExitCode {
    let base = ExperimentConfig::default();
    let first = run_verify(&base).expect("default config is valid");
    let second = run_verify(&base).expect("default config is valid");
    let gamma_one = run_verify(&ExperimentConfig {
        gamma: 1.0,
        checks: vec!["direct_theorem".into(), "inverse_theorem".into()],
        ..base.clone()
    })
    .expect("valid config");

    let mut failed = Vec::new();
    for c in &CRITERIA {
        let mut reports = vec![("gamma=0", &first)];
        if gamma_one.record(c.check).is_some() {
            reports.push(("gamma=1", &gamma_one));
        }
        if !judge(c, &reports) {
            failed.push(c.number);
        }
    }
    let identical = first.canonical_json() == second.canonical_json();
    let probe = first.record("determinism").expect("check ran");
    if !line(
        13,
        "determinism",
        identical && probe.pass,
        &format!("repeated verify identical={identical}; {}", summary(probe)),
    ) {
        failed.push(13);
    }

    let commutation = first.record("commutation").expect("check ran");
    let euler = commutation.assertions.iter().find(|a| a.label == "euler").expect("euler assertion");
    let unexpected: Vec<u8> = failed.iter().copied().filter(|&n| n != EXPECTED_FAILURE).collect();
    println!(
        "summary: {} of 13 criteria pass; expected failure: radial commutation (criterion {EXPECTED_FAILURE})",
        13 - failed.len()
    );
    if !unexpected.is_empty() || !euler.pass {
        println!("unexpected failures: {unexpected:?}, euler commutation pass={}", euler.pass);
        return ExitCode::FAILURE;
    }
    ExitCode::SUCCESS
}

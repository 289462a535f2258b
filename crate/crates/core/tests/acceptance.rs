//! One line per acceptance criterion. Runs without the libtest harness so the
//! lines are printed on success too.

use pshlab::acceptance::{acceptance_suite, criterion_name, AcceptanceSuite, LeviEntry, BUDGET_SECONDS, DEFAULT_SEED};
use pshlab::fields::{CorpusField, FnField, ScalarField, Smoothness};
use pshlab::linalg::CMatrix;
use pshlab::report::Report;

fn print_lines(report: &Report) {
    for check in &report.checks {
        let secs = report.wall_seconds[&check.name];
        let mut line = format!(
            "[{}] {:<20} {:>7.2} s",
            if check.passed { "PASS" } else { "FAIL" },
            check.name,
            secs
        );
        for b in &check.bounds {
            if !b.holds {
                line.push_str(&format!("  {} = {:.3e} (limit {:?} {:.3e})", b.quantity, b.value, b.relation, b.limit));
            }
        }
        if let Some(e) = &check.error {
            line.push_str(&format!("  error: {e}"));
        }
        println!("{line}");
    }
}

fn acceptance() -> bool {
    let report = acceptance_suite(DEFAULT_SEED);
    print_lines(&report);
    let path = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance.json");
    std::fs::write(&path, report.to_json()).unwrap();
    println!("report: {}", path.display());
    for (k, budget) in BUDGET_SECONDS.iter().enumerate() {
        let name = criterion_name(k + 1);
        let secs = report.wall_seconds[&name];
        if secs > *budget {
            println!("note: {name} took {secs:.1} s against a {budget} s budget");
        }
    }
    let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
    }
    report.checks.len() == 9 && failed.is_empty()
}

fn corrupted_fixture_fails_only_its_criterion() -> bool {
    let mut suite = AcceptanceSuite::new(DEFAULT_SEED);
    suite.selection = vec![1, 7];
    let sq = CorpusField::SqNorm { n: 1 };
    let wrong = FnField::new(1, Smoothness::C2, move |z| sq.eval(z))
        .with_hessian(|_| CMatrix::identity(1, 1).map(|c| c * 1.1));
    let points = suite.levi_corpus[0].points.clone();
    suite.levi_corpus[0] = LeviEntry {
        label: "sq_norm/n1/corrupted".into(),
        field: Box::new(wrong),
        points,
        check_order: false,
    };
    let report = suite.run();
    print_lines(&report);
    !report.check(&criterion_name(1)).unwrap().passed && report.check(&criterion_name(7)).unwrap().passed
}

fn main() {
    let suite_ok = acceptance();
    println!("-- corrupted Levi fixture (criterion 1 must fail, 7 must pass)");
    let fixture_ok = corrupted_fixture_fails_only_its_criterion();
    println!("acceptance suite: {}", if suite_ok { "ok" } else { "FAILED" });
    println!("corrupted fixture isolation: {}", if fixture_ok { "ok" } else { "FAILED" });
    if !(suite_ok && fixture_ok) {
        std::process::exit(1);
    }
}

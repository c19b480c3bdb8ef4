//! Runs every acceptance criterion and prints one line per criterion.
//!
//! Criterion 6 has a known failure (the kernel-decay ratio at eta = 10
//! exceeds 1.5 for these wall laws); it must still be reported, and every
//! other criterion must pass.

use std::io::Write;

use gapkin_cli::acceptance::{self, ALL, NAMES};
use gapkin_cli::Ctx;

const KNOWN_FAILURES: [&str; 1] = ["c6_kernel_decay"];

#[test]
fn acceptance_suite() {
    let ctx = Ctx::detached(acceptance::preset(0.5, ""));
    let rep = acceptance::run(&ctx, &ALL).expect("suite runs");
    assert_eq!(rep.checks.len(), NAMES.len());
    let mut unexpected = Vec::new();
    // straight to the stderr handle so the summary survives output capture
    let mut err = std::io::stderr().lock();
    for (row, name) in rep.checks.iter().zip(NAMES) {
        assert_eq!(row.name, name);
        writeln!(err, "{}", row.line()).unwrap();
        if !row.pass && !KNOWN_FAILURES.contains(&name) {
            unexpected.push(row.line());
        }
    }
    assert!(unexpected.is_empty(), "failed criteria:\n{}", unexpected.join("\n"));
}

#[test]
fn broken_tolerance_fails() {
    let ctx = Ctx::detached(acceptance::preset(0.5, "[acceptance]\ntolerances = { c2_flatness = -1.0 }"));
    let rep = acceptance::run(&ctx, &[2]).unwrap();
    assert!(!rep.passed());
    let ok = Ctx::detached(acceptance::preset(0.5, ""));
    assert!(acceptance::run(&ok, &[2]).unwrap().passed());
}

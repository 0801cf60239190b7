//! Runs every acceptance criterion at full size and prints one PASS/FAIL line each.
//!
//! Criteria listed in `KNOWN_FAILURES` are reported as `FAIL (known)` without
//! failing the target; any other failure makes the target exit nonzero.

use moment_tails::acceptance::{run_criterion, AcceptConfig, CRITERIA, KNOWN_FAILURES};

fn main() {
    let filter: Vec<u8> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let cfg = AcceptConfig::default();
    let mut unexpected = Vec::new();
    for &(id, _, _) in CRITERIA.iter() {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let r = run_criterion(id, &cfg).expect("criterion id is valid");
        println!("{}", r.line());
        if !r.pass && !KNOWN_FAILURES.contains(&id) {
            unexpected.push(id);
        }
        if r.pass && KNOWN_FAILURES.contains(&id) {
            println!("note: criterion {id} is listed as a known failure but passed");
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}

//! The shipped scenarios must reproduce their frozen traces byte for byte.
//! Set UPDATE_GOLDEN=1 to refresh the files after an intentional change.

use std::fs;
use std::path::{Path, PathBuf};

use bonds_sim::runner::{run_scenario, RunOptions};
use bonds_sim::scenario::parse_scenario;
use bonds_sim::trace::{diff_traces, read_trace, write_record, TraceDiff};

fn scenario_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
}

fn golden_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
}

fn trace_bytes(scenario_file: &Path) -> Vec<u8> {
    let text = fs::read_to_string(scenario_file)
        .unwrap_or_else(|e| panic!("reading {}: {e}", scenario_file.display()));
    let scenario = parse_scenario(&text).expect("shipped scenarios parse");
    let mut bytes = Vec::new();
    run_scenario(&scenario, RunOptions::default(), &mut |r| {
        write_record(&mut bytes, r)
    })
    .expect("shipped scenarios run");
    bytes
}

fn check(scenario: &str, golden: &str) {
    let got = trace_bytes(&scenario_path(scenario));
    let golden_file = golden_path(golden);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::write(&golden_file, &got).expect("writing golden");
        return;
    }
    let want =
        fs::read(&golden_file).unwrap_or_else(|e| panic!("reading {}: {e}", golden_file.display()));
    if got != want {
        // Point at the first structural difference before failing.
        let got_records = read_trace(got.as_slice()).expect("fresh trace parses");
        let want_records = read_trace(want.as_slice()).expect("golden trace parses");
        match diff_traces(&want_records, &got_records) {
            TraceDiff::Identical => panic!(
                "{scenario}: trace bytes differ from {golden} but records match; \
                 serialization drifted"
            ),
            TraceDiff::LengthMismatch { left, right } => {
                panic!("{scenario}: golden has {left} records, fresh run has {right}")
            }
            TraceDiff::DiffersAt {
                index,
                fields,
                left,
                right,
            } => panic!(
                "{scenario}: first divergence at record {index} (fields: {})\n\
                 golden: {left:?}\n fresh: {right:?}",
                fields.join(", ")
            ),
        }
    }
}

#[test]
fn village_market_matches_its_golden_trace() {
    check("village-market.json", "village-market.jsonl");
}

#[test]
fn community_bank_matches_its_golden_trace() {
    check("community-bank.json", "community-bank.jsonl");
}

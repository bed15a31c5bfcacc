use std::collections::BTreeMap;
use std::io::Write;

use pbent::verify::run_all;

#[test]
fn acceptance_criteria() {
    let results = run_all(&BTreeMap::new());
    let mut err = std::io::stderr().lock();
    for r in &results {
        writeln!(err, "{}", r.summary_line()).unwrap();
        if !r.passed {
            writeln!(err, "  detail: {}", r.detail).unwrap();
        }
    }
    let failed: Vec<u32> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    assert_eq!(results.len(), 9);
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

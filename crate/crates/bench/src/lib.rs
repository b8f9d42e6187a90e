//! Workloads shared by the criterion benchmarks.

use normcensus::census::{verdict_with, EquationSpec};
use normcensus::classgroup::class_group;
use normcensus::quadfield::field_data;
use normcensus::Result;

/// Census verdicts for every nonzero `m` in `lo..=hi`; returns the number solvable.
pub fn census_sweep(d: u64, lo: i64, hi: i64) -> Result<usize> {
    let field = field_data(d)?;
    let group = class_group(field.disc)?;
    let mut solvable = 0;
    for m in (lo..=hi).filter(|&m| m != 0) {
        let spec = EquationSpec::with_field(field.clone(), m)?;
        if verdict_with(&spec, &group)?.solvable {
            solvable += 1;
        }
    }
    Ok(solvable)
}

use std::io::Write;

use serde::Serialize;

use crate::error::Result;
use crate::master::SolveResult;

/// One line of the benchmark CSV.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct BenchRow {
    pub instance: String,
    pub settings: String,
    pub seed: u64,
    pub time_s: f64,
    pub status: String,
    pub z: Option<i64>,
    pub root_bound: Option<f64>,
    pub root_gap_pct: Option<f64>,
    pub nodes: usize,
    pub fort_cuts: usize,
    pub int_cuts: usize,
}

impl BenchRow {
    pub fn new(instance: &str, settings: &str, result: &SolveResult) -> Self {
        BenchRow {
            instance: instance.to_string(),
            settings: settings.to_string(),
            seed: result.stats.seed,
            time_s: result.stats.time.as_secs_f64(),
            status: result.status.to_string(),
            z: result.objective,
            root_bound: result.stats.root_bound,
            root_gap_pct: result.stats.root_gap_pct,
            nodes: result.stats.nodes,
            fort_cuts: result.stats.initial_cuts + result.stats.fort_cuts,
            int_cuts: result.stats.int_cuts,
        }
    }
}

/// Writes a header row and then `rows`.
pub fn write_bench_csv<W: Write>(out: W, rows: &[BenchRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record([
            "instance",
            "settings",
            "seed",
            "time_s",
            "status",
            "z",
            "root_bound",
            "root_gap_pct",
            "nodes",
            "fort_cuts",
            "int_cuts",
        ])?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_matches_columns() {
        let mut buf = Vec::new();
        write_bench_csv(&mut buf, &[]).unwrap();
        let empty = String::from_utf8(buf).unwrap();
        let row = BenchRow {
            instance: "g".into(),
            settings: "IBEG".into(),
            seed: 1,
            time_s: 0.5,
            status: "optimal".into(),
            z: Some(4),
            root_bound: Some(3.5),
            root_gap_pct: Some(12.5),
            nodes: 3,
            fort_cuts: 7,
            int_cuts: 2,
        };
        let mut buf = Vec::new();
        write_bench_csv(&mut buf, &[row]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), empty.trim_end());
        assert_eq!(lines.next().unwrap(), "g,IBEG,1,0.5,optimal,4,3.5,12.5,3,7,2");
    }
}

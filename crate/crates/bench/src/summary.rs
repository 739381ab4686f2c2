//! Final-snapshot medians and quartiles per (task, algo, metric).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::csv_io::{fmt_real, MetricsRow};

pub const SUMMARY_HEADER: &str = "task,algo,metric,replications,median,q25,q75";

pub const METRIC_NAMES: [&str; 7] = [
    "illusory_qd_score",
    "corrected_qd_score",
    "illusory_coverage",
    "corrected_coverage",
    "loss_qd_score",
    "loss_coverage",
    "reproducibility_score",
];

/// Quantile by linear interpolation between order statistics
/// (position `q·(n-1)`).
pub fn quantile(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Some(sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo]))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub task: String,
    pub algo: String,
    pub metric: &'static str,
    pub replications: usize,
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
}

fn metric_value(row: &MetricsRow, i: usize) -> f64 {
    let r = &row.record;
    [
        r.illusory_qd_score,
        r.corrected_qd_score,
        r.illusory_coverage,
        r.corrected_coverage,
        r.loss_qd_score,
        r.loss_coverage,
        r.reproducibility_score,
    ][i]
}

/// Last snapshot of every replication, grouped by `(task, algo)`.
pub fn final_snapshots(rows: &[MetricsRow]) -> BTreeMap<(String, String), Vec<&MetricsRow>> {
    let mut last: BTreeMap<(String, String, u64), &MetricsRow> = BTreeMap::new();
    for row in rows {
        let key = (row.task.clone(), row.algo.clone(), row.replication);
        match last.get(&key) {
            Some(prev) if prev.record.evaluations_used >= row.record.evaluations_used => {}
            _ => {
                last.insert(key, row);
            }
        }
    }
    let mut groups: BTreeMap<(String, String), Vec<&MetricsRow>> = BTreeMap::new();
    for ((task, algo, _), row) in last {
        groups.entry((task, algo)).or_default().push(row);
    }
    groups
}

pub fn summarize(rows: &[MetricsRow]) -> Vec<SummaryRow> {
    let mut out = Vec::new();
    for ((task, algo), group) in final_snapshots(rows) {
        for (i, metric) in METRIC_NAMES.iter().enumerate() {
            let mut values: Vec<f64> = group.iter().map(|r| metric_value(r, i)).collect();
            values.sort_by(f64::total_cmp);
            let (Some(median), Some(q25), Some(q75)) = (
                quantile(&values, 0.5),
                quantile(&values, 0.25),
                quantile(&values, 0.75),
            ) else {
                eprintln!("warning: no final snapshot for {task}/{algo}; group omitted");
                continue;
            };
            out.push(SummaryRow {
                task: task.clone(),
                algo: algo.clone(),
                metric,
                replications: values.len(),
                median,
                q25,
                q75,
            });
        }
    }
    out
}

pub fn write_summary(rows: &[SummaryRow]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.task,
            r.algo,
            r.metric,
            r.replications,
            fmt_real(r.median),
            fmt_real(r.q25),
            fmt_real(r.q75)
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use uqd_core::MetricsRecord;

    #[test]
    fn quantile_conventions() {
        let v = [1.0, 2.0, 3.0];
        assert_eq!(quantile(&v, 0.5), Some(2.0));
        assert_eq!(quantile(&v, 0.25), Some(1.5));
        assert_eq!(quantile(&v, 0.75), Some(2.5));
        let even = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&even, 0.5), Some(2.5));
        assert_eq!(quantile(&even, 0.25), Some(1.75));
        assert_eq!(quantile(&[7.0], 0.25), Some(7.0));
        assert_eq!(quantile(&[], 0.5), None);
    }

    proptest! {
        #[test]
        fn quantiles_are_ordered(mut v in prop::collection::vec(-1e6f64..1e6, 1..50)) {
            v.sort_by(f64::total_cmp);
            let (a, b, c) = (quantile(&v, 0.25).unwrap(), quantile(&v, 0.5).unwrap(), quantile(&v, 0.75).unwrap());
            prop_assert!(v[0] <= a && a <= b && b <= c && c <= v[v.len() - 1]);
        }
    }

    fn row(rep: u64, evals: u64, qd: f64) -> MetricsRow {
        MetricsRow {
            task: "t".into(),
            algo: "me".into(),
            replication: rep,
            record: MetricsRecord {
                evaluations_used: evals,
                illusory_qd_score: qd,
                corrected_qd_score: qd,
                illusory_coverage: 0.5,
                corrected_coverage: 0.5,
                loss_qd_score: 0.0,
                loss_coverage: 0.0,
                reproducibility_score: 1.0,
            },
        }
    }

    #[test]
    fn only_final_snapshots_count() {
        let rows = vec![
            row(0, 10, 100.0),
            row(0, 20, 1.0),
            row(1, 20, 2.0),
            row(1, 10, 100.0),
            row(2, 20, 3.0),
        ];
        let s = summarize(&rows);
        assert_eq!(s.len(), METRIC_NAMES.len());
        let qd = &s[0];
        assert_eq!((qd.median, qd.q25, qd.q75, qd.replications), (2.0, 1.5, 2.5, 3));
        let single = summarize(&rows[..1]);
        assert_eq!((single[0].median, single[0].q25, single[0].q75), (100.0, 100.0, 100.0));
    }
}

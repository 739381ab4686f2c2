//! CSV schemas shared with downstream plotting.
//!
//! Reals are printed like C's `%.17g`, which round-trips every `f64`.

use std::fmt::Write as _;

use uqd_core::archive::{CellIndex, Elite, GridArchive};
use uqd_core::{Genotype, MetricsRecord};

use crate::error::BenchError;

pub const METRICS_HEADER: &str = "task,algo,replication,evaluations,illusory_qd_score,corrected_qd_score,illusory_coverage,corrected_coverage,loss_qd_score,loss_coverage,reproducibility_score";
pub const REPRO_HEADER: &str = "cell_row,cell_col,reproducibility";

/// `%.17g`.
pub fn fmt_real(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0" } else { "0" }.into();
    }
    const P: i32 = 17;
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    if !(-4..P).contains(&exp) {
        let mantissa = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (P - 1 - exp) as usize;
        strip_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn archive_header(n_joints: usize) -> String {
    let mut h = String::from("cell_row,cell_col,fitness,desc_x,desc_y,n_samples");
    for j in 0..n_joints {
        write!(h, ",genotype_{j}").unwrap();
    }
    h
}

/// One row per occupied cell in `(row, col)` order.
pub fn write_archive(archive: &GridArchive, n_joints: usize) -> String {
    let mut out = archive_header(n_joints);
    out.push('\n');
    for ((row, col), e) in archive.iter() {
        write!(
            out,
            "{row},{col},{},{},{},{}",
            fmt_real(e.fitness),
            fmt_real(e.descriptor[0]),
            fmt_real(e.descriptor[1]),
            e.n_samples
        )
        .unwrap();
        for a in e.genotype.iter() {
            write!(out, ",{}", fmt_real(*a)).unwrap();
        }
        out.push('\n');
    }
    out
}

/// Parses an archive file into a grid of the given resolution and offset.
///
/// Every row must index to the cell it names.
pub fn read_archive(
    text: &str,
    resolution: (usize, usize),
    offset: f64,
) -> Result<GridArchive, BenchError> {
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    let fixed = ["cell_row", "cell_col", "fitness", "desc_x", "desc_y", "n_samples"];
    for (i, name) in fixed.iter().enumerate() {
        if headers.get(i) != Some(name) {
            return Err(BenchError::Schema(format!(
                "archive column {i} must be `{name}`, found `{}`",
                headers.get(i).unwrap_or("")
            )));
        }
    }
    let n_joints = headers.len() - fixed.len();
    for j in 0..n_joints {
        let want = format!("genotype_{j}");
        if headers.get(fixed.len() + j) != Some(want.as_str()) {
            return Err(BenchError::Schema(format!(
                "archive column {} must be `{want}`",
                fixed.len() + j
            )));
        }
    }

    let mut archive = GridArchive::new(resolution.0, resolution.1, offset)?;
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let field = |i: usize| -> Result<&str, BenchError> {
            record
                .get(i)
                .ok_or_else(|| BenchError::Schema(format!("row {}: missing column {i}", line + 1)))
        };
        let real = |i: usize| -> Result<f64, BenchError> {
            field(i)?.parse::<f64>().map_err(|e| {
                BenchError::Schema(format!("row {}, column `{}`: {e}", line + 1, &headers[i]))
            })
        };
        let int = |i: usize| -> Result<usize, BenchError> {
            field(i)?.parse::<usize>().map_err(|e| {
                BenchError::Schema(format!("row {}, column `{}`: {e}", line + 1, &headers[i]))
            })
        };
        let cell: CellIndex = (int(0)?, int(1)?);
        let genotype = (0..n_joints)
            .map(|j| real(fixed.len() + j))
            .collect::<Result<Vec<_>, _>>()?;
        let elite = Elite {
            genotype: Genotype::from_vec(genotype),
            fitness: real(2)?,
            descriptor: [real(3)?, real(4)?],
            n_samples: int(5)?,
            stats: None,
        };
        let actual = archive.cell_index(elite.descriptor)?;
        if actual != cell {
            return Err(BenchError::Schema(format!(
                "row {}: descriptor indexes to cell {actual:?}, file says {cell:?}",
                line + 1
            )));
        }
        archive.try_insert(elite)?;
    }
    Ok(archive)
}

pub fn write_reproducibility(cells: &[(CellIndex, f64)]) -> String {
    let mut out = String::from(REPRO_HEADER);
    out.push('\n');
    for ((row, col), v) in cells {
        writeln!(out, "{row},{col},{}", fmt_real(*v)).unwrap();
    }
    out
}

/// A metrics row with its grouping keys.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub task: String,
    pub algo: String,
    pub replication: u64,
    pub record: MetricsRecord,
}

pub fn metrics_line(row: &MetricsRow) -> String {
    let r = &row.record;
    format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        row.task,
        row.algo,
        row.replication,
        r.evaluations_used,
        fmt_real(r.illusory_qd_score),
        fmt_real(r.corrected_qd_score),
        fmt_real(r.illusory_coverage),
        fmt_real(r.corrected_coverage),
        fmt_real(r.loss_qd_score),
        fmt_real(r.loss_coverage),
        fmt_real(r.reproducibility_score)
    )
}

pub fn read_metrics(text: &str) -> Result<Vec<MetricsRow>, BenchError> {
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    let expected: Vec<&str> = METRICS_HEADER.split(',').collect();
    for (i, name) in expected.iter().enumerate() {
        if headers.get(i) != Some(name) {
            return Err(BenchError::Schema(format!(
                "metrics column {i} must be `{name}`, found `{}`",
                headers.get(i).unwrap_or("")
            )));
        }
    }
    if headers.len() != expected.len() {
        return Err(BenchError::Schema(format!(
            "metrics file has {} columns, expected {}",
            headers.len(),
            expected.len()
        )));
    }
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let real = |i: usize| -> Result<f64, BenchError> {
            record[i].parse::<f64>().map_err(|e| {
                BenchError::Schema(format!("row {}, column `{}`: {e}", line + 1, expected[i]))
            })
        };
        let int = |i: usize| -> Result<u64, BenchError> {
            record[i].parse::<u64>().map_err(|e| {
                BenchError::Schema(format!("row {}, column `{}`: {e}", line + 1, expected[i]))
            })
        };
        rows.push(MetricsRow {
            task: record[0].to_string(),
            algo: record[1].to_string(),
            replication: int(2)?,
            record: MetricsRecord {
                evaluations_used: int(3)?,
                illusory_qd_score: real(4)?,
                corrected_qd_score: real(5)?,
                illusory_coverage: real(6)?,
                corrected_coverage: real(7)?,
                loss_qd_score: real(8)?,
                loss_coverage: real(9)?,
                reproducibility_score: real(10)?,
            },
        });
    }
    Ok(rows)
}

//! CSV ingestion and emission for data sets, count matrices, and summary
//! tables. Parsing is line-oriented so errors can name the offending line.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::inference::DensitySummary;
use crate::partitions::GroupedCounts;
use crate::priors::PriorMonteCarlo;
use crate::samplers::GroupedData;

/// A data set plus its optional ground-truth component labels.
#[derive(Clone, Debug)]
pub struct LoadedData {
    pub data: GroupedData,
    pub truth: Option<Vec<Vec<usize>>>,
}

/// Load `population,value[,truth_component]` rows grouped by population.
///
/// Population ids must be the contiguous range `1..=J`; within-file order is
/// preserved inside each population.
pub fn load_grouped_csv(path: &Path) -> Result<LoadedData> {
    let file = File::open(path)
        .map_err(|e| Error::data(format!("cannot open {}: {e}", path.display())))?;
    let reader = BufReader::new(file);
    let mut lines = reader.lines().enumerate();

    let header = match lines.next() {
        Some((_, Ok(line))) => line,
        Some((_, Err(e))) => return Err(Error::data(format!("line 1: {e}"))),
        None => return Err(Error::data("empty data file")),
    };
    let cols: Vec<String> = header
        .split(',')
        .map(|c| c.trim().to_ascii_lowercase())
        .collect();
    let with_truth = match cols.as_slice() {
        [a, b] if a == "population" && b == "value" => false,
        [a, b, c] if a == "population" && b == "value" && c == "truth_component" => true,
        _ => {
            return Err(Error::data(format!(
                "line 1: expected header population,value[,truth_component], got {header:?}"
            )))
        }
    };

    let mut rows: Vec<(usize, f64, Option<usize>)> = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::data(format!("line {line_no}: {e}")))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let expected = if with_truth { 3 } else { 2 };
        if fields.len() != expected {
            return Err(Error::data(format!(
                "line {line_no}: expected {expected} columns, got {}",
                fields.len()
            )));
        }
        let pop: usize = fields[0].parse().map_err(|_| {
            Error::data(format!(
                "line {line_no}: population {:?} is not a positive integer",
                fields[0]
            ))
        })?;
        if pop == 0 {
            return Err(Error::data(format!(
                "line {line_no}: population ids start at 1"
            )));
        }
        let value: f64 = fields[1].parse().map_err(|_| {
            Error::data(format!("line {line_no}: value {:?} is not numeric", fields[1]))
        })?;
        if !value.is_finite() {
            return Err(Error::data(format!(
                "line {line_no}: value must be finite, got {value}"
            )));
        }
        let truth = if with_truth {
            let t: usize = fields[2].parse().map_err(|_| {
                Error::data(format!(
                    "line {line_no}: truth_component {:?} is not a positive integer",
                    fields[2]
                ))
            })?;
            if t == 0 {
                return Err(Error::data(format!(
                    "line {line_no}: truth_component ids start at 1"
                )));
            }
            Some(t)
        } else {
            None
        };
        rows.push((pop, value, truth));
    }
    if rows.is_empty() {
        return Err(Error::data("data file has a header but no rows"));
    }

    let n_pops = rows.iter().map(|r| r.0).max().unwrap();
    let mut values = vec![Vec::new(); n_pops];
    let mut truth = vec![Vec::new(); n_pops];
    for (pop, value, t) in rows {
        values[pop - 1].push(value);
        if let Some(t) = t {
            truth[pop - 1].push(t - 1);
        }
    }
    if let Some(missing) = values.iter().position(|v| v.is_empty()) {
        return Err(Error::data(format!(
            "population ids must be contiguous: population {} has no rows",
            missing + 1
        )));
    }
    Ok(LoadedData {
        data: GroupedData::new(values)?,
        truth: if with_truth { Some(truth) } else { None },
    })
}

/// Mirror image of [`load_grouped_csv`]; truth labels are written 1-based.
pub fn write_grouped_csv(
    path: &Path,
    data: &GroupedData,
    truth: Option<&[Vec<usize>]>,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    match truth {
        Some(truth) => {
            writeln!(w, "population,value,truth_component")?;
            for (j, pop) in data.populations().iter().enumerate() {
                for (i, v) in pop.iter().enumerate() {
                    writeln!(w, "{},{},{}", j + 1, v, truth[j][i] + 1)?;
                }
            }
        }
        None => {
            writeln!(w, "population,value")?;
            for (j, pop) in data.populations().iter().enumerate() {
                for v in pop {
                    writeln!(w, "{},{}", j + 1, v)?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Load a headerless matrix of non-negative integer counts, one population
/// per row.
pub fn load_counts_csv(path: &Path) -> Result<GroupedCounts> {
    let file = File::open(path)
        .map_err(|e| Error::data(format!("cannot open {}: {e}", path.display())))?;
    let mut rows: Vec<Vec<u64>> = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::data(format!("line {line_no}: {e}")))?;
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|f| {
                f.trim().parse::<u64>().map_err(|_| {
                    Error::data(format!(
                        "line {line_no}: count {:?} is not a non-negative integer",
                        f.trim()
                    ))
                })
            })
            .collect::<Result<Vec<u64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::data("counts file is empty"));
    }
    GroupedCounts::new(rows).map_err(|e| Error::data(format!("invalid counts matrix: {e}")))
}

pub fn write_matrix_csv(path: &Path, rows: &[Vec<f64>]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for row in rows {
        let mut first = true;
        for v in row {
            if !first {
                write!(w, ",")?;
            }
            write!(w, "{v}")?;
            first = false;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_density_csv(path: &Path, summary: &DensitySummary) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "x,mean,lower,upper")?;
    for i in 0..summary.grid.len() {
        writeln!(
            w,
            "{},{},{},{}",
            summary.grid[i], summary.mean[i], summary.lower[i], summary.upper[i]
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_ncomp_csv(path: &Path, table: &[(usize, f64)]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "components,probability")?;
    for (k, p) in table {
        writeln!(w, "{k},{p}")?;
    }
    w.flush()?;
    Ok(())
}

/// The analytic-versus-Monte-Carlo moment table of `prior-check`.
pub fn write_prior_check_table<W: Write>(w: &mut W, mc: &PriorMonteCarlo) -> Result<()> {
    writeln!(w, "quantity,analytic,estimate,std_error,z")?;
    for (name, m) in mc.rows() {
        writeln!(
            w,
            "{name},{},{},{},{}",
            m.analytic,
            m.estimate,
            m.std_error,
            m.z_score()
        )?;
    }
    Ok(())
}

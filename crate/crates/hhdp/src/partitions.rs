//! Set partitions of populations and grouped frequency counts.
//!
//! Populations are indexed `0..J` internally; the CLI and file formats use
//! 1-based labels.

use crate::error::{Error, Result};
use crate::special::log_gamma_unchecked;

/// Enumeration guard: Bell(12) = 4 213 597 partitions is the largest set we
/// are willing to materialize.
pub const MAX_ENUMERATED_SET: usize = 12;

/// A partition of `{0, …, n-1}` in canonical form: blocks are sorted
/// internally and ordered by their smallest element, so structural equality
/// is partition equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SetPartition {
    blocks: Vec<Vec<usize>>,
    n_items: usize,
}

impl SetPartition {
    /// Build from blocks, validating that they are disjoint, non-empty, and
    /// cover `{0, …, n-1}`.
    pub fn from_blocks(n_items: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; n_items];
        let mut count = 0usize;
        for block in &blocks {
            if block.is_empty() {
                return Err(Error::domain("set partition contains an empty block"));
            }
            for &item in block {
                if item >= n_items {
                    return Err(Error::domain(format!(
                        "partition item {item} out of range for ground set of size {n_items}"
                    )));
                }
                if seen[item] {
                    return Err(Error::domain(format!("partition item {item} repeated")));
                }
                seen[item] = true;
                count += 1;
            }
        }
        if count != n_items {
            return Err(Error::domain(
                "partition blocks do not cover the ground set",
            ));
        }
        let mut blocks = blocks;
        for block in &mut blocks {
            block.sort_unstable();
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        Ok(SetPartition { blocks, n_items })
    }

    /// Build from per-item block labels (labels may be arbitrary ids).
    pub fn from_labels(labels: &[usize]) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::domain("partition of an empty ground set"));
        }
        let mut order: Vec<usize> = Vec::new();
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for (item, &lab) in labels.iter().enumerate() {
            match order.iter().position(|&l| l == lab) {
                Some(idx) => blocks[idx].push(item),
                None => {
                    order.push(lab);
                    blocks.push(vec![item]);
                }
            }
        }
        SetPartition::from_blocks(labels.len(), blocks)
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.len()).collect()
    }

    /// Per-item block index under the canonical block order (a restricted
    /// growth string).
    pub fn labels(&self) -> Vec<usize> {
        let mut labels = vec![0usize; self.n_items];
        for (b, block) in self.blocks.iter().enumerate() {
            for &item in block {
                labels[item] = b;
            }
        }
        labels
    }
}

/// All partitions of `{0, …, j-1}` in restricted-growth-string order.
///
/// Guarded by [`MAX_ENUMERATED_SET`]: the count is the Bell number B(j).
pub fn enumerate_set_partitions(j: usize) -> Result<Vec<SetPartition>> {
    if j == 0 {
        return Err(Error::domain("cannot partition an empty population set"));
    }
    if j > MAX_ENUMERATED_SET {
        return Err(Error::size(format!(
            "enumeration of partitions of {j} populations exceeds the cap of {MAX_ENUMERATED_SET}"
        )));
    }
    let mut out = Vec::new();
    // Restricted growth strings: rgs[0] = 0 and rgs[i] <= max(rgs[..i]) + 1.
    let mut rgs = vec![0usize; j];
    loop {
        out.push(SetPartition::from_labels(&rgs)?);
        // Advance to the next string.
        let mut i = j;
        loop {
            if i == 1 {
                return Ok(out);
            }
            i -= 1;
            let max_prefix = rgs[..i].iter().copied().max().unwrap_or(0);
            if rgs[i] <= max_prefix {
                rgs[i] += 1;
                for v in rgs[i + 1..].iter_mut() {
                    *v = 0;
                }
                break;
            }
        }
    }
}

/// Log Ewens sampling formula for a set partition:
/// `ln [ α^R / (α)_J · Π_r (m_r − 1)! ]`.
///
/// Exponentials over all partitions of a fixed ground set sum to one.
pub fn ewens_log_prob(partition: &SetPartition, alpha: f64) -> Result<f64> {
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::domain(format!(
            "ewens_log_prob requires a positive finite concentration, got {alpha}"
        )));
    }
    let j = partition.n_items() as f64;
    let r = partition.n_blocks() as f64;
    let mut log_p = r * alpha.ln() - (log_gamma_unchecked(alpha + j) - log_gamma_unchecked(alpha));
    for block in partition.blocks() {
        log_p += log_gamma_unchecked(block.len() as f64);
    }
    Ok(log_p)
}

/// Frequency matrix `n_{j,d}`: rows are populations, columns are the distinct
/// observational clusters ("dishes"). Every dish is observed at least once.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupedCounts {
    counts: Vec<Vec<u64>>,
    row_totals: Vec<u64>,
    col_totals: Vec<u64>,
    total: u64,
}

impl GroupedCounts {
    pub fn new(counts: Vec<Vec<u64>>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::domain("grouped counts need at least one row"));
        }
        let n_dishes = counts[0].len();
        if n_dishes == 0 {
            return Err(Error::domain("grouped counts need at least one column"));
        }
        if counts.iter().any(|row| row.len() != n_dishes) {
            return Err(Error::shape("grouped counts rows have unequal lengths"));
        }
        let row_totals: Vec<u64> = counts.iter().map(|row| row.iter().sum()).collect();
        let mut col_totals = vec![0u64; n_dishes];
        for row in &counts {
            for (d, &v) in row.iter().enumerate() {
                col_totals[d] += v;
            }
        }
        if let Some(d) = col_totals.iter().position(|&v| v == 0) {
            return Err(Error::domain(format!(
                "column {d} of the count matrix is entirely zero; every dish must be observed"
            )));
        }
        let total = row_totals.iter().sum();
        Ok(GroupedCounts {
            counts,
            row_totals,
            col_totals,
            total,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.counts.len()
    }

    pub fn n_dishes(&self) -> usize {
        self.counts[0].len()
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.counts[r]
    }

    pub fn row_totals(&self) -> &[u64] {
        &self.row_totals
    }

    pub fn col_totals(&self) -> &[u64] {
        &self.col_totals
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Collapse rows according to a partition of the populations:
    /// `n*_{r,d} = Σ_{j ∈ B_r} n_{j,d}`.
    pub fn merge(&self, partition: &SetPartition) -> Result<GroupedCounts> {
        if partition.n_items() != self.n_rows() {
            return Err(Error::shape(format!(
                "partition of {} populations applied to a {}-row count matrix",
                partition.n_items(),
                self.n_rows()
            )));
        }
        let mut merged = vec![vec![0u64; self.n_dishes()]; partition.n_blocks()];
        for (r, block) in partition.blocks().iter().enumerate() {
            for &j in block {
                for (d, &v) in self.counts[j].iter().enumerate() {
                    merged[r][d] += v;
                }
            }
        }
        GroupedCounts::new(merged)
    }
}

/// Convenience alias matching the operation-style API.
pub fn merge_counts(counts: &GroupedCounts, partition: &SetPartition) -> Result<GroupedCounts> {
    counts.merge(partition)
}

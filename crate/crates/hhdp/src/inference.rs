//! Posterior summaries over MCMC draws: density estimates with pointwise
//! credible bands, co-clustering matrices, variation-of-information point
//! estimates, component-count posteriors, shared-cluster tables, and the
//! empirical homogeneity probability.
//!
//! All entropies and VI distances are in nats.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nig::log_normal_pdf;

/// Which latent model produced a draws file.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    #[default]
    #[serde(rename = "HHDP")]
    Hhdp,
    #[serde(rename = "NDP")]
    Ndp,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerKind {
    #[default]
    Blocked,
    Marginal,
}

/// Run-level metadata carried alongside the snapshots.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DrawsMeta {
    pub model: ModelKind,
    pub sampler: SamplerKind,
    pub n_pops: usize,
    pub sizes: Vec<usize>,
    pub k: usize,
    pub l: usize,
    pub seed: u64,
    pub chains: usize,
    pub config_hash: String,
}

/// One kept iteration of a sampler.
///
/// The weight and atom rows are per population: row `j` is the mixture the
/// sampler currently assigns to population `j` (its selected distributional
/// component). The marginal sampler records labels only; its weight and atom
/// fields stay empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DrawSnapshot {
    pub iter: u64,
    pub chain: u32,
    pub z: Vec<u32>,
    pub zeta: Vec<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pi_star: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub omega0: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub weights: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub atom_means: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub atom_vars: Vec<Vec<f64>>,
}

/// An ordered collection of snapshots plus metadata.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PosteriorDraws {
    pub meta: DrawsMeta,
    pub draws: Vec<DrawSnapshot>,
}

/// Summary level: the partition of observations or of populations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    Observations,
    Populations,
}

impl PosteriorDraws {
    pub fn n_observations(&self) -> usize {
        self.meta.sizes.iter().sum()
    }

    fn require_nonempty(&self) -> Result<()> {
        if self.draws.is_empty() {
            Err(Error::domain("no posterior draws to summarize"))
        } else {
            Ok(())
        }
    }

    /// Observational cluster key of observation `(j, i)` in one draw. For the
    /// HHDP the atoms are shared, so the key is ζ alone; for the NDP atoms
    /// live per distributional component, so the key pairs (z_j, ζ).
    fn obs_key(&self, d: &DrawSnapshot, j: usize, i: usize) -> usize {
        let zeta = d.zeta[j][i] as usize;
        match self.meta.model {
            ModelKind::Hhdp => zeta,
            ModelKind::Ndp => d.z[j] as usize * self.meta.l + zeta,
        }
    }

    /// Cluster labels of one draw at the requested level, canonicalized to
    /// dense first-occurrence ids. Observations are pooled population by
    /// population in file order.
    pub fn level_labels(&self, d: &DrawSnapshot, level: Level) -> Vec<usize> {
        let raw: Vec<usize> = match level {
            Level::Populations => d.z.iter().map(|&k| k as usize).collect(),
            Level::Observations => (0..self.meta.n_pops)
                .flat_map(|j| (0..d.zeta[j].len()).map(move |i| (j, i)))
                .map(|(j, i)| self.obs_key(d, j, i))
                .collect(),
        };
        canonicalize_labels(&raw)
    }
}

/// Relabel to dense ids in order of first occurrence.
pub fn canonicalize_labels(raw: &[usize]) -> Vec<usize> {
    let mut seen: Vec<usize> = Vec::new();
    raw.iter()
        .map(|&v| {
            if let Some(pos) = seen.iter().position(|&s| s == v) {
                pos
            } else {
                seen.push(v);
                seen.len() - 1
            }
        })
        .collect()
}

/// Mean and equal-tailed 95% pointwise band of the per-population mixture
/// density over a grid.
#[derive(Clone, Debug, Serialize)]
pub struct DensitySummary {
    pub grid: Vec<f64>,
    pub mean: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// Pointwise density summary for population `pop` over `grid`.
pub fn density_estimate(
    draws: &PosteriorDraws,
    pop: usize,
    grid: &[f64],
) -> Result<DensitySummary> {
    draws.require_nonempty()?;
    if pop >= draws.meta.n_pops {
        return Err(Error::shape(format!(
            "population {pop} out of range for {} populations",
            draws.meta.n_pops
        )));
    }
    if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("density grid must be non-empty and strictly increasing"));
    }
    if draws.draws.iter().any(|d| d.weights.is_empty()) {
        return Err(Error::domain(
            "draws carry no mixture weights (marginal sampler); density estimation needs the blocked sampler",
        ));
    }
    let b = draws.draws.len();
    // values[g] collects the density at grid point g across draws.
    let mut values = vec![vec![0.0f64; b]; grid.len()];
    for (bi, d) in draws.draws.iter().enumerate() {
        let w = &d.weights[pop];
        let means = &d.atom_means[pop];
        let vars = &d.atom_vars[pop];
        for (g, &x) in grid.iter().enumerate() {
            let mut f = 0.0;
            for l in 0..w.len() {
                if w[l] > 0.0 {
                    f += w[l] * log_normal_pdf(x, means[l], vars[l]).exp();
                }
            }
            values[g][bi] = f;
        }
    }
    let mut mean = Vec::with_capacity(grid.len());
    let mut lower = Vec::with_capacity(grid.len());
    let mut upper = Vec::with_capacity(grid.len());
    for col in values.iter_mut() {
        mean.push(col.iter().sum::<f64>() / b as f64);
        col.sort_by(|a, b| a.partial_cmp(b).expect("finite densities"));
        lower.push(percentile_sorted(col, 0.025));
        upper.push(percentile_sorted(col, 0.975));
    }
    Ok(DensitySummary {
        grid: grid.to_vec(),
        mean,
        lower,
        upper,
    })
}

/// Linear-interpolation percentile of an ascending slice.
fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let frac = pos - lo as f64;
    if lo + 1 >= n {
        sorted[n - 1]
    } else {
        sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac
    }
}

/// Pairwise posterior co-clustering frequencies; symmetric with unit
/// diagonal. Observation order pools populations in file order.
pub fn coclustering_matrix(draws: &PosteriorDraws, level: Level) -> Result<Vec<Vec<f64>>> {
    draws.require_nonempty()?;
    let n = match level {
        Level::Observations => draws.n_observations(),
        Level::Populations => draws.meta.n_pops,
    };
    let mut acc = vec![vec![0.0f64; n]; n];
    for d in &draws.draws {
        let labels = draws.level_labels(d, level);
        for i in 0..n {
            for ip in (i + 1)..n {
                if labels[i] == labels[ip] {
                    acc[i][ip] += 1.0;
                }
            }
        }
    }
    let b = draws.draws.len() as f64;
    for i in 0..n {
        for ip in (i + 1)..n {
            let f = acc[i][ip] / b;
            acc[i][ip] = f;
            acc[ip][i] = f;
        }
        acc[i][i] = 1.0;
    }
    Ok(acc)
}

/// Variation of information between two partitions given as label vectors
/// over the same ground set: `VI = H(p) + H(q) − 2 I(p, q)`, in nats.
pub fn vi_distance(p: &[usize], q: &[usize]) -> Result<f64> {
    if p.len() != q.len() || p.is_empty() {
        return Err(Error::shape(format!(
            "vi_distance needs two non-empty label vectors over one ground set, got {} and {}",
            p.len(),
            q.len()
        )));
    }
    let a = canonicalize_labels(p);
    let b = canonicalize_labels(q);
    let ka = a.iter().max().unwrap() + 1;
    let kb = b.iter().max().unwrap() + 1;
    let mut joint = vec![0usize; ka * kb];
    let mut ca = vec![0usize; ka];
    let mut cb = vec![0usize; kb];
    for (&x, &y) in a.iter().zip(b.iter()) {
        joint[x * kb + y] += 1;
        ca[x] += 1;
        cb[y] += 1;
    }
    let n = p.len() as f64;
    let h = |counts: &[usize]| -> f64 {
        counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let f = c as f64 / n;
                -f * f.ln()
            })
            .sum()
    };
    let mut mi = 0.0;
    for x in 0..ka {
        for y in 0..kb {
            let c = joint[x * kb + y];
            if c > 0 {
                let f = c as f64 / n;
                mi += f * ((c as f64 * n) / (ca[x] as f64 * cb[y] as f64)).ln();
            }
        }
    }
    Ok((h(&ca) + h(&cb) - 2.0 * mi).max(0.0))
}

/// The visited partition minimizing the average VI distance to all draws.
/// Ties go to fewer blocks, then to the first-visited partition.
pub fn vi_point_estimate(draws: &PosteriorDraws, level: Level) -> Result<Vec<usize>> {
    draws.require_nonempty()?;
    let all: Vec<Vec<usize>> = draws
        .draws
        .iter()
        .map(|d| draws.level_labels(d, level))
        .collect();
    // Dedupe with multiplicities, preserving first-visit order.
    let mut distinct: Vec<(&[usize], usize)> = Vec::new();
    let mut index: std::collections::HashMap<&[usize], usize> = std::collections::HashMap::new();
    for labels in &all {
        match index.get(labels.as_slice()) {
            Some(&i) => distinct[i].1 += 1,
            None => {
                index.insert(labels.as_slice(), distinct.len());
                distinct.push((labels.as_slice(), 1));
            }
        }
    }
    let total = all.len() as f64;
    let losses: Vec<f64> = distinct
        .par_iter()
        .map(|(cand, _)| {
            let mut loss = 0.0;
            for (other, mult) in &distinct {
                loss += *mult as f64 * vi_distance(cand, other).expect("same ground set");
            }
            loss / total
        })
        .collect();
    let mut best = 0usize;
    for i in 1..distinct.len() {
        let (li, lb) = (losses[i], losses[best]);
        let better = if (li - lb).abs() <= 1e-12 {
            let blocks = |labels: &[usize]| labels.iter().max().unwrap() + 1;
            blocks(distinct[i].0) < blocks(distinct[best].0)
        } else {
            li < lb
        };
        if better {
            best = i;
        }
    }
    Ok(distinct[best].0.to_vec())
}

/// Posterior over the number of occupied observational components.
/// Returns `(count, probability)` pairs sorted by count.
pub fn n_components_posterior(draws: &PosteriorDraws) -> Result<Vec<(usize, f64)>> {
    draws.require_nonempty()?;
    let mut freq: std::collections::BTreeMap<usize, usize> = std::collections::BTreeMap::new();
    for d in &draws.draws {
        let labels = draws.level_labels(d, Level::Observations);
        let k = labels.iter().max().map_or(0, |m| m + 1);
        *freq.entry(k).or_insert(0) += 1;
    }
    let b = draws.draws.len() as f64;
    Ok(freq.into_iter().map(|(k, c)| (k, c as f64 / b)).collect())
}

/// Posterior tables of the number of observational clusters occupied only by
/// the first population block, only by the second, and by both, conditional
/// on the VI distributional point estimate.
#[derive(Clone, Debug, Serialize)]
pub struct SharedClustersSummary {
    /// Population indices of the two blocks (second empty when the point
    /// estimate has a single block).
    pub block_populations: [Vec<usize>; 2],
    pub only_first: Vec<(usize, f64)>,
    pub only_second: Vec<(usize, f64)>,
    pub shared: Vec<(usize, f64)>,
}

pub fn shared_clusters_summary(draws: &PosteriorDraws) -> Result<SharedClustersSummary> {
    draws.require_nonempty()?;
    let pop_est = vi_point_estimate(draws, Level::Populations)?;
    let n_blocks = pop_est.iter().max().unwrap() + 1;
    if n_blocks > 2 {
        return Err(Error::domain(format!(
            "shared-clusters summary is defined for a one- or two-block distributional point estimate, got {n_blocks} blocks"
        )));
    }
    let block1: Vec<usize> = (0..pop_est.len()).filter(|&j| pop_est[j] == 0).collect();
    let block2: Vec<usize> = (0..pop_est.len()).filter(|&j| pop_est[j] == 1).collect();
    let mut tab = [
        std::collections::BTreeMap::<usize, usize>::new(),
        std::collections::BTreeMap::new(),
        std::collections::BTreeMap::new(),
    ];
    let occupied_keys = |d: &DrawSnapshot, block: &[usize]| -> Vec<usize> {
        let mut keys: Vec<usize> = Vec::new();
        for &j in block {
            for i in 0..d.zeta[j].len() {
                let key = draws.obs_key(d, j, i);
                if !keys.contains(&key) {
                    keys.push(key);
                }
            }
        }
        keys
    };
    for d in &draws.draws {
        let in1 = occupied_keys(d, &block1);
        let in2 = occupied_keys(d, &block2);
        let only1 = in1.iter().filter(|k| !in2.contains(k)).count();
        let only2 = in2.iter().filter(|k| !in1.contains(k)).count();
        let shared = in1.iter().filter(|k| in2.contains(k)).count();
        *tab[0].entry(only1).or_insert(0) += 1;
        *tab[1].entry(only2).or_insert(0) += 1;
        *tab[2].entry(shared).or_insert(0) += 1;
    }
    let b = draws.draws.len() as f64;
    let to_table = |m: &std::collections::BTreeMap<usize, usize>| {
        m.iter().map(|(&k, &c)| (k, c as f64 / b)).collect()
    };
    Ok(SharedClustersSummary {
        block_populations: [block1, block2],
        only_first: to_table(&tab[0]),
        only_second: to_table(&tab[1]),
        shared: to_table(&tab[2]),
    })
}

/// Empirical posterior probability that the first two populations share one
/// distributional cluster: the frequency of `z₁ = z₂` across draws.
pub fn empirical_homogeneity(draws: &PosteriorDraws) -> Result<f64> {
    draws.require_nonempty()?;
    if draws.meta.n_pops < 2 {
        return Err(Error::shape(
            "homogeneity probability needs at least two populations",
        ));
    }
    let hits = draws
        .draws
        .iter()
        .filter(|d| d.z[0] == d.z[1])
        .count();
    Ok(hits as f64 / draws.draws.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta(model: ModelKind, sizes: Vec<usize>, l: usize) -> DrawsMeta {
        DrawsMeta {
            model,
            sampler: SamplerKind::Blocked,
            n_pops: sizes.len(),
            sizes,
            k: 4,
            l,
            seed: 0,
            chains: 1,
            config_hash: String::new(),
        }
    }

    fn snap(z: Vec<u32>, zeta: Vec<Vec<u32>>) -> DrawSnapshot {
        DrawSnapshot {
            iter: 0,
            chain: 0,
            z,
            zeta,
            pi_star: vec![],
            omega0: vec![],
            weights: vec![],
            atom_means: vec![],
            atom_vars: vec![],
        }
    }

    fn label_draws(model: ModelKind, snaps: Vec<DrawSnapshot>) -> PosteriorDraws {
        let sizes: Vec<usize> = snaps[0].zeta.iter().map(|v| v.len()).collect();
        PosteriorDraws {
            meta: meta(model, sizes, 4),
            draws: snaps,
        }
    }

    #[test]
    fn vi_worked_example() {
        // p = {{1,2},{3}}, q = all singletons: VI = (2/3) ln 2 = 0.4621 nats.
        let p = [0usize, 0, 1];
        let q = [0usize, 1, 2];
        let vi = vi_distance(&p, &q).unwrap();
        let expected = 2.0 / 3.0 * 2f64.ln();
        assert!((vi - expected).abs() < 1e-12);
        assert!((vi - 0.4621).abs() < 5e-5);
        assert_eq!(vi_distance(&p, &p).unwrap(), 0.0);
        let sym = vi_distance(&q, &p).unwrap();
        assert!((vi - sym).abs() < 1e-15);
        assert!(vi_distance(&p, &[0, 1]).is_err());
    }

    #[test]
    fn vi_is_a_metric_on_random_partitions() {
        use rand::Rng;
        let mut rng = crate::rng::rng_for_seed(5);
        for _ in 0..1000 {
            let a: Vec<usize> = (0..8).map(|_| rng.gen_range(0..4)).collect();
            let b: Vec<usize> = (0..8).map(|_| rng.gen_range(0..4)).collect();
            let c: Vec<usize> = (0..8).map(|_| rng.gen_range(0..4)).collect();
            let dab = vi_distance(&a, &b).unwrap();
            let dba = vi_distance(&b, &a).unwrap();
            let dac = vi_distance(&a, &c).unwrap();
            let dcb = vi_distance(&c, &b).unwrap();
            assert!((dab - dba).abs() < 1e-12);
            assert!(vi_distance(&a, &a).unwrap().abs() < 1e-12);
            assert!(dab <= dac + dcb + 1e-9, "triangle violated");
            if a != b {
                // Identity of indiscernibles on canonical forms.
                if canonicalize_labels(&a) != canonicalize_labels(&b) {
                    assert!(dab > 0.0);
                }
            }
        }
    }

    #[test]
    fn point_estimate_prefers_majority() {
        let p = snap(vec![0, 0], vec![vec![0, 0], vec![0, 0]]);
        let q = snap(vec![0, 0], vec![vec![0, 1], vec![1, 0]]);
        let mut snaps = vec![p.clone(); 9];
        snaps.push(q);
        let draws = label_draws(ModelKind::Hhdp, snaps);
        let est = vi_point_estimate(&draws, Level::Observations).unwrap();
        assert_eq!(est, vec![0, 0, 0, 0]);
        // All draws identical returns that partition.
        let draws = label_draws(ModelKind::Hhdp, vec![p.clone(), p]);
        let est = vi_point_estimate(&draws, Level::Observations).unwrap();
        assert_eq!(est, vec![0, 0, 0, 0]);
    }

    #[test]
    fn coclustering_frequencies() {
        let a = snap(vec![0, 0], vec![vec![0, 0], vec![1]]);
        let b = snap(vec![0, 1], vec![vec![0, 1], vec![0]]);
        let draws = label_draws(ModelKind::Hhdp, vec![a, b]);
        let m = coclustering_matrix(&draws, Level::Observations).unwrap();
        assert_eq!(m[0][0], 1.0);
        assert!((m[0][1] - 0.5).abs() < 1e-15); // together in draw a only
        assert!((m[0][2] - 0.5).abs() < 1e-15); // together in draw b only
        assert_eq!(m[1][2], 0.0);
        let mp = coclustering_matrix(&draws, Level::Populations).unwrap();
        assert!((mp[0][1] - 0.5).abs() < 1e-15);
        // Single draw gives a 0/1 matrix.
        let only = label_draws(
            ModelKind::Hhdp,
            vec![snap(vec![0, 0], vec![vec![0, 0], vec![0]])],
        );
        let m = coclustering_matrix(&only, Level::Observations).unwrap();
        assert!(m.iter().flatten().all(|&v| v == 0.0 || v == 1.0));
    }

    #[test]
    fn ndp_keys_split_clusters_across_populations() {
        // Same ζ label in two populations with different z must not count as
        // co-clustering under the NDP.
        let d = snap(vec![0, 1], vec![vec![0], vec![0]]);
        let draws = label_draws(ModelKind::Ndp, vec![d.clone()]);
        let m = coclustering_matrix(&draws, Level::Observations).unwrap();
        assert_eq!(m[0][1], 0.0);
        assert_eq!(
            n_components_posterior(&draws).unwrap(),
            vec![(2, 1.0)]
        );
        // Under the HHDP the same labels do co-cluster.
        let draws = label_draws(ModelKind::Hhdp, vec![d]);
        let m = coclustering_matrix(&draws, Level::Observations).unwrap();
        assert_eq!(m[0][1], 1.0);
    }

    #[test]
    fn component_count_table() {
        let a = snap(vec![0], vec![vec![0, 0, 0]]);
        let b = snap(vec![0], vec![vec![0, 1, 2]]);
        let draws = label_draws(ModelKind::Hhdp, vec![a, b]);
        let tab = n_components_posterior(&draws).unwrap();
        assert_eq!(tab, vec![(1, 0.5), (3, 0.5)]);
        let total: f64 = tab.iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn density_basics() {
        let mut d = snap(vec![0], vec![vec![0]]);
        d.weights = vec![vec![1.0, 0.0]];
        d.atom_means = vec![vec![0.0, 50.0]];
        d.atom_vars = vec![vec![1.0, 1.0]];
        let draws = PosteriorDraws {
            meta: meta(ModelKind::Hhdp, vec![1], 2),
            draws: vec![d],
        };
        let grid: Vec<f64> = (0..401).map(|i| -10.0 + i as f64 * 0.05).collect();
        let s = density_estimate(&draws, 0, &grid).unwrap();
        // One draw: the band collapses onto the mean.
        for g in 0..grid.len() {
            assert_eq!(s.mean[g], s.lower[g]);
            assert_eq!(s.mean[g], s.upper[g]);
        }
        // Degenerate one-atom mixture equals the standard normal density.
        for (g, &x) in grid.iter().enumerate() {
            let expect = log_normal_pdf(x, 0.0, 1.0).exp();
            assert!((s.mean[g] - expect).abs() < 1e-12);
        }
        // Trapezoid integral close to one.
        let mut integral = 0.0;
        for g in 1..grid.len() {
            integral += 0.5 * (s.mean[g] + s.mean[g - 1]) * (grid[g] - grid[g - 1]);
        }
        assert!((0.99..=1.01).contains(&integral), "integral {integral}");
        assert!(density_estimate(&draws, 1, &grid).is_err());
        assert!(density_estimate(&draws, 0, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn shared_clusters_fixture() {
        // Two populations in two blocks. Draw a: clusters {0} only in pop 1,
        // {1} shared. Draw b: all three clusters shared.
        let a = snap(vec![0, 1], vec![vec![0, 0, 1], vec![1, 1, 1]]);
        let b = snap(vec![0, 1], vec![vec![0, 1, 2], vec![2, 1, 0]]);
        let draws = label_draws(ModelKind::Hhdp, vec![a, b]);
        let s = shared_clusters_summary(&draws).unwrap();
        assert_eq!(s.block_populations[0], vec![0]);
        assert_eq!(s.block_populations[1], vec![1]);
        assert_eq!(s.only_first, vec![(0, 0.5), (1, 0.5)]);
        assert_eq!(s.only_second, vec![(0, 1.0)]);
        assert_eq!(s.shared, vec![(1, 0.5), (3, 0.5)]);
    }

    #[test]
    fn shared_clusters_single_block() {
        let a = snap(vec![0, 0], vec![vec![0, 1], vec![1, 1]]);
        let draws = label_draws(ModelKind::Hhdp, vec![a]);
        let s = shared_clusters_summary(&draws).unwrap();
        assert!(s.block_populations[1].is_empty());
        assert_eq!(s.only_second, vec![(0, 1.0)]);
        assert_eq!(s.shared, vec![(0, 1.0)]);
        assert_eq!(s.only_first, vec![(2, 1.0)]);
    }

    #[test]
    fn homogeneity_frequency() {
        let a = snap(vec![0, 0], vec![vec![0], vec![0]]);
        let b = snap(vec![0, 1], vec![vec![0], vec![0]]);
        let draws = label_draws(ModelKind::Hhdp, vec![a.clone(), a, b]);
        let p = empirical_homogeneity(&draws).unwrap();
        assert!((p - 2.0 / 3.0).abs() < 1e-15);
    }
}

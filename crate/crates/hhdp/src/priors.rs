//! Closed-form prior moments of the HHDP and a forward simulator for its
//! finite-Dirichlet truncation, used to validate the moments by Monte Carlo.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::dist::{sample_categorical, sample_dirichlet, sample_dirichlet_sym};
use crate::error::{Error, Result};
use crate::peppf::HhdpParams;
use crate::rng::rng_for_stream;

/// Closed-form prior moments for a measurable set `A` with `H(A) = h`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PriorMoments {
    pub variance: f64,
    pub correlation_measures: f64,
    pub correlation_same_pop: f64,
    pub correlation_cross_pop: f64,
}

/// `Var[G_j(A)] = H(A)(1 − H(A))(β₀ + β + 1) / ((β + 1)(β₀ + 1))`.
pub fn prior_variance(h_a: f64, params: &HhdpParams) -> Result<f64> {
    if !(0.0..=1.0).contains(&h_a) {
        return Err(Error::domain(format!(
            "H(A) must lie in [0, 1], got {h_a}"
        )));
    }
    let (beta, beta0) = (params.beta(), params.beta0());
    Ok(h_a * (1.0 - h_a) * (beta0 + beta + 1.0) / ((beta + 1.0) * (beta0 + 1.0)))
}

/// `Corr[G_j(A), G_{j'}(A)] = 1 − αβ₀ / ((α + 1)(β + β₀ + 1))`.
pub fn prior_corr_measures(params: &HhdpParams) -> f64 {
    let (alpha, beta, beta0) = (params.alpha(), params.beta(), params.beta0());
    1.0 - alpha * beta0 / ((alpha + 1.0) * (beta + beta0 + 1.0))
}

/// Correlation between two observations, which equals their tie probability:
/// `(β + β₀ + 1) / ((β + 1)(β₀ + 1))` within one population, and
/// `1/(β₀ + 1) + β₀ / ((1 + α)(1 + β)(1 + β₀))` across populations.
pub fn prior_corr_observations(params: &HhdpParams, same_population: bool) -> f64 {
    let (alpha, beta, beta0) = (params.alpha(), params.beta(), params.beta0());
    if same_population {
        (beta + beta0 + 1.0) / ((beta + 1.0) * (beta0 + 1.0))
    } else {
        1.0 / (beta0 + 1.0) + beta0 / ((1.0 + alpha) * (1.0 + beta) * (1.0 + beta0))
    }
}

/// All four closed forms bundled.
pub fn prior_moments(h_a: f64, params: &HhdpParams) -> Result<PriorMoments> {
    Ok(PriorMoments {
        variance: prior_variance(h_a, params)?,
        correlation_measures: prior_corr_measures(params),
        correlation_same_pop: prior_corr_observations(params, true),
        correlation_cross_pop: prior_corr_observations(params, false),
    })
}

/// One joint draw from the finite-Dirichlet truncation of the prior:
/// `π* ~ Dir(α/K, …)`, `ω*₀ ~ Dir(β₀/L, …)`, `ω*_k | ω*₀ ~ Dir(β ω*₀)`,
/// population labels `z_j ~ Cat(π*)`, and `L` atoms from the base measure.
#[derive(Clone, Debug)]
pub struct FiniteTrajectory {
    pub pi_star: Vec<f64>,
    pub omega0: Vec<f64>,
    /// K rows, each an L-simplex with conditional mean `ω*₀`.
    pub omega: Vec<Vec<f64>>,
    pub z: Vec<usize>,
    pub atoms: Vec<f64>,
}

pub fn sample_prior_trajectory<R, H>(
    params: &HhdpParams,
    n_pops: usize,
    k: usize,
    l: usize,
    mut base_measure: H,
    rng: &mut R,
) -> Result<FiniteTrajectory>
where
    R: Rng + ?Sized,
    H: FnMut(&mut R) -> f64,
{
    if k < 2 || l < 2 {
        return Err(Error::domain(format!(
            "truncation levels must be at least 2, got K={k}, L={l}"
        )));
    }
    if n_pops == 0 {
        return Err(Error::domain("need at least one population"));
    }
    let pi_star = sample_dirichlet_sym(params.alpha() / k as f64, k, rng);
    let omega0 = sample_dirichlet_sym(params.beta0() / l as f64, l, rng);
    let shapes: Vec<f64> = omega0.iter().map(|&w| params.beta() * w).collect();
    let omega: Vec<Vec<f64>> = (0..k).map(|_| sample_dirichlet(&shapes, rng)).collect();
    let z: Vec<usize> = (0..n_pops)
        .map(|_| sample_categorical(&pi_star, rng))
        .collect();
    let atoms: Vec<f64> = (0..l).map(|_| base_measure(rng)).collect();
    Ok(FiniteTrajectory {
        pi_star,
        omega0,
        omega,
        z,
        atoms,
    })
}

/// An analytic value next to its Monte Carlo estimate and standard error.
#[derive(Clone, Copy, Debug)]
pub struct MomentEstimate {
    pub analytic: f64,
    pub estimate: f64,
    pub std_error: f64,
}

impl MomentEstimate {
    /// |estimate − analytic| in standard-error units.
    pub fn z_score(&self) -> f64 {
        (self.estimate - self.analytic) / self.std_error
    }
}

/// Monte Carlo validation of the prior moments.
#[derive(Clone, Debug)]
pub struct PriorMonteCarlo {
    pub variance: MomentEstimate,
    pub correlation_measures: MomentEstimate,
    pub tie_same_pop: MomentEstimate,
    pub tie_cross_pop: MomentEstimate,
    pub replications: usize,
}

impl PriorMonteCarlo {
    pub fn rows(&self) -> [(&'static str, &MomentEstimate); 4] {
        [
            ("variance", &self.variance),
            ("corr_measures", &self.correlation_measures),
            ("tie_same_pop", &self.tie_same_pop),
            ("tie_cross_pop", &self.tie_cross_pop),
        ]
    }

    pub fn max_abs_z(&self) -> f64 {
        self.rows()
            .iter()
            .map(|(_, m)| m.z_score().abs())
            .fold(0.0, f64::max)
    }
}

const MC_BATCHES: usize = 50;

/// Forward-simulate `reps` prior trajectories at truncation `(k, l)` and
/// compare empirical moments with the closed forms.
///
/// The base measure is a standard normal and `A` is the negative half-line,
/// so `H(A) = 1/2`. Estimates and standard errors come from batch means over
/// [`MC_BATCHES`] batches; batch `b` draws from RNG substream `b` of `seed`,
/// so the result is reproducible and independent of thread scheduling.
pub fn monte_carlo_prior_check(
    params: &HhdpParams,
    k: usize,
    l: usize,
    reps: usize,
    seed: u64,
) -> Result<PriorMonteCarlo> {
    if reps < 10 * MC_BATCHES {
        return Err(Error::domain(format!(
            "need at least {} replications, got {reps}",
            10 * MC_BATCHES
        )));
    }
    let params = *params;
    let h_a = 0.5;
    let batch_stats: Vec<BatchStats> = (0..MC_BATCHES)
        .into_par_iter()
        .map(|b| {
            let size = reps / MC_BATCHES + usize::from(b < reps % MC_BATCHES);
            run_prior_batch(&params, k, l, size, seed, b as u64)
        })
        .collect::<Result<Vec<_>>>()?;

    let pm = prior_moments(h_a, &params)?;
    let variance = batch_mean_se(&batch_stats, |s| s.variance());
    let corr = batch_mean_se(&batch_stats, |s| s.correlation());
    let tie_same = batch_mean_se(&batch_stats, |s| s.tie_same_rate());
    let tie_cross = batch_mean_se(&batch_stats, |s| s.tie_cross_rate());
    Ok(PriorMonteCarlo {
        variance: MomentEstimate {
            analytic: pm.variance,
            estimate: variance.0,
            std_error: variance.1,
        },
        correlation_measures: MomentEstimate {
            analytic: pm.correlation_measures,
            estimate: corr.0,
            std_error: corr.1,
        },
        tie_same_pop: MomentEstimate {
            analytic: pm.correlation_same_pop,
            estimate: tie_same.0,
            std_error: tie_same.1,
        },
        tie_cross_pop: MomentEstimate {
            analytic: pm.correlation_cross_pop,
            estimate: tie_cross.0,
            std_error: tie_cross.1,
        },
        replications: reps,
    })
}

struct BatchStats {
    n: f64,
    sum_g1: f64,
    sum_g2: f64,
    sum_g1g1: f64,
    sum_g2g2: f64,
    sum_g1g2: f64,
    ties_same: f64,
    ties_cross: f64,
}

impl BatchStats {
    fn variance(&self) -> f64 {
        (self.sum_g1g1 - self.sum_g1 * self.sum_g1 / self.n) / (self.n - 1.0)
    }

    fn correlation(&self) -> f64 {
        let cov = self.sum_g1g2 / self.n - (self.sum_g1 / self.n) * (self.sum_g2 / self.n);
        let v1 = self.sum_g1g1 / self.n - (self.sum_g1 / self.n).powi(2);
        let v2 = self.sum_g2g2 / self.n - (self.sum_g2 / self.n).powi(2);
        cov / (v1 * v2).sqrt()
    }

    fn tie_same_rate(&self) -> f64 {
        self.ties_same / self.n
    }

    fn tie_cross_rate(&self) -> f64 {
        self.ties_cross / self.n
    }
}

fn run_prior_batch(
    params: &HhdpParams,
    k: usize,
    l: usize,
    size: usize,
    seed: u64,
    stream: u64,
) -> Result<BatchStats> {
    let mut rng = rng_for_stream(seed, stream);
    let mut stats = BatchStats {
        n: size as f64,
        sum_g1: 0.0,
        sum_g2: 0.0,
        sum_g1g1: 0.0,
        sum_g2g2: 0.0,
        sum_g1g2: 0.0,
        ties_same: 0.0,
        ties_cross: 0.0,
    };
    for _ in 0..size {
        let t = sample_prior_trajectory(
            params,
            2,
            k,
            l,
            |r: &mut rand_chacha::ChaCha8Rng| {
                <StandardNormal as Distribution<f64>>::sample(&StandardNormal, r)
            },
            &mut rng,
        )?;
        let row1 = &t.omega[t.z[0]];
        let row2 = &t.omega[t.z[1]];
        let mut g1 = 0.0;
        let mut g2 = 0.0;
        for i in 0..l {
            if t.atoms[i] < 0.0 {
                g1 += row1[i];
                g2 += row2[i];
            }
        }
        let zeta_11 = sample_categorical(row1, &mut rng);
        let zeta_12 = sample_categorical(row1, &mut rng);
        let zeta_21 = sample_categorical(row2, &mut rng);
        stats.sum_g1 += g1;
        stats.sum_g2 += g2;
        stats.sum_g1g1 += g1 * g1;
        stats.sum_g2g2 += g2 * g2;
        stats.sum_g1g2 += g1 * g2;
        if zeta_11 == zeta_12 {
            stats.ties_same += 1.0;
        }
        if zeta_11 == zeta_21 {
            stats.ties_cross += 1.0;
        }
    }
    Ok(stats)
}

fn batch_mean_se(batches: &[BatchStats], f: impl Fn(&BatchStats) -> f64) -> (f64, f64) {
    let vals: Vec<f64> = batches.iter().map(f).collect();
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_for_seed;
    use rand_distr::{Distribution, StandardNormal};

    fn unit() -> HhdpParams {
        HhdpParams::new(1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn closed_forms() {
        assert_eq!(prior_variance(0.0, &unit()).unwrap(), 0.0);
        assert_eq!(prior_variance(1.0, &unit()).unwrap(), 0.0);
        assert!((prior_variance(0.5, &unit()).unwrap() - 0.1875).abs() < 1e-15);
        assert!(prior_variance(1.2, &unit()).is_err());

        assert!((prior_corr_measures(&unit()) - 5.0 / 6.0).abs() < 1e-15);
        let tiny_alpha = HhdpParams::new(1e-12, 1.0, 1.0).unwrap();
        assert!(prior_corr_measures(&tiny_alpha) > 1.0 - 1e-9);
        let tiny_beta0 = HhdpParams::new(1.0, 1.0, 1e-12).unwrap();
        assert!(prior_corr_measures(&tiny_beta0) > 1.0 - 1e-9);

        assert!((prior_corr_observations(&unit(), true) - 0.75).abs() < 1e-15);
        assert!((prior_corr_observations(&unit(), false) - 0.625).abs() < 1e-15);
        // α → 0⁺ brings the cross-population value up to the within value.
        let near = prior_corr_observations(&tiny_alpha, false);
        assert!((near - prior_corr_observations(&tiny_alpha, true)).abs() < 1e-9);
    }

    #[test]
    fn same_population_correlation_dominates() {
        for &(a, b, b0) in &[(1.0, 1.0, 1.0), (3.0, 1.0, 1.0), (1.0, 0.1, 3.0), (0.5, 2.0, 0.7)] {
            let p = HhdpParams::new(a, b, b0).unwrap();
            assert!(
                prior_corr_observations(&p, true) > prior_corr_observations(&p, false),
                "violated at ({a}, {b}, {b0})"
            );
        }
    }

    #[test]
    fn trajectory_weights_are_simplex_points() {
        let mut rng = rng_for_seed(3);
        let t = sample_prior_trajectory(
            &unit(),
            3,
            8,
            16,
            |r| <StandardNormal as Distribution<f64>>::sample(&StandardNormal, r),
            &mut rng,
        )
        .unwrap();
        for w in std::iter::once(&t.pi_star)
            .chain(std::iter::once(&t.omega0))
            .chain(t.omega.iter())
        {
            let sum: f64 = w.iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
        }
        assert_eq!(t.omega.len(), 8);
        assert_eq!(t.atoms.len(), 16);
        assert!(t.z.iter().all(|&z| z < 8));
        assert!(sample_prior_trajectory(&unit(), 2, 1, 4, |_| 0.0, &mut rng).is_err());
    }

    #[test]
    fn large_alpha_forces_distinct_population_labels() {
        let params = HhdpParams::new(1000.0, 1.0, 1.0).unwrap();
        let mut rng = rng_for_seed(4);
        let mut all_distinct = 0;
        for _ in 0..1000 {
            let t = sample_prior_trajectory(&params, 4, 50, 4, |_| 0.0, &mut rng).unwrap();
            let mut z = t.z.clone();
            z.sort_unstable();
            z.dedup();
            if z.len() == 4 {
                all_distinct += 1;
            }
        }
        assert!(all_distinct > 900, "distinct in {all_distinct}/1000");
    }

    #[test]
    fn monte_carlo_matches_closed_forms_small() {
        // Small-scale smoke version of the full acceptance check.
        let mc = monte_carlo_prior_check(&unit(), 64, 64, 4000, 11).unwrap();
        for (name, m) in mc.rows() {
            assert!(
                m.z_score().abs() < 4.0,
                "{name}: estimate {} vs analytic {} (z = {})",
                m.estimate,
                m.analytic,
                m.z_score()
            );
        }
    }
}

//! Normal–inverse-gamma conjugate family for Gaussian kernels.
//!
//! Parameterization: `σ² ~ InvGamma(shape, scale)` with density
//! `∝ (σ²)^{−shape−1} exp(−scale/σ²)`, and `μ | σ² ~ N(mu, σ²/lambda)`.

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::log_gamma_unchecked;

const LN_2PI: f64 = 1.837_877_066_409_345_6;

/// Parameters of a normal–inverse-gamma distribution over `(μ, σ²)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NigParams {
    /// Location of the conditional normal for μ.
    pub mu: f64,
    /// Precision multiplier: μ | σ² has variance σ²/lambda.
    pub lambda: f64,
    /// Inverse-gamma shape of σ².
    pub shape: f64,
    /// Inverse-gamma scale of σ².
    pub scale: f64,
}

impl NigParams {
    pub fn new(mu: f64, lambda: f64, shape: f64, scale: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::domain(format!("NIG location must be finite, got {mu}")));
        }
        for (name, v) in [("lambda", lambda), ("shape", shape), ("scale", scale)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::domain(format!(
                    "NIG {name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(NigParams {
            mu,
            lambda,
            shape,
            scale,
        })
    }

    /// Conjugate update for a Gaussian sample. An empty cluster returns the
    /// prior unchanged.
    pub fn posterior(&self, values: &[f64]) -> Result<NigParams> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::data("non-finite observation in NIG update"));
        }
        let n = values.len();
        if n == 0 {
            return Ok(*self);
        }
        let nf = n as f64;
        let mean = values.iter().sum::<f64>() / nf;
        let deviance: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        Ok(self.posterior_from_stats(nf, mean, deviance))
    }

    /// Update from sufficient statistics `(n, ȳ, Σ(y − ȳ)²)`.
    pub fn posterior_from_stats(&self, n: f64, mean: f64, deviance: f64) -> NigParams {
        if n == 0.0 {
            return *self;
        }
        let lambda_n = self.lambda + n;
        let mu_n = (n * mean + self.lambda * self.mu) / lambda_n;
        let shape_n = self.shape + n / 2.0;
        let shift = mean - self.mu;
        let scale_n = self.scale + 0.5 * (deviance + n * self.lambda * shift * shift / lambda_n);
        NigParams {
            mu: mu_n,
            lambda: lambda_n,
            shape: shape_n,
            scale: scale_n,
        }
    }

    /// Log marginal likelihood of a Gaussian sample under this prior,
    /// `ln ∫ Π N(yᵢ | μ, σ²) dNIG(μ, σ²)`.
    pub fn log_marginal(&self, values: &[f64]) -> Result<f64> {
        let post = self.posterior(values)?;
        let n = values.len() as f64;
        Ok(-0.5 * n * LN_2PI + 0.5 * (self.lambda.ln() - post.lambda.ln())
            + log_gamma_unchecked(post.shape)
            - log_gamma_unchecked(self.shape)
            + self.shape * self.scale.ln()
            - post.shape * post.scale.ln())
    }

    /// Log predictive density at `x`: a Student-t with `2·shape` degrees of
    /// freedom, location `mu`, and squared scale `scale (lambda+1) / (shape·lambda)`.
    pub fn log_predictive(&self, x: f64) -> f64 {
        let dof = 2.0 * self.shape;
        let scale2 = self.scale * (self.lambda + 1.0) / (self.shape * self.lambda);
        let z2 = (x - self.mu) * (x - self.mu) / scale2;
        log_gamma_unchecked(0.5 * (dof + 1.0))
            - log_gamma_unchecked(0.5 * dof)
            - 0.5 * (dof * std::f64::consts::PI * scale2).ln()
            - 0.5 * (dof + 1.0) * (z2 / dof).ln_1p()
    }

    /// Draw `(μ, σ²)` from this distribution.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        // σ² = scale / Gamma(shape, 1)
        let g: f64 = Gamma::new(self.shape, 1.0)
            .expect("validated shape")
            .sample(rng);
        let sigma2 = (self.scale / g).max(f64::MIN_POSITIVE);
        let z: f64 = StandardNormal.sample(rng);
        let mu = self.mu + z * (sigma2 / self.lambda).sqrt();
        (mu, sigma2)
    }
}

/// Gaussian log-density, used by both samplers.
pub fn log_normal_pdf(x: f64, mean: f64, var: f64) -> f64 {
    let d = x - mean;
    -0.5 * (LN_2PI + var.ln() + d * d / var)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_cluster_returns_prior() {
        let prior = NigParams::new(0.3, 1.2, 2.0, 4.0).unwrap();
        assert_eq!(prior.posterior(&[]).unwrap(), prior);
    }

    #[test]
    fn single_observation_update() {
        // Prior (0, 1, s0, S0) and one observation y.
        let prior = NigParams::new(0.0, 1.0, 1.5, 2.0).unwrap();
        let y = 3.0;
        let post = prior.posterior(&[y]).unwrap();
        assert!((post.mu - y / 2.0).abs() < 1e-14);
        assert!((post.lambda - 2.0).abs() < 1e-14);
        assert!((post.shape - 2.0).abs() < 1e-14);
        assert!((post.scale - (2.0 + y * y / 4.0)).abs() < 1e-14);
    }

    #[test]
    fn two_observation_update_hand_computed() {
        // Cluster {1, 3} with prior (0, 1, 1, 4): n = 2, mean = 2, deviance = 2.
        let prior = NigParams::new(0.0, 1.0, 1.0, 4.0).unwrap();
        let post = prior.posterior(&[1.0, 3.0]).unwrap();
        assert!((post.mu - 4.0 / 3.0).abs() < 1e-14);
        assert!((post.lambda - 3.0).abs() < 1e-14);
        assert!((post.shape - 2.0).abs() < 1e-14);
        assert!((post.scale - (4.0 + 0.5 * (2.0 + 2.0 * 4.0 / 3.0))).abs() < 1e-13);
    }

    #[test]
    fn rejects_non_finite_data_and_params() {
        let prior = NigParams::new(0.0, 1.0, 1.0, 4.0).unwrap();
        assert!(prior.posterior(&[f64::NAN]).is_err());
        assert!(NigParams::new(0.0, 0.0, 1.0, 1.0).is_err());
        assert!(NigParams::new(0.0, 1.0, -1.0, 1.0).is_err());
        assert!(NigParams::new(f64::NAN, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn marginal_is_consistent_with_predictive_chain() {
        // m(y1, y2) = m(y1) · p(y2 | y1)
        let prior = NigParams::new(0.5, 0.8, 1.5, 3.0).unwrap();
        let (y1, y2) = (1.2, -0.7);
        let joint = prior.log_marginal(&[y1, y2]).unwrap();
        let chained = prior.log_marginal(&[y1]).unwrap()
            + prior.posterior(&[y1]).unwrap().log_predictive(y2);
        assert!((joint - chained).abs() < 1e-11, "{joint} vs {chained}");
    }

    #[test]
    fn predictive_integrates_to_one() {
        // Coarse trapezoid over a wide range.
        let prior = NigParams::new(0.0, 1.0, 2.0, 2.0).unwrap();
        let (a, b, m) = (-60.0, 60.0, 60_000);
        let h = (b - a) / m as f64;
        let mut total = 0.0;
        for i in 0..=m {
            let x = a + i as f64 * h;
            let w = if i == 0 || i == m { 0.5 } else { 1.0 };
            total += w * prior.log_predictive(x).exp();
        }
        total *= h;
        assert!((total - 1.0).abs() < 1e-4, "integral {total}");
    }

    #[test]
    fn posterior_concentration() {
        use rand::SeedableRng;
        let prior = NigParams::new(0.0, 1.0, 1.0, 4.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let data: Vec<f64> = (0..100_000)
            .map(|_| {
                let z: f64 = rand_distr::Distribution::sample(&StandardNormal, &mut rng);
                5.0 + z
            })
            .collect();
        let post = prior.posterior(&data).unwrap();
        let (mu, sigma2) = post.sample(&mut rng);
        assert!((mu - 5.0).abs() < 0.05, "mu {mu}");
        assert!((sigma2 - 1.0).abs() < 0.05, "sigma2 {sigma2}");
    }
}

//! Exact log-space evaluation of the partition probability functions of
//! hierarchical and hidden hierarchical Dirichlet processes.
//!
//! The HDP quantities Φ_{D,1} and Φ_{D,R} are sums over per-cell table
//! multiplicities ℓ_{r,d} ∈ {1, …, n_{r,d}} of
//!
//! ```text
//!   β^{|ℓ|} / (β₀)_{|ℓ|} · Π_d (ℓ_{·,d} − 1)! · Π_{r,d} |s(n_{r,d}, ℓ_{r,d})|
//! ```
//!
//! with prefactor β₀^D / Π_r (β)_{I_r}. Cells couple only through the grand
//! total |ℓ|, so the sum collapses to a dynamic-programming convolution: an
//! inner convolution over rows within each dish, then an outer convolution
//! across dishes, contracted against 1/(β₀)_{|ℓ|}. Naive enumeration is
//! Π n_{r,d} terms; the convolution is O(D·n²).
//!
//! The HHDP partition probability mixes these HDP quantities over all set
//! partitions of the populations, weighted by the Ewens sampling formula.

use crate::error::{Error, Result};
use crate::partitions::{enumerate_set_partitions, ewens_log_prob, GroupedCounts};
use crate::special::{
    log_add_exp, log_gamma_unchecked, log_pochhammer, log_sum_exp_unchecked, stirling_row,
    LogValue,
};

/// Concentration parameters of the underlying HDP layer: `beta` for the
/// population-level processes, `beta0` for the shared base process.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HdpParams {
    beta: f64,
    beta0: f64,
}

impl HdpParams {
    pub fn new(beta: f64, beta0: f64) -> Result<Self> {
        for (name, v) in [("beta", beta), ("beta0", beta0)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::domain(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(HdpParams { beta, beta0 })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn beta0(&self) -> f64 {
        self.beta0
    }
}

/// Full HHDP concentration triple: `alpha` for the distributional layer on
/// top of an [`HdpParams`] pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HhdpParams {
    alpha: f64,
    hdp: HdpParams,
}

impl HhdpParams {
    pub fn new(alpha: f64, beta: f64, beta0: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::domain(format!(
                "alpha must be positive and finite, got {alpha}"
            )));
        }
        Ok(HhdpParams {
            alpha,
            hdp: HdpParams::new(beta, beta0)?,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn hdp(&self) -> &HdpParams {
        &self.hdp
    }

    pub fn beta(&self) -> f64 {
        self.hdp.beta
    }

    pub fn beta0(&self) -> f64 {
        self.hdp.beta0
    }
}

/// Log EPPF of a single-sample HDP, `ln Φ_{D,1}(n*)`.
///
/// `col_counts` are the per-dish frequencies, all positive.
pub fn hdp_log_eppf_single(col_counts: &[u64], params: &HdpParams) -> Result<LogValue> {
    if col_counts.is_empty() {
        return Err(Error::domain("hdp_log_eppf_single needs at least one dish"));
    }
    if col_counts.iter().any(|&v| v == 0) {
        return Err(Error::domain(
            "hdp_log_eppf_single requires every dish count to be positive",
        ));
    }
    let counts = GroupedCounts::new(vec![col_counts.to_vec()])?;
    hdp_log_peppf_multi(&counts, params)
}

/// Log pEPPF of an R-sample HDP, `ln Φ_{D,R}(n*_1, …, n*_R)`.
///
/// Zero cells contribute the multiplicative identity (their ℓ is pinned to
/// zero); each column must be positive somewhere, which the
/// [`GroupedCounts`] invariant guarantees.
pub fn hdp_log_peppf_multi(counts: &GroupedCounts, params: &HdpParams) -> Result<LogValue> {
    let ln_beta = params.beta.ln();
    let n_dishes = counts.n_dishes();

    // Outer convolution over dishes of the per-dish weight as a function of
    // the dish's table total t_d; `outer[s]` holds the log-weight of grand
    // total s + offset.
    let mut outer: Vec<f64> = vec![0.0];
    let mut outer_offset = 0u64;
    for d in 0..n_dishes {
        let (dish, dish_offset) = dish_weights(counts, d, ln_beta)?;
        let mut next =
            vec![f64::NEG_INFINITY; outer.len() + dish.len() - 1];
        for (i, &a) in outer.iter().enumerate() {
            if a == f64::NEG_INFINITY {
                continue;
            }
            for (j, &b) in dish.iter().enumerate() {
                if b == f64::NEG_INFINITY {
                    continue;
                }
                next[i + j] = log_add_exp(next[i + j], a + b);
            }
        }
        outer = next;
        outer_offset += dish_offset;
    }

    // Contract against the global coupling 1/(β₀)_{|ℓ|}.
    let mut terms = Vec::with_capacity(outer.len());
    for (s, &w) in outer.iter().enumerate() {
        if w == f64::NEG_INFINITY {
            continue;
        }
        let total = outer_offset + s as u64;
        terms.push(w - log_pochhammer(params.beta0, total)?);
    }
    let mut log_phi = log_sum_exp_unchecked(&terms);

    // Prefactor β₀^D / Π_r (β)_{I_r}.
    log_phi += n_dishes as f64 * params.beta0.ln();
    for &row_total in counts.row_totals() {
        log_phi -= log_pochhammer(params.beta, row_total)?;
    }
    Ok(LogValue(log_phi))
}

/// Per-dish log-weights over the dish's table total.
///
/// Returns `(weights, offset)`: `weights[i]` is the log-weight of total
/// `offset + i`, and incorporates β^t and (t − 1)! for this dish along with
/// the inner convolution of per-row Stirling factors.
fn dish_weights(counts: &GroupedCounts, dish: usize, ln_beta: f64) -> Result<(Vec<f64>, u64)> {
    // Inner convolution across rows of [ln|s(n, 1)|, …, ln|s(n, n)|]; rows
    // with a zero cell are skipped (ℓ fixed at zero, factor one).
    let mut inner: Vec<f64> = vec![0.0];
    let mut offset = 0u64; // number of nonzero cells so far (each forces ℓ ≥ 1)
    for r in 0..counts.n_rows() {
        let n = counts.row(r)[dish];
        if n == 0 {
            continue;
        }
        let row = stirling_row(n as usize)?;
        let mut next = vec![f64::NEG_INFINITY; inner.len() + row.len() - 1];
        for (i, &a) in inner.iter().enumerate() {
            if a == f64::NEG_INFINITY {
                continue;
            }
            for (j, &b) in row.iter().enumerate() {
                next[i + j] = log_add_exp(next[i + j], a + b);
            }
        }
        inner = next;
        offset += 1;
    }
    if offset == 0 {
        return Err(Error::domain(format!(
            "dish {dish} has no observations in any row"
        )));
    }
    // Weight in the dish total t = offset + i: add t·ln β + ln (t−1)!.
    for (i, w) in inner.iter_mut().enumerate() {
        if *w == f64::NEG_INFINITY {
            continue;
        }
        let t = offset + i as u64;
        *w += t as f64 * ln_beta + log_gamma_unchecked(t as f64);
    }
    Ok((inner, offset))
}

/// Log pEPPF of the HHDP: the Ewens-weighted mixture over all set partitions
/// of the populations of the HDP pEPPF of the merged counts.
///
/// Population counts `J` beyond the enumeration cap are refused; use the
/// samplers for larger studies.
pub fn hhdp_log_peppf(counts: &GroupedCounts, params: &HhdpParams) -> Result<LogValue> {
    let partitions = enumerate_set_partitions(counts.n_rows())?;
    let mut terms = Vec::with_capacity(partitions.len());
    for p in &partitions {
        let merged = counts.merge(p)?;
        let log_phi = hdp_log_peppf_multi(&merged, &params.hdp)?;
        terms.push(ewens_log_prob(p, params.alpha)? + log_phi.value());
    }
    Ok(LogValue(log_sum_exp_unchecked(&terms)))
}

/// Posterior probability that two populations share one distribution:
///
/// ```text
///   P(G₁ = G₂ | X) = Φ_{D,1}(n₁ + n₂) / [Φ_{D,1}(n₁ + n₂) + α Φ_{D,2}(n₁, n₂)]
/// ```
///
/// computed stably from the two log quantities.
pub fn posterior_degeneracy_prob(counts: &GroupedCounts, params: &HhdpParams) -> Result<f64> {
    if counts.n_rows() != 2 {
        return Err(Error::shape(format!(
            "posterior degeneracy is defined for exactly two populations, got {}",
            counts.n_rows()
        )));
    }
    let pooled: Vec<u64> = counts.col_totals().to_vec();
    let log_phi1 = hdp_log_eppf_single(&pooled, &params.hdp)?.value();
    let log_phi2 = hdp_log_peppf_multi(counts, &params.hdp)?.value();
    // 1 / (1 + exp(t)) with t = ln α + Φ₂ − Φ₁.
    let t = params.alpha.ln() + log_phi2 - log_phi1;
    let p = if t <= 0.0 {
        1.0 / (1.0 + t.exp())
    } else {
        let e = (-t).exp();
        e / (1.0 + e)
    };
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_params() -> HdpParams {
        HdpParams::new(1.0, 1.0).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(HdpParams::new(0.0, 1.0).is_err());
        assert!(HdpParams::new(1.0, -2.0).is_err());
        assert!(HhdpParams::new(f64::NAN, 1.0, 1.0).is_err());
        assert!(HhdpParams::new(1.0, 1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn single_sample_examples() {
        // A lone observation has partition probability one.
        let p = hdp_log_eppf_single(&[1], &HdpParams::new(0.7, 2.3).unwrap()).unwrap();
        assert!(p.value().abs() < 1e-12);
        // Two observations, one dish: the within-sample tie probability
        // (β + β₀ + 1) / ((β + 1)(β₀ + 1)) = 3/4 at β = β₀ = 1.
        let p = hdp_log_eppf_single(&[2], &unit_params()).unwrap();
        assert!((p.value() - 0.75f64.ln()).abs() < 1e-12);
        // Two observations, two dishes: the complement, 1/4.
        let p = hdp_log_eppf_single(&[1, 1], &unit_params()).unwrap();
        assert!((p.value() - 0.25f64.ln()).abs() < 1e-12);
        // Errors.
        assert!(hdp_log_eppf_single(&[], &unit_params()).is_err());
        assert!(hdp_log_eppf_single(&[1, 0], &unit_params()).is_err());
    }

    #[test]
    fn multi_sample_examples() {
        // One shared dish across two populations: 1/(β₀ + 1) = 1/2.
        let shared = GroupedCounts::new(vec![vec![1], vec![1]]).unwrap();
        let p = hdp_log_peppf_multi(&shared, &unit_params()).unwrap();
        assert!((p.value() - 0.5f64.ln()).abs() < 1e-12);
        // Separate dishes: the complement, 1/2 at β₀ = 1.
        let separate = GroupedCounts::new(vec![vec![1, 0], vec![0, 1]]).unwrap();
        let p = hdp_log_peppf_multi(&separate, &unit_params()).unwrap();
        assert!((p.value() - 0.5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn multi_with_one_row_matches_single() {
        let params = HdpParams::new(1.7, 0.4).unwrap();
        for cols in [vec![3u64], vec![2, 1], vec![1, 2, 4]] {
            let single = hdp_log_eppf_single(&cols, &params).unwrap();
            let multi =
                hdp_log_peppf_multi(&GroupedCounts::new(vec![cols.clone()]).unwrap(), &params)
                    .unwrap();
            assert!((single.value() - multi.value()).abs() < 1e-12);
        }
    }

    #[test]
    fn hhdp_examples() {
        let params = HhdpParams::new(1.0, 1.0, 1.0).unwrap();
        // J = 1 with a single observation.
        let c = GroupedCounts::new(vec![vec![1]]).unwrap();
        assert!(hhdp_log_peppf(&c, &params).unwrap().value().abs() < 1e-12);
        // J = 2 single shared dish: (1/2)(3/4) + (1/2)(1/2) = 5/8, which also
        // equals the cross-population tie probability of the prior.
        let c = GroupedCounts::new(vec![vec![1], vec![1]]).unwrap();
        let p = hhdp_log_peppf(&c, &params).unwrap();
        assert!((p.value() - 0.625f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn hhdp_row_and_column_symmetry() {
        let params = HhdpParams::new(1.3, 0.8, 2.1).unwrap();
        let a = GroupedCounts::new(vec![vec![2, 1, 0], vec![0, 1, 3]]).unwrap();
        let swapped_rows = GroupedCounts::new(vec![vec![0, 1, 3], vec![2, 1, 0]]).unwrap();
        let swapped_cols = GroupedCounts::new(vec![vec![0, 1, 2], vec![3, 1, 0]]).unwrap();
        let base = hhdp_log_peppf(&a, &params).unwrap().value();
        assert!((base - hhdp_log_peppf(&swapped_rows, &params).unwrap().value()).abs() < 1e-11);
        assert!((base - hhdp_log_peppf(&swapped_cols, &params).unwrap().value()).abs() < 1e-11);
    }

    #[test]
    fn degeneracy_examples() {
        let params = HhdpParams::new(1.0, 1.0, 1.0).unwrap();
        let shared = GroupedCounts::new(vec![vec![1], vec![1]]).unwrap();
        let p = posterior_degeneracy_prob(&shared, &params).unwrap();
        assert!((p - 0.6).abs() < 1e-12);
        let separate = GroupedCounts::new(vec![vec![1, 0], vec![0, 1]]).unwrap();
        let p = posterior_degeneracy_prob(&separate, &params).unwrap();
        assert!((p - 1.0 / 3.0).abs() < 1e-12);
        // Shape guard.
        let three = GroupedCounts::new(vec![vec![1], vec![1], vec![1]]).unwrap();
        assert!(posterior_degeneracy_prob(&three, &params).is_err());
    }

    #[test]
    fn degeneracy_alpha_limits_and_monotonicity() {
        let shared = GroupedCounts::new(vec![vec![1], vec![1]]).unwrap();
        // α → 0⁺ forces degeneracy.
        let p = posterior_degeneracy_prob(&shared, &HhdpParams::new(1e-12, 1.0, 1.0).unwrap())
            .unwrap();
        assert!(p > 1.0 - 1e-9);
        // Strictly decreasing in α, and strictly below one for α > 0 even
        // though the dish is shared (the anti-degeneracy property).
        let mut last = 1.0;
        for &alpha in &[0.01, 0.1, 0.5, 1.0, 2.0, 10.0, 100.0] {
            let p = posterior_degeneracy_prob(
                &shared,
                &HhdpParams::new(alpha, 1.0, 1.0).unwrap(),
            )
            .unwrap();
            assert!(p < last, "not decreasing at alpha={alpha}");
            assert!(p < 1.0);
            assert!(p > 0.0);
            last = p;
        }
    }
}

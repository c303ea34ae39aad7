//! Internal sampling helpers shared by the prior simulator and the samplers.

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};

/// Weights that underflow to zero are raised to this floor and the vector is
/// renormalized, so downstream logs stay finite.
pub(crate) const WEIGHT_FLOOR: f64 = 1e-300;

/// Gamma(shape, 1) draw. Shapes below 1e-14 underflow to zero with
/// probability 1 − O(1e-9), so they are short-circuited.
pub(crate) fn sample_gamma<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    if shape < 1e-14 {
        return 0.0;
    }
    Gamma::new(shape, 1.0).expect("positive gamma shape").sample(rng)
}

pub(crate) fn normalize_with_floor(w: &mut [f64]) {
    let sum: f64 = w.iter().sum();
    if sum > 0.0 && sum.is_finite() {
        for v in w.iter_mut() {
            *v /= sum;
        }
    }
    let mut floored = sum <= 0.0 || !sum.is_finite();
    for v in w.iter_mut() {
        if !(*v >= WEIGHT_FLOOR) {
            *v = WEIGHT_FLOOR;
            floored = true;
        }
    }
    if floored {
        let s: f64 = w.iter().sum();
        for v in w.iter_mut() {
            *v /= s;
        }
    }
}

/// Dirichlet draw with per-coordinate shapes.
pub(crate) fn sample_dirichlet<R: Rng + ?Sized>(shapes: &[f64], rng: &mut R) -> Vec<f64> {
    let mut w: Vec<f64> = shapes.iter().map(|&a| sample_gamma(a, rng)).collect();
    normalize_with_floor(&mut w);
    w
}

/// Symmetric Dirichlet draw.
pub(crate) fn sample_dirichlet_sym<R: Rng + ?Sized>(
    shape: f64,
    len: usize,
    rng: &mut R,
) -> Vec<f64> {
    let mut w: Vec<f64> = (0..len).map(|_| sample_gamma(shape, rng)).collect();
    normalize_with_floor(&mut w);
    w
}

/// Categorical draw from linear weights with a positive, finite sum.
pub(crate) fn sample_categorical<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let u: f64 = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if u <= acc {
            return i;
        }
    }
    weights.len() - 1
}

/// Categorical draw from unnormalized log-weights, stabilized by a max
/// shift. Errors only when every candidate has zero probability.
pub(crate) fn sample_categorical_log<R: Rng + ?Sized>(
    log_weights: &[f64],
    rng: &mut R,
    scratch: &mut Vec<f64>,
) -> Result<usize> {
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(Error::numerical(
            "all candidates have zero probability in a categorical draw",
        ));
    }
    if max.is_nan() {
        return Err(Error::numerical("NaN log-weight in a categorical draw"));
    }
    scratch.clear();
    scratch.extend(log_weights.iter().map(|&lw| (lw - max).exp()));
    Ok(sample_categorical(scratch, rng))
}

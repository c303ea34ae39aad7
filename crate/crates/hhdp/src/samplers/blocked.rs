//! Blocked conditional Gibbs sampler for HHDP (and nested-DP baseline)
//! Gaussian mixtures under finite Dirichlet approximations.
//!
//! One sweep updates, in order: the unique atoms from their conjugate
//! normal–inverse-gamma conditionals, the distributional weights π*, the
//! base weights ω*₀ by component-wise adaptive random-walk Metropolis on the
//! log-ratio transform (HHDP only), the per-component observational weights
//! ω*_k, and finally the memberships (z_j with ζ_j marginalized, then ζ).
//!
//! In NDP mode there is no shared base process: weight rows get independent
//! symmetric Dirichlet conditionals and atoms live per (component, slot)
//! pair, so distinct distributional components cannot share observational
//! clusters — the behavior the baseline is meant to exhibit.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dist::{normalize_with_floor, sample_categorical_log, sample_dirichlet, sample_dirichlet_sym};
use crate::error::{Error, Result};
use crate::inference::{DrawSnapshot, DrawsMeta, ModelKind, PosteriorDraws, SamplerKind};
use crate::nig::{log_normal_pdf, NigParams};
use crate::peppf::HhdpParams;
use crate::rng::rng_for_stream;
use crate::samplers::{GibbsConfig, GroupedData};
use crate::special::log_gamma_unchecked;

/// Metropolis adaptation batch length, in sweeps.
const MH_BATCH: u32 = 50;
/// Target per-coordinate acceptance rate.
const MH_TARGET_ACCEPT: f64 = 0.44;
/// Initial random-walk standard deviation.
const MH_INITIAL_STEP: f64 = 0.5;

/// Component-wise adaptive random-walk state for the ω*₀ update.
#[derive(Clone, Debug)]
pub struct AdaptiveMh {
    log_step: Vec<f64>,
    accepts: Vec<u32>,
    sweeps_in_batch: u32,
    batches_done: u64,
}

impl AdaptiveMh {
    fn new(dim: usize) -> Self {
        AdaptiveMh {
            log_step: vec![MH_INITIAL_STEP.ln(); dim],
            accepts: vec![0; dim],
            sweeps_in_batch: 0,
            batches_done: 0,
        }
    }

    pub fn log_steps(&self) -> &[f64] {
        &self.log_step
    }

    /// One sweep over the unconstrained coordinates
    /// `v_l = ln(ω_l / ω_L)`, `l = 1..L−1`, against the log target
    /// `Σ_l [(β₀/L) ln ω_l + β ω_l ln ξ_l − K ln Γ(β ω_l)]`
    /// (the Dirichlet exponent −1 cancels against the transform Jacobian).
    /// Returns the per-sweep acceptance count.
    fn sweep<R: Rng + ?Sized>(
        &mut self,
        omega0: &mut [f64],
        beta0_over_l: f64,
        beta: f64,
        k_rows: f64,
        ln_xi: &[f64],
        rng: &mut R,
    ) -> Result<u32> {
        let dim = self.log_step.len();
        if dim == 0 {
            self.finish_sweep();
            return Ok(0);
        }
        let l = omega0.len();
        let mut v: Vec<f64> = (0..l - 1)
            .map(|i| omega0[i].ln() - omega0[l - 1].ln())
            .collect();
        let mut current = mh_log_target(omega0, beta0_over_l, beta, k_rows, ln_xi);
        if !current.is_finite() {
            return Err(Error::numerical(format!(
                "base-weight target is {current} at the current state"
            )));
        }
        let mut proposal = vec![0.0f64; l];
        let mut accepted = 0u32;
        for c in 0..dim {
            let old_vc = v[c];
            let step: f64 = self.log_step[c].exp();
            let jump: f64 = StandardNormal.sample(rng);
            v[c] = old_vc + step * jump;
            softmax_into(&v, &mut proposal);
            let cand = mh_log_target(&proposal, beta0_over_l, beta, k_rows, ln_xi);
            let accept = cand.is_finite() && {
                let diff = cand - current;
                diff >= 0.0 || rng.gen::<f64>().ln() < diff
            };
            if accept {
                omega0.copy_from_slice(&proposal);
                current = cand;
                self.accepts[c] += 1;
                accepted += 1;
            } else {
                v[c] = old_vc;
            }
        }
        self.finish_sweep();
        Ok(accepted)
    }

    /// Diminishing adaptation from Roberts–Rosenthal: at the end of batch
    /// `b` (1-based) of [`MH_BATCH`] sweeps, nudge each log step size by
    /// `±min(0.01, b^{−1/2})` toward the target acceptance rate.
    fn finish_sweep(&mut self) {
        self.sweeps_in_batch += 1;
        if self.sweeps_in_batch < MH_BATCH {
            return;
        }
        self.batches_done += 1;
        let delta = 0.01f64.min(1.0 / (self.batches_done as f64).sqrt());
        let total = self.sweeps_in_batch as f64;
        for (step, acc) in self.log_step.iter_mut().zip(self.accepts.iter_mut()) {
            let rate = *acc as f64 / total;
            if rate > MH_TARGET_ACCEPT {
                *step += delta;
            } else if rate < MH_TARGET_ACCEPT {
                *step -= delta;
            }
            *acc = 0;
        }
        self.sweeps_in_batch = 0;
    }
}

fn mh_log_target(omega0: &[f64], beta0_over_l: f64, beta: f64, k_rows: f64, ln_xi: &[f64]) -> f64 {
    let mut t = 0.0;
    for (l, &w) in omega0.iter().enumerate() {
        t += beta0_over_l * w.ln() + beta * w * ln_xi[l];
        if k_rows > 0.0 {
            t -= k_rows * log_gamma_unchecked(beta * w);
        }
    }
    t
}

/// Softmax of `[v, 0]` with a floor keeping every weight positive.
fn softmax_into(v: &[f64], out: &mut [f64]) {
    let max = v.iter().copied().fold(0.0f64, f64::max);
    let mut sum = 0.0;
    for i in 0..v.len() {
        let e = (v[i] - max).exp();
        out[i] = e;
        sum += e;
    }
    let last = (-max).exp();
    out[v.len()] = last;
    sum += last;
    for w in out.iter_mut() {
        *w /= sum;
    }
    normalize_with_floor(out);
}

/// The blocked Gibbs sampler over one chain.
pub struct BlockedSampler {
    data: GroupedData,
    params: HhdpParams,
    nig: NigParams,
    cfg: GibbsConfig,
    pooled: Vec<f64>,
    pop_of: Vec<usize>,
    offsets: Vec<usize>,
    // Latent state.
    atom_mean: Vec<f64>,
    atom_var: Vec<f64>,
    pi: Vec<f64>,
    omega0: Vec<f64>,
    omega: Vec<f64>, // K × L, row-major
    z: Vec<usize>,
    zeta: Vec<usize>, // pooled order
    mh: AdaptiveMh,
    rng: ChaCha8Rng,
    sweeps_done: usize,
    last_mh_accepts: u32,
    // Scratch buffers.
    log_omega: Vec<f64>,
    obs_loglik: Vec<f64>,
    ln_xi: Vec<f64>,
    stats_n: Vec<f64>,
    stats_sum: Vec<f64>,
    stats_ss: Vec<f64>,
    cat_scratch: Vec<f64>,
    weight_scratch: Vec<f64>,
}

impl BlockedSampler {
    pub fn new(
        data: &GroupedData,
        params: &HhdpParams,
        nig: &NigParams,
        cfg: &GibbsConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        let (k, l) = (cfg.k, cfg.l);
        let pooled: Vec<f64> = data.iter_pooled().collect();
        let mut pop_of = Vec::with_capacity(pooled.len());
        let mut offsets = Vec::with_capacity(data.n_pops());
        for (j, pop) in data.populations().iter().enumerate() {
            offsets.push(pop_of.len());
            pop_of.extend(std::iter::repeat(j).take(pop.len()));
        }
        let n_atom_cells = match cfg.model {
            ModelKind::Hhdp => l,
            ModelKind::Ndp => k * l,
        };
        let mut rng = rng_for_stream(cfg.seed, cfg.chain as u64);

        // Memberships: z uniform, ζ by an equal-count quantile binning of the
        // pooled data into min(L, 10) bins.
        let z: Vec<usize> = (0..data.n_pops()).map(|_| rng.gen_range(0..k)).collect();
        let zeta = quantile_bins(&pooled, l.min(10));

        // Weights and atoms start at prior draws.
        let pi = sample_dirichlet_sym(params.alpha() / k as f64, k, &mut rng);
        let (omega0, omega) = match cfg.model {
            ModelKind::Hhdp => {
                let omega0 = sample_dirichlet_sym(params.beta0() / l as f64, l, &mut rng);
                let shapes: Vec<f64> = omega0.iter().map(|&w| params.beta() * w).collect();
                let mut omega = Vec::with_capacity(k * l);
                for _ in 0..k {
                    omega.extend(sample_dirichlet(&shapes, &mut rng));
                }
                (omega0, omega)
            }
            ModelKind::Ndp => {
                let mut omega = Vec::with_capacity(k * l);
                for _ in 0..k {
                    omega.extend(sample_dirichlet_sym(params.beta() / l as f64, l, &mut rng));
                }
                (Vec::new(), omega)
            }
        };
        let mut atom_mean = Vec::with_capacity(n_atom_cells);
        let mut atom_var = Vec::with_capacity(n_atom_cells);
        for _ in 0..n_atom_cells {
            let (m, v) = nig.sample(&mut rng);
            atom_mean.push(m);
            atom_var.push(v);
        }

        let n = pooled.len();
        Ok(BlockedSampler {
            data: data.clone(),
            params: *params,
            nig: *nig,
            cfg: *cfg,
            pooled,
            pop_of,
            offsets,
            atom_mean,
            atom_var,
            pi,
            omega0,
            omega,
            z,
            zeta,
            mh: AdaptiveMh::new(l.saturating_sub(1)),
            rng,
            sweeps_done: 0,
            last_mh_accepts: 0,
            log_omega: vec![0.0; k * l],
            obs_loglik: vec![0.0; n * l],
            ln_xi: vec![0.0; l],
            stats_n: vec![0.0; n_atom_cells],
            stats_sum: vec![0.0; n_atom_cells],
            stats_ss: vec![0.0; n_atom_cells],
            cat_scratch: Vec::with_capacity(k.max(l)),
            weight_scratch: Vec::with_capacity(k.max(l)),
        })
    }

    fn atom_cell(&self, k: usize, l: usize) -> usize {
        match self.cfg.model {
            ModelKind::Hhdp => l,
            ModelKind::Ndp => k * self.cfg.l + l,
        }
    }

    /// Step 1: redraw every atom from its conjugate conditional; unoccupied
    /// atoms are refreshed from the prior.
    pub fn step_atoms(&mut self) {
        self.stats_n.iter_mut().for_each(|v| *v = 0.0);
        self.stats_sum.iter_mut().for_each(|v| *v = 0.0);
        self.stats_ss.iter_mut().for_each(|v| *v = 0.0);
        for (idx, &x) in self.pooled.iter().enumerate() {
            let cell = self.atom_cell(self.z[self.pop_of[idx]], self.zeta[idx]);
            self.stats_n[cell] += 1.0;
            self.stats_sum[cell] += x;
            self.stats_ss[cell] += x * x;
        }
        for cell in 0..self.stats_n.len() {
            let n = self.stats_n[cell];
            let (mean, var) = if n > 0.0 {
                let m = self.stats_sum[cell] / n;
                let dev = (self.stats_ss[cell] - n * m * m).max(0.0);
                self.nig.posterior_from_stats(n, m, dev).sample(&mut self.rng)
            } else {
                self.nig.sample(&mut self.rng)
            };
            self.atom_mean[cell] = mean;
            self.atom_var[cell] = var;
        }
    }

    /// Step 2: π* ~ Dir(α/K + m₁, …, α/K + m_K).
    pub fn step_distributional_weights(&mut self) {
        let base = self.params.alpha() / self.cfg.k as f64;
        let mut shapes = vec![base; self.cfg.k];
        for &zj in &self.z {
            shapes[zj] += 1.0;
        }
        self.pi = sample_dirichlet(&shapes, &mut self.rng);
    }

    /// Step 3 (HHDP only): adaptive Metropolis sweep for ω*₀.
    pub fn step_base_weights_mh(&mut self) -> Result<()> {
        if self.cfg.model != ModelKind::Hhdp {
            return Ok(());
        }
        let (k, l) = (self.cfg.k, self.cfg.l);
        for li in 0..l {
            let mut s = 0.0;
            for ki in 0..k {
                s += self.omega[ki * l + li].ln();
            }
            self.ln_xi[li] = s;
        }
        let ln_xi = std::mem::take(&mut self.ln_xi);
        let accepted = self.mh.sweep(
            &mut self.omega0,
            self.params.beta0() / l as f64,
            self.params.beta(),
            k as f64,
            &ln_xi,
            &mut self.rng,
        )?;
        self.ln_xi = ln_xi;
        self.last_mh_accepts = accepted;
        Ok(())
    }

    /// Step 4: each ω*_k independently from its Dirichlet conditional.
    pub fn step_obs_weights(&mut self) {
        let (k, l) = (self.cfg.k, self.cfg.l);
        let mut shapes = vec![0.0f64; k * l];
        match self.cfg.model {
            ModelKind::Hhdp => {
                for ki in 0..k {
                    for li in 0..l {
                        shapes[ki * l + li] = self.params.beta() * self.omega0[li];
                    }
                }
            }
            ModelKind::Ndp => {
                let base = self.params.beta() / l as f64;
                shapes.iter_mut().for_each(|s| *s = base);
            }
        }
        for (idx, &zeta) in self.zeta.iter().enumerate() {
            let zj = self.z[self.pop_of[idx]];
            shapes[zj * l + zeta] += 1.0;
        }
        for ki in 0..k {
            let row = sample_dirichlet(&shapes[ki * l..(ki + 1) * l], &mut self.rng);
            self.omega[ki * l..(ki + 1) * l].copy_from_slice(&row);
        }
    }

    /// Step 5: z_j with ζ_j marginalized out, then ζ_{j,i} given z_j.
    pub fn step_memberships(&mut self) -> Result<()> {
        let (k, l) = (self.cfg.k, self.cfg.l);
        for (i, &w) in self.omega.iter().enumerate() {
            self.log_omega[i] = w.ln();
        }
        match self.cfg.model {
            ModelKind::Hhdp => {
                // Atom log-likelihoods do not depend on k: one n×L table.
                for (idx, &x) in self.pooled.iter().enumerate() {
                    for li in 0..l {
                        self.obs_loglik[idx * l + li] =
                            log_normal_pdf(x, self.atom_mean[li], self.atom_var[li]);
                    }
                }
                for j in 0..self.data.n_pops() {
                    let lo = self.offsets[j];
                    let hi = lo + self.data.pop(j).len();
                    self.cat_scratch.clear();
                    for ki in 0..k {
                        let mut s = self.pi[ki].ln();
                        for idx in lo..hi {
                            s += lse_pair(
                                &self.log_omega[ki * l..(ki + 1) * l],
                                &self.obs_loglik[idx * l..(idx + 1) * l],
                            );
                        }
                        self.cat_scratch.push(s);
                    }
                    let scores = std::mem::take(&mut self.cat_scratch);
                    let zj =
                        sample_categorical_log(&scores, &mut self.rng, &mut self.weight_scratch)?;
                    self.cat_scratch = scores;
                    self.z[j] = zj;
                    for idx in lo..hi {
                        self.cat_scratch.clear();
                        for li in 0..l {
                            self.cat_scratch.push(
                                self.log_omega[zj * l + li] + self.obs_loglik[idx * l + li],
                            );
                        }
                        let scores = std::mem::take(&mut self.cat_scratch);
                        self.zeta[idx] = sample_categorical_log(
                            &scores,
                            &mut self.rng,
                            &mut self.weight_scratch,
                        )?;
                        self.cat_scratch = scores;
                    }
                }
            }
            ModelKind::Ndp => {
                // Atoms are per (k, slot): likelihood tables are built per
                // candidate component.
                for j in 0..self.data.n_pops() {
                    let lo = self.offsets[j];
                    let hi = lo + self.data.pop(j).len();
                    self.cat_scratch.clear();
                    for ki in 0..k {
                        let mut s = self.pi[ki].ln();
                        for idx in lo..hi {
                            let x = self.pooled[idx];
                            let mut best = f64::NEG_INFINITY;
                            let mut terms_sum = 0.0;
                            // Manual log-sum-exp over slots of this component.
                            for li in 0..l {
                                let cell = ki * l + li;
                                let t = self.log_omega[cell]
                                    + log_normal_pdf(x, self.atom_mean[cell], self.atom_var[cell]);
                                if t > best {
                                    terms_sum = terms_sum * (best - t).exp() + 1.0;
                                    best = t;
                                } else {
                                    terms_sum += (t - best).exp();
                                }
                            }
                            s += best + terms_sum.ln();
                        }
                        self.cat_scratch.push(s);
                    }
                    let scores = std::mem::take(&mut self.cat_scratch);
                    let zj =
                        sample_categorical_log(&scores, &mut self.rng, &mut self.weight_scratch)?;
                    self.cat_scratch = scores;
                    self.z[j] = zj;
                    for idx in lo..hi {
                        let x = self.pooled[idx];
                        self.cat_scratch.clear();
                        for li in 0..l {
                            let cell = zj * l + li;
                            self.cat_scratch.push(
                                self.log_omega[cell]
                                    + log_normal_pdf(x, self.atom_mean[cell], self.atom_var[cell]),
                            );
                        }
                        let scores = std::mem::take(&mut self.cat_scratch);
                        self.zeta[idx] = sample_categorical_log(
                            &scores,
                            &mut self.rng,
                            &mut self.weight_scratch,
                        )?;
                        self.cat_scratch = scores;
                    }
                }
            }
        }
        Ok(())
    }

    /// One full Gibbs sweep.
    pub fn sweep(&mut self) -> Result<()> {
        self.step_atoms();
        self.step_distributional_weights();
        self.step_base_weights_mh()?;
        self.step_obs_weights();
        self.step_memberships()?;
        self.sweeps_done += 1;
        self.check_state()
    }

    /// Abort with a diagnostic rather than silently propagating NaNs.
    fn check_state(&self) -> Result<()> {
        let bad = |name: &str, xs: &[f64]| -> Result<()> {
            if xs.iter().any(|v| v.is_nan()) {
                Err(Error::numerical(format!(
                    "NaN in {name} after sweep {} (seed {}, chain {})",
                    self.sweeps_done, self.cfg.seed, self.cfg.chain
                )))
            } else {
                Ok(())
            }
        };
        bad("pi", &self.pi)?;
        bad("omega0", &self.omega0)?;
        bad("omega", &self.omega)?;
        bad("atom means", &self.atom_mean)?;
        bad("atom variances", &self.atom_var)?;
        Ok(())
    }

    pub fn snapshot(&self) -> DrawSnapshot {
        let l = self.cfg.l;
        let n_pops = self.data.n_pops();
        let mut zeta = Vec::with_capacity(n_pops);
        let mut weights = Vec::with_capacity(n_pops);
        let mut atom_means = Vec::with_capacity(n_pops);
        let mut atom_vars = Vec::with_capacity(n_pops);
        for j in 0..n_pops {
            let lo = self.offsets[j];
            let hi = lo + self.data.pop(j).len();
            zeta.push(self.zeta[lo..hi].iter().map(|&v| v as u32).collect());
            let zj = self.z[j];
            weights.push(self.omega[zj * l..(zj + 1) * l].to_vec());
            match self.cfg.model {
                ModelKind::Hhdp => {
                    atom_means.push(self.atom_mean.clone());
                    atom_vars.push(self.atom_var.clone());
                }
                ModelKind::Ndp => {
                    atom_means.push(self.atom_mean[zj * l..(zj + 1) * l].to_vec());
                    atom_vars.push(self.atom_var[zj * l..(zj + 1) * l].to_vec());
                }
            }
        }
        DrawSnapshot {
            iter: self.sweeps_done as u64,
            chain: self.cfg.chain as u32,
            z: self.z.iter().map(|&v| v as u32).collect(),
            zeta,
            pi_star: self.pi.clone(),
            omega0: self.omega0.clone(),
            weights,
            atom_means,
            atom_vars,
        }
    }

    pub fn meta(&self) -> DrawsMeta {
        DrawsMeta {
            model: self.cfg.model,
            sampler: SamplerKind::Blocked,
            n_pops: self.data.n_pops(),
            sizes: self.data.sizes(),
            k: self.cfg.k,
            l: self.cfg.l,
            seed: self.cfg.seed,
            chains: 1,
            config_hash: String::new(),
        }
    }

    /// Acceptance count of the most recent base-weight Metropolis sweep.
    pub fn last_mh_accepts(&self) -> u32 {
        self.last_mh_accepts
    }

    pub fn state_z(&self) -> &[usize] {
        &self.z
    }

    pub fn state_pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn state_omega0(&self) -> &[f64] {
        &self.omega0
    }

    pub fn state_omega_row(&self, k: usize) -> &[f64] {
        &self.omega[k * self.cfg.l..(k + 1) * self.cfg.l]
    }

    pub fn state_atoms(&self) -> (&[f64], &[f64]) {
        (&self.atom_mean, &self.atom_var)
    }

    /// Run the configured chain, passing every kept snapshot to `sink`.
    pub fn run_with<F>(mut self, mut sink: F) -> Result<DrawsMeta>
    where
        F: FnMut(&DrawSnapshot) -> Result<()>,
    {
        let meta = self.meta();
        for it in 0..self.cfg.iterations {
            self.sweep()?;
            if it >= self.cfg.burn_in && (it - self.cfg.burn_in) % self.cfg.thin == 0 {
                sink(&self.snapshot())?;
            }
        }
        Ok(meta)
    }
}

/// Equal-count quantile binning used to initialize ζ.
fn quantile_bins(values: &[f64], bins: usize) -> Vec<usize> {
    let n = values.len();
    if n == 0 {
        return Vec::new();
    }
    let bins = bins.max(1);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite data"));
    let mut labels = vec![0usize; n];
    for (rank, &idx) in order.iter().enumerate() {
        labels[idx] = rank * bins / n;
    }
    labels
}

/// log-sum-exp of the elementwise sum of two equal-length slices.
fn lse_pair(a: &[f64], b: &[f64]) -> f64 {
    let mut best = f64::NEG_INFINITY;
    let mut acc = 0.0;
    for (&x, &y) in a.iter().zip(b.iter()) {
        let t = x + y;
        if t > best {
            acc = acc * (best - t).exp() + 1.0;
            best = t;
        } else {
            acc += (t - best).exp();
        }
    }
    best + acc.ln()
}

/// Run one blocked-Gibbs chain and collect the kept snapshots.
pub fn run_blocked_gibbs(
    data: &GroupedData,
    params: &HhdpParams,
    nig: &NigParams,
    cfg: &GibbsConfig,
) -> Result<PosteriorDraws> {
    let sampler = BlockedSampler::new(data, params, nig, cfg)?;
    let mut draws = Vec::new();
    let meta = sampler.run_with(|snap| {
        draws.push(snap.clone());
        Ok(())
    })?;
    Ok(PosteriorDraws { meta, draws })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_for_seed;

    fn unit_params() -> HhdpParams {
        HhdpParams::new(1.0, 1.0, 1.0).unwrap()
    }

    fn default_nig() -> NigParams {
        NigParams::new(0.0, 1.0, 2.0, 4.0).unwrap()
    }

    fn tiny_cfg(model: ModelKind, k: usize, l: usize) -> GibbsConfig {
        GibbsConfig {
            model,
            k,
            l,
            iterations: 10,
            burn_in: 5,
            thin: 1,
            seed: 9,
            chain: 0,
        }
    }

    #[test]
    fn config_validation() {
        let data = GroupedData::new(vec![vec![0.0]]).unwrap();
        let mut cfg = tiny_cfg(ModelKind::Hhdp, 4, 4);
        cfg.burn_in = 10;
        assert!(BlockedSampler::new(&data, &unit_params(), &default_nig(), &cfg).is_err());
        cfg.burn_in = 5;
        cfg.thin = 0;
        assert!(BlockedSampler::new(&data, &unit_params(), &default_nig(), &cfg).is_err());
    }

    #[test]
    fn determinism_same_seed_same_draws() {
        let data = GroupedData::new(vec![vec![0.1, -0.4, 2.0], vec![1.0, 0.3]]).unwrap();
        let cfg = tiny_cfg(ModelKind::Hhdp, 4, 6);
        let a = run_blocked_gibbs(&data, &unit_params(), &default_nig(), &cfg).unwrap();
        let b = run_blocked_gibbs(&data, &unit_params(), &default_nig(), &cfg).unwrap();
        assert_eq!(a.draws, b.draws);
        let mut cfg2 = cfg;
        cfg2.seed = 10;
        let c = run_blocked_gibbs(&data, &unit_params(), &default_nig(), &cfg2).unwrap();
        assert_ne!(a.draws, c.draws);
    }

    #[test]
    fn k_equal_one_pins_z() {
        let data = GroupedData::new(vec![vec![0.0, 1.0], vec![5.0]]).unwrap();
        let mut cfg = tiny_cfg(ModelKind::Hhdp, 1, 4);
        cfg.iterations = 20;
        cfg.burn_in = 0;
        let draws = run_blocked_gibbs(&data, &unit_params(), &default_nig(), &cfg).unwrap();
        assert!(draws.draws.iter().all(|d| d.z.iter().all(|&z| z == 0)));
    }

    #[test]
    fn memberships_pick_the_near_atom() {
        // Two far-apart atoms with equal weights: an observation at zero
        // selects the first atom essentially always.
        let data = GroupedData::new(vec![vec![0.0]]).unwrap();
        let cfg = tiny_cfg(ModelKind::Hhdp, 1, 2);
        let mut s = BlockedSampler::new(&data, &unit_params(), &default_nig(), &cfg).unwrap();
        s.atom_mean = vec![0.0, 100.0];
        s.atom_var = vec![1.0, 1.0];
        s.omega = vec![0.5, 0.5];
        for _ in 0..200 {
            s.step_memberships().unwrap();
            assert_eq!(s.zeta[0], 0);
        }
    }

    #[test]
    fn symmetric_components_leave_z_uniform() {
        let data = GroupedData::new(vec![vec![0.2]]).unwrap();
        let cfg = tiny_cfg(ModelKind::Hhdp, 3, 2);
        let mut s = BlockedSampler::new(&data, &unit_params(), &default_nig(), &cfg).unwrap();
        s.atom_mean = vec![0.0, 0.0];
        s.atom_var = vec![1.0, 1.0];
        s.omega = vec![0.5; 6];
        s.pi = vec![1.0 / 3.0; 3];
        let mut counts = [0usize; 3];
        for _ in 0..6000 {
            s.step_memberships().unwrap();
            counts[s.z[0]] += 1;
        }
        for &c in &counts {
            let f = c as f64 / 6000.0;
            assert!((f - 1.0 / 3.0).abs() < 0.035, "freq {f}");
        }
    }

    #[test]
    fn distributional_weights_match_dirichlet_moments() {
        // K = 2, α = 2, m = (1, 1) gives Dir(2, 2): mean 1/2, and the draw
        // always sums to one.
        let data = GroupedData::new(vec![vec![0.0], vec![1.0]]).unwrap();
        let cfg = tiny_cfg(ModelKind::Hhdp, 2, 2);
        let mut s =
            BlockedSampler::new(&data, &HhdpParams::new(2.0, 1.0, 1.0).unwrap(), &default_nig(), &cfg)
                .unwrap();
        s.z = vec![0, 1];
        let mut mean0 = 0.0;
        let reps = 10_000;
        for _ in 0..reps {
            s.step_distributional_weights();
            let sum: f64 = s.pi.iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
            mean0 += s.pi[0];
        }
        mean0 /= reps as f64;
        // Var of Dir(2,2) marginal is 1/20; 3 SE over 10k draws ≈ 0.0067.
        assert!((mean0 - 0.5).abs() < 0.0067, "mean {mean0}");
    }

    #[test]
    fn obs_weights_concentrate_with_small_beta() {
        // With counts (10, 0, …, 0) and β → 0⁺ the Dirichlet mean of the
        // first coordinate is near one.
        let data = GroupedData::new(vec![vec![0.0; 10]]).unwrap();
        let mut cfg = tiny_cfg(ModelKind::Hhdp, 1, 5);
        cfg.seed = 3;
        let params = HhdpParams::new(1.0, 1e-6, 1.0).unwrap();
        let mut s = BlockedSampler::new(&data, &params, &default_nig(), &cfg).unwrap();
        s.z = vec![0];
        s.zeta.iter_mut().for_each(|z| *z = 0);
        let mut mean0 = 0.0;
        for _ in 0..200 {
            s.step_obs_weights();
            let sum: f64 = s.state_omega_row(0).iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
            mean0 += s.state_omega_row(0)[0];
        }
        mean0 /= 200.0;
        assert!(mean0 > 0.9, "mean {mean0}");
    }

    #[test]
    fn atoms_concentrate_on_large_clusters() {
        let mut rng = rng_for_seed(17);
        let values: Vec<f64> = (0..100_000)
            .map(|_| {
                let z: f64 = rand_distr::Distribution::sample(&StandardNormal, &mut rng);
                5.0 + z
            })
            .collect();
        let data = GroupedData::new(vec![values]).unwrap();
        let cfg = tiny_cfg(ModelKind::Hhdp, 1, 2);
        let mut s = BlockedSampler::new(&data, &unit_params(), &default_nig(), &cfg).unwrap();
        s.zeta.iter_mut().for_each(|z| *z = 0);
        s.step_atoms();
        let (means, _) = s.state_atoms();
        assert!((means[0] - 5.0).abs() < 0.05, "mean {}", means[0]);
    }

    #[test]
    fn empty_data_reproduces_prior_moments() {
        // With no observations the chain's stationary law is the prior:
        // E[π_k] = 1/K, E[Σ π²] = (α/K + 1)/(α + 1), same for ω₀ with β₀.
        let data = GroupedData::new(vec![vec![], vec![]]).unwrap();
        let mut cfg = tiny_cfg(ModelKind::Hhdp, 8, 8);
        cfg.iterations = 6000;
        cfg.burn_in = 1000;
        cfg.seed = 21;
        let params = HhdpParams::new(1.5, 1.0, 2.0).unwrap();
        let sampler = BlockedSampler::new(&data, &params, &default_nig(), &cfg).unwrap();
        let mut sum_pi2 = 0.0;
        let mut sum_w2 = 0.0;
        let mut count = 0.0;
        sampler
            .run_with(|snap| {
                sum_pi2 += snap.pi_star.iter().map(|p| p * p).sum::<f64>();
                sum_w2 += snap.omega0.iter().map(|w| w * w).sum::<f64>();
                count += 1.0;
                Ok(())
            })
            .unwrap();
        let e_pi2 = sum_pi2 / count;
        let e_w2 = sum_w2 / count;
        let expect_pi2 = (params.alpha() / 8.0 + 1.0) / (params.alpha() + 1.0);
        let expect_w2 = (params.beta0() / 8.0 + 1.0) / (params.beta0() + 1.0);
        assert!(
            (e_pi2 - expect_pi2).abs() < 0.02,
            "E[Σπ²] {e_pi2} vs {expect_pi2}"
        );
        assert!(
            (e_w2 - expect_w2).abs() < 0.03,
            "E[Σω₀²] {e_w2} vs {expect_w2}"
        );
    }

    #[test]
    fn prior_only_mh_target_recovers_symmetric_dirichlet() {
        // With no weight rows (K = 0) the target is Dir(β₀/L); the sweep
        // marginal means must converge to 1/L.
        let l = 5;
        let beta0 = 2.0;
        let mut mh = AdaptiveMh::new(l - 1);
        let mut omega0 = vec![1.0 / l as f64; l];
        let ln_xi = vec![0.0; l];
        let mut rng = rng_for_seed(33);
        let mut mean = vec![0.0; l];
        let (warm, keep) = (2000, 20_000);
        for it in 0..(warm + keep) {
            mh.sweep(&mut omega0, beta0 / l as f64, 1.0, 0.0, &ln_xi, &mut rng)
                .unwrap();
            if it >= warm {
                for (m, &w) in mean.iter_mut().zip(omega0.iter()) {
                    *m += w;
                }
            }
        }
        for m in mean.iter_mut() {
            *m /= keep as f64;
        }
        for (li, &m) in mean.iter().enumerate() {
            assert!((m - 0.2).abs() < 0.02, "coordinate {li} mean {m}");
        }
    }

    #[test]
    fn ndp_atoms_are_component_specific() {
        let data = GroupedData::new(vec![vec![0.0, 0.1], vec![9.9, 10.0]]).unwrap();
        let mut cfg = tiny_cfg(ModelKind::Ndp, 3, 4);
        cfg.iterations = 60;
        cfg.burn_in = 30;
        let draws = run_blocked_gibbs(&data, &unit_params(), &default_nig(), &cfg).unwrap();
        for d in &draws.draws {
            assert_eq!(d.omega0.len(), 0);
            assert_eq!(d.atom_means.len(), 2);
            assert_eq!(d.atom_means[0].len(), 4);
        }
    }

    #[test]
    fn thinning_and_burn_in_select_expected_iterations() {
        let data = GroupedData::new(vec![vec![0.0, 1.0]]).unwrap();
        let mut cfg = tiny_cfg(ModelKind::Hhdp, 2, 3);
        cfg.iterations = 11;
        cfg.burn_in = 5;
        cfg.thin = 2;
        let draws = run_blocked_gibbs(&data, &unit_params(), &default_nig(), &cfg).unwrap();
        let iters: Vec<u64> = draws.draws.iter().map(|d| d.iter).collect();
        assert_eq!(iters, vec![6, 8, 10]);
    }
}

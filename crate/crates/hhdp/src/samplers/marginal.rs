//! Marginal Gibbs sampler for two populations, built on the hidden
//! restaurant-franchise urn: the latent random measures are integrated out
//! and the state is the homogeneity indicator Δ, table assignments, and
//! per-table dish labels.
//!
//! Restaurants merge into one when Δ = 1 and split by population when
//! Δ = 0. Δ itself is drawn from the exact posterior-degeneracy probability
//! evaluated at the current dish-allocation counts; on a flip the tables are
//! reassigned consistently, preserving table composition except that tables
//! mixing both populations must split when the restaurants separate.
//!
//! The scheme requires exactly two populations; its role is validation of
//! the blocked sampler and of the exact homogeneity computation.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::dist::sample_categorical_log;
use crate::error::{Error, Result};
use crate::inference::{DrawSnapshot, DrawsMeta, ModelKind, PosteriorDraws, SamplerKind};
use crate::nig::NigParams;
use crate::partitions::GroupedCounts;
use crate::peppf::{posterior_degeneracy_prob, HhdpParams};
use crate::rng::rng_for_stream;
use crate::samplers::{GibbsConfig, GroupedData};

#[derive(Clone, Debug)]
struct Table {
    restaurant: usize,
    dish: usize,
    members: Vec<(usize, usize)>,
}

/// The marginal restaurant-franchise sampler.
pub struct MarginalSampler {
    data: GroupedData,
    params: HhdpParams,
    nig: NigParams,
    cfg: GibbsConfig,
    delta: bool,
    tables: Vec<Table>,
    table_of: Vec<Vec<usize>>,
    n_dishes: usize,
    rng: ChaCha8Rng,
    sweeps_done: usize,
    cat_scratch: Vec<f64>,
    weight_scratch: Vec<f64>,
}

enum Seat {
    Existing(usize),
    NewTable { dish: usize },
    NewTableNewDish,
}

impl MarginalSampler {
    pub fn new(
        data: &GroupedData,
        params: &HhdpParams,
        nig: &NigParams,
        cfg: &GibbsConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        if data.n_pops() != 2 {
            return Err(Error::shape(format!(
                "the marginal sampler handles exactly two populations, got {}",
                data.n_pops()
            )));
        }
        if data.sizes().iter().any(|&s| s == 0) {
            return Err(Error::data(
                "the marginal sampler needs at least one observation per population",
            ));
        }
        // All-singleton start: every customer at their own table with their
        // own dish, restaurants split (Δ = 0).
        let mut tables = Vec::with_capacity(data.total_len());
        let mut table_of = Vec::with_capacity(2);
        let mut n_dishes = 0;
        for (j, pop) in data.populations().iter().enumerate() {
            let mut row = Vec::with_capacity(pop.len());
            for i in 0..pop.len() {
                row.push(tables.len());
                tables.push(Table {
                    restaurant: j,
                    dish: n_dishes,
                    members: vec![(j, i)],
                });
                n_dishes += 1;
            }
            table_of.push(row);
        }
        Ok(MarginalSampler {
            data: data.clone(),
            params: *params,
            nig: *nig,
            cfg: *cfg,
            delta: false,
            tables,
            table_of,
            n_dishes,
            rng: rng_for_stream(cfg.seed, cfg.chain as u64),
            sweeps_done: 0,
            cat_scratch: Vec::new(),
            weight_scratch: Vec::new(),
        })
    }

    pub fn delta(&self) -> bool {
        self.delta
    }

    pub fn n_dishes(&self) -> usize {
        self.n_dishes
    }

    pub fn n_tables(&self) -> usize {
        self.tables.len()
    }

    fn value(&self, j: usize, i: usize) -> f64 {
        self.data.pop(j)[i]
    }

    fn restaurant_of_pop(&self, j: usize) -> usize {
        if self.delta {
            0
        } else {
            j
        }
    }

    /// Current dish-allocation counts `n_{j,d}`.
    pub fn grouped_counts(&self) -> Result<GroupedCounts> {
        let mut counts = vec![vec![0u64; self.n_dishes]; 2];
        for t in &self.tables {
            for &(j, _) in &t.members {
                counts[j][t.dish] += 1;
            }
        }
        GroupedCounts::new(counts)
    }

    /// Tables currently serving dish `d`, excluding `skip`.
    fn dish_table_count(&self, d: usize, skip: Option<usize>) -> usize {
        self.tables
            .iter()
            .enumerate()
            .filter(|(ti, t)| t.dish == d && Some(*ti) != skip)
            .count()
    }

    fn dish_values(&self, d: usize, skip_table: Option<usize>) -> Vec<f64> {
        let mut vals = Vec::new();
        for (ti, t) in self.tables.iter().enumerate() {
            if t.dish != d || Some(ti) == skip_table {
                continue;
            }
            vals.extend(t.members.iter().map(|&(j, i)| self.value(j, i)));
        }
        vals
    }

    /// Exact conditional probability of Δ = 1 given the current dish
    /// allocation, per the posterior-degeneracy formula.
    pub fn delta_probability(&self) -> Result<f64> {
        posterior_degeneracy_prob(&self.grouped_counts()?, &self.params)
    }

    /// Resample Δ and reassign restaurants on a flip.
    pub fn update_delta(&mut self) -> Result<()> {
        let p1 = self.delta_probability()?;
        let new_delta = self.rng.gen::<f64>() < p1;
        if new_delta == self.delta {
            return Ok(());
        }
        self.delta = new_delta;
        if new_delta {
            for t in self.tables.iter_mut() {
                t.restaurant = 0;
            }
            return Ok(());
        }
        // Split: pure tables follow their population; mixed tables break
        // into one table per population, both keeping the dish.
        for ti in 0..self.tables.len() {
            let pops: Vec<usize> = self.tables[ti].members.iter().map(|&(j, _)| j).collect();
            let first = pops[0];
            if pops.iter().all(|&p| p == first) {
                self.tables[ti].restaurant = first;
                continue;
            }
            let moved: Vec<(usize, usize)> = self.tables[ti]
                .members
                .iter()
                .copied()
                .filter(|&(j, _)| j == 1)
                .collect();
            self.tables[ti].members.retain(|&(j, _)| j == 0);
            self.tables[ti].restaurant = 0;
            let new_index = self.tables.len();
            for &(j, i) in &moved {
                self.table_of[j][i] = new_index;
            }
            self.tables.push(Table {
                restaurant: 1,
                dish: self.tables[ti].dish,
                members: moved,
            });
        }
        Ok(())
    }

    fn detach(&mut self, j: usize, i: usize) {
        let t = self.table_of[j][i];
        let pos = self.tables[t]
            .members
            .iter()
            .position(|&m| m == (j, i))
            .expect("membership bookkeeping");
        self.tables[t].members.swap_remove(pos);
        if self.tables[t].members.is_empty() {
            let dish = self.tables[t].dish;
            self.tables.swap_remove(t);
            if t < self.tables.len() {
                for &(mj, mi) in &self.tables[t].members {
                    self.table_of[mj][mi] = t;
                }
            }
            if self.dish_table_count(dish, None) == 0 {
                self.remove_dish(dish);
            }
        }
    }

    fn remove_dish(&mut self, dish: usize) {
        for t in self.tables.iter_mut() {
            debug_assert_ne!(t.dish, dish);
            if t.dish > dish {
                t.dish -= 1;
            }
        }
        self.n_dishes -= 1;
    }

    /// Resample the table (and, for new tables, the dish) of customer (j, i).
    pub fn update_table_dish(&mut self, j: usize, i: usize) -> Result<()> {
        self.detach(j, i);
        let x = self.value(j, i);
        let r = self.restaurant_of_pop(j);
        let beta = self.params.beta();
        let beta0 = self.params.beta0();
        let ell_total = self.tables.len() as f64;

        // Per-dish predictive log-density of x given current occupants.
        let mut dish_pred = Vec::with_capacity(self.n_dishes);
        let mut dish_tables = Vec::with_capacity(self.n_dishes);
        for d in 0..self.n_dishes {
            let post = self.nig.posterior(&self.dish_values(d, None))?;
            dish_pred.push(post.log_predictive(x));
            dish_tables.push(self.dish_table_count(d, None) as f64);
        }

        let mut choices = Vec::new();
        self.cat_scratch.clear();
        for (ti, t) in self.tables.iter().enumerate() {
            if t.restaurant != r {
                continue;
            }
            choices.push(Seat::Existing(ti));
            self.cat_scratch
                .push((t.members.len() as f64).ln() + dish_pred[t.dish]);
        }
        let ln_new_table = beta.ln();
        for d in 0..self.n_dishes {
            choices.push(Seat::NewTable { dish: d });
            self.cat_scratch.push(
                ln_new_table + dish_tables[d].ln() - (ell_total + beta0).ln() + dish_pred[d],
            );
        }
        choices.push(Seat::NewTableNewDish);
        self.cat_scratch.push(
            ln_new_table + beta0.ln() - (ell_total + beta0).ln() + self.nig.log_predictive(x),
        );

        let scores = std::mem::take(&mut self.cat_scratch);
        let pick = sample_categorical_log(&scores, &mut self.rng, &mut self.weight_scratch)?;
        self.cat_scratch = scores;
        match choices[pick] {
            Seat::Existing(ti) => {
                self.tables[ti].members.push((j, i));
                self.table_of[j][i] = ti;
            }
            Seat::NewTable { dish } => {
                self.table_of[j][i] = self.tables.len();
                self.tables.push(Table {
                    restaurant: r,
                    dish,
                    members: vec![(j, i)],
                });
            }
            Seat::NewTableNewDish => {
                let dish = self.n_dishes;
                self.n_dishes += 1;
                self.table_of[j][i] = self.tables.len();
                self.tables.push(Table {
                    restaurant: r,
                    dish,
                    members: vec![(j, i)],
                });
            }
        }
        Ok(())
    }

    /// Resample the dish of table `t` given all other tables.
    pub fn update_dish(&mut self, t: usize) -> Result<()> {
        let set: Vec<f64> = self.tables[t]
            .members
            .iter()
            .map(|&(j, i)| self.value(j, i))
            .collect();
        let old_dish = self.tables[t].dish;
        let beta0 = self.params.beta0();

        let mut choices: Vec<Option<usize>> = Vec::new();
        self.cat_scratch.clear();
        for d in 0..self.n_dishes {
            let others = self.dish_table_count(d, Some(t)) as f64;
            if others == 0.0 {
                continue;
            }
            let other_vals = self.dish_values(d, Some(t));
            let cond = self.nig.posterior(&other_vals)?.log_marginal(&set)?;
            choices.push(Some(d));
            self.cat_scratch.push(others.ln() + cond);
        }
        choices.push(None);
        self.cat_scratch
            .push(beta0.ln() + self.nig.log_marginal(&set)?);

        let scores = std::mem::take(&mut self.cat_scratch);
        let pick = sample_categorical_log(&scores, &mut self.rng, &mut self.weight_scratch)?;
        self.cat_scratch = scores;
        match choices[pick] {
            Some(d) => self.tables[t].dish = d,
            None => {
                self.tables[t].dish = self.n_dishes;
                self.n_dishes += 1;
            }
        }
        if self.dish_table_count(old_dish, None) == 0 {
            self.remove_dish(old_dish);
        }
        Ok(())
    }

    /// One full sweep: Δ, every customer's table, every table's dish.
    pub fn sweep(&mut self) -> Result<()> {
        self.update_delta()?;
        for j in 0..2 {
            for i in 0..self.data.pop(j).len() {
                self.update_table_dish(j, i)?;
            }
        }
        for t in 0..self.tables.len() {
            self.update_dish(t)?;
        }
        self.sweeps_done += 1;
        Ok(())
    }

    /// Rebuild every count from the label arrays and compare with the
    /// incremental bookkeeping.
    pub fn verify_consistency(&self) -> Result<()> {
        let mut seen = vec![0usize; self.tables.len()];
        for (j, row) in self.table_of.iter().enumerate() {
            if row.len() != self.data.pop(j).len() {
                return Err(Error::numerical("table index row has wrong length"));
            }
            for (i, &t) in row.iter().enumerate() {
                if t >= self.tables.len() || !self.tables[t].members.contains(&(j, i)) {
                    return Err(Error::numerical(format!(
                        "customer ({j}, {i}) not seated at its recorded table"
                    )));
                }
                seen[t] += 1;
            }
        }
        for (ti, t) in self.tables.iter().enumerate() {
            if t.members.is_empty() {
                return Err(Error::numerical(format!("table {ti} is empty")));
            }
            if t.members.len() != seen[ti] {
                return Err(Error::numerical(format!("table {ti} member count drifted")));
            }
            if t.dish >= self.n_dishes {
                return Err(Error::numerical(format!("table {ti} serves unknown dish")));
            }
            let expect_restaurant = if self.delta {
                0
            } else {
                t.members[0].0
            };
            if t.restaurant != expect_restaurant
                || (!self.delta && t.members.iter().any(|&(j, _)| j != t.restaurant))
            {
                return Err(Error::numerical(format!(
                    "table {ti} is in the wrong restaurant"
                )));
            }
        }
        for d in 0..self.n_dishes {
            if self.dish_table_count(d, None) == 0 {
                return Err(Error::numerical(format!("dish {d} has no tables")));
            }
        }
        Ok(())
    }

    pub fn snapshot(&self) -> DrawSnapshot {
        let zeta: Vec<Vec<u32>> = self
            .table_of
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&t| self.tables[t].dish as u32)
                    .collect()
            })
            .collect();
        DrawSnapshot {
            iter: self.sweeps_done as u64,
            chain: self.cfg.chain as u32,
            z: if self.delta { vec![0, 0] } else { vec![0, 1] },
            zeta,
            pi_star: vec![],
            omega0: vec![],
            weights: vec![],
            atom_means: vec![],
            atom_vars: vec![],
        }
    }

    pub fn meta(&self) -> DrawsMeta {
        DrawsMeta {
            model: ModelKind::Hhdp,
            sampler: SamplerKind::Marginal,
            n_pops: 2,
            sizes: self.data.sizes(),
            k: 0,
            l: 0,
            seed: self.cfg.seed,
            chains: 1,
            config_hash: String::new(),
        }
    }

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

/// Run one marginal chain and collect the kept snapshots.
pub fn run_marginal_gibbs(
    data: &GroupedData,
    params: &HhdpParams,
    nig: &NigParams,
    cfg: &GibbsConfig,
) -> Result<PosteriorDraws> {
    let sampler = MarginalSampler::new(data, params, nig, cfg)?;
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

    fn unit_params() -> HhdpParams {
        HhdpParams::new(1.0, 1.0, 1.0).unwrap()
    }

    fn default_nig() -> NigParams {
        NigParams::new(0.0, 1.0, 2.0, 4.0).unwrap()
    }

    fn cfg(iterations: usize, burn_in: usize, seed: u64) -> GibbsConfig {
        GibbsConfig {
            model: ModelKind::Hhdp,
            k: 0,
            l: 0,
            iterations,
            burn_in,
            thin: 1,
            seed,
            chain: 0,
        }
    }

    #[test]
    fn requires_two_nonempty_populations() {
        let params = unit_params();
        let nig = default_nig();
        let c = cfg(4, 0, 1);
        let one = GroupedData::new(vec![vec![0.0]]).unwrap();
        assert!(MarginalSampler::new(&one, &params, &nig, &c).is_err());
        let empty = GroupedData::new(vec![vec![0.0], vec![]]).unwrap();
        assert!(MarginalSampler::new(&empty, &params, &nig, &c).is_err());
    }

    #[test]
    fn delta_probability_on_singleton_shared_dish() {
        // One observation per population, both eating one dish:
        // P(Δ = 1) = 0.6 at α = β = β₀ = 1.
        let data = GroupedData::new(vec![vec![0.5], vec![0.5]]).unwrap();
        let mut s = MarginalSampler::new(&data, &unit_params(), &default_nig(), &cfg(4, 0, 1)).unwrap();
        // Merge the two singleton tables onto one dish.
        s.tables[1].dish = 0;
        s.n_dishes = 1;
        let p = s.delta_probability().unwrap();
        assert!((p - 0.6).abs() < 1e-12, "p = {p}");
        // Separate dishes give the complement setup: 1/3.
        let s2 = MarginalSampler::new(&data, &unit_params(), &default_nig(), &cfg(4, 0, 1)).unwrap();
        let p2 = s2.delta_probability().unwrap();
        assert!((p2 - 1.0 / 3.0).abs() < 1e-12, "p2 = {p2}");
    }

    #[test]
    fn tiny_alpha_forces_merge() {
        let data = GroupedData::new(vec![vec![0.0, 1.0], vec![0.5]]).unwrap();
        let params = HhdpParams::new(1e-12, 1.0, 1.0).unwrap();
        let mut s = MarginalSampler::new(&data, &params, &default_nig(), &cfg(4, 0, 1)).unwrap();
        for _ in 0..20 {
            s.update_delta().unwrap();
            assert!(s.delta(), "tiny alpha must keep the restaurants merged");
            s.verify_consistency().unwrap();
        }
    }

    #[test]
    fn merge_and_split_preserve_dish_partition() {
        let data = GroupedData::new(vec![vec![0.0, 0.2, -0.1], vec![0.1, 0.3]]).unwrap();
        let mut s =
            MarginalSampler::new(&data, &unit_params(), &default_nig(), &cfg(400, 0, 5)).unwrap();
        let mut saw_merge = false;
        let mut saw_split = false;
        for _ in 0..400 {
            let before = s.snapshot().zeta;
            let was = s.delta();
            s.update_delta().unwrap();
            s.verify_consistency().unwrap();
            assert_eq!(before, s.snapshot().zeta, "dish partition must survive Δ moves");
            if !was && s.delta() {
                saw_merge = true;
            }
            if was && !s.delta() {
                saw_split = true;
            }
            s.sweep().unwrap();
            s.verify_consistency().unwrap();
        }
        assert!(saw_merge && saw_split, "chain never flipped Δ both ways");
    }

    #[test]
    fn lone_customer_in_split_restaurant_always_opens_a_table() {
        // With Δ = 0 and a single customer in restaurant 0, reseating leaves
        // no occupied table to join: a new table is opened every time.
        let data = GroupedData::new(vec![vec![1.0], vec![2.0]]).unwrap();
        let mut s =
            MarginalSampler::new(&data, &unit_params(), &default_nig(), &cfg(4, 0, 2)).unwrap();
        for _ in 0..50 {
            s.update_table_dish(0, 0).unwrap();
            s.verify_consistency().unwrap();
            let t = s.table_of[0][0];
            assert_eq!(s.tables[t].members, vec![(0, 0)]);
            assert_eq!(s.tables[t].restaurant, 0);
        }
    }

    #[test]
    fn close_observation_joins_the_existing_cluster() {
        // Population 2's lone customer sits with data essentially identical
        // to dish 0 and far from the prior: it must pick up that dish.
        let data = GroupedData::new(vec![
            vec![10.0, 10.01, 9.99, 10.02, 9.98],
            vec![10.0],
        ])
        .unwrap();
        let params = unit_params();
        // Prior centered far away with small predictive spread at 10.
        let nig = NigParams::new(-10.0, 4.0, 3.0, 1.0).unwrap();
        let mut s = MarginalSampler::new(&data, &params, &nig, &cfg(4, 0, 3)).unwrap();
        // Hand-build a consistent state: population 1 pooled on one table
        // with dish 0, population 2's customer alone with dish 1.
        s.tables = vec![
            Table {
                restaurant: 0,
                dish: 0,
                members: (0..5).map(|i| (0, i)).collect(),
            },
            Table {
                restaurant: 1,
                dish: 1,
                members: vec![(1, 0)],
            },
        ];
        s.table_of = vec![vec![0; 5], vec![1]];
        s.n_dishes = 2;
        s.verify_consistency().unwrap();
        let mut joined = 0;
        let trials = 200;
        for _ in 0..trials {
            s.update_table_dish(1, 0).unwrap();
            s.verify_consistency().unwrap();
            let dish_pop1 = s.tables[s.table_of[1][0]].dish;
            let dish_pop0 = s.tables[s.table_of[0][0]].dish;
            if dish_pop1 == dish_pop0 {
                joined += 1;
            }
        }
        assert!(
            joined as f64 / trials as f64 > 0.99,
            "joined only {joined}/{trials}"
        );
    }

    #[test]
    fn single_table_dish_update_keeps_partition_trivial() {
        let data = GroupedData::new(vec![vec![0.0], vec![1.0]]).unwrap();
        let mut s =
            MarginalSampler::new(&data, &unit_params(), &default_nig(), &cfg(4, 0, 7)).unwrap();
        // Merge both customers onto one table by hand.
        s.delta = true;
        s.tables.iter_mut().for_each(|t| t.restaurant = 0);
        let keep = s.table_of[0][0];
        s.tables[keep].members.push((1, 0));
        let drop_t = s.table_of[1][0];
        s.table_of[1][0] = keep;
        s.tables.remove(drop_t);
        for (ti, t) in s.tables.iter().enumerate() {
            for &(j, i) in &t.members {
                s.table_of[j][i] = ti;
            }
        }
        s.tables[0].dish = 0;
        s.n_dishes = 1;
        s.verify_consistency().unwrap();
        for _ in 0..50 {
            s.update_dish(0).unwrap();
            s.verify_consistency().unwrap();
            assert_eq!(s.n_dishes, 1);
            assert_eq!(s.tables[0].dish, 0);
        }
    }

    #[test]
    fn determinism() {
        let data = GroupedData::new(vec![vec![0.0, 0.4, 5.0], vec![0.2, 4.9]]).unwrap();
        let a = run_marginal_gibbs(&data, &unit_params(), &default_nig(), &cfg(50, 10, 11)).unwrap();
        let b = run_marginal_gibbs(&data, &unit_params(), &default_nig(), &cfg(50, 10, 11)).unwrap();
        assert_eq!(a.draws, b.draws);
    }

    #[test]
    fn long_run_stays_consistent() {
        let data = GroupedData::new(vec![vec![0.0, 1.5, -0.6, 0.2], vec![0.1, 1.4, 0.0]]).unwrap();
        let mut s =
            MarginalSampler::new(&data, &unit_params(), &default_nig(), &cfg(4, 0, 13)).unwrap();
        for _ in 0..500 {
            s.sweep().unwrap();
            s.verify_consistency().unwrap();
        }
    }
}

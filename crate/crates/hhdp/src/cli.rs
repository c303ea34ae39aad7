//! Command-line surface: `simulate`, `fit`, `summarize`, `peppf`,
//! `prior-check`, and `test-homogeneity`.
//!
//! Exit codes: 0 success, 2 usage or argument errors, 3 data errors,
//! 4 numerical failures.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{ArgAction, Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::inference::{
    self, coclustering_matrix, density_estimate, empirical_homogeneity, n_components_posterior,
    shared_clusters_summary, vi_point_estimate, Level, PosteriorDraws, SamplerKind,
};
use crate::io::{config::RunConfig, csv, draws::DrawsWriter, read_draws};
use crate::peppf::{hhdp_log_peppf, posterior_degeneracy_prob};
use crate::priors::monte_carlo_prior_check;
use crate::samplers::{BlockedSampler, GroupedData, MarginalSampler};
use crate::scenarios::{self, ScaleConvention, ScenarioId, ScenarioSpec};

#[derive(Parser)]
#[command(
    name = "hhdp",
    version,
    about = "Hidden hierarchical Dirichlet process mixtures: exact partition probabilities, Gibbs samplers, posterior clustering summaries"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic benchmark data set as CSV.
    Simulate {
        /// Scenario id: S1, S2, S3, or S4.
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
        /// Per-population sizes, comma separated (default 100 each).
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        /// Interpretation of the component scale parameter: variance | sd.
        #[arg(long, default_value = "variance")]
        scale_convention: String,
    },
    /// Fit an HHDP or NDP mixture by MCMC, streaming draw records.
    Fit {
        /// Input data CSV.
        #[arg(long)]
        data: PathBuf,
        /// Run configuration JSON.
        #[arg(long)]
        config: PathBuf,
        /// Output draws file (NDJSON).
        #[arg(long)]
        out: PathBuf,
        /// Worker threads for multi-chain runs (default: one per chain).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Summarize a draws file into report tables under a directory.
    Summarize {
        #[arg(long)]
        draws: PathBuf,
        /// Output directory (created if absent).
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 200)]
        grid_points: usize,
        #[arg(long)]
        grid_min: Option<f64>,
        #[arg(long)]
        grid_max: Option<f64>,
    },
    /// Exact log partition probability of a counts matrix, and the
    /// homogeneity probability for two populations.
    Peppf {
        /// Headerless CSV count matrix, one population per row.
        #[arg(long)]
        counts: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, default_value_t = 1.0)]
        beta0: f64,
    },
    /// Analytic prior moments against forward Monte Carlo estimates.
    PriorCheck {
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, default_value_t = 1.0)]
        beta0: f64,
        #[arg(long, default_value_t = 50_000)]
        reps: usize,
        /// Distributional truncation K.
        #[arg(long, default_value_t = 50)]
        trunc_k: usize,
        /// Observational truncation L.
        #[arg(long, default_value_t = 50)]
        trunc_l: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Write the CSV table here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Empirical homogeneity probability from a draws file.
    TestHomogeneity {
        #[arg(long)]
        draws: PathBuf,
        /// Suppress the trailing draw-count line.
        #[arg(long, action = ArgAction::SetTrue)]
        quiet: bool,
    },
}

/// Parse and run an argv vector, returning the process exit code.
pub fn cli_dispatch<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code(&err)
        }
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Domain(_) | Error::Shape(_) | Error::Size(_) => 2,
        Error::Data(_) | Error::Io(_) => 3,
        Error::Numerical(_) => 4,
    }
}

fn run(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Simulate {
            scenario,
            seed,
            out,
            sizes,
            scale_convention,
        } => {
            let id: ScenarioId = scenario.parse()?;
            let convention: ScaleConvention = scale_convention.parse()?;
            let spec = ScenarioSpec::preset(id, sizes, seed, convention)?;
            let (data, truth) = scenarios::generate(&spec)?;
            csv::write_grouped_csv(&out, &data, Some(&truth))
        }
        Cmd::Fit {
            data,
            config,
            out,
            threads,
        } => {
            let loaded = csv::load_grouped_csv(&data)?;
            let cfg = RunConfig::load(&config)?;
            run_fit(&loaded.data, &cfg, &out, threads)
        }
        Cmd::Summarize {
            draws,
            out,
            grid_points,
            grid_min,
            grid_max,
        } => run_summarize(&draws, &out, grid_points, grid_min, grid_max),
        Cmd::Peppf {
            counts,
            alpha,
            beta,
            beta0,
        } => {
            let counts = csv::load_counts_csv(&counts)?;
            let params = crate::peppf::HhdpParams::new(alpha, beta, beta0)?;
            let log_p = hhdp_log_peppf(&counts, &params)?;
            println!("log_peppf {}", log_p.value());
            if counts.n_rows() == 2 {
                let p = posterior_degeneracy_prob(&counts, &params)?;
                println!("degeneracy_prob {p}");
            }
            Ok(())
        }
        Cmd::PriorCheck {
            alpha,
            beta,
            beta0,
            reps,
            trunc_k,
            trunc_l,
            seed,
            out,
        } => {
            let params = crate::peppf::HhdpParams::new(alpha, beta, beta0)?;
            let mc = monte_carlo_prior_check(&params, trunc_k, trunc_l, reps, seed)?;
            match out {
                Some(path) => {
                    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
                    csv::write_prior_check_table(&mut w, &mc)?;
                    use std::io::Write;
                    w.flush()?;
                }
                None => {
                    let mut stdout = std::io::stdout().lock();
                    csv::write_prior_check_table(&mut stdout, &mc)?;
                }
            }
            Ok(())
        }
        Cmd::TestHomogeneity { draws, quiet } => {
            let outcome = read_draws(&draws)?;
            warn_partial(&outcome, &draws);
            let p = empirical_homogeneity(&outcome.draws)?;
            println!("p_homogeneity {p}");
            if !quiet {
                println!("draws {}", outcome.draws.draws.len());
            }
            Ok(())
        }
    }
}

fn warn_partial(outcome: &crate::io::ReadOutcome, path: &Path) {
    if outcome.skipped_partial {
        eprintln!(
            "warning: skipped a truncated final record in {}",
            path.display()
        );
    }
}

/// Run the configured sampler, streaming snapshots to `out`. Multi-chain
/// runs execute chains in parallel (capped by `threads`) and concatenate
/// their records in chain order.
pub fn run_fit(
    data: &GroupedData,
    cfg: &RunConfig,
    out: &Path,
    threads: Option<usize>,
) -> Result<()> {
    cfg.validate()?;
    let params = cfg.params()?;
    let nig = cfg.resolve_nig(data)?;
    let hash = cfg.hash();

    if cfg.chains == 1 {
        let gibbs = cfg.gibbs_config(0);
        let writer = match cfg.sampler {
            SamplerKind::Blocked => {
                let sampler = BlockedSampler::new(data, &params, &nig, &gibbs)?;
                let mut meta = sampler.meta();
                meta.config_hash = hash;
                let mut w = DrawsWriter::create(out, &meta)?;
                sampler.run_with(|snap| w.write_snapshot(snap))?;
                w
            }
            SamplerKind::Marginal => {
                let sampler = MarginalSampler::new(data, &params, &nig, &gibbs)?;
                let mut meta = sampler.meta();
                meta.config_hash = hash;
                let mut w = DrawsWriter::create(out, &meta)?;
                sampler.run_with(|snap| w.write_snapshot(snap))?;
                w
            }
        };
        return writer.finish();
    }

    let workers = threads.unwrap_or(cfg.chains).max(1).min(cfg.chains);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::config(format!("cannot build thread pool: {e}")))?;
    let chain_results: Vec<PosteriorDraws> = pool.install(|| {
        use rayon::prelude::*;
        (0..cfg.chains)
            .into_par_iter()
            .map(|chain| {
                let gibbs = cfg.gibbs_config(chain);
                match cfg.sampler {
                    SamplerKind::Blocked => {
                        crate::samplers::run_blocked_gibbs(data, &params, &nig, &gibbs)
                    }
                    SamplerKind::Marginal => {
                        crate::samplers::run_marginal_gibbs(data, &params, &nig, &gibbs)
                    }
                }
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut meta = chain_results[0].meta.clone();
    meta.chains = cfg.chains;
    meta.config_hash = hash;
    let mut writer = DrawsWriter::create(out, &meta)?;
    for chain in &chain_results {
        for snap in &chain.draws {
            writer.write_snapshot(snap)?;
        }
    }
    writer.finish()
}

#[derive(Serialize)]
struct ViPartitionReport {
    distributional_blocks: Vec<Vec<usize>>,
    observational_cluster_count: usize,
    observational_labels: Vec<Vec<usize>>,
    observational_frequencies: Vec<Vec<usize>>,
}

#[derive(Serialize)]
struct Report {
    config_hash: String,
    seed: u64,
    model: inference::ModelKind,
    sampler: SamplerKind,
    chains: usize,
    n_draws: usize,
    populations: usize,
    sizes: Vec<usize>,
    entropy_units: &'static str,
    homogeneity_first_two: Option<f64>,
    n_components: Vec<(usize, f64)>,
    n_components_mode: usize,
    vi_distributional_blocks: Vec<Vec<usize>>,
    vi_observational_cluster_count: usize,
    shared_clusters: Option<inference::SharedClustersSummary>,
}

/// Split a label vector into 1-based-id blocks ordered by first occurrence.
fn blocks_of(labels: &[usize]) -> Vec<Vec<usize>> {
    let n_blocks = labels.iter().max().map_or(0, |m| m + 1);
    let mut blocks = vec![Vec::new(); n_blocks];
    for (idx, &b) in labels.iter().enumerate() {
        blocks[b].push(idx + 1);
    }
    blocks
}

fn run_summarize(
    draws_path: &Path,
    out_dir: &Path,
    grid_points: usize,
    grid_min: Option<f64>,
    grid_max: Option<f64>,
) -> Result<()> {
    let outcome = read_draws(draws_path)?;
    warn_partial(&outcome, draws_path);
    let draws = outcome.draws;
    if draws.draws.is_empty() {
        return Err(Error::data("draws file contains no records"));
    }
    std::fs::create_dir_all(out_dir)?;

    // Density summaries need mixture weights; the marginal sampler records
    // labels only.
    let has_weights = draws.draws.iter().all(|d| !d.weights.is_empty());
    if has_weights {
        let grid = density_grid(&draws, grid_points, grid_min, grid_max)?;
        for j in 0..draws.meta.n_pops {
            let summary = density_estimate(&draws, j, &grid)?;
            csv::write_density_csv(
                &out_dir.join(format!("density_pop{}.csv", j + 1)),
                &summary,
            )?;
        }
    } else {
        eprintln!("note: marginal-sampler draws carry no weights; skipping density output");
    }

    let cocluster_obs = coclustering_matrix(&draws, Level::Observations)?;
    csv::write_matrix_csv(&out_dir.join("cocluster_obs.csv"), &cocluster_obs)?;
    let cocluster_pop = coclustering_matrix(&draws, Level::Populations)?;
    csv::write_matrix_csv(&out_dir.join("cocluster_pop.csv"), &cocluster_pop)?;

    let ncomp = n_components_posterior(&draws)?;
    csv::write_ncomp_csv(&out_dir.join("ncomp.csv"), &ncomp)?;

    let vi_pop = vi_point_estimate(&draws, Level::Populations)?;
    let vi_obs = vi_point_estimate(&draws, Level::Observations)?;
    let obs_clusters = vi_obs.iter().max().map_or(0, |m| m + 1);
    // Per-population frequencies of the observational point estimate.
    let mut freqs = vec![vec![0usize; obs_clusters]; draws.meta.n_pops];
    let mut offset = 0;
    for (j, &size) in draws.meta.sizes.iter().enumerate() {
        for i in 0..size {
            freqs[j][vi_obs[offset + i]] += 1;
        }
        offset += size;
    }
    let mut obs_labels = Vec::with_capacity(draws.meta.n_pops);
    let mut offset = 0;
    for &size in &draws.meta.sizes {
        obs_labels.push(vi_obs[offset..offset + size].iter().map(|&l| l + 1).collect());
        offset += size;
    }
    let vi_report = ViPartitionReport {
        distributional_blocks: blocks_of(&vi_pop),
        observational_cluster_count: obs_clusters,
        observational_labels: obs_labels,
        observational_frequencies: freqs,
    };
    write_json(&out_dir.join("vi_partition.json"), &vi_report)?;

    let homogeneity = if draws.meta.n_pops >= 2 {
        Some(empirical_homogeneity(&draws)?)
    } else {
        None
    };
    let n_blocks = vi_pop.iter().max().map_or(0, |m| m + 1);
    let shared = if n_blocks <= 2 {
        Some(shared_clusters_summary(&draws)?)
    } else {
        None
    };
    let mode = ncomp
        .iter()
        .max_by(|a, b| a.1.partial_cmp(&b.1).expect("finite probabilities"))
        .map_or(0, |&(k, _)| k);
    let report = Report {
        config_hash: draws.meta.config_hash.clone(),
        seed: draws.meta.seed,
        model: draws.meta.model,
        sampler: draws.meta.sampler,
        chains: draws.meta.chains,
        n_draws: draws.draws.len(),
        populations: draws.meta.n_pops,
        sizes: draws.meta.sizes.clone(),
        entropy_units: "nats",
        homogeneity_first_two: homogeneity,
        n_components: ncomp,
        n_components_mode: mode,
        vi_distributional_blocks: vi_report.distributional_blocks,
        vi_observational_cluster_count: obs_clusters,
        shared_clusters: shared,
    };
    write_json(&out_dir.join("report.json"), &report)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::data(format!("cannot serialize {}: {e}", path.display())))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

/// A density grid spanning every well-weighted atom, four standard
/// deviations beyond the extreme means.
fn density_grid(
    draws: &PosteriorDraws,
    points: usize,
    grid_min: Option<f64>,
    grid_max: Option<f64>,
) -> Result<Vec<f64>> {
    if points < 2 {
        return Err(Error::config("density grid needs at least two points"));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for d in &draws.draws {
        for j in 0..d.weights.len() {
            for l in 0..d.weights[j].len() {
                if d.weights[j][l] < 1e-4 {
                    continue;
                }
                let sd = d.atom_vars[j][l].sqrt();
                lo = lo.min(d.atom_means[j][l] - 4.0 * sd);
                hi = hi.max(d.atom_means[j][l] + 4.0 * sd);
            }
        }
    }
    let lo = grid_min.unwrap_or(lo);
    let hi = grid_max.unwrap_or(hi);
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::numerical(format!(
            "cannot determine a density grid: range [{lo}, {hi}]"
        )));
    }
    let step = (hi - lo) / (points - 1) as f64;
    Ok((0..points).map(|i| lo + i as f64 * step).collect())
}

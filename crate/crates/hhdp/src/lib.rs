//! Hidden hierarchical Dirichlet process (HHDP) mixtures.
//!
//! The HHDP composes a nested Dirichlet process layer, which clusters whole
//! population distributions, with a hierarchical Dirichlet process layer,
//! which shares mixture atoms across those distributions. Unlike the plain
//! nested Dirichlet process, sharing an observational cluster across two
//! populations does not force their distributions into the same cluster.
//!
//! This crate provides:
//!
//! * exact log-space evaluation of the partition probability functions
//!   induced by HDP and HHDP priors ([`peppf`]), including the posterior
//!   probability that two populations are homogeneous;
//! * closed-form prior moments and a forward simulator for finite-Dirichlet
//!   truncations of the prior ([`priors`]);
//! * a blocked conditional Gibbs sampler for HHDP (and nested-DP baseline)
//!   Gaussian mixtures, plus a marginal restaurant-franchise sampler for
//!   two populations ([`samplers`]);
//! * posterior summaries: density estimates with credible bands,
//!   co-clustering matrices, variation-of-information point estimates,
//!   component-count posteriors ([`inference`]);
//! * synthetic-data generators and a command-line interface ([`scenarios`],
//!   [`io`], [`cli`]).

pub mod cli;
mod dist;
pub mod error;
pub mod inference;
pub mod io;
pub mod nig;
pub mod partitions;
pub mod peppf;
pub mod priors;
pub mod rng;
pub mod samplers;
pub mod scenarios;
pub mod special;

pub use error::{Error, Result};
pub use peppf::{HdpParams, HhdpParams};

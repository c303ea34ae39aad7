//! Run configuration, data files, and draw-record serialization.
//!
//! File formats:
//!
//! * data CSV: header `population,value[,truth_component]`, one observation
//!   per row, populations numbered contiguously from 1;
//! * counts CSV: a headerless matrix of non-negative integers, one
//!   population per row, one observational cluster per column;
//! * draws NDJSON: a `{"meta": …}` record followed by one JSON record per
//!   kept iteration (append-only; a truncated final line is skipped with a
//!   warning);
//! * run config: a JSON document, see [`config::RunConfig`].

pub mod config;
pub mod csv;
pub mod draws;

pub use config::{NigSpec, RunConfig};
pub use csv::{load_counts_csv, load_grouped_csv, write_grouped_csv, LoadedData};
pub use draws::{read_draws, DrawsWriter, ReadOutcome};

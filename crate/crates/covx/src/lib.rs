//! Multivariate peaks-over-threshold extreme value analysis with
//! piecewise-constant covariate models.
//!
//! The library mirrors the five stages of a practical metocean extremes
//! workflow:
//!
//! 1. [`peaks`] — isolate storm-peak events from multivariate time series
//!    (and generate synthetic samples with known truth, see [`synth`]);
//! 2. [`sample`] — partition the covariate domain into bins and allocate
//!    events to bins;
//! 3. [`marginal`] — per-variate gamma body + penalised generalised Pareto
//!    tail models, piecewise constant over bins, with cross-validated
//!    roughness and T-year maximum distributions;
//! 4. [`dependence`] — conditional extremes (Heffernan–Tawn) dependence
//!    models on standard Laplace margins, with joint simulation and
//!    conditional return distributions;
//! 5. [`contours`] — environmental design contours (constant exceedance,
//!    direct sampling, constant density) through a lock point.
//!
//! [`uq`] wraps stages 3–4 in a bootstrap with randomised thresholds, and
//! [`optim`] holds the shared minimisers, fold splitting and seeded RNG
//! streams. All randomised routines take explicit seeds or RNGs and are
//! reproducible independent of thread count.

pub mod contours;
pub mod dependence;
pub mod error;
pub mod marginal;
pub mod optim;
pub mod peaks;
pub mod sample;
pub mod stats;
pub mod synth;
pub mod uq;

pub use error::{Error, Result};
pub use sample::{allocate_bins, Allocation, BinPartition, CovariateEdges, StormPeakSample};

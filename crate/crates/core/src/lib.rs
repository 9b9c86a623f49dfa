//! Entropy, boundary complexity and surface corrections of multiplicative
//! integer systems.
//!
//! A system `X_Ω^p` on `ℕ^d` is given by multipliers `p = (p_1, …, p_d)` and a
//! one-dimensional vertex shift Ω; a configuration belongs to it when every
//! progression `(i_1 p_1^m, …, i_d p_d^m)_{m >= 0}` reads a word of Ω. The
//! lattice splits into such chains, so every count reduces to chain-length
//! histograms ([`lattice`]) and word counts of Ω ([`subshift`]).
//!
//! Modules:
//!
//! - [`subshift`]: transition matrices, word counts, Perron data.
//! - [`lattice`]: boxes, chains, the `J`/`K` histograms and their oracles.
//! - [`count`]: pattern counts on boxes and frames, topological entropy.
//! - [`boundary`]: boundary complexity for a speed `τ` and its inverse.
//! - [`sft2d`]: two-dimensional SFTs, strip shifts, frame counts.
//! - [`surface`]: cancellation-free surface corrections and their asymptotics.
//! - [`real`]: ball arithmetic with certified absolute error.
//! - [`config`]: JSON run configurations.
//!
//! ```
//! use mis_lab::{pattern_count_exact, LatticeBox, MisSpec, MultiplierVector, SubshiftSpec};
//!
//! let mis = MisSpec::new(MultiplierVector::new(vec![2]).unwrap(), SubshiftSpec::golden_mean());
//! let n = pattern_count_exact(&mis, &LatticeBox::from_u64(&[4]).unwrap(), 1 << 20).unwrap();
//! assert_eq!(n, 10u32.into());
//! ```

pub mod boundary;
pub mod config;
pub mod count;
pub mod error;
pub mod lattice;
pub mod real;
pub mod sft2d;
pub mod subshift;
pub mod surface;

pub use boundary::{
    boundary_coefficients, classify_level, empirical_h_boundary, h_boundary, realize, thresholds_a,
    RealizationResult, SpeedSpec,
};
pub use config::{parse_config, parse_config_str, OutputFormat, RunConfig, System};
pub use count::{
    log_pattern_count, log_pattern_count_region, mis_entropy, mis_entropy_bits, pattern_count_bruteforce,
    pattern_count_exact, region_projection_bruteforce, BoundaryRegion, MisSpec,
};
pub use error::{Budgets, MisError, Result};
pub use lattice::{
    enumerate_hist_oracle, hist_j, hist_k, ChainHistogram, HistFlavor, LatticeBox, MultiplierVector,
};
pub use real::{HighPrecReal, LnContext};
pub use sft2d::{sft_boundary_complexity, sft_realize_t, GluingProbe, Sft2dSpec, StripSystem};
pub use subshift::{PerronData, SubshiftKind, SubshiftSpec, TransitionMatrix};
pub use surface::{
    bounded_correction_offset, convergence_table, predicted_correction_power, surface_correction,
    CorrectionSeries, OffsetBound, PrecisionPolicy, SequenceSpec, TableRow,
};

pub use num_bigint::{BigInt, BigUint};
pub use num_rational::BigRational;

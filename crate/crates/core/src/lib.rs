//! Bit-accurate model of an efficient stochastic-computing outer-product
//! engine for neural-network weight updates.
//!
//! Operands are binary16 values normalized by a power-of-two vector maximum and
//! encoded as Bernoulli bitstreams against shared LFSR words. One unit cell per
//! matrix entry ANDs two streams, counts the ones, XORs the signs and packs the
//! count back into binary16 with shifts only. A full `N_delta x N_x` outer
//! product draws just `2M` random words.

pub mod encoder;
pub mod engine;
pub mod error;
pub mod lfsr;
pub mod numeric;
pub mod oracle;
pub mod train;
pub mod unit_cell;

pub use encoder::{encode, probability_of, vector_exponent, StochasticSequence, VectorExponent};
pub use engine::{apply_update, outer_product, Matrix16, MomentumSgd, OuterProductJob, UpdateMatrix};
pub use error::{Error, Result};
pub use lfsr::{derive_seed_pair, uniform_fraction, LfsrState};
pub use numeric::{exponent_ceil, floor_pow2, quantize_to_binary16, Binary16Value, PowerOfTwoScale};
pub use oracle::{analytic_moments, empirical_stats, exact_outer, EstimatorStats, Moments, SeedSchedule, StatsReport};
pub use train::{train, RunMetrics, TrainingConfig, UpdateMode};
pub use unit_cell::{f_scale, f_scale_with_lr, shift_pack, unit_cell_multiply, UnitCellResult};

//! Two-group selection under group-dependent estimation noise.
//!
//! A decision maker screens a large pool of candidates whose true quality `W`
//! is only observed through a noisy estimate `Ŵ = W + σ_G·ε`, where the noise
//! scale `σ_G` depends on the candidate's group. This crate computes, in the
//! infinite-population limit, the per-group selection fractions, the selection
//! thresholds and the expected quality of the selected pool for several
//! first-stage rules (group-oblivious ranking, γ-rule quotas, demographic
//! parity, Bayesian-optimal), in one- and two-stage pipelines. A finite
//! population Monte Carlo simulator and a scored-dataset experiment runner
//! validate the asymptotic predictions.

pub mod asymptotic;
pub mod dataset;
pub mod dist;
pub mod error;
pub mod estimate;
pub mod model;
pub mod montecarlo;
pub mod quad;
pub mod roots;
pub mod stdnorm;
pub mod verify;

pub use dist::QualityDistribution;
pub use error::{Error, Result};
pub use estimate::EstimateLaw;
pub use model::{AlgorithmSpec, Budgets, Group, GroupNoise, ModelParams, SelectionOutcome};

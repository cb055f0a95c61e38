//! Exact Poisson sampling and Metropolis–Hastings sampling of finite-volume Gibbs laws.

mod chain;
mod poisson;
mod stream;

pub use chain::{
    integrated_autocorr_time, sample_gibbs, ChainDiagnostics, GibbsChain, GibbsChainParams, MoveStats,
};
pub use poisson::{sample_poisson, PoissonSampler};
pub use stream::{replicate_streams, RandomStream, REPLICATE};

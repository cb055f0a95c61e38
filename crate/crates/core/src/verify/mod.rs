//! Paired Monte Carlo checks of the exact identities, the series oracle and
//! the closability heuristics.

mod annihilation;
mod closability;
mod estimate;
mod identities;
mod oracle;
mod run;

pub use annihilation::{verify_annihilation, AnnihilationCase, AnnihilationReport};
pub use closability::{
    closability_diagnostic, pair_potential_closability_check, ClosabilityReport, FatCantor, Verdict,
    DEFAULT_THRESHOLD, SUBSAMPLES,
};
pub use estimate::{Accumulator, MeanSe, MonteCarloEstimate};
pub use identities::{
    chaos_orthogonality_matrix, mc_expectation, verify_chaos_orthogonality, verify_div_duality,
    verify_form_gibbs, verify_form_poisson, verify_generator, verify_gnz, verify_ibp, verify_mecke,
    ExchangeFunction, IdentityReport, ABS_FLOOR, MAX_CHAOS_ORDER,
};
pub use oracle::{
    oracle_expectation, packing_limit, BoundedFn, OracleConfig, OracleFunctional, OracleResult, PointCount,
};
pub use run::{GibbsSpec, Law, ReplicateRow, RunOptions, Setup};

//! Guichardet-Fock space over `[0, r)`: chains, chain-vector evaluations,
//! adapted semi-tensor products, apparatus observables and the two
//! expectation engines.

mod chain;
mod expectation;
mod observable;
mod sampling;
mod vector;

pub use chain::{chain_split, Chain};
pub use expectation::{
    expectation_closed_form, expectation_mc, expectation_quadrature, poisson_pmf, poisson_tail,
    reduced_integrand, representative_chain, run_streams, McEstimate, McSettings, QuadratureResult,
    DEFAULT_N_MAX,
};
pub use observable::{
    class_projector_eval, number_operator_eval, projector_eval, DiagonalOp, Observable,
    ObservationClass,
};
pub use sampling::{sample_count, sample_poisson_chain, uniform_chain};
pub use vector::{
    coherent_eval, embed_local, psi_t_closed_form, psi_t_eval, semi_tensor_apply, AdaptedOperator,
    BasisLabel, ChainVector, CoherentParams, MAX_DENSE_EVENTS,
};

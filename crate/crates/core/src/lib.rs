//! Recovery of extended exponential sums
//!
//! `y(t) = Σ_j p_j(t) exp(2π λ_j t)` is recovered from finitely many Fourier
//! coefficients on `[0, P]`. The coefficients are a rational function of the
//! index, which modified AAA identifies exactly. Frequencies come from its
//! poles and polynomials from its partial fractions. `P`-periodic terms show
//! up as vanishing barycentric weights.

#![allow(non_snake_case)]
// negated comparisons are how NaN inputs get rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aaa;
pub mod error;
pub mod fourier;
pub mod io;
mod linalg;
pub mod model;
pub mod pfrac;
pub mod recovery;

pub use aaa::{aaa_fit, bary_eval, prune_zero_weights, refit_weights, AaaDiagnostics, BarycentricRational};
pub use error::{Error, Result};
pub use fourier::{
    coeff_model, coeff_monomial_exp, coeff_proper, coeff_quadrature_oracle, coeff_real_proper, confluent_params,
    FourierDataset,
};
pub use model::{model_distance, ExpTerm, ExponentialSumModel, ModelDistance};
pub use num_complex::Complex64;
pub use pfrac::{
    cluster_poles, poles, solve_residues_confluent, solve_residues_simple, ConfluentPartialFraction, FractionCluster,
    PoleCluster, PoleClusterSet,
};
pub use recovery::{
    freqs_from_poles, gammas_from_A, gammas_from_Astar, recover, recover_real_proper, RecoveryMode, RecoveryOptions,
    RecoveryReport,
};

//! Central values of Hecke L-functions to angular characters of imaginary
//! quadratic fields, and a resonance search for extreme values along dyadic
//! frequency ranges.
//!
//! The pipeline, bottom to top:
//!
//! * [`field`] — the field `K = Q(sqrt(d))`, `d < 0` squarefree: discriminant,
//!   units, class group as reduced binary quadratic forms with an exact
//!   composition table, and splitting of rational primes.
//! * [`ideals`] — nonzero integral ideals by prime factorization, lattice
//!   bases under the fixed complex embedding, canonical principal generators,
//!   and the rational/non-rational (`P0`/`P'`) decompositions.
//! * [`chars`] — the sets of angular characters of a given frequency and
//!   their evaluation on ideals.
//! * [`kernels`] — the analytic kernels: complex log-Gamma, the Gamma ratio
//!   `rho_s(x)`, the smoothed cutoff `V(y, x)` by two independent routes
//!   (vertical-line quadrature and the regularized incomplete Gamma), the
//!   weight `W_K`, and the smooth bump used for frequency averaging.
//! * [`afe`] — `L(1/2, xi_ell)` as a rapidly truncating smoothed series, with
//!   an independent smoothed-series oracle and the completed function.
//! * [`resonance`] — resonator coefficients, first-moment numerator and
//!   denominator in direct and diagonal form, Euler-product factorizations
//!   with a brute-force twin, Rankin diagnostics, off-diagonal probes, and
//!   the extreme-value search.
//! * [`exec`] — data-parallel map over frequencies with a deterministic
//!   pairwise reduction (rayon under the `parallel` feature, sequential
//!   otherwise).

// Input guards of the form `!(x >= bound)` deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod afe;
pub mod chars;
pub mod exec;
pub mod field;
pub mod ideals;
pub mod kernels;
pub mod lattice;
pub mod resonance;

pub use afe::{AfeConfig, AfeEvaluation, LambdaValue};
pub use chars::AngularCharacter;
pub use field::{FieldContext, QuadForm, Splitting};
pub use ideals::{DiagonalClass, Ideal, PrimeIdeal, PrincipalGenerator};
pub use kernels::KernelConfig;
pub use resonance::{
    MomentReport, OffDiagonalProbe, RankinDiagnostics, ResonatorSpec, SearchOutcome,
};

/// Errors shared by every layer of the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("d = {0} is not a negative squarefree integer")]
    InvalidDiscriminant(i64),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),
    #[error("domain violation: {0}")]
    Domain(String),
    #[error(
        "resonator length N = {0:.6e} is below e^10: the support window \
         [L^2, exp(log^2 L)] would be empty"
    )]
    ResonatorLengthTooSmall(f64),
    #[error("resonator length N = {n:.6e} exceeds X^(1-eps) = {bound:.6e}")]
    LengthExceedsPoissonConstraint { n: f64, bound: f64 },
    #[error("resonator length N = {n:.6e} exceeds X^(1/4-eps) = {bound:.6e}")]
    LengthExceedsDiagonalConstraint { n: f64, bound: f64 },
    #[error("Rankin parameter alpha = 1/log^3 L is not positive at L = {0:.6}")]
    RankinAlphaUndefined(f64),
    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

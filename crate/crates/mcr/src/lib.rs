//! Numerical verification workbench for multicomponent commutation relation
//! (MCR) algebras on finite site models.
//!
//! Quasiparticle systems with generalized exchange statistics are governed by
//! a unitary exchange matrix `Q(y1, y2)` acting on `V ⊗ V`, where `V = C^r` is
//! the component space and `y1, y2` are positions on the exchange axis. For
//! such an exchange to be consistent, `Q` must be unitary, satisfy the adjoint
//! symmetry `Q(y1, y2)* = Q(y2, y1)`, and solve the functional Yang-Baxter
//! equation. This crate machine-checks those axioms and everything built on
//! top of them, on a finite set of sites where every identity is exact up to
//! floating-point roundoff:
//!
//! - [`exchange`]: exchange kernel families (scalar anyon, lifted, opposite
//!   type, three component, fused), the derived kernels used by the mixed
//!   commutation relation, and validation of the axioms and the state
//!   construction assumptions.
//! - [`fock`]: the truncated Q-symmetric Fock representation: symmetrizers,
//!   creation/annihilation operators, normal-ordered operators, a direct
//!   check of the commutation relations, and vacuum expectations.
//! - [`pairings`]: pair-partition combinatorics and the closed-form moment
//!   sums that the Fock vacuum expectations must reproduce.
//! - [`wick`]: the symbolic algebra of smeared creation/annihilation symbols
//!   with normal and anti-normal ordering by term rewriting.
//! - [`quasifree`]: gauge-invariant quasi-free states realized as the vacuum
//!   of a doubled-site Fock representation, with the quasi-free and strongly
//!   quasi-free moment identities verified numerically.
//! - [`scenario`] / [`suites`]: batch driver used by the `mcr` binary.
//!
//! All verification is tolerance-based and reported through
//! [`report::ValidationReport`]; nothing is assumed that is not checked.
//!
//! # Example
//!
//! Validate a two-component kernel and cross-check a four-point vacuum
//! moment between the closed pair-partition sum and the representation:
//!
//! ```
//! use mcr::exchange::{ExchangeKernel, PhaseFn};
//! use mcr::fock::FockSpace;
//! use mcr::model::DiscreteModel;
//! use mcr::pairings::field_moment;
//! use mcr::rng::SeededRng;
//!
//! let model = DiscreteModel::new(vec![0.0, 1.0], 2, 1, 4).unwrap();
//! let kernel = ExchangeKernel::two_component(
//!     PhaseFn::ExpSignDiff { alpha: 0.8 },
//!     PhaseFn::ExpSignDiff { alpha: -0.8 },
//!     &model,
//! ).unwrap();
//! assert!(kernel.check_axioms(&model).unwrap().pass());
//!
//! let space = FockSpace::new(&kernel, &model).unwrap();
//! let mut rng = SeededRng::new(1);
//! let d = model.one_particle_dim();
//! let terms: Vec<_> = (0..4)
//!     .map(|_| (rng.complex_vector(d), rng.complex_vector(d)))
//!     .collect();
//! let closed = field_moment(&kernel, &model, &terms).unwrap();
//! let matrix = space.field_sum_expectation(&terms).unwrap();
//! assert!((closed - matrix).norm() < 1e-10);
//! ```

pub mod error;
pub mod exec;
pub mod linalg;
pub mod model;
pub mod tensor;

pub mod exchange;
pub mod fock;
pub mod pairings;
pub mod quasifree;
pub mod wick;

pub mod report;
pub mod rng;
pub mod scenario;
pub mod suites;

pub use error::Error;
pub use model::DiscreteModel;

/// Tolerance for identities that hold exactly in exact arithmetic
/// (unitarity, Yang-Baxter residuals, projector idempotence).
pub const TOL_EXACT: f64 = 1e-12;

/// Tolerance for operator identities that accumulate roundoff over longer
/// contractions (adjointness, commutation relation residuals).
pub const TOL_OP: f64 = 1e-10;

/// Tolerance for moment formulas involving long alternating sums.
pub const TOL_MOMENT: f64 = 1e-8;

/// Entrywise norm below which a coefficient tensor is treated as zero.
pub const ZERO_PRUNE: f64 = 1e-14;

//! Classical 3D integrable and superintegrable Hamiltonian systems in
//! magnetic fields that separate in Cartesian coordinates.
//!
//! The crate provides:
//!
//! * an exact-derivative algebra of separable coordinate fields
//!   ([`scalar`], [`field`]);
//! * magnetic systems with gauge handling ([`gauge`], [`system`]);
//! * conserved quantities as momentum polynomials, Poisson brackets, the
//!   second-order determining equations and linear-dependence analysis
//!   ([`poly`], [`quadspec`], [`depfit`]);
//! * a validated catalog of the known separable families ([`catalog`]);
//! * adaptive numerical flow, conservation drift, functional-independence
//!   rank and orbit-recurrence detection ([`dynamics`]);
//! * the canonical transformations that reduce these systems to two degrees
//!   of freedom ([`reduction`]).
//!
//! All types are immutable after construction and all operations are pure,
//! so everything may be used concurrently over shared descriptions.

pub mod catalog;
pub mod depfit;
pub mod dynamics;
pub mod error;
pub mod field;
pub mod gauge;
pub mod poly;
pub mod quadspec;
pub mod reduction;
pub mod sample;
pub mod scalar;
pub mod system;

pub use error::{Error, Result};
pub use field::CoeffField;
pub use gauge::GaugePotential;
pub use poly::{bracket_residual, poisson, poisson_poly, CanonicalPolynomial, MomentumPolynomial};
pub use quadspec::QuadraticIntegralSpec;
pub use scalar::{Domain, ScalarFunction1D};
pub use system::{CaseForm, MagneticSystem, PhasePoint, SINGULAR_GUARD};

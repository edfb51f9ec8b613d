//! Exact p-adic computations for congruence test vectors on GL(n): parameters and
//! congruence characters, explicit test functions, localized Whittaker functions,
//! local zeta integrals, Rankin–Selberg support laws and nice-domain decompositions.

pub mod arith;
pub mod error;
pub mod group;
pub mod nicedomain;
pub mod params;
pub mod rslocal;
pub mod testfn;
pub mod whitmodel;
pub mod zeta;

pub use error::{Error, Result};

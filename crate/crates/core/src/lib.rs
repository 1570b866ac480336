//! Exact p-adic arithmetic for the operation algebra of the Adams summand
//! `l` of p-complete connective K-theory: upper-triangular matrices over
//! `Z_p`, Gaussian polynomials, the matrices of the Adams operation and its
//! polynomials, and the integral basis of `pi_*(l ^ l)` modulo torsion as
//! explicit polynomials in `u_hat`, `v_hat`.

pub mod basis;
pub mod cli;
pub mod conj;
pub mod error;
pub mod ops;
pub mod padic;
pub mod qcalc;
pub mod serial;
pub mod utmat;
pub mod verify;

pub use error::{Error, Result};

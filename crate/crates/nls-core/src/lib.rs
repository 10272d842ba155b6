//! Spectral simulation of NLS solitons crossing a slowly varying medium
//!
//! ```text
//! i u_t + Δu + a(εx₁)|u|^{m-1}u = 0
//! ```
//!
//! in one and two space dimensions, together with the objects needed to
//! compare simulations with the reduced (effective) soliton dynamics:
//! ground states, linearized operators, first- and second-order correction
//! profiles, parameter ODEs and modulation fits.

pub mod effective;
pub mod error;
pub mod grid;
pub mod potential;
pub mod profiles;
pub mod linearized;
pub mod modulation;
pub mod soliton;
pub mod solver;
pub mod verify;

pub use error::{NlsError, Result};
pub use num_complex::Complex64 as C64;

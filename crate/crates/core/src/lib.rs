//! Annihilation-operator coherent states of a relativistic spinless particle
//! in a pure scalar potential.
//!
//! Two analytic models are provided: the linear scalar potential
//! `S(x) = k|x| - m` ([`linear_osc`]) and the relativistic Pöschl–Teller
//! potential ([`poschl_teller`]). Both reduce the Klein–Gordon problem to a
//! Schrödinger-like operator `H_s = -1/(2m) d²/dx² + (m + S)²/(2m)` whose
//! eigenvalues `ε_n` map onto positive relativistic energies
//! `E_n = sqrt(2 m ε_n)`.
//!
//! Everything computed in closed form is cross-checked by an independent
//! route: wavefunction quadrature ([`evolution`]) for expectation values and
//! a finite-difference eigensolver ([`oracle`]) for spectra.

pub mod error;
pub mod evolution;
pub mod linear_osc;
pub mod numerics;
pub mod oracle;
pub mod poschl_teller;

pub use error::{Error, Result};
pub use num_complex::Complex64;

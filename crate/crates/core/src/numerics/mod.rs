//! Special functions and numerical kernels shared by the models.

mod quadrature;
mod special;
mod sum;
mod tridiag;

pub use quadrature::{integrate_adaptive, quadrature, simpson, AdaptiveIntegral, Grid, GridFunction};
pub use special::{
    bessel_k, bessel_k_scaled, gegenbauer_all, gegenbauer_c, hermite_h, k_half, log_factorial, log_gamma,
};
pub use sum::{compensated_sum, NeumaierSum};
pub use tridiag::{eigenvalue_bracket, tridiag_smallest_eigenvalues, TridiagonalMatrix, BISECTION_RESOLUTION};

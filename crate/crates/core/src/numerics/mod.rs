//! Special functions and quadrature behind the planning objectives.

mod bessel;
mod marcum;
pub mod quadrature;
mod rician;

pub use bessel::{bessel_j0, first_j0_zero};
pub(crate) use bessel::{j0, one_minus_j0};
pub use marcum::marcum_q1;
pub use rician::{
    expected_min_rician, laguerre_half, product_of_tails, rician_mean, truncated_product_integral,
    truncation_point, RicianParams, MIN_INTEGRAL_REL_TOL, TAIL_EPS,
};

//! Special functions, quadrature and the polar overlap engine.

pub mod field;
pub mod grid;
pub mod quadrature;
pub mod special;

pub use field::{lg_field, lg_norm, lg_radial, LgFamily, LgMode, ScalarField};
pub use grid::{overlap, overlap_in, power, Disk, Ellipse, HalfPlane, PolarGrid, QuadratureRule, Region, Ring};
pub use quadrature::{gauss_legendre, gauss_legendre_adaptive, gauss_legendre_real, gauss_legendre_rule};
pub use special::{
    assoc_laguerre, bessel_i_mod, bessel_i_orders, bessel_i_scaled_orders, bessel_j, bessel_j_orders,
    bessel_j_signed,
};

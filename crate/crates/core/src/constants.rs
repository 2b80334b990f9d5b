//! CODATA 2018 values.

/// Speed of light in vacuum [m/s] (exact).
pub const C: f64 = 299_792_458.0;
/// Vacuum permeability [N/A²].
pub const MU_0: f64 = 1.256_637_062_12e-6;
/// Vacuum permittivity [F/m].
pub const EPS_0: f64 = 8.854_187_812_8e-12;
/// Reduced Planck constant [J·s] (exact).
pub const HBAR: f64 = 1.054_571_817e-34;

//! Shared fixtures for the criterion benches.

use emforce::constants::C;
use emforce::reservoir_dynamics::PulseExperiment;
use emforce::SusceptibilityModel;
use std::f64::consts::PI;

pub const WAVELENGTH: f64 = 1e-6;

pub fn carrier() -> f64 {
    2.0 * PI * C / WAVELENGTH
}

/// Lossy dielectric resonant above the carrier.
pub fn glass() -> SusceptibilityModel {
    let w = carrier();
    SusceptibilityModel::single_electric(4.0 * w, 4.0 * w, 0.04 * w).unwrap()
}

/// Near-ideal mirror at micron gaps.
pub fn mirror() -> SusceptibilityModel {
    SusceptibilityModel::single_electric(3e17, 1e10, 1e10).unwrap()
}

/// Half-wavelength glass slab in the standard pulse box.
pub fn pulse(cells_per_wavelength: usize) -> PulseExperiment {
    PulseExperiment::layered(&[(0.5 * WAVELENGTH, glass())], WAVELENGTH, cells_per_wavelength, 1.5 * WAVELENGTH, 1)
        .unwrap()
}

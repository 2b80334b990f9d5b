//! Regularized vacuum stress between planar bodies at zero temperature.
//!
//! In a vacuum layer the xx stress is
//!
//! σ̄_xx(x) = −ħ/(4π²) ∫₀^∞dξ ∫₀^∞ k dk Σ_p [∂_x∂_x′ − κ²] ḡ_p(x, x′; iξ)|_{x′=x}
//!
//! with κ² = k² + ξ²/c². The k integral is done in κ (k dk = κ dκ) from ξ/c
//! upward, and both semi-infinite variables go through t/(1−t) maps scaled by
//! the layer width.

use crate::constants::{C, HBAR};
use crate::greens::{Layer, LayerResponse, LayerStack, Medium, Spectral, POLARIZATIONS};
use crate::quadrature::gauss_legendre_on;
use crate::susceptibility::SusceptibilityModel;
use crate::{Error, Result};
use rayon::prelude::*;
use std::f64::consts::PI;

/// Node counts for the (ξ, k) integration; the rule itself is fixed to
/// Gauss–Legendre on the mapped unit interval.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureSpec {
    pub n_xi: usize,
    pub n_k: usize,
    /// Relative change allowed when both counts are doubled.
    pub tol: f64,
    t_xi: Vec<f64>,
    w_xi: Vec<f64>,
    t_k: Vec<f64>,
    w_k: Vec<f64>,
}

impl QuadratureSpec {
    pub fn new(n_xi: usize, n_k: usize) -> Result<Self> {
        if n_xi < 2 || n_k < 2 {
            return Err(Error::invalid("quadrature needs at least 2 nodes per axis"));
        }
        let (t_xi, w_xi) = gauss_legendre_on(n_xi, 0.0, 1.0);
        let (t_k, w_k) = gauss_legendre_on(n_k, 0.0, 1.0);
        Ok(QuadratureSpec { n_xi, n_k, tol: 2e-3, t_xi, w_xi, t_k, w_k })
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn doubled(&self) -> Self {
        QuadratureSpec::new(2 * self.n_xi, 2 * self.n_k).unwrap().with_tolerance(self.tol)
    }

    /// ξ nodes and weights for length scale `len`.
    pub fn xi_rule(&self, len: f64) -> (Vec<f64>, Vec<f64>) {
        map_semi_infinite(&self.t_xi, &self.w_xi, C / len)
    }

    /// Nodes and weights for q = (κ − ξ/c)·len on (0, ∞).
    pub fn kappa_rule(&self) -> (Vec<f64>, Vec<f64>) {
        map_semi_infinite(&self.t_k, &self.w_k, 1.0)
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec::new(40, 40).unwrap()
    }
}

fn map_semi_infinite(t: &[f64], w: &[f64], scale: f64) -> (Vec<f64>, Vec<f64>) {
    t.iter()
        .zip(w)
        .map(|(&t, &w)| {
            let s = 1.0 - t;
            (scale * t / s, w * scale / (s * s))
        })
        .unzip()
}

#[derive(Clone, Debug, PartialEq)]
pub struct CasimirResult {
    /// Pressure [Pa]; negative pulls the bodies together.
    pub pressure: f64,
    /// |change| when both node counts are doubled [Pa].
    pub error: f64,
    pub n_xi: usize,
    pub n_k: usize,
    /// Largest |Im| of any integrand sample relative to its modulus.
    pub imag_residue: f64,
}

struct Integral {
    value: f64,
    magnitude: f64,
    imag_residue: f64,
}

fn stress_integral(stack: &LayerStack, layer: usize, x: f64, len: f64, quad: &QuadratureSpec) -> Integral {
    let (xis, wxi) = quad.xi_rule(len);
    let (qs, wq) = quad.kappa_rule();
    let rows: Vec<(f64, f64, f64)> = xis
        .par_iter()
        .zip(&wxi)
        .map(|(&xi, &wx)| {
            let (mut val, mut mag, mut res) = (0.0, 0.0, 0.0f64);
            for (&q, &w) in qs.iter().zip(&wq) {
                let kappa = xi / C + q / len;
                let k_par = (kappa * kappa - (xi / C) * (xi / C)).max(0.0).sqrt();
                let jac = kappa * w / len;
                for pol in POLARIZATIONS {
                    let r = LayerResponse::new(stack, layer, Spectral::Imaginary(xi), k_par, pol);
                    let (dd, kk) = r.coincident_derivatives(x);
                    let f = dd + kk;
                    let m = dd.norm() + kk.norm();
                    if m > 0.0 {
                        res = res.max(f.im.abs().max(dd.im.abs()).max(kk.im.abs()) / m);
                    }
                    val += wx * jac * f.re;
                    mag += wx * jac * m;
                }
            }
            (val, mag, res)
        })
        .collect();
    let pre = -HBAR / (4.0 * PI * PI);
    let mut out = Integral { value: 0.0, magnitude: 0.0, imag_residue: 0.0 };
    for (v, m, r) in rows {
        out.value += v;
        out.magnitude += m;
        out.imag_residue = out.imag_residue.max(r);
    }
    out.value *= pre;
    out.magnitude *= pre.abs();
    out
}

fn length_scale(stack: &LayerStack, layer: usize) -> f64 {
    stack.layers()[layer]
        .thickness
        .or_else(|| stack.min_thickness())
        .unwrap_or(1e-6)
}

/// σ̄_xx at x, which must lie inside a vacuum layer. A stack without any
/// interface structure returns exactly zero.
pub fn vacuum_stress_xx(stack: &LayerStack, x: f64, quad: &QuadratureSpec) -> Result<CasimirResult> {
    let layer = stack.locate(x)?;
    if !stack.layers()[layer].medium.is_vacuum() {
        return Err(Error::invalid("vacuum stress is only defined at points in a vacuum layer"));
    }
    if stack.layers().iter().all(|l| l.medium.is_vacuum()) {
        return Ok(CasimirResult { pressure: 0.0, error: 0.0, n_xi: quad.n_xi, n_k: quad.n_k, imag_residue: 0.0 });
    }
    let len = length_scale(stack, layer);
    let fine_quad = quad.doubled();
    let (coarse, fine) = rayon::join(
        || stress_integral(stack, layer, x, len, quad),
        || stress_integral(stack, layer, x, len, &fine_quad),
    );
    let error = (fine.value - coarse.value).abs();
    let floor = 1e-12 * fine.magnitude;
    if error > quad.tol * fine.value.abs() && error > floor {
        return Err(Error::NoConvergence {
            what: "vacuum stress quadrature",
            estimate: error / fine.value.abs().max(floor),
            tolerance: quad.tol,
        });
    }
    Ok(CasimirResult {
        pressure: fine.value,
        error,
        n_xi: fine_quad.n_xi,
        n_k: fine_quad.n_k,
        imag_residue: coarse.imag_residue.max(fine.imag_residue),
    })
}

/// Pressure on everything to the right of vacuum layer `gap_layer`, from the
/// stress at the layer midpoint (the far side is assumed stress-free).
pub fn pressure_across_gap(stack: &LayerStack, gap_layer: usize, quad: &QuadratureSpec) -> Result<CasimirResult> {
    let n = stack.layers().len();
    if gap_layer == 0 || gap_layer >= n - 1 {
        return Err(Error::invalid("the gap must be a finite layer"));
    }
    let a = stack.interfaces()[gap_layer - 1];
    let b = stack.interfaces()[gap_layer];
    let mut r = vacuum_stress_xx(stack, 0.5 * (a + b), quad)?;
    r.pressure = -r.pressure;
    Ok(r)
}

/// Pressure between two half-spaces across a vacuum gap `d`.
pub fn casimir_pressure_halfspaces(
    left: &SusceptibilityModel,
    right: &SusceptibilityModel,
    d: f64,
    quad: &QuadratureSpec,
) -> Result<CasimirResult> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::invalid("gap must be positive"));
    }
    let stack = LayerStack::gap(Medium::Model(left.clone()), d, Medium::Model(right.clone()))?;
    pressure_across_gap(&stack, 1, quad)
}

/// Net vacuum pressure on a lone slab: stress just outside the right face
/// minus stress just outside the left face.
pub fn net_vacuum_force_isolated(slab: &SusceptibilityModel, thickness: f64, quad: &QuadratureSpec) -> Result<f64> {
    if !(thickness > 0.0) {
        return Err(Error::invalid("slab thickness must be positive"));
    }
    let stack = LayerStack::new(vec![
        Layer::half_infinite(Medium::Vacuum),
        Layer::finite(thickness, Medium::Model(slab.clone())),
        Layer::half_infinite(Medium::Vacuum),
    ])?;
    let left = vacuum_stress_xx(&stack, -0.5 * thickness, quad)?;
    let right = vacuum_stress_xx(&stack, 1.5 * thickness, quad)?;
    Ok(right.pressure - left.pressure)
}

/// Pressure on the right slab of a pair of equal slabs at separation `s`.
pub fn slab_pair_pressure(
    slab: &SusceptibilityModel,
    thickness: f64,
    s: f64,
    quad: &QuadratureSpec,
) -> Result<CasimirResult> {
    let m = Medium::Model(slab.clone());
    let stack = LayerStack::embedded(vec![(thickness, m.clone()), (s, Medium::Vacuum), (thickness, m)])?;
    pressure_across_gap(&stack, 2, quad)
}

/// −π²ħc/(240 d⁴), the perfect-conductor limit.
pub fn ideal_mirror_pressure(d: f64) -> f64 {
    -PI * PI * HBAR * C / (240.0 * d.powi(4))
}

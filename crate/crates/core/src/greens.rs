//! Planar multilayer Green functions at real and imaginary frequency.
//!
//! Layers are stacked along x; the first interface sits at x = 0. Within a
//! layer of thickness d between x_a and x_b the scalar Green function for
//! either polarization is
//!
//! g = iζ/(2k)·e^{ik|x−x′|} + ḡ,
//! ḡ = iζ/(2kD)·[r_L u u′ + r_R v v′ + r_L r_R e^{ikd}(u v′ + u′ v)],
//!
//! with u = e^{ik(x−x_a)}, v = e^{ik(x_b−x)}, D = 1 − r_L r_R e^{2ikd},
//! ζ = μ (TE) or ε (TM) of the layer, and r_L, r_R the reflection
//! coefficients seen from inside the layer. Only decaying exponentials
//! appear, so nothing overflows for thick layers at large ξ.

use crate::constants::C;
use crate::susceptibility::SusceptibilityModel;
use crate::{Error, Result};
use num_complex::Complex64;

#[derive(Clone, Debug, PartialEq)]
pub enum Medium {
    Vacuum,
    Model(SusceptibilityModel),
    /// Frequency-independent relative ε and μ. Useful for lossless test stacks;
    /// not causal, so avoid it in KK-type checks.
    Constant { eps: Complex64, mu: Complex64 },
}

impl Medium {
    pub fn constant(eps: f64, mu: f64) -> Self {
        Medium::Constant { eps: eps.into(), mu: mu.into() }
    }

    /// Relative (ε, μ) at the complex frequency.
    pub fn eps_mu(&self, w: Complex64) -> (Complex64, Complex64) {
        match self {
            Medium::Vacuum => (1.0.into(), 1.0.into()),
            Medium::Model(m) => (m.eps_rel(w), m.mu_rel(w)),
            Medium::Constant { eps, mu } => (*eps, *mu),
        }
    }

    pub fn is_vacuum(&self) -> bool {
        match self {
            Medium::Vacuum => true,
            Medium::Model(m) => m.is_vacuum(),
            Medium::Constant { eps, mu } => *eps == 1.0.into() && *mu == 1.0.into(),
        }
    }
}

/// Frequency argument: a real frequency or a point iξ on the imaginary axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Spectral {
    Real(f64),
    Imaginary(f64),
}

impl Spectral {
    pub fn omega(self) -> Complex64 {
        match self {
            Spectral::Real(w) => Complex64::new(w, 0.0),
            Spectral::Imaginary(xi) => Complex64::new(0.0, xi),
        }
    }

    fn validate(self) -> Result<()> {
        match self {
            Spectral::Real(w) if w.is_finite() => Ok(()),
            Spectral::Imaginary(xi) if xi.is_finite() && xi >= 0.0 => Ok(()),
            _ => Err(Error::invalid(format!("frequency {self:?} is outside the closed upper half plane"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Polarization {
    Te,
    Tm,
}

pub const POLARIZATIONS: [Polarization; 2] = [Polarization::Te, Polarization::Tm];

#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    /// None marks a half-infinite terminal layer.
    pub thickness: Option<f64>,
    pub medium: Medium,
}

impl Layer {
    pub fn half_infinite(medium: Medium) -> Self {
        Layer { thickness: None, medium }
    }

    pub fn finite(thickness: f64, medium: Medium) -> Self {
        Layer { thickness: Some(thickness), medium }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LayerStack {
    layers: Vec<Layer>,
    interfaces: Vec<f64>,
}

impl LayerStack {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        if layers.len() < 2 {
            return Err(Error::invalid("a stack needs at least its two half-infinite ends"));
        }
        let n = layers.len();
        for (i, l) in layers.iter().enumerate() {
            let terminal = i == 0 || i == n - 1;
            match (terminal, l.thickness) {
                (true, None) => {}
                (false, Some(t)) if t > 0.0 && t.is_finite() => {}
                (true, Some(_)) => return Err(Error::invalid("outermost layers must be half-infinite")),
                _ => return Err(Error::invalid(format!("layer {i} needs a positive finite thickness"))),
            }
            if let Medium::Model(m) = &l.medium {
                m.validate()?;
            }
        }
        let mut interfaces = vec![0.0];
        for l in &layers[1..n - 1] {
            let last = *interfaces.last().unwrap();
            interfaces.push(last + l.thickness.unwrap());
        }
        Ok(LayerStack { layers, interfaces })
    }

    /// Vacuum | inner layers | vacuum.
    pub fn embedded(inner: Vec<(f64, Medium)>) -> Result<Self> {
        let mut layers = vec![Layer::half_infinite(Medium::Vacuum)];
        layers.extend(inner.into_iter().map(|(t, m)| Layer::finite(t, m)));
        layers.push(Layer::half_infinite(Medium::Vacuum));
        Self::new(layers)
    }

    /// Half-space | vacuum gap of width `gap` | half-space.
    pub fn gap(left: Medium, gap: f64, right: Medium) -> Result<Self> {
        Self::new(vec![
            Layer::half_infinite(left),
            Layer::finite(gap, Medium::Vacuum),
            Layer::half_infinite(right),
        ])
    }

    /// Uniform vacuum, split at x = 0.
    pub fn vacuum() -> Self {
        Self::new(vec![Layer::half_infinite(Medium::Vacuum), Layer::half_infinite(Medium::Vacuum)]).unwrap()
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn interfaces(&self) -> &[f64] {
        &self.interfaces
    }

    /// Index of the layer strictly containing x; an error on an interface.
    pub fn locate(&self, x: f64) -> Result<usize> {
        if !x.is_finite() {
            return Err(Error::invalid("position must be finite"));
        }
        let tol = 1e-12 * self.interfaces.last().unwrap().abs().max(1e-300);
        for (i, &xi) in self.interfaces.iter().enumerate() {
            if (x - xi).abs() <= tol {
                return Err(Error::invalid(format!("x = {x} lies on interface {i}")));
            }
            if x < xi {
                return Ok(i);
            }
        }
        Ok(self.layers.len() - 1)
    }

    /// Smallest finite layer thickness, the natural length scale of the stack.
    pub fn min_thickness(&self) -> Option<f64> {
        self.layers.iter().filter_map(|l| l.thickness).reduce(f64::min)
    }
}

/// Normal wavevector and ζ of every layer.
fn layer_wavevectors(stack: &LayerStack, arg: Spectral, k_par: f64, pol: Polarization) -> Vec<(Complex64, Complex64)> {
    let w = arg.omega();
    stack
        .layers
        .iter()
        .map(|l| {
            let (eps, mu) = l.medium.eps_mu(w);
            let k = normal_wavevector(eps * mu * w * w / (C * C) - k_par * k_par);
            let zeta = match pol {
                Polarization::Te => mu,
                Polarization::Tm => eps,
            };
            (k, zeta)
        })
        .collect()
}

/// √z on the branch with Im ≥ 0 (Re ≥ 0 when Im = 0).
fn normal_wavevector(k2: Complex64) -> Complex64 {
    let k = k2.sqrt();
    if k.im < 0.0 || (k.im == 0.0 && k.re < 0.0) {
        -k
    } else {
        k
    }
}

/// Single-interface coefficient for a wave in medium i meeting medium j.
fn fresnel(ki: Complex64, zi: Complex64, kj: Complex64, zj: Complex64) -> Complex64 {
    let num = zj * ki - zi * kj;
    let den = zj * ki + zi * kj;
    if den == Complex64::new(0.0, 0.0) {
        return 0.0.into();
    }
    num / den
}

/// Reflection seen from inside each layer looking right (referenced to its
/// right face) and looking left (referenced to its left face).
fn layer_reflections(kz: &[(Complex64, Complex64)], stack: &LayerStack) -> (Vec<Complex64>, Vec<Complex64>) {
    let n = kz.len();
    let i = Complex64::i();
    let mut right = vec![Complex64::new(0.0, 0.0); n];
    for j in (0..n - 1).rev() {
        let r = fresnel(kz[j].0, kz[j].1, kz[j + 1].0, kz[j + 1].1);
        let beyond = match stack.layers[j + 1].thickness {
            Some(d) => right[j + 1] * (2.0 * i * kz[j + 1].0 * d).exp(),
            None => 0.0.into(),
        };
        right[j] = (r + beyond) / (1.0 + r * beyond);
    }
    let mut left = vec![Complex64::new(0.0, 0.0); n];
    for j in 1..n {
        let r = fresnel(kz[j].0, kz[j].1, kz[j - 1].0, kz[j - 1].1);
        let beyond = match stack.layers[j - 1].thickness {
            Some(d) => left[j - 1] * (2.0 * i * kz[j - 1].0 * d).exp(),
            None => 0.0.into(),
        };
        left[j] = (r + beyond) / (1.0 + r * beyond);
    }
    (left, right)
}

/// (r_TE, r_TM) for a wave incident from the left half-space. r_TM is the
/// magnetic-field amplitude ratio, so at normal incidence r_TM = −r_TE.
pub fn reflection_coeffs(stack: &LayerStack, arg: Spectral, k_par: f64) -> Result<(Complex64, Complex64)> {
    arg.validate()?;
    if !(k_par >= 0.0) {
        return Err(Error::invalid("k_par must be >= 0"));
    }
    let mut out = [Complex64::new(0.0, 0.0); 2];
    for (o, pol) in out.iter_mut().zip(POLARIZATIONS) {
        let kz = layer_wavevectors(stack, arg, k_par, pol);
        *o = layer_reflections(&kz, stack).1[0];
    }
    Ok((out[0], out[1]))
}

/// Everything needed to evaluate ḡ inside one layer.
#[derive(Clone, Copy, Debug)]
pub struct LayerResponse {
    pub k: Complex64,
    pub zeta: Complex64,
    pub r_left: Complex64,
    pub r_right: Complex64,
    /// Left face position (−∞ for the first layer).
    pub x_a: f64,
    /// Right face position (+∞ for the last layer).
    pub x_b: f64,
}

impl LayerResponse {
    pub fn new(stack: &LayerStack, layer: usize, arg: Spectral, k_par: f64, pol: Polarization) -> Self {
        let kz = layer_wavevectors(stack, arg, k_par, pol);
        let (left, right) = layer_reflections(&kz, stack);
        let n = stack.layers.len();
        let x_a = if layer == 0 { f64::NEG_INFINITY } else { stack.interfaces[layer - 1] };
        let x_b = if layer == n - 1 { f64::INFINITY } else { stack.interfaces[layer] };
        LayerResponse { k: kz[layer].0, zeta: kz[layer].1, r_left: left[layer], r_right: right[layer], x_a, x_b }
    }

    fn u(&self, x: f64) -> Complex64 {
        if self.x_a.is_finite() {
            (Complex64::i() * self.k * (x - self.x_a)).exp()
        } else {
            0.0.into()
        }
    }

    fn v(&self, x: f64) -> Complex64 {
        if self.x_b.is_finite() {
            (Complex64::i() * self.k * (self.x_b - x)).exp()
        } else {
            0.0.into()
        }
    }

    fn round_trip(&self) -> (Complex64, Complex64) {
        if self.x_a.is_finite() && self.x_b.is_finite() {
            let e = (Complex64::i() * self.k * (self.x_b - self.x_a)).exp();
            (e, 1.0 - self.r_left * self.r_right * e * e)
        } else {
            (0.0.into(), 1.0.into())
        }
    }

    /// Homogeneous-medium part iζ e^{ik|x−x′|}/(2k).
    pub fn free(&self, x: f64, xp: f64) -> Complex64 {
        let i = Complex64::i();
        i * self.zeta * (i * self.k * (x - xp).abs()).exp() / (2.0 * self.k)
    }

    /// ḡ(x, x′).
    pub fn regularized(&self, x: f64, xp: f64) -> Complex64 {
        let (e, d) = self.round_trip();
        let (u, up, v, vp) = (self.u(x), self.u(xp), self.v(x), self.v(xp));
        let bracket = self.r_left * u * up
            + self.r_right * v * vp
            + self.r_left * self.r_right * e * (u * vp + up * v);
        Complex64::i() * self.zeta * bracket / (2.0 * self.k * d)
    }

    /// (∂_x∂_x′ ḡ, k_x² ḡ) at coincidence, returned separately so that
    /// single-wall terms cancel only when the caller subtracts them.
    pub fn coincident_derivatives(&self, x: f64) -> (Complex64, Complex64) {
        let (e, d) = self.round_trip();
        let (u, v) = (self.u(x), self.v(x));
        let i = Complex64::i();
        let pre = i * self.zeta * self.k / (2.0 * d);
        let wall = self.r_left * u * u + self.r_right * v * v;
        let cross = 2.0 * self.r_left * self.r_right * e * u * v;
        (pre * (cross - wall), pre * (wall + cross))
    }
}

/// ḡ = G − G₀ for x, x′ in the same layer, G₀ built from that layer's medium.
pub fn green_regularized(
    stack: &LayerStack,
    arg: Spectral,
    k_par: f64,
    pol: Polarization,
    x: f64,
    xp: f64,
) -> Result<Complex64> {
    arg.validate()?;
    let layer = stack.locate(x)?;
    if stack.locate(xp)? != layer {
        return Err(Error::invalid("x and x' must lie in the same layer"));
    }
    Ok(LayerResponse::new(stack, layer, arg, k_par, pol).regularized(x, xp))
}

/// Full G = G₀ + ḡ for x, x′ in the same layer.
pub fn green_full(
    stack: &LayerStack,
    arg: Spectral,
    k_par: f64,
    pol: Polarization,
    x: f64,
    xp: f64,
) -> Result<Complex64> {
    arg.validate()?;
    let layer = stack.locate(x)?;
    if stack.locate(xp)? != layer {
        return Err(Error::invalid("x and x' must lie in the same layer"));
    }
    let r = LayerResponse::new(stack, layer, arg, k_par, pol);
    Ok(r.free(x, xp) + r.regularized(x, xp))
}

/// Im G(x, x; Ω) of the normal-incidence scalar problem. Negative values would
/// mean a loss of passivity somewhere in the solver and are reported as errors.
pub fn im_green_coincident(stack: &LayerStack, omega: f64, x: f64) -> Result<f64> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::invalid("im_green_coincident needs a real frequency > 0"));
    }
    let g = green_full(stack, Spectral::Real(omega), 0.0, Polarization::Te, x, x)?;
    let scale = g.norm().max(1e-300);
    if g.im < -1e-12 * scale {
        return Err(Error::invalid(format!(
            "Im G(x,x) = {:.3e} < 0 at omega = {omega:.3e}, x = {x:.3e}",
            g.im
        )));
    }
    Ok(g.im.max(0.0))
}

/// Normal-incidence amplitude coefficients (r, t) of the electric field for a
/// wave arriving from the left, computed with characteristic matrices.
pub fn normal_incidence(stack: &LayerStack, omega: f64) -> Result<(Complex64, Complex64)> {
    if !(omega > 0.0) {
        return Err(Error::invalid("normal_incidence needs omega > 0"));
    }
    let w = Complex64::new(omega, 0.0);
    let i = Complex64::i();
    // Admittance in units of the vacuum value: n/μ = √(ε/μ).
    let adm = |m: &Medium| {
        let (eps, mu) = m.eps_mu(w);
        let n = normal_wavevector(eps * mu);
        (n, n / mu)
    };
    let layers = stack.layers();
    let (_, y0) = adm(&layers[0].medium);
    let (_, ys) = adm(&layers[layers.len() - 1].medium);
    let mut m = [[Complex64::new(1.0, 0.0), 0.0.into()], [0.0.into(), 1.0.into()]];
    for l in &layers[1..layers.len() - 1] {
        let (n, y) = adm(&l.medium);
        let delta = n * w * l.thickness.unwrap() / C;
        let (c, s) = (delta.cos(), delta.sin());
        let layer = [[c, -i * s / y], [-i * y * s, c]];
        m = [
            [
                m[0][0] * layer[0][0] + m[0][1] * layer[1][0],
                m[0][0] * layer[0][1] + m[0][1] * layer[1][1],
            ],
            [
                m[1][0] * layer[0][0] + m[1][1] * layer[1][0],
                m[1][0] * layer[0][1] + m[1][1] * layer[1][1],
            ],
        ];
    }
    // With (E, H) continuous: incident+reflected on the left, transmitted on
    // the right, [E; H]_left = M [E; H]_right (H in units of the vacuum
    // admittance, sign following the characteristic-matrix convention).
    let b = m[0][0] + m[0][1] * ys;
    let cc = m[1][0] + m[1][1] * ys;
    let den = y0 * b + cc;
    let r = (y0 * b - cc) / den;
    let t = 2.0 * y0 / den;
    Ok((r, t))
}

/// Power reflectance and transmittance at normal incidence.
pub fn normal_incidence_power(stack: &LayerStack, omega: f64) -> Result<(f64, f64)> {
    let (r, t) = normal_incidence(stack, omega)?;
    let w = Complex64::new(omega, 0.0);
    let layers = stack.layers();
    let y = |m: &Medium| {
        let (eps, mu) = m.eps_mu(w);
        (normal_wavevector(eps * mu) / mu).re
    };
    let y0 = y(&layers[0].medium);
    let ys = y(&layers[layers.len() - 1].medium);
    Ok((r.norm_sqr(), t.norm_sqr() * ys / y0))
}

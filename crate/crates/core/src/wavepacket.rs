//! Centre-of-mass wave packet: free spreading, the pair-creation factor
//! F(t, Ω, Ω′), the fluctuation envelope and Ehrenfest-level acceleration.

use crate::casimir::CasimirResult;
use crate::constants::HBAR;
use crate::forces::ForceRecord;
use crate::susceptibility::{Family, SusceptibilityModel};
use crate::{Error, Result};
use num_complex::Complex64;
use rayon::prelude::*;

/// Gaussian packet (α/π)^{3/4} exp(−α(R−R₀)²/2).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WavePacketParams {
    /// Mass [kg].
    pub mass: f64,
    /// Width parameter [1/m²].
    pub alpha: f64,
    /// Initial centre [m].
    pub center: f64,
}

impl WavePacketParams {
    pub fn new(mass: f64, alpha: f64, center: f64) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) || !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::invalid(format!("packet needs M > 0 and alpha > 0 (got {mass}, {alpha})")));
        }
        Ok(WavePacketParams { mass, alpha, center })
    }

    /// κ = ħα/M [1/s].
    pub fn kappa(&self) -> f64 {
        HBAR * self.alpha / self.mass
    }

    pub fn spreading_time(&self) -> f64 {
        self.mass / (HBAR * self.alpha)
    }
}

/// T_s = M/(ħα) [s].
pub fn spreading_time(mass: f64, alpha: f64) -> Result<f64> {
    Ok(WavePacketParams::new(mass, alpha, 0.0)?.spreading_time())
}

/// Position variance of the freely spreading packet,
/// σ²(t) = (1 + (ħαt/M)²)/(2α).
pub fn packet_variance(params: &WavePacketParams, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::invalid("time must be >= 0"));
    }
    let s = params.kappa() * t;
    Ok((1.0 + s * s) / (2.0 * params.alpha))
}

/// F = e^{iΣt} − [1/(1+iκt)]·[1 + κ(e^{iΣt} − 1)/Σ] with Σ = Ω + Ω′,
/// rearranged so that small Σt does not cancel catastrophically.
pub fn f_factor(t: f64, omega: f64, omega_p: f64, kappa: f64) -> Complex64 {
    let sum = omega + omega_p;
    let i = Complex64::i();
    let half = 0.5 * sum * t;
    // e^{iθ} − 1 = 2i sin(θ/2) e^{iθ/2}
    let em1 = 2.0 * i * half.sin() * Complex64::from_polar(1.0, half);
    let d = 1.0 + i * kappa * t;
    em1 + (i * kappa * t - kappa * em1 / sum) / d
}

/// Two-frequency weight S(Ω, Ω′) of the envelope integral.
#[derive(Clone, Debug, PartialEq)]
pub enum FluctuationKernel {
    /// S = W(Ω)W(Ω′) with W ≥ 0 on a uniform grid (trapezoid weights).
    Separable { omega: Vec<f64>, w: Vec<f64> },
    /// S on the tensor grid omega × omega, row-major, integrated by trapezoid.
    Tabulated { omega: Vec<f64>, s: Vec<f64> },
    /// Weighted atoms (Ω, Ω′, weight).
    Points(Vec<(f64, f64, f64)>),
}

impl FluctuationKernel {
    pub fn separable_from_fn(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo > 0.0 && hi > lo) || n < 3 {
            return Err(Error::invalid("kernel grid needs 0 < lo < hi and at least 3 points"));
        }
        let h = (hi - lo) / (n - 1) as f64;
        let omega: Vec<f64> = (0..n).map(|i| lo + i as f64 * h).collect();
        let w = omega.iter().map(|&x| f(x)).collect();
        let k = FluctuationKernel::Separable { omega, w };
        k.validate()?;
        Ok(k)
    }

    /// W(Ω) ∝ Ω·Im χ_EE(Ω), normalised to unit integral and scaled by `strength`.
    pub fn from_model(model: &SusceptibilityModel, strength: f64, omega_max: f64, n: usize) -> Result<Self> {
        if model.poles(Family::Electric).is_empty() {
            return Err(Error::invalid("default kernel needs an electric pole"));
        }
        let lo = omega_max / n as f64;
        let k = Self::separable_from_fn(|w| w * model.im_chi(Family::Electric, w), lo, omega_max, n)?;
        let FluctuationKernel::Separable { omega, w } = k else { unreachable!() };
        let h = omega[1] - omega[0];
        let norm = trapezoid_weights(w.len(), h).iter().zip(&w).map(|(c, v)| c * v).sum::<f64>();
        if !(norm > 0.0) {
            return Err(Error::invalid("model has no absorption on the kernel grid"));
        }
        let w = w.iter().map(|v| strength * v / norm).collect();
        Ok(FluctuationKernel::Separable { omega, w })
    }

    pub fn validate(&self) -> Result<()> {
        let uniform = |omega: &[f64]| -> Result<()> {
            if omega.len() < 3 || omega[0] <= 0.0 {
                return Err(Error::invalid("kernel grid needs >= 3 points above 0"));
            }
            let h = omega[1] - omega[0];
            if !(h > 0.0) || omega.windows(2).any(|p| ((p[1] - p[0]) - h).abs() > 1e-9 * h) {
                return Err(Error::invalid("kernel grid must be uniform and increasing"));
            }
            Ok(())
        };
        match self {
            FluctuationKernel::Separable { omega, w } => {
                uniform(omega)?;
                if w.len() != omega.len() || w.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
                    return Err(Error::invalid("separable weights must be finite, >= 0 and match the grid"));
                }
            }
            FluctuationKernel::Tabulated { omega, s } => {
                uniform(omega)?;
                let n = omega.len();
                if s.len() != n * n || s.iter().any(|v| !v.is_finite()) {
                    return Err(Error::invalid("tabulated kernel must be n x n and finite"));
                }
                for i in 0..n {
                    for j in 0..i {
                        let (a, b) = (s[i * n + j], s[j * n + i]);
                        if (a - b).abs() > 1e-12 * a.abs().max(b.abs()) {
                            return Err(Error::invalid("tabulated kernel must be symmetric"));
                        }
                    }
                }
            }
            FluctuationKernel::Points(p) => {
                if p.iter().any(|(a, b, w)| !(*a > 0.0 && *b > 0.0) || !w.is_finite()) {
                    return Err(Error::invalid("kernel atoms need positive frequencies"));
                }
            }
        }
        Ok(())
    }

    /// Every other grid point, for the convergence check.
    fn coarsened(&self) -> Option<Self> {
        match self {
            FluctuationKernel::Separable { omega, w } if omega.len() >= 7 => {
                let m = (omega.len() - 1) / 2 * 2;
                Some(FluctuationKernel::Separable {
                    omega: omega[..=m].iter().step_by(2).copied().collect(),
                    w: w[..=m].iter().step_by(2).copied().collect(),
                })
            }
            _ => None,
        }
    }

    fn truncated(&self) -> Option<Self> {
        match self {
            FluctuationKernel::Separable { omega, w } if omega.len() >= 7 => {
                let m = (omega.len() - 1) / 2 * 2;
                Some(FluctuationKernel::Separable { omega: omega[..=m].to_vec(), w: w[..=m].to_vec() })
            }
            _ => None,
        }
    }
}

fn trapezoid_weights(n: usize, h: f64) -> Vec<f64> {
    let mut c = vec![h; n];
    c[0] = 0.5 * h;
    c[n - 1] = 0.5 * h;
    c
}

/// Σ-atoms (Σ, weight) such that ∫∫S(Ω,Ω′)g(Ω+Ω′) = Σ_k weight_k g(Σ_k).
/// For separable kernels this is the autoconvolution of W.
fn sum_density(kernel: &FluctuationKernel) -> Vec<(f64, f64)> {
    match kernel {
        FluctuationKernel::Separable { omega, w } => {
            let n = omega.len();
            let h = omega[1] - omega[0];
            let cw: Vec<f64> = trapezoid_weights(n, h).iter().zip(w).map(|(c, v)| c * v).collect();
            let mut rho = vec![0.0; 2 * n - 1];
            for i in 0..n {
                for j in 0..n {
                    rho[i + j] += cw[i] * cw[j];
                }
            }
            rho.into_iter().enumerate().map(|(k, r)| (2.0 * omega[0] + k as f64 * h, r)).collect()
        }
        FluctuationKernel::Tabulated { omega, s } => {
            let n = omega.len();
            let h = omega[1] - omega[0];
            let c = trapezoid_weights(n, h);
            let mut rho = vec![0.0; 2 * n - 1];
            for i in 0..n {
                for j in 0..n {
                    rho[i + j] += c[i] * c[j] * s[i * n + j];
                }
            }
            rho.into_iter().enumerate().map(|(k, r)| (2.0 * omega[0] + k as f64 * h, r)).collect()
        }
        FluctuationKernel::Points(p) => p.iter().map(|&(a, b, w)| (a + b, w)).collect(),
    }
}

fn envelope_from_density(rho: &[(f64, f64)], kappa: f64, ts: &[f64]) -> Vec<f64> {
    ts.par_iter()
        .map(|&t| {
            rho.iter()
                .map(|&(sum, w)| w * f_factor(t, sum, 0.0, kappa).norm() / (HBAR * sum))
                .sum()
        })
        .collect()
}

/// A(t) = ∫∫ S(Ω,Ω′)|F(t,Ω,Ω′)|/(ħ(Ω+Ω′)) dΩ dΩ′ on each time in `ts`.
///
/// Gridded kernels are checked against the same sum on every other grid
/// point; a relative change (against the largest |A|) above `tol` is an error.
pub fn fluctuation_envelope(
    kernel: &FluctuationKernel,
    params: &WavePacketParams,
    ts: &[f64],
    tol: f64,
) -> Result<Vec<f64>> {
    kernel.validate()?;
    if ts.iter().any(|t| !(*t >= 0.0)) {
        return Err(Error::invalid("envelope times must be >= 0"));
    }
    let kappa = params.kappa();
    let a = envelope_from_density(&sum_density(kernel), kappa, ts);
    if let (Some(fine), Some(coarse)) = (kernel.truncated(), kernel.coarsened()) {
        let a_fine = envelope_from_density(&sum_density(&fine), kappa, ts);
        let a_coarse = envelope_from_density(&sum_density(&coarse), kappa, ts);
        let scale = a_fine.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let change = a_fine.iter().zip(&a_coarse).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        if scale > 0.0 && change > tol * scale {
            return Err(Error::NoConvergence {
                what: "fluctuation envelope quadrature",
                estimate: change / scale,
                tolerance: tol,
            });
        }
    }
    Ok(a)
}

/// Direct tensor-product evaluation of the envelope for a separable kernel
/// given as a function; used to cross-check the factorised route.
pub fn envelope_direct(
    w: impl Fn(f64) -> f64 + Sync,
    lo: f64,
    hi: f64,
    n: usize,
    params: &WavePacketParams,
    t: f64,
) -> f64 {
    let (x, q) = crate::quadrature::gauss_legendre_on(n, lo, hi);
    let wx: Vec<f64> = x.iter().map(|&v| w(v)).collect();
    let kappa = params.kappa();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row = 0.0;
            for j in 0..n {
                let sum = x[i] + x[j];
                row += q[j] * wx[j] * f_factor(t, x[i], x[j], kappa).norm() / (HBAR * sum);
            }
            q[i] * wx[i] * row
        })
        .collect::<Vec<_>>()
        .iter()
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PacketDiagnostics {
    pub t: f64,
    pub variance: f64,
    /// ⟨R⟩ − R₀ under a constant mean acceleration.
    pub mean_shift: f64,
    pub envelope: f64,
}

pub fn diagnostics(
    params: &WavePacketParams,
    kernel: &FluctuationKernel,
    acceleration: f64,
    ts: &[f64],
    tol: f64,
) -> Result<Vec<PacketDiagnostics>> {
    let env = fluctuation_envelope(kernel, params, ts, tol)?;
    ts.iter()
        .zip(env)
        .map(|(&t, envelope)| {
            Ok(PacketDiagnostics {
                t,
                variance: packet_variance(params, t)?,
                mean_shift: 0.5 * acceleration * t * t,
                envelope,
            })
        })
        .collect()
}

/// What pushes the packet's mean.
#[derive(Clone, Debug)]
pub enum ForceSource {
    /// Coherent classical field: the 1D solver's net pressure over `area`.
    Classical { record: ForceRecord, area: f64 },
    /// Vacuum state facing another body.
    Casimir { result: CasimirResult, area: f64 },
    /// Vacuum state, nothing nearby: the net pressure on a lone body.
    Isolated { pressure: f64, area: f64 },
}

/// ⟨R̈⟩ = F/M.
pub fn mean_acceleration(source: &ForceSource, params: &WavePacketParams) -> f64 {
    let force = match source {
        ForceSource::Classical { record, area } => record.net * area,
        ForceSource::Casimir { result, area } => result.pressure * area,
        ForceSource::Isolated { pressure, area } => pressure * area,
    };
    force / params.mass
}

/// dΓ/dR from Γ sampled at body positions, by centred differences (one-sided
/// at the ends). This is the classical stand-in for the ordering term.
pub fn gamma_divergence(samples: &[(f64, f64)]) -> Result<Vec<f64>> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::invalid("need at least two (R, Gamma) samples"));
    }
    if samples.windows(2).any(|p| !(p[1].0 > p[0].0)) {
        return Err(Error::invalid("sample positions must increase"));
    }
    Ok((0..n)
        .map(|i| {
            let (a, b) = (i.saturating_sub(1), (i + 1).min(n - 1));
            (samples[b].1 - samples[a].1) / (samples[b].0 - samples[a].0)
        })
        .collect())
}

//! Causal Lorentz-pole susceptibilities and their oscillator-reservoir form.
//!
//! χ_EE is measured in units of ε₀ and χ_BB in units of 1/μ₀, so
//! ε/ε₀ = 1 + χ_EE and μ₀/μ = 1 − χ_BB.

mod kk;
mod reservoir;

pub use kk::{kk_real_from_imag, kk_real_from_imag_with_estimate};
pub use reservoir::{
    cutoff_frequency, discretize_reservoir, discretize_reservoir_with, FamilyReservoir, NodeMap,
    ReservoirDiscretization, ReservoirOptions,
};

use crate::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Electric,
    Magnetic,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Electric => "electric",
            Family::Magnetic => "magnetic",
        }
    }
}

/// One term ω_p²/(ω_0² − Ω² − iγΩ). All three parameters are angular
/// frequencies [rad/s].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LorentzPole {
    pub plasma: f64,
    pub resonance: f64,
    pub damping: f64,
}

impl LorentzPole {
    pub fn new(plasma: f64, resonance: f64, damping: f64) -> Result<Self> {
        let p = LorentzPole { plasma, resonance, damping };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.plasma.is_finite() && self.resonance.is_finite() && self.damping.is_finite();
        if !finite || self.plasma < 0.0 || self.resonance < 0.0 || self.damping <= 0.0 {
            return Err(Error::invalid(format!(
                "pole needs plasma >= 0, resonance >= 0, damping > 0 (got {}, {}, {})",
                self.plasma, self.resonance, self.damping
            )));
        }
        Ok(())
    }

    pub fn chi(&self, w: Complex64) -> Complex64 {
        let i = Complex64::i();
        self.plasma * self.plasma / (self.resonance * self.resonance - w * w - i * self.damping * w)
    }

    /// Im χ on the real axis, written out to avoid cancellation far from resonance.
    pub fn im_chi(&self, w: f64) -> f64 {
        let d = self.resonance * self.resonance - w * w;
        let gw = self.damping * w;
        self.plasma * self.plasma * gw / (d * d + gw * gw)
    }

    /// χ(iξ), real and positive.
    pub fn chi_imag_axis(&self, xi: f64) -> f64 {
        self.plasma * self.plasma / (self.resonance * self.resonance + xi * xi + self.damping * xi)
    }

    /// Retarded response kernel R(t) with P(t) = ∫ R(t−t′) E(t′) dt′ (units of χ/s).
    pub fn impulse_response(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        let (w0, g) = (self.resonance, self.damping);
        let amp = self.plasma * self.plasma * (-0.5 * g * t).exp();
        let disc = w0 * w0 - 0.25 * g * g;
        if disc > 0.0 {
            let nu = disc.sqrt();
            amp * (nu * t).sin() / nu
        } else if disc < 0.0 {
            let nu = (-disc).sqrt();
            amp * (nu * t).sinh() / nu
        } else {
            amp * t
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SusceptibilityModel {
    pub electric: Vec<LorentzPole>,
    pub magnetic: Vec<LorentzPole>,
}

impl SusceptibilityModel {
    pub fn vacuum() -> Self {
        Self::default()
    }

    /// Validates every pole. Magnetic poles additionally need ω_0 > 0 and a
    /// static χ_BB(0) < 1, otherwise μ(0) is negative and the medium stores
    /// unbounded energy.
    pub fn new(electric: Vec<LorentzPole>, magnetic: Vec<LorentzPole>) -> Result<Self> {
        let m = SusceptibilityModel { electric, magnetic };
        m.validate()?;
        Ok(m)
    }

    pub fn single_electric(plasma: f64, resonance: f64, damping: f64) -> Result<Self> {
        Self::new(vec![LorentzPole::new(plasma, resonance, damping)?], vec![])
    }

    pub fn validate(&self) -> Result<()> {
        for p in self.electric.iter().chain(&self.magnetic) {
            p.validate()?;
        }
        if self.magnetic.iter().any(|p| p.resonance == 0.0 && p.plasma > 0.0) {
            return Err(Error::invalid("magnetic poles must have a nonzero resonance"));
        }
        let static_bb: f64 = self
            .magnetic
            .iter()
            .filter(|p| p.plasma > 0.0)
            .map(|p| (p.plasma / p.resonance).powi(2))
            .sum();
        if static_bb >= 1.0 {
            return Err(Error::invalid(format!(
                "static magnetic susceptibility {static_bb} must stay below 1"
            )));
        }
        Ok(())
    }

    pub fn poles(&self, family: Family) -> &[LorentzPole] {
        match family {
            Family::Electric => &self.electric,
            Family::Magnetic => &self.magnetic,
        }
    }

    pub fn is_vacuum(&self) -> bool {
        self.electric.iter().chain(&self.magnetic).all(|p| p.plasma == 0.0)
    }

    /// χ without the half-plane check; callers guarantee Im Ω ≥ 0.
    pub fn chi(&self, family: Family, w: Complex64) -> Complex64 {
        self.poles(family).iter().map(|p| p.chi(w)).sum()
    }

    pub fn im_chi(&self, family: Family, w: f64) -> f64 {
        self.poles(family).iter().map(|p| p.im_chi(w)).sum()
    }

    pub fn chi_imag_axis(&self, family: Family, xi: f64) -> f64 {
        self.poles(family).iter().map(|p| p.chi_imag_axis(xi)).sum()
    }

    /// Relative permittivity ε/ε₀.
    pub fn eps_rel(&self, w: Complex64) -> Complex64 {
        1.0 + self.chi(Family::Electric, w)
    }

    /// Relative permeability μ/μ₀.
    pub fn mu_rel(&self, w: Complex64) -> Complex64 {
        1.0 / (1.0 - self.chi(Family::Magnetic, w))
    }

    pub fn eps_rel_imag_axis(&self, xi: f64) -> f64 {
        1.0 + self.chi_imag_axis(Family::Electric, xi)
    }

    pub fn mu_rel_imag_axis(&self, xi: f64) -> f64 {
        1.0 / (1.0 - self.chi_imag_axis(Family::Magnetic, xi))
    }

    /// Frequency of the largest Im χ_EE over a scan up to `omega_max`, refined
    /// by golden-section search.
    pub fn absorption_peak(&self, family: Family, omega_max: f64) -> f64 {
        let n = 4096;
        let h = omega_max / n as f64;
        let mut best = (h, self.im_chi(family, h));
        for i in 2..=n {
            let w = i as f64 * h;
            let v = self.im_chi(family, w);
            if v > best.1 {
                best = (w, v);
            }
        }
        let (mut a, mut b) = ((best.0 - h).max(0.0), best.0 + h);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..80 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if self.im_chi(family, c) > self.im_chi(family, d) {
                b = d;
            } else {
                a = c;
            }
        }
        0.5 * (a + b)
    }
}

/// χ(Ω) for complex Ω in the closed upper half plane.
pub fn eval_chi(model: &SusceptibilityModel, omega: Complex64, family: Family) -> Result<Complex64> {
    if omega.im < 0.0 || !omega.re.is_finite() || !omega.im.is_finite() {
        return Err(Error::invalid(format!(
            "susceptibility is only defined for Im Ω >= 0 (got {omega})"
        )));
    }
    Ok(model.chi(family, omega))
}

/// α(ω) = √(2ω Im χ(ω)/π), the oscillator coupling density. Negative ω is
/// treated as 0.
pub fn coupling_alpha(model: &SusceptibilityModel, omega: f64, family: Family) -> f64 {
    if omega <= 0.0 {
        return 0.0;
    }
    (2.0 * omega * model.im_chi(family, omega).max(0.0) / PI).sqrt()
}

use super::{Family, LorentzPole, SusceptibilityModel};
use crate::quadrature::gauss_legendre_on;
use crate::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// How Gauss–Legendre points are laid over [0, ω_max].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeMap {
    /// Plain affine map of the rule onto [0, ω_max].
    Linear,
    /// Per pole, the rule is laid on u with ω = ω_0 + γ·sinh(u), which
    /// clusters nodes on the absorption line and keeps the spacing there
    /// roughly uniform.
    Sinh,
}

#[derive(Clone, Debug)]
pub struct ReservoirOptions {
    pub map: NodeMap,
    /// N is doubled until the recurrence time clears the horizon; past this
    /// many nodes per pole the request is infeasible.
    pub max_nodes: usize,
    /// Im χ(ω_max) must be below this fraction of the peak of Im χ.
    pub cutoff: f64,
    /// Node spacing is judged where the coupling density exceeds this
    /// fraction of its maximum.
    pub band_fraction: f64,
    /// Frequencies the experiment drives; gaps there count too, however
    /// weak the coupling.
    pub drive_band: Option<(f64, f64)>,
}

impl Default for ReservoirOptions {
    fn default() -> Self {
        ReservoirOptions { map: NodeMap::Sinh, max_nodes: 1 << 14, cutoff: 1e-6, band_fraction: 1e-2, drive_band: None }
    }
}

/// Discrete oscillators standing in for one susceptibility family.
/// `couplings[j]² = weights[j]·α(ω_j)²` with α taken from the pole that
/// owns the node, so Σ_j a_j²/(ω_j² − Ω²) approximates χ(Ω).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FamilyReservoir {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub couplings: Vec<f64>,
}

impl FamilyReservoir {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Susceptibility of the discrete oscillator set.
    pub fn chi(&self, w: Complex64) -> Complex64 {
        self.nodes
            .iter()
            .zip(&self.couplings)
            .map(|(&wj, &a)| a * a / (wj * wj - w * w))
            .sum()
    }

    /// Σ_j a_j² sin(ω_j t)/ω_j, the response to an impulsive drive.
    pub fn impulse_response(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        self.nodes
            .iter()
            .zip(&self.couplings)
            .map(|(&wj, &a)| a * a * (wj * t).sin() / wj)
            .sum()
    }

    /// 2π over the widest node gap inside the band that carries coupling
    /// weight; ∞ for an empty set.
    pub fn recurrence_time(&self, band_fraction: f64) -> f64 {
        self.recurrence_time_in(band_fraction, None)
    }

    /// As `recurrence_time`, also counting every gap that overlaps `drive`.
    pub fn recurrence_time_in(&self, band_fraction: f64, drive: Option<(f64, f64)>) -> f64 {
        if self.nodes.len() < 2 {
            return f64::INFINITY;
        }
        let density: Vec<f64> = self
            .couplings
            .iter()
            .zip(&self.weights)
            .map(|(a, w)| a * a / w)
            .collect();
        let peak = density.iter().fold(0.0f64, |m, v| m.max(*v));
        let mut widest = 0.0f64;
        for j in 0..self.nodes.len() - 1 {
            let driven = drive.is_some_and(|(lo, hi)| self.nodes[j + 1] >= lo && self.nodes[j] <= hi);
            if driven || density[j].min(density[j + 1]) >= band_fraction * peak {
                widest = widest.max(self.nodes[j + 1] - self.nodes[j]);
            }
        }
        if widest == 0.0 {
            f64::INFINITY
        } else {
            2.0 * PI / widest
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReservoirDiscretization {
    pub electric: FamilyReservoir,
    pub magnetic: FamilyReservoir,
    /// Nodes per pole actually used.
    pub count: usize,
    /// Nodes per pole requested; differs from `count` when the horizon
    /// forced refinement.
    pub requested: usize,
    pub omega_max: f64,
    pub horizon: f64,
    pub recurrence_time: f64,
}

impl ReservoirDiscretization {
    pub fn family(&self, family: Family) -> &FamilyReservoir {
        match family {
            Family::Electric => &self.electric,
            Family::Magnetic => &self.magnetic,
        }
    }

    pub fn empty() -> Self {
        ReservoirDiscretization {
            electric: FamilyReservoir::default(),
            magnetic: FamilyReservoir::default(),
            count: 0,
            requested: 0,
            omega_max: 0.0,
            horizon: 0.0,
            recurrence_time: f64::INFINITY,
        }
    }

    pub fn refined(&self) -> bool {
        self.count != self.requested
    }
}

/// Smallest ω above every resonance where Im χ falls to `rel` of its peak.
pub fn cutoff_frequency(model: &SusceptibilityModel, family: Family, rel: f64) -> f64 {
    let poles = model.poles(family);
    if poles.iter().all(|p| p.plasma == 0.0) {
        return 0.0;
    }
    let top = poles.iter().map(|p| p.resonance + p.damping).fold(0.0, f64::max);
    let peak = peak_im_chi(model, family, 4.0 * top);
    let below = |w: f64| model.im_chi(family, w) < rel * peak;
    let mut hi = 2.0 * top;
    while !below(hi) {
        hi *= 2.0;
    }
    let mut lo = top;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if below(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-12 * hi {
            break;
        }
    }
    hi
}

fn peak_im_chi(model: &SusceptibilityModel, family: Family, span: f64) -> f64 {
    let mut peak = 0.0f64;
    for p in model.poles(family) {
        peak = peak.max(model.im_chi(family, p.resonance.max(0.5 * p.damping)));
    }
    let n = 2000;
    for i in 1..=n {
        peak = peak.max(model.im_chi(family, span * i as f64 / n as f64));
    }
    peak
}

/// Discretize both families with the default options.
pub fn discretize_reservoir(
    model: &SusceptibilityModel,
    n: usize,
    omega_max: f64,
    horizon: f64,
) -> Result<ReservoirDiscretization> {
    discretize_reservoir_with(model, n, omega_max, horizon, &ReservoirOptions::default())
}

pub fn discretize_reservoir_with(
    model: &SusceptibilityModel,
    n: usize,
    omega_max: f64,
    horizon: f64,
    opts: &ReservoirOptions,
) -> Result<ReservoirDiscretization> {
    model.validate()?;
    if n < 2 {
        return Err(Error::invalid(format!("reservoir needs at least 2 nodes, got {n}")));
    }
    if !(horizon >= 0.0) {
        return Err(Error::invalid("horizon must be >= 0"));
    }
    if model.is_vacuum() {
        let mut r = ReservoirDiscretization::empty();
        r.count = n;
        r.requested = n;
        r.omega_max = omega_max;
        r.horizon = horizon;
        return Ok(r);
    }
    if !(omega_max > 0.0) || !omega_max.is_finite() {
        return Err(Error::invalid("omega_max must be positive and finite"));
    }
    for family in [Family::Electric, Family::Magnetic] {
        let poles = model.poles(family);
        if poles.iter().all(|p| p.plasma == 0.0) {
            continue;
        }
        if poles.iter().any(|p| p.plasma > 0.0 && p.resonance >= omega_max) {
            return Err(Error::invalid("omega_max must exceed every resonance"));
        }
        let peak = peak_im_chi(model, family, omega_max);
        let edge = model.im_chi(family, omega_max);
        if edge > opts.cutoff * peak {
            return Err(Error::invalid(format!(
                "{} Im chi at omega_max is {:.2e} of its peak, above the cutoff {:.0e}",
                family.name(),
                edge / peak,
                opts.cutoff
            )));
        }
    }

    let mut count = n;
    loop {
        let electric = family_nodes(&model.electric, count, omega_max, opts.map);
        let magnetic = family_nodes(&model.magnetic, count, omega_max, opts.map);
        let rec = electric
            .recurrence_time_in(opts.band_fraction, opts.drive_band)
            .min(magnetic.recurrence_time_in(opts.band_fraction, opts.drive_band));
        if rec > horizon {
            return Ok(ReservoirDiscretization {
                electric,
                magnetic,
                count,
                requested: n,
                omega_max,
                horizon,
                recurrence_time: rec,
            });
        }
        if count * 2 > opts.max_nodes {
            return Err(Error::Infeasible(format!(
                "horizon {horizon:.3e} s needs more than {} nodes per pole (recurrence {rec:.3e} s at {count})",
                opts.max_nodes
            )));
        }
        count *= 2;
    }
}

fn family_nodes(poles: &[LorentzPole], n: usize, omega_max: f64, map: NodeMap) -> FamilyReservoir {
    let mut triples: Vec<(f64, f64, f64)> = Vec::new();
    for p in poles.iter().filter(|p| p.plasma > 0.0) {
        let (nodes, weights) = match map {
            NodeMap::Linear => gauss_legendre_on(n, 0.0, omega_max),
            NodeMap::Sinh => {
                let s = p.damping;
                let ua = (-p.resonance / s).asinh();
                let ub = ((omega_max - p.resonance) / s).asinh();
                let (u, wu) = gauss_legendre_on(n, ua, ub);
                let nodes = u.iter().map(|u| p.resonance + s * u.sinh()).collect();
                let weights = u.iter().zip(&wu).map(|(u, w)| w * s * u.cosh()).collect();
                (nodes, weights)
            }
        };
        for (w, q) in nodes.into_iter().zip(weights) {
            let a2 = q * 2.0 * w * p.im_chi(w) / PI;
            triples.push((w, q, a2));
        }
    }
    triples.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = FamilyReservoir::default();
    for (w, q, a2) in triples {
        if let Some(&last) = out.nodes.last() {
            if w - last <= 1e-14 * w {
                let j = out.nodes.len() - 1;
                out.weights[j] += q;
                out.couplings[j] = (out.couplings[j].powi(2) + a2).sqrt();
                continue;
            }
        }
        out.nodes.push(w);
        out.weights.push(q);
        out.couplings.push(a2.sqrt());
    }
    out
}

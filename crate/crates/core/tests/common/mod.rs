//! Shared set-ups and oracles for the time-domain tests.
#![allow(dead_code)]

use emforce::constants::C;
use emforce::greens::{normal_incidence_power, LayerStack, Medium};
use emforce::reservoir_dynamics::{time_domain_cutoff, Boundary, Grid1D, PulseExperiment, PulseSource, SlabModel};
use emforce::susceptibility::ReservoirOptions;
use emforce::{LorentzPole, SusceptibilityModel};
use std::f64::consts::PI;

pub const LAMBDA: f64 = 1e-6;

/// Carrier frequency for λ = 1 µm.
pub fn carrier() -> f64 {
    2.0 * PI * C / LAMBDA
}

/// Single electric pole with ω_p, ω_0 in units of the carrier and γ in
/// units of ω_0.
pub fn pole(plasma: f64, resonance: f64, damping: f64) -> SusceptibilityModel {
    let w = carrier();
    SusceptibilityModel::new(vec![LorentzPole::new(plasma * w, resonance * w, damping * resonance * w).unwrap()], vec![])
        .unwrap()
}

/// Strongly absorbing at the carrier.
pub fn absorber() -> SusceptibilityModel {
    pole(1.0, 1.5, 0.3)
}

/// Nearly lossless, n ≈ 1.44 at the carrier.
pub fn dielectric() -> SusceptibilityModel {
    pole(4.0, 4.0, 0.01)
}

fn options(models: &[&SusceptibilityModel], cpl: usize) -> ReservoirOptions {
    let dt = 0.5 * LAMBDA / cpl as f64 / C;
    ReservoirOptions { cutoff: time_domain_cutoff(models, dt), ..Default::default() }
}

pub struct Layout {
    pub experiment: PulseExperiment,
    /// Slab faces in order.
    pub faces: Vec<f64>,
}

/// PEC box: gap | layers | gap, each gap 17cτ + 4·(total thickness), pulse
/// launched 6cτ from the wall it starts next to, run until it has cleared
/// the far face by 8cτ. Thicknesses in wavelengths
/// must be whole cells. Faces sit on half nodes (x_min = −h/2).
pub fn layout(cpl: usize, layers: &[(f64, SusceptibilityModel)], ct: f64, direction: i8) -> Layout {
    for (t, _) in layers {
        let n = t * cpl as f64;
        assert!((n - n.round()).abs() < 1e-9, "{t} wavelengths is not a whole number of cells");
    }
    let si: Vec<_> = layers.iter().map(|(t, m)| (t * LAMBDA, m.clone())).collect();
    let experiment = PulseExperiment::layered(&si, LAMBDA, cpl, ct * LAMBDA, direction).unwrap();
    let mut faces = vec![experiment.slabs[0].x_left];
    faces.extend(experiment.slabs.iter().map(|s| s.x_right));
    Layout { experiment, faces }
}

/// Pulse-averaged (R, T) from the transfer matrix: R(ω), T(ω) weighted by the
/// energy spectrum of exp(−ξ²/2s²)cos(k₀ξ), s = cτ.
pub fn pulse_averaged_rt(layers: &[(f64, SusceptibilityModel)], ct: f64) -> (f64, f64) {
    let stack = LayerStack::embedded(layers.iter().map(|(t, m)| (t * LAMBDA, Medium::Model(m.clone()))).collect())
        .unwrap();
    let s = ct * LAMBDA;
    let k0 = 2.0 * PI / LAMBDA;
    let lo = (k0 - 9.0 / s).max(1e-3 * k0);
    let hi = k0 + 9.0 / s;
    let n = 4000;
    let (mut r, mut t, mut norm) = (0.0, 0.0, 0.0);
    for i in 0..=n {
        let k = lo + (hi - lo) * i as f64 / n as f64;
        let w = if i == 0 || i == n { 0.5 } else { 1.0 };
        let g = (-0.5 * ((k - k0) * s).powi(2)).exp() + (-0.5 * ((k + k0) * s).powi(2)).exp();
        let p = w * g * g;
        let (rr, tt) = normal_incidence_power(&stack, C * k).unwrap();
        r += p * rr;
        t += p * tt;
        norm += p;
    }
    (r / norm, t / norm)
}

/// CW set-up: absorber | 1λ | TF/SF | 2λ | slab | 2λ (probe) | absorber.
pub fn cw_layout(cpl: usize, thickness: f64, model: SusceptibilityModel) -> (emforce::reservoir_dynamics::CwExperiment, f64) {
    use emforce::reservoir_dynamics::{CwExperiment, CwSource};
    let h = LAMBDA / cpl as f64;
    let abs = 3 * cpl / 2;
    let body = (thickness * cpl as f64).round() as usize;
    let src = abs + cpl;
    let lo = src + 2 * cpl;
    let nx = lo + body + 2 * cpl + abs;
    let grid = Grid1D::new(-0.5 * h, h, nx, 0.5).unwrap();
    let x0 = lo as f64 * h;
    let x1 = x0 + body as f64 * h;
    let period = LAMBDA / C;
    let exp = CwExperiment {
        grid,
        absorber_cells: abs,
        reservoir_options: options(&[&model], cpl),
        slabs: vec![SlabModel { x_left: x0, x_right: x1, model }],
        reservoir_nodes: 200,
        source: CwSource { omega: carrier(), amplitude: 1.0, node: src, ramp: 5.0 * period },
        settle_periods: 20,
        average_periods: 10,
        probe_node: lo + body + cpl,
    };
    (exp, x1 - x0)
}

/// Long weakly absorbing slab [10λ, 22λ] with a short pulse launched at
/// 4.5λ; everything lands on the same physical times at any cpl.
pub fn long_slab(cpl: usize, model: SusceptibilityModel, steps: usize) -> PulseExperiment {
    let h = LAMBDA / cpl as f64;
    let nx = 24 * cpl;
    let grid = Grid1D::new(-0.5 * h, h, nx, 0.5).unwrap();
    let ct = 0.75;
    PulseExperiment {
        grid,
        boundary: Boundary::Pec,
        reservoir_options: options(&[&model], cpl),
        slabs: vec![SlabModel { x_left: 10.0 * LAMBDA, x_right: 22.0 * LAMBDA, model }],
        reservoir_nodes: 200,
        pulse: PulseSource {
            carrier: carrier(),
            width: ct * LAMBDA / C,
            amplitude: 1.0,
            launch_cell: (4.5 * cpl as f64) as usize,
            direction: 1,
        },
        steps,
        snapshot_every: 0,
        body_mass: None,
    }
}

/// Two consecutive detailed snapshots of the whole grid after `steps` steps.
pub fn snapshot_pair(exp: &PulseExperiment, steps: usize) -> (emforce::Snapshot, emforce::Snapshot) {
    let mut sim = exp.build().unwrap();
    for _ in 0..steps {
        sim.step().unwrap();
    }
    let nx = exp.grid.nx;
    let a = sim.step_capture(0, nx, true).unwrap();
    let b = sim.step_capture(0, nx, true).unwrap();
    (a, b)
}

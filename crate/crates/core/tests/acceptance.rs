//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

mod common;

use common::*;
use emforce::casimir::{
    casimir_pressure_halfspaces, ideal_mirror_pressure, net_vacuum_force_isolated, vacuum_stress_xx,
};
use emforce::constants::C;
use emforce::forces::verify_stress_identity;
use emforce::greens::{normal_incidence, LayerStack, Medium};
use emforce::reservoir_dynamics::Grid1D;
use emforce::susceptibility::kk_real_from_imag;
use emforce::wavepacket::{f_factor, fluctuation_envelope, packet_variance, spreading_time};
use emforce::{Complex64, Family, FluctuationKernel, QuadratureSpec, SusceptibilityModel, WavePacketParams};
use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

type Verdict = (bool, String);

fn within(x: f64, tol: f64) -> bool {
    x.is_finite() && x.abs() < tol
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

/// Lorentz pole (1, 1, 0.1) on a 2¹² grid; error relative to |χ(Ω)|.
fn kk_round_trip() -> Verdict {
    const TOL: f64 = 1e-3;
    const BUDGET: f64 = 1.0;
    let start = Instant::now();
    let m = SusceptibilityModel::single_electric(1.0, 1.0, 0.1).unwrap();
    let n = 1 << 12;
    let w: Vec<f64> = (0..=n).map(|i| 20.0 * i as f64 / n as f64).collect();
    let im: Vec<f64> = w.iter().map(|&x| m.im_chi(Family::Electric, x)).collect();
    let mut worst = 0.0f64;
    for k in 0..=300 {
        let at = 3.0 * k as f64 / 300.0;
        let exact = m.chi(Family::Electric, Complex64::new(at, 0.0));
        let got = kk_real_from_imag(&w, &im, at, TOL).unwrap();
        worst = worst.max((got - exact.re).abs() / exact.norm());
    }
    let t = secs(start.elapsed());
    (within(worst, TOL) && t < BUDGET, format!("max rel error {worst:.2e} (< {TOL:.0e}), {t:.3} s (< {BUDGET} s)"))
}

fn energy_conservation() -> Verdict {
    const TOL: f64 = 1e-3;
    let mut sim = layout(40, &[(0.5, absorber())], 1.5, 1).experiment.build().unwrap();
    let u0 = sim.total_energy();
    for _ in 0..10_000 {
        sim.step().unwrap();
    }
    let drift = sim.total_energy() / u0 - 1.0;
    let stored = sim.reservoir_energy() / u0;
    (within(drift, TOL), format!("drift {drift:.2e} over 1e4 steps (< {TOL:.0e}), reservoir holds {stored:.3} of U0"))
}

fn force_law() -> Verdict {
    const TOL: f64 = 1e-2;
    const BUDGET: f64 = 60.0;
    const NX: usize = 4096;
    let mut l = layout(72, &[(0.5, absorber())], 1.5, 1);
    let g = l.experiment.grid;
    assert!(g.nx <= NX);
    l.experiment.grid = Grid1D::new(g.x_min, g.dx, NX, g.courant()).unwrap();
    let start = Instant::now();
    let out = l.experiment.run().unwrap();
    let t = secs(start.elapsed());
    let f = &out.force;
    let surface = f.integrate(|r| r.surface);
    let impulse = f.integrate(|r| r.net);
    let abraham = f.integrate(|r| r.abraham_rate);
    let rel = (surface - impulse - abraham) / impulse;
    (
        within(rel, TOL) && t < BUDGET,
        format!("imbalance {rel:.2e} of impulse (< {TOL:.0e}), N_x = {NX}, {t:.1} s (< {BUDGET} s)"),
    )
}

/// Peak of either term over the whole run; containment is where the vacuum
/// stress at both faces is below 1e-6 of that peak.
fn abraham_containment() -> Verdict {
    const TOL: f64 = 2e-2;
    let cpl = 40;
    let tr = long_slab(cpl, dielectric(), 36 * cpl).trace().unwrap();
    let recs = &tr.force.records;
    let peak = recs.iter().map(|r| r.net.abs().max(r.abraham_rate.abs())).fold(0.0, f64::max);
    let inside: Vec<_> = recs.iter().filter(|r| r.surface.abs() < 1e-6 * peak).collect();
    let worst = inside.iter().map(|r| (r.net + r.abraham_rate).abs()).fold(0.0, f64::max) / peak;
    (
        !inside.is_empty() && within(worst, TOL),
        format!("max |MR'' + dG/dt| = {worst:.2e} of peak (< {TOL:.0e}) over {} contained steps", inside.len()),
    )
}

fn radiation_pressure() -> Verdict {
    const TOL: f64 = 2e-2;
    let model = absorber();
    let (exp, d) = cw_layout(40, 0.5, model.clone());
    let out = exp.run().unwrap();
    let stack = LayerStack::embedded(vec![(d, Medium::Model(model))]).unwrap();
    let (r, t) = normal_incidence(&stack, carrier()).unwrap();
    let expect = (1.0 + r.norm_sqr() - t.norm_sqr()) * out.intensity / C;
    let rel = out.pressure / expect - 1.0;
    (within(rel, TOL), format!("F/((1+R-T)I/c) - 1 = {rel:.2e} (< {TOL:.0e})"))
}

fn mirror(d: f64) -> SusceptibilityModel {
    // ω_p d/c = 1000: the finite-conductivity correction is ~16c/(3ω_p d) ≈ 0.5%.
    let wp = 1000.0 * C / d;
    SusceptibilityModel::single_electric(wp, 0.0, 1e-6 * wp).unwrap()
}

fn casimir_mirror_limit() -> Verdict {
    const TOL: f64 = 2e-2;
    const DOUBLING: f64 = 2e-3;
    const BUDGET: f64 = 10.0;
    let q = QuadratureSpec::new(20, 20).unwrap();
    let mut ok = true;
    let mut notes = Vec::new();
    for d in [1e-7, 1e-6, 1e-5] {
        let start = Instant::now();
        let m = mirror(d);
        let r = casimir_pressure_halfspaces(&m, &m, d, &q).unwrap();
        let t = secs(start.elapsed());
        let dev = r.pressure / ideal_mirror_pressure(d) - 1.0;
        let change = r.error / r.pressure.abs();
        ok &= within(dev, TOL) && within(change, DOUBLING) && t < BUDGET;
        notes.push(format!("d={d:.0e}: {dev:+.2e}, doubling {change:.1e}, {t:.2} s"));
    }
    (ok, format!("{} (tol {TOL:.0e} / {DOUBLING:.0e} / {BUDGET} s)", notes.join("; ")))
}

fn silica_like() -> SusceptibilityModel {
    SusceptibilityModel::single_electric(1.6e16, 1.5e16, 1e14).unwrap()
}

fn isolated_null() -> Verdict {
    const TOL: f64 = 1e-3;
    let t = 1e-7;
    let q = QuadratureSpec::default();
    let m = silica_like();
    let lone = net_vacuum_force_isolated(&m, t, &q).unwrap();
    let pair = casimir_pressure_halfspaces(&m, &m, t, &q).unwrap().pressure;
    let rel = lone / pair;
    (within(rel, TOL), format!("|F_lone| / |P_pair| = {:.2e} (< {TOL:.0e})", rel.abs()))
}

fn gap_uniformity() -> Verdict {
    const TOL: f64 = 1e-3;
    let d = 1e-6;
    let m = Medium::Model(mirror(d));
    let stack = LayerStack::gap(m.clone(), d, m).unwrap();
    let q = QuadratureSpec::new(30, 30).unwrap();
    let s: Vec<f64> =
        (1..10).map(|k| vacuum_stress_xx(&stack, 0.1 * k as f64 * d, &q).unwrap().pressure).collect();
    let hi = s.iter().cloned().fold(f64::MIN, f64::max);
    let lo = s.iter().cloned().fold(f64::MAX, f64::min);
    let var = (hi - lo) / s[4].abs();
    (within(var, TOL), format!("max-min across gap {var:.2e} of |sigma| (< {TOL:.0e})"))
}

fn packet_kinematics() -> Verdict {
    const TOL: f64 = 1e-14;
    let p = WavePacketParams::new(1e-14, 1e18, 0.0).unwrap();
    let ts = spreading_time(1e-14, 1e18).unwrap();
    let v0 = packet_variance(&p, 0.0).unwrap();
    let mut worst = (v0 * 2.0 * 1e18 - 1.0).abs();
    for k in 0..=50 {
        let t = 0.1 * k as f64 * ts;
        let law = (1.0 + (t / ts).powi(2)) / 2e18;
        worst = worst.max((packet_variance(&p, t).unwrap() / law - 1.0).abs());
    }
    (
        within(worst, TOL) && (90.0..=100.0).contains(&ts),
        format!("variance law rel error {worst:.1e} (< {TOL:.0e}), T_s = {ts:.2} s (in [90, 100])"),
    )
}

fn f_factor_properties() -> Verdict {
    const TOL: f64 = 1e-12;
    let zero = [(1.0, 2.0, 0.5), (1e15, 3e15, 1e-2), (0.1, 0.2, 100.0)].iter().all(|&(a, b, k)| {
        f_factor(0.0, a, b, k) == Complex64::new(0.0, 0.0)
    });
    // ‖F − (e^{iΣt} − 1)‖ against κ: slope of the log-log fit.
    let (t, a, b) = (1.7, 0.9, 1.6);
    let gap = |k: f64| (f_factor(t, a, b, k) - (Complex64::new(0.0, (a + b) * t).exp() - 1.0)).norm();
    let slopes: Vec<f64> = [1e-2, 1e-3, 1e-4].iter().map(|&k| (gap(k) / gap(k / 10.0)).log10()).collect();
    let linear = slopes.iter().all(|s| (s - 1.0).abs() < 1e-2);
    // Values from 40-digit arithmetic.
    let cases = [
        (1.0, 3.0, 0.5, -1.5340681642577105444, 0.389637840545188562),
        (2.5, 0.7, 1.3, -0.58913356183612291192, 0.49196786921460446213),
        (40.0, 2.0, 1e-6, -1.1103866870255487564, -0.993848157001320768),
    ];
    let spot = cases
        .iter()
        .map(|&(t, s, k, re, im)| {
            let exact = Complex64::new(re, im);
            (f_factor(t, 0.5 * s, 0.5 * s, k) - exact).norm() / exact.norm()
        })
        .fold(0.0, f64::max);
    (
        zero && linear && spot < TOL,
        format!("F(0)=0: {zero}, kappa slopes {slopes:.3?}, spot error {spot:.1e} (< {TOL:.0e})"),
    )
}

fn stress_identity_order() -> Verdict {
    const TOL: f64 = 0.3;
    let model = absorber();
    let l2: Vec<f64> = [40usize, 80, 160]
        .iter()
        .map(|&cpl| {
            let steps = 27 * cpl;
            let (a, b) = snapshot_pair(&long_slab(cpl, model.clone(), steps + 4), steps);
            verify_stress_identity(&a, &b, Some((9.0 * LAMBDA, 23.0 * LAMBDA))).unwrap().l2
        })
        .collect();
    let orders: Vec<f64> = l2.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    (
        orders.iter().all(|o| within(o - 2.0, TOL)),
        format!("orders {orders:.3?} at 40/80/160 cells per wavelength (2 +- {TOL})"),
    )
}

fn fluctuation_timescale() -> Verdict {
    const TOL: f64 = 0.1;
    let w0 = 2e15;
    let model = SusceptibilityModel::single_electric(w0, w0, 0.05 * w0).unwrap();
    let kernel = FluctuationKernel::from_model(&model, 1.0, 3.0 * w0, 3000).unwrap();
    let peak = model.absorption_peak(Family::Electric, 3.0 * w0);
    let expect = 2.0 * PI / (2.0 * peak);
    let p = WavePacketParams::new(1e-14, 1e18, 0.0).unwrap();
    // Step incommensurate with the expected period.
    let ts: Vec<f64> = (0..2000).map(|i| i as f64 * expect / 97.3).collect();
    let a = fluctuation_envelope(&kernel, &p, &ts, 1e-3).unwrap();
    let maxima: Vec<f64> = (1..a.len() - 1).filter(|&i| a[i] > a[i - 1] && a[i] >= a[i + 1]).map(|i| ts[i]).collect();
    if maxima.len() < 2 {
        return (false, "envelope has no oscillation".into());
    }
    let period = (maxima[maxima.len() - 1] - maxima[0]) / (maxima.len() - 1) as f64;
    let rel = period / expect - 1.0;
    (within(rel, TOL), format!("period {period:.3e} s vs 2pi/(2 Omega_peak) {expect:.3e} s: {rel:+.2e} (< {TOL})"))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 12] = [
        ("Kramers-Kronig round trip", kk_round_trip),
        ("energy conservation", energy_conservation),
        ("force law momentum balance", force_law),
        ("Abraham momentum while contained", abraham_containment),
        ("cycle-averaged radiation pressure", radiation_pressure),
        ("Casimir mirror limit", casimir_mirror_limit),
        ("isolated-body vacuum null", isolated_null),
        ("gap stress uniformity", gap_uniformity),
        ("packet kinematics", packet_kinematics),
        ("F-factor properties", f_factor_properties),
        ("stress identity convergence", stress_identity_order),
        ("fluctuation timescale", fluctuation_timescale),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = match catch_unwind(AssertUnwindSafe(run)) {
            Ok(v) => v,
            Err(e) => {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                (false, format!("panicked: {msg}"))
            }
        };
        failed += usize::from(!pass);
        println!(
            "criterion {:>2} {} {name}: {detail} [{:.1} s]",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            secs(start.elapsed())
        );
    }
    println!("acceptance: {} of 12 passed", 12 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

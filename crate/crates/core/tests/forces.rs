mod common;

use common::*;
use emforce::constants::{C, HBAR};
use emforce::forces::{ab_phase, body_force, gamma_classical, gamma_direct, verify_stress_identity};
use emforce::greens::{normal_incidence, LayerStack, Medium};
use emforce::reservoir_dynamics::{reservoir_for, Boundary, Simulation, Slab};

#[test]
fn no_field_no_force() {
    let l = layout(40, &[(0.5, absorber())], 1.5, 1);
    let exp = &l.experiment;
    let slab = Slab {
        x_left: l.faces[0],
        x_right: l.faces[1],
        reservoir: reservoir_for(&absorber(), 200, 0.0, &exp.reservoir_options).unwrap(),
    };
    let mut sim = Simulation::new(exp.grid, vec![slab], Boundary::Pec).unwrap();
    let (lo, hi) = sim.slab_nodes()[0];
    let snaps: Vec<_> = (0..5).map(|_| sim.step_capture(lo - 2, hi + 2, false).unwrap()).collect();
    let f = body_force(&snaps, sim.body_extent().unwrap()).unwrap();
    assert!(f.records.iter().all(|r| r.surface == 0.0 && r.net == 0.0 && r.abraham_rate == 0.0));
    assert!(f.warnings.is_empty());
}

#[test]
fn momentum_balance_over_a_full_interaction() {
    let out = layout(40, &[(0.5, absorber())], 1.5, 1).experiment.run().unwrap();
    let f = &out.force;
    let surface = f.integrate(|r| r.surface);
    let impulse = f.integrate(|r| r.net);
    let abraham = f.integrate(|r| r.abraham_rate);
    assert!(impulse > 0.0);
    assert!((surface - impulse - abraham).abs() < 1e-2 * impulse.abs());
    // Photon bookkeeping: the body takes (1 + R − T) of the incident momentum.
    let expect = out.momentum_initial * (1.0 + out.reflectance - out.transmittance);
    assert!((impulse / expect - 1.0).abs() < 1e-2, "impulse {impulse} vs {expect}");
    let drift = (out.momentum_final + impulse) / out.momentum_initial - 1.0;
    assert!(drift.abs() < 1e-2, "momentum drift {drift}");
}

#[test]
fn contained_pulse_pushes_against_its_abraham_momentum() {
    let cpl = 40;
    let tr = long_slab(cpl, dielectric(), 36 * cpl).trace().unwrap();
    let recs = &tr.force.records;
    let peak = recs.iter().map(|r| r.net.abs().max(r.abraham_rate.abs())).fold(0.0, f64::max);
    let contained: Vec<_> = recs.iter().filter(|r| r.surface.abs() < 1e-6 * peak).collect();
    assert!(contained.len() > 100);
    let worst = contained.iter().map(|r| (r.net + r.abraham_rate).abs()).fold(0.0, f64::max);
    assert!(worst < 2e-2 * peak, "worst {:e} of peak", worst / peak);
}

#[test]
fn steady_illumination_pressure() {
    let model = absorber();
    let (exp, d) = cw_layout(40, 0.5, model.clone());
    let out = exp.run().unwrap();
    let stack = LayerStack::embedded(vec![(d, Medium::Model(model))]).unwrap();
    let (r, t) = normal_incidence(&stack, carrier()).unwrap();
    let expect = (1.0 + r.norm_sqr() - t.norm_sqr()) * out.intensity / C;
    assert!((out.pressure / expect - 1.0).abs() < 2e-2, "{}", out.pressure / expect);
    assert!((out.net / expect - 1.0).abs() < 2e-2, "{}", out.net / expect);
}

#[test]
fn stress_identity_residual_is_second_order() {
    let model = pole(1.0, 2.0, 0.05);
    // Slab interior (with its faces) and the vacuum in front of it.
    let (mut slab, mut vac) = (Vec::new(), Vec::new());
    for cpl in [40usize, 80, 160] {
        let steps = 27 * cpl;
        let (a, b) = snapshot_pair(&long_slab(cpl, model.clone(), steps + 4), steps);
        slab.push(verify_stress_identity(&a, &b, Some((9.0 * LAMBDA, 23.0 * LAMBDA))).unwrap().l2);
        vac.push(verify_stress_identity(&a, &b, Some((0.5 * LAMBDA, 9.5 * LAMBDA))).unwrap().l2);
    }
    for l2 in [slab, vac] {
        for w in l2.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!((order - 2.0).abs() < 0.3, "order {order} from {l2:?}");
        }
    }
}

#[test]
fn gamma_terms() {
    let cpl = 40;
    let exp = long_slab(cpl, pole(1.0, 2.0, 0.05), 27 * cpl + 4);
    let mut sim = exp.build().unwrap();
    let nx = exp.grid.nx;
    let quiet = sim.step_capture(0, nx, true).unwrap();
    let g0 = gamma_classical(&quiet, 1e-9).unwrap();
    // Nothing has reached the slab yet.
    assert_eq!((g0.gamma, g0.magnetic, g0.polarization, g0.reservoir), (0.0, 0.0, 0.0, 0.0));
    for _ in 0..27 * cpl {
        sim.step().unwrap();
    }
    let a = sim.step_capture(0, nx, true).unwrap();
    let b = sim.step_capture(0, nx, true).unwrap();
    let c = sim.step_capture(0, nx, true).unwrap();
    let g = gamma_classical(&b, 1e-9).unwrap();
    assert_eq!(g.magnetic, 0.0);
    assert!(g.polarization != 0.0 && g.reservoir != 0.0);
    assert_eq!(g.gamma, g.polarization + g.reservoir);
    let d = gamma_direct(&a, &b, &c).unwrap();
    assert!((g.gamma / d - 1.0).abs() < 1e-2);
    assert!(g.gauge_drift < 1e-9);
}

#[test]
fn gamma_needs_detail() {
    let exp = long_slab(40, absorber(), 10);
    let mut sim = exp.build().unwrap();
    let s = sim.step_capture(0, exp.grid.nx, false).unwrap();
    assert!(gamma_classical(&s, 1e-9).is_err());
}

#[test]
fn ab_phase_examples() {
    let n = 400;
    let circle = |g: f64| -> Vec<([f64; 3], [f64; 3])> {
        (0..=n)
            .map(|k| {
                let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                let (s, c) = th.sin_cos();
                ([c, s, 0.0], [-s * g, c * g, 0.0])
            })
            .collect()
    };
    let g = 1e-34;
    let phi = ab_phase(&circle(g)).unwrap();
    let exact = -2.0 * std::f64::consts::PI * g / HBAR;
    // Trapezoid on the polygon: relative error (2π/n)²/6.
    assert!((phi / exact - 1.0).abs() < 1e-4);
    let constant: Vec<_> = circle(0.0).into_iter().map(|(r, _)| (r, [3e-30, -1e-30, 2e-30])).collect();
    assert!(ab_phase(&constant).unwrap().abs() < 1e-9);
    assert_eq!(ab_phase(&circle(0.0)).unwrap(), 0.0);
    let mut open = circle(g);
    open.pop();
    open.pop();
    assert!(ab_phase(&open).is_err());
}

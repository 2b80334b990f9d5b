use emforce::susceptibility::discretize_reservoir;
use emforce::{Complex64, Family, SusceptibilityModel};

fn pole() -> SusceptibilityModel {
    SusceptibilityModel::single_electric(1.0, 1.0, 0.1).unwrap()
}

#[test]
fn driven_bath_settles_to_the_susceptibility() {
    let m = pole();
    let r = discretize_reservoir(&m, 200, 25.0, 200.0).unwrap();
    let bath = &r.electric;
    let (w0, dt, t_end) = (1.0f64, 2e-3, 200.0);
    let drive = |t: f64| {
        let ramp = if t < 10.0 { (0.5 * std::f64::consts::PI * t / 10.0).sin().powi(2) } else { 1.0 };
        ramp * (w0 * t).sin()
    };
    let n = bath.len();
    let (mut x, mut v) = (vec![0.0; n], vec![0.0; n]);
    let steps = (t_end / dt) as usize;
    let (mut cc, mut cs, mut ss, mut pc, mut ps) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for k in 0..steps {
        let t = k as f64 * dt;
        // Velocity Verlet for ẍ + ω²x = a E.
        let e0 = drive(t);
        let e1 = drive(t + dt);
        for j in 0..n {
            let (w2, a) = (bath.nodes[j].powi(2), bath.couplings[j]);
            let acc0 = a * e0 - w2 * x[j];
            x[j] += dt * v[j] + 0.5 * dt * dt * acc0;
            v[j] += 0.5 * dt * (acc0 + a * e1 - w2 * x[j]);
        }
        let t1 = t + dt;
        if t1 > 160.0 {
            let p: f64 = (0..n).map(|j| bath.couplings[j] * x[j]).sum();
            let (c, s) = ((w0 * t1).cos(), (w0 * t1).sin());
            cc += c * c;
            cs += c * s;
            ss += s * s;
            pc += p * c;
            ps += p * s;
        }
    }
    // Least-squares fit P ≈ α sin ωt + β cos ωt.
    let det = cc * ss - cs * cs;
    let alpha = (ps * cc - pc * cs) / det;
    let beta = (pc * ss - ps * cs) / det;
    let exact = m.chi(Family::Electric, Complex64::new(w0, 0.0));
    let got = (alpha * alpha + beta * beta).sqrt();
    assert!((got / exact.norm() - 1.0).abs() < 1e-2, "{got} vs {}", exact.norm());
    // sin(ωt − φ) = cos φ sin ωt − sin φ cos ωt with φ = arg χ.
    assert!((alpha - exact.re).abs() < 2e-2 * exact.norm());
    assert!((-beta - exact.im).abs() < 2e-2 * exact.norm());
}

#[test]
fn impulse_fidelity_improves_with_node_count() {
    let m = pole();
    let p = m.poles(Family::Electric)[0];
    let horizon = 20.0;
    let errs: Vec<f64> = [25usize, 50, 100]
        .iter()
        .map(|&n| {
            let r = discretize_reservoir(&m, n, 25.0, horizon).unwrap();
            assert_eq!(r.count, n);
            let samples = 2000;
            let (mut num, mut den) = (0.0, 0.0);
            for k in 0..samples {
                let t = horizon * k as f64 / samples as f64;
                let exact = p.impulse_response(t);
                num += (r.electric.impulse_response(t) - exact).powi(2);
                den += exact * exact;
            }
            (num / den).sqrt()
        })
        .collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
}

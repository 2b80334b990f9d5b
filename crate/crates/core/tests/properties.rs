use emforce::constants::{C, EPS_0};
use emforce::forces::{ab_phase, maxwell_stress};
use emforce::greens::{green_full, im_green_coincident, reflection_coeffs, LayerStack, Medium, Polarization, Spectral};
use emforce::susceptibility::{coupling_alpha, eval_chi, kk_real_from_imag};
use emforce::wavepacket::{f_factor, fluctuation_envelope, packet_variance};
use emforce::{Complex64, Family, FluctuationKernel, LorentzPole, SusceptibilityModel, WavePacketParams};
use proptest::prelude::*;

fn pole_strategy() -> impl Strategy<Value = LorentzPole> {
    (0.1f64..3.0, 0.0f64..3.0, 0.01f64..2.0).prop_map(|(p, r, g)| LorentzPole::new(p, r, g).unwrap())
}

/// Magnetic poles with static χ_BB below 1/2 so that μ stays positive.
fn magnetic_strategy() -> impl Strategy<Value = LorentzPole> {
    (0.0f64..0.7, 0.5f64..3.0, 0.01f64..2.0).prop_map(|(f, r, g)| LorentzPole::new(f * r, r, g).unwrap())
}

fn model_strategy() -> impl Strategy<Value = SusceptibilityModel> {
    (prop::collection::vec(pole_strategy(), 1..4), prop::option::of(magnetic_strategy()))
        .prop_map(|(e, b)| SusceptibilityModel::new(e, b.into_iter().collect()).unwrap())
}

/// Model at optical scale: unit-scale poles times 10¹⁵ rad/s.
fn scaled(m: &SusceptibilityModel) -> SusceptibilityModel {
    let s = |p: &LorentzPole| LorentzPole::new(p.plasma * 1e15, p.resonance * 1e15, p.damping * 1e15).unwrap();
    SusceptibilityModel::new(
        m.poles(Family::Electric).iter().map(s).collect(),
        m.poles(Family::Magnetic).iter().map(s).collect(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn susceptibility_is_passive(m in model_strategy(), w in 1e-3f64..50.0) {
        for fam in [Family::Electric, Family::Magnetic] {
            let chi = eval_chi(&m, Complex64::new(w, 0.0), fam).unwrap();
            if !m.poles(fam).is_empty() {
                prop_assert!(chi.im > 0.0);
            }
        }
        prop_assert!(eval_chi(&m, Complex64::new(w, -1e-9), Family::Electric).is_err());
    }

    #[test]
    fn imaginary_axis_values_are_real_positive_decreasing(
        m in model_strategy(),
        mut xi in prop::collection::vec(1e-3f64..100.0, 2..20),
    ) {
        xi.sort_by(f64::total_cmp);
        xi.dedup();
        let vals: Vec<f64> = xi
            .iter()
            .map(|&x| {
                let c = eval_chi(&m, Complex64::new(0.0, x), Family::Electric).unwrap();
                assert!(c.im.abs() <= 1e-14 * c.re.abs());
                c.re
            })
            .collect();
        prop_assert!(vals.iter().all(|v| *v > 0.0));
        prop_assert!(vals.windows(2).all(|p| p[1] < p[0]));
    }

    #[test]
    fn coupling_density_identity(m in model_strategy(), w in 1e-3f64..50.0) {
        let a = coupling_alpha(&m, w, Family::Electric);
        let rhs = 2.0 * w / std::f64::consts::PI * w * w * m.im_chi(Family::Electric, w);
        prop_assert!((a * a * w * w - rhs).abs() <= 1e-12 * rhs);
    }

    #[test]
    fn maxwell_stress_symmetry_and_trace(
        e in prop::array::uniform3(-1e3f64..1e3),
        b in prop::array::uniform3(-1e-5f64..1e-5),
    ) {
        let s = maxwell_stress(e, b);
        prop_assert!(s.is_symmetric());
        let e2: f64 = e.iter().map(|v| v * v).sum();
        let b2: f64 = b.iter().map(|v| v * v).sum();
        let expect = -0.5 * EPS_0 * (e2 + C * C * b2);
        prop_assert!((s.trace() - expect).abs() <= 1e-12 * expect.abs().max(f64::MIN_POSITIVE));
    }

    #[test]
    fn ab_phase_ignores_node_insertion(
        pts in prop::collection::vec(prop::array::uniform3(-1.0f64..1.0), 3..12),
        a in prop::array::uniform3(prop::array::uniform3(-1e-34f64..1e-34)),
        g0 in prop::array::uniform3(-1e-34f64..1e-34),
    ) {
        // Γ linear in R, so the trapezoid rule is exact on each segment.
        let gamma = |r: [f64; 3]| -> [f64; 3] {
            let mut g = g0;
            for i in 0..3 {
                for j in 0..3 {
                    g[i] += a[i][j] * r[j];
                }
            }
            g
        };
        let mut ring = pts.clone();
        ring.push(pts[0]);
        let path: Vec<_> = ring.iter().map(|&r| (r, gamma(r))).collect();
        let mut fine = Vec::new();
        for w in ring.windows(2) {
            fine.push((w[0], gamma(w[0])));
            for k in 1..3 {
                let f = k as f64 / 3.0;
                let r = [0, 1, 2].map(|i| w[0][i] + f * (w[1][i] - w[0][i]));
                fine.push((r, gamma(r)));
            }
        }
        fine.push((ring[0], gamma(ring[0])));
        let coarse = ab_phase(&path).unwrap();
        let refined = ab_phase(&fine).unwrap();
        let scale = coarse.abs().max(1e-9);
        prop_assert!((coarse - refined).abs() <= 1e-9 * scale);
        let reversed: Vec<_> = path.iter().rev().cloned().collect();
        prop_assert!((ab_phase(&reversed).unwrap() + coarse).abs() <= 1e-9 * scale);
    }

    #[test]
    fn f_factor_is_bounded(t in 0.0f64..100.0, a in 1e-3f64..10.0, b in 1e-3f64..10.0, k in 0.0f64..10.0) {
        let f = f_factor(t, a, b, k);
        prop_assert!(f.norm() <= 2.0 + 2.0 * k / (a + b) + 1e-12);
    }

    #[test]
    fn variance_grows_as_the_spreading_law(
        mass in 1e-20f64..1e-10,
        alpha in 1e14f64..1e20,
        mut ts in prop::collection::vec(0.0f64..1e4, 2..10),
    ) {
        let p = WavePacketParams::new(mass, alpha, 0.0).unwrap();
        ts.sort_by(f64::total_cmp);
        let v0 = packet_variance(&p, 0.0).unwrap();
        let mut prev = v0;
        for t in ts {
            let v = packet_variance(&p, t).unwrap();
            prop_assert!(v >= prev);
            let r = 1.0 + (t / p.spreading_time()).powi(2);
            prop_assert!((v / v0 - r).abs() <= 4.0 * f64::EPSILON * r);
            prev = v;
        }
    }

    #[test]
    fn envelope_starts_at_zero(atoms in prop::collection::vec((1e13f64..1e16, 1e13f64..1e16, 0.0f64..1.0), 1..8)) {
        let p = WavePacketParams::new(1e-14, 1e18, 0.0).unwrap();
        let a = fluctuation_envelope(&FluctuationKernel::Points(atoms), &p, &[0.0, 1e-15], 1e-2).unwrap();
        prop_assert_eq!(a[0], 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn green_function_invariants(
        m in model_strategy(),
        thick in prop::collection::vec(5e-8f64..5e-7, 1..4),
        w in 0.2e15f64..5e15,
        kf in 0.0f64..0.9,
        xs in (0.05f64..0.95, 0.05f64..0.95),
    ) {
        let m = scaled(&m);
        let layers: Vec<(f64, Medium)> = thick
            .iter()
            .enumerate()
            .map(|(i, &t)| (t, if i % 2 == 0 { Medium::Model(m.clone()) } else { Medium::constant(2.5, 1.0) }))
            .collect();
        let stack = LayerStack::embedded(layers).unwrap();
        let (r_te, r_tm) = reflection_coeffs(&stack, Spectral::Real(w), kf * w / C).unwrap();
        prop_assert!(r_te.norm() <= 1.0 + 1e-12 && r_tm.norm() <= 1.0 + 1e-12);
        let (i_te, i_tm) = reflection_coeffs(&stack, Spectral::Imaginary(w), kf * w / C).unwrap();
        prop_assert!(i_te.im.abs() <= 1e-12 * i_te.norm().max(1e-300));
        prop_assert!(i_tm.im.abs() <= 1e-12 * i_tm.norm().max(1e-300));
        // Any point in the first slab layer, and in the vacuum in front.
        let x = xs.0 * thick[0];
        let xp = xs.1 * thick[0];
        for pol in [Polarization::Te, Polarization::Tm] {
            let a = green_full(&stack, Spectral::Real(w), kf * w / C, pol, x, xp).unwrap();
            let b = green_full(&stack, Spectral::Real(w), kf * w / C, pol, xp, x).unwrap();
            prop_assert!((a - b).norm() <= 1e-10 * a.norm());
        }
        prop_assert!(im_green_coincident(&stack, w, -xs.0 * 1e-6).unwrap() >= 0.0);
    }

    #[test]
    fn kramers_kronig_round_trip(p in 0.3f64..2.0, r in 0.5f64..1.5, g in 0.1f64..0.5) {
        let m = SusceptibilityModel::single_electric(p, r, g).unwrap();
        let n = 4096;
        let top = 20.0;
        let w: Vec<f64> = (0..=n).map(|i| top * i as f64 / n as f64).collect();
        let im: Vec<f64> = w.iter().map(|&x| m.im_chi(Family::Electric, x)).collect();
        for k in 0..=30 {
            let at = 3.0 * r * k as f64 / 30.0;
            let exact = m.chi(Family::Electric, Complex64::new(at, 0.0));
            let got = kk_real_from_imag(&w, &im, at, 1e-3).unwrap();
            prop_assert!((got - exact.re).abs() < 1e-3 * exact.norm(), "at {}: {} vs {}", at, got, exact.re);
        }
    }
}

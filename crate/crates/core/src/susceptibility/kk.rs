use crate::quadrature::simpson_uniform;
use crate::{Error, Result};
use std::f64::consts::PI;

/// Re χ(Ω) = (2/π) P∫₀^∞ ω Im χ(ω)/(ω² − Ω²) dω from Im χ sampled on a
/// uniform grid starting at ω = 0.
///
/// The pole is removed by subtracting f(Ω) from f = ω Im χ and adding the
/// closed-form principal value of f(Ω)/(ω² − Ω²) over [0, ω_max]. The error
/// estimate compares against the same rule on every other sample; it is
/// measured relative to max |Im χ| and must stay below `tol`.
pub fn kk_real_from_imag(omega: &[f64], im_chi: &[f64], at: f64, tol: f64) -> Result<f64> {
    let (value, estimate) = kk_real_from_imag_with_estimate(omega, im_chi, at)?;
    let scale = im_chi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale > 0.0 && estimate > tol * scale {
        return Err(Error::NoConvergence {
            what: "Kramers-Kronig transform",
            estimate: estimate / scale,
            tolerance: tol,
        });
    }
    Ok(value)
}

/// As [`kk_real_from_imag`], returning (value, absolute error estimate)
/// without judging convergence.
pub fn kk_real_from_imag_with_estimate(omega: &[f64], im_chi: &[f64], at: f64) -> Result<(f64, f64)> {
    let h = check_grid(omega, im_chi)?;
    if !(at >= 0.0) || !at.is_finite() {
        return Err(Error::invalid(format!("KK evaluation point must be finite and >= 0, got {at}")));
    }
    let w_max = omega[omega.len() - 1];
    if at < w_max + h && at > w_max - h {
        return Err(Error::invalid(format!(
            "KK evaluation point {at} lies within one grid step of the grid end {w_max}"
        )));
    }
    let f: Vec<f64> = omega.iter().zip(im_chi).map(|(w, v)| w * v).collect();
    let full = principal_value(&f, h, at);
    // Coarse comparison on an even number of intervals that keeps the
    // evaluation point clear of the truncated end.
    let mut m = (f.len() - 1) / 2 * 2;
    while m > 14 && at < (m as f64 + 2.0) * h && at > (m as f64 - 2.0) * h {
        m -= 2;
    }
    let fine = &f[..=m];
    let coarse: Vec<f64> = fine.iter().step_by(2).copied().collect();
    let a = if m == f.len() - 1 { full } else { principal_value(fine, h, at) };
    let b = principal_value(&coarse, 2.0 * h, at);
    Ok((full, ((a - b) / 15.0).abs()))
}

fn check_grid(omega: &[f64], im_chi: &[f64]) -> Result<f64> {
    if omega.len() != im_chi.len() {
        return Err(Error::invalid("frequency grid and samples differ in length"));
    }
    if omega.len() < 16 {
        return Err(Error::invalid("KK transform needs at least 16 samples"));
    }
    if omega[0] != 0.0 {
        return Err(Error::invalid("KK grid must start at omega = 0"));
    }
    let h = omega[1] - omega[0];
    if !(h > 0.0) {
        return Err(Error::invalid("KK grid must be increasing"));
    }
    for (i, w) in omega.iter().enumerate() {
        if (w - i as f64 * h).abs() > 1e-9 * h * (i as f64 + 1.0) {
            return Err(Error::invalid("KK grid must be uniform"));
        }
    }
    if im_chi.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("Im chi samples must be finite"));
    }
    Ok(h)
}

/// (2/π) P∫₀^W f(ω)/(ω² − Ω²) dω for f sampled at ω_i = i·h.
fn principal_value(f: &[f64], h: f64, at: f64) -> f64 {
    let n = f.len();
    let w_max = (n - 1) as f64 * h;
    let mut y = vec![0.0; n];
    if at == 0.0 {
        for i in 1..n {
            let w = i as f64 * h;
            y[i] = f[i] / (w * w);
        }
        y[0] = 3.0 * y[1] - 3.0 * y[2] + y[3];
        return 2.0 / PI * simpson_uniform(&y, h);
    }
    if at > w_max {
        for (i, v) in y.iter_mut().enumerate() {
            let w = i as f64 * h;
            *v = f[i] / (w * w - at * at);
        }
        return 2.0 / PI * simpson_uniform(&y, h);
    }
    let f_at = lagrange4(f, h, at);
    for (i, v) in y.iter_mut().enumerate() {
        let w = i as f64 * h;
        let d = w - at;
        *v = if d.abs() < 1e-9 * h {
            let slope = if i == 0 {
                (f[1] - f[0]) / h
            } else if i == n - 1 {
                (f[i] - f[i - 1]) / h
            } else {
                (f[i + 1] - f[i - 1]) / (2.0 * h)
            };
            slope / (2.0 * at)
        } else {
            (f[i] - f_at) / (d * (w + at))
        };
    }
    let tail = f_at * ((w_max - at) / (w_max + at)).abs().ln() / (2.0 * at);
    2.0 / PI * (simpson_uniform(&y, h) + tail)
}

/// Cubic Lagrange interpolation of uniformly spaced samples at x.
fn lagrange4(f: &[f64], h: f64, x: f64) -> f64 {
    let n = f.len();
    let j = ((x / h).floor() as isize - 1).clamp(0, n as isize - 4) as usize;
    let mut sum = 0.0;
    for k in 0..4 {
        let xk = (j + k) as f64 * h;
        let mut l = 1.0;
        for m in 0..4 {
            if m != k {
                let xm = (j + m) as f64 * h;
                l *= (x - xm) / (xk - xm);
            }
        }
        sum += f[j + k] * l;
    }
    sum
}

//! Gauss–Legendre rules and the interval maps built on them.

use std::f64::consts::PI;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [-1, 1],
/// nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "empty quadrature rule");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        // Tricomi's initial guess, then Newton on P_n.
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                let (_, d) = legendre_with_derivative(n, z);
                dp = d;
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    (p1, n * (z * p1 - p0) / (z * z - 1.0))
}

/// Gauss–Legendre rule mapped affinely onto [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let h = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (
        x.iter().map(|t| mid + h * t).collect(),
        w.iter().map(|v| h * v).collect(),
    )
}

/// Rule on (0, ∞) from t ∈ (0, 1) through `x = scale·t/(1−t)`.
///
/// Gauss points never touch the endpoints, so integrands singular at 0 are
/// fine as long as they are integrable.
pub fn semi_infinite(n: usize, scale: f64) -> (Vec<f64>, Vec<f64>) {
    let (t, w) = gauss_legendre_on(n, 0.0, 1.0);
    let mut xs = Vec::with_capacity(n);
    let mut ws = Vec::with_capacity(n);
    for (t, w) in t.into_iter().zip(w) {
        let s = 1.0 - t;
        xs.push(scale * t / s);
        ws.push(w * scale / (s * s));
    }
    (xs, ws)
}

/// Composite Simpson on uniformly spaced samples; an odd interval count
/// finishes with the 3/8 rule on the last three intervals.
pub fn simpson_uniform(y: &[f64], h: f64) -> f64 {
    let m = y.len().saturating_sub(1);
    match m {
        0 => 0.0,
        1 => 0.5 * h * (y[0] + y[1]),
        2 => h / 3.0 * (y[0] + 4.0 * y[1] + y[2]),
        3 => 3.0 * h / 8.0 * (y[0] + 3.0 * y[1] + 3.0 * y[2] + y[3]),
        _ if m % 2 == 1 => {
            let k = m - 3;
            simpson_uniform(&y[..=k], h)
                + 3.0 * h / 8.0 * (y[k] + 3.0 * y[k + 1] + 3.0 * y[k + 2] + y[k + 3])
        }
        _ => {
            let mut s = y[0] + y[m];
            for (i, v) in y.iter().enumerate().take(m).skip(1) {
                s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
            }
            s * h / 3.0
        }
    }
}

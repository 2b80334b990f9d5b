//! Classical force bookkeeping on time-domain snapshots: Maxwell stress,
//! Abraham momentum, the body force balance, the Γ vector, the AB-type phase
//! and the local stress identity.

use crate::constants::{C, EPS_0, HBAR, MU_0};
use crate::reservoir_dynamics::Snapshot;
use crate::{Error, Result};

/// Maxwell stress tensor at a point [Pa].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StressSample {
    pub sigma: [[f64; 3]; 3],
}

impl StressSample {
    pub fn xx(&self) -> f64 {
        self.sigma[0][0]
    }

    pub fn trace(&self) -> f64 {
        (0..3).map(|i| self.sigma[i][i]).sum()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..3).all(|i| (0..3).all(|j| self.sigma[i][j] == self.sigma[j][i]))
    }
}

/// σ = ε₀[E⊗E + c²B⊗B − ½𝟙(E² + c²B²)].
pub fn maxwell_stress(e: [f64; 3], b: [f64; 3]) -> StressSample {
    let c2 = C * C;
    let u = e.iter().map(|v| v * v).sum::<f64>() + c2 * b.iter().map(|v| v * v).sum::<f64>();
    let mut sigma = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let iso = if i == j { 0.5 * u } else { 0.0 };
            sigma[i][j] = EPS_0 * (e[i] * e[j] + c2 * (b[i] * b[j]) - iso);
        }
    }
    StressSample { sigma }
}

/// σ_xx for E = E ŷ, B = B ẑ.
pub fn stress_xx(e: f64, b: f64) -> f64 {
    -0.5 * (EPS_0 * e * e + b * b / MU_0)
}

/// 𝒫_A = E × H / c².
pub fn abraham_momentum_density(e: [f64; 3], h: [f64; 3]) -> [f64; 3] {
    let c2 = C * C;
    [
        (e[1] * h[2] - e[2] * h[1]) / c2,
        (e[2] * h[0] - e[0] * h[2]) / c2,
        (e[0] * h[1] - e[1] * h[0]) / c2,
    ]
}

/// Per-area force balance at one instant [N/m²].
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ForceRecord {
    pub t: f64,
    /// σ_xx(x_R⁺) − σ_xx(x_L⁻).
    pub surface: f64,
    /// d/dt ∫ E H / c² dx over the body and the evaluation margins.
    pub abraham_rate: f64,
    /// M·R̈ from the Lorentz force on the polarization and magnetization.
    pub net: f64,
    /// surface − abraham_rate − net.
    pub residual: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BodyForce {
    pub records: Vec<ForceRecord>,
    pub warnings: Vec<String>,
}

impl BodyForce {
    /// Trapezoid integral of a record column over time.
    pub fn integrate(&self, f: impl Fn(&ForceRecord) -> f64) -> f64 {
        self.records.windows(2).map(|w| 0.5 * (f(&w[0]) + f(&w[1])) * (w[1].t - w[0].t)).sum()
    }
}

struct Faces {
    left: usize,
    right: usize,
}

fn locate_faces(s: &Snapshot, extent: (f64, f64)) -> Result<Faces> {
    let inside: Vec<usize> = (0..s.len()).filter(|&i| s.x[i] > extent.0 && s.x[i] < extent.1).collect();
    let (Some(&lo), Some(&hi)) = (inside.first(), inside.last()) else {
        return Err(Error::invalid("body extent contains no grid nodes"));
    };
    if lo == 0 || hi + 1 >= s.len() {
        return Err(Error::invalid("snapshot window must include a vacuum node beyond each face"));
    }
    Ok(Faces { left: lo - 1, right: hi + 1 })
}

/// Node values of E·H/c² integrated by trapezoid over [left, right].
fn abraham_momentum(s: &Snapshot, f: &Faces) -> f64 {
    let h = s.to_nodes(&s.h_mid());
    let mut g = 0.0;
    for i in f.left..=f.right {
        let w = if i == f.left || i == f.right { 0.5 } else { 1.0 };
        g += w * s.e[i] * h[i];
    }
    g * s.dx / (C * C)
}

fn stress_at(s: &Snapshot, h: &[f64], i: usize) -> f64 {
    -0.5 * (EPS_0 * s.e[i] * s.e[i] + MU_0 * h[i] * h[i])
}

/// ∫(Ṗ B + M ∂_x B) dx at t ∓ Δt/2.
fn lorentz_half(s: &Snapshot, next: bool) -> f64 {
    let (pd, b, m) = if next { (&s.p_dot_next, &s.b_next, &s.m_next) } else { (&s.p_dot_prev, &s.b_prev, &s.m_prev) };
    let bn = s.to_nodes(b);
    let mut f: f64 = pd.iter().zip(&bn).map(|(p, b)| p * b).sum();
    for k in 1..b.len().saturating_sub(1) {
        if m[k] != 0.0 {
            f += m[k] * (b[k + 1] - b[k - 1]) / (2.0 * s.dx);
        }
    }
    f * s.dx
}

/// ∫ E M / c² dx at t.
fn em_coupling(s: &Snapshot) -> f64 {
    let m: Vec<f64> = s.m_prev.iter().zip(&s.m_next).map(|(a, b)| 0.5 * (a + b)).collect();
    if m.iter().all(|v| *v == 0.0) {
        return 0.0;
    }
    let mn = s.to_nodes(&m);
    s.e.iter().zip(&mn).map(|(e, m)| e * m).sum::<f64>() * s.dx / (C * C)
}

/// Force balance for each snapshot of a time-ordered sequence. Rates use
/// centred differences (one-sided at the ends).
pub fn body_force(snapshots: &[Snapshot], extent: (f64, f64)) -> Result<BodyForce> {
    let Some(s0) = snapshots.first() else {
        return Ok(BodyForce::default());
    };
    let faces = locate_faces(s0, extent)?;
    let mut warnings = Vec::new();
    if s0.in_body[faces.left] || s0.in_body[faces.right] {
        warnings.push("stress evaluation node lies inside matter; the surface term is not a vacuum stress".into());
    }
    for w in snapshots.windows(2) {
        if w[1].first != w[0].first || w[1].len() != w[0].len() || !(w[1].t > w[0].t) {
            return Err(Error::invalid("snapshots must share a window and be strictly time ordered"));
        }
    }
    let n = snapshots.len();
    let mut g = Vec::with_capacity(n);
    let mut q = Vec::with_capacity(n);
    let mut out = Vec::with_capacity(n);
    for s in snapshots {
        g.push(abraham_momentum(s, &faces));
        q.push(em_coupling(s));
    }
    let rate = |v: &[f64], k: usize| -> f64 {
        if n < 2 {
            return 0.0;
        }
        let (a, b) = (k.saturating_sub(1), (k + 1).min(n - 1));
        (v[b] - v[a]) / (snapshots[b].t - snapshots[a].t)
    };
    for (k, s) in snapshots.iter().enumerate() {
        let h = s.to_nodes(&s.h_mid());
        let surface = stress_at(s, &h, faces.right) - stress_at(s, &h, faces.left);
        let abraham_rate = rate(&g, k);
        let net = 0.5 * (lorentz_half(s, false) + lorentz_half(s, true)) + rate(&q, k);
        out.push(ForceRecord { t: s.t, surface, abraham_rate, net, residual: surface - abraham_rate - net });
    }
    Ok(BodyForce { records: out, warnings })
}

/// Γ and its parts at one instant [kg/(m·s)] (per unit area).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GammaRecord {
    pub t: f64,
    /// Full Γ_x = magnetic + polarization + reservoir.
    pub gamma: f64,
    /// ∫ M E / c².
    pub magnetic: f64,
    /// ∫ P ∂_x A.
    pub polarization: f64,
    /// −Σ_j ∫ ∂_x X_j Π_j.
    pub reservoir: f64,
    /// max |∂_x A − B| / max |B| over the window.
    pub gauge_drift: f64,
}

/// Γ on a detailed snapshot, with A taken from the time-integrated E.
pub fn gamma_classical(s: &Snapshot, gauge_tol: f64) -> Result<GammaRecord> {
    if !s.detailed {
        return Err(Error::invalid("gamma needs a detailed snapshot (reservoir gradients)"));
    }
    let h = s.dx;
    let b_a: Vec<f64> = (0..s.len() - 1)
        .map(|k| 0.5 * ((s.a_prev[k + 1] - s.a_prev[k]) + (s.a_next[k + 1] - s.a_next[k])) / h)
        .collect();
    let b_native = s.b_mid();
    let scale = b_native.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let drift = b_a.iter().zip(&b_native).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let gauge_drift = if scale > 0.0 { drift / scale } else { drift };
    if gauge_drift > gauge_tol {
        return Err(Error::NoConvergence { what: "vector potential gauge drift", estimate: gauge_drift, tolerance: gauge_tol });
    }
    let b_nodes = s.to_nodes(&b_a);
    let polarization: f64 = s.p.iter().zip(&b_nodes).map(|(p, b)| p * b).sum::<f64>() * h;
    let magnetic = em_coupling(s);
    let reservoir = -s.reservoir_momentum.iter().sum::<f64>() * h;
    Ok(GammaRecord {
        t: s.t,
        gamma: magnetic + polarization + reservoir,
        magnetic,
        polarization,
        reservoir,
        gauge_drift,
    })
}

/// Γ from three consecutive detailed snapshots using native B and
/// Ẋ = (X^{n+1} − X^{n−1})/(2Δt) in place of A and Π.
pub fn gamma_direct(prev: &Snapshot, cur: &Snapshot, next: &Snapshot) -> Result<f64> {
    if !(prev.detailed && cur.detailed && next.detailed) {
        return Err(Error::invalid("gamma cross-check needs detailed snapshots"));
    }
    if prev.raw_x_e.len() != cur.raw_x_e.len() || next.raw_x_e.len() != cur.raw_x_e.len() {
        return Err(Error::invalid("snapshots describe different slabs"));
    }
    let h = cur.dx;
    let dt2 = next.t - prev.t;
    let bn = cur.to_nodes(&cur.b_mid());
    let mut g: f64 = cur.p.iter().zip(&bn).map(|(p, b)| p * b).sum::<f64>() * h + em_coupling(cur);
    for ((xp, (_, ne, xc)), xn) in prev.raw_x_e.iter().zip(&cur.raw_x_e).zip(&next.raw_x_e) {
        let ne = *ne;
        let cells = xc.len() / ne.max(1);
        let at = |q: isize, j: usize| if q < 0 || q as usize >= cells { 0.0 } else { xc[q as usize * ne + j] };
        let mut acc = 0.0;
        for q in 0..cells {
            for j in 0..ne {
                let grad = (at(q as isize + 1, j) - at(q as isize - 1, j)) / (2.0 * h);
                let vel = (xn.2[q * ne + j] - xp.2[q * ne + j]) / dt2;
                acc += grad * vel;
            }
        }
        g -= acc * h;
    }
    Ok(g)
}

/// Δφ = −(1/ħ)∮Γ·dR by the trapezoid rule over a closed path of
/// (R, Γ) samples.
pub fn ab_phase(path: &[([f64; 3], [f64; 3])]) -> Result<f64> {
    if path.len() < 3 {
        return Err(Error::invalid("path needs at least three points"));
    }
    let (r0, _) = path[0];
    let (r1, _) = path[path.len() - 1];
    let size = path.iter().flat_map(|(r, _)| r.iter()).fold(0.0f64, |m, v| m.max(v.abs()));
    let gap = (0..3).map(|i| (r1[i] - r0[i]).powi(2)).sum::<f64>().sqrt();
    if gap > 1e-12 * size.max(f64::MIN_POSITIVE) {
        return Err(Error::invalid("path is not closed"));
    }
    let line: f64 = path
        .windows(2)
        .map(|w| (0..3).map(|i| 0.5 * (w[0].1[i] + w[1].1[i]) * (w[1].0[i] - w[0].0[i])).sum::<f64>())
        .sum();
    Ok(-line / HBAR)
}

/// Residual norms of ∂_xσ − ε₀∂_t(E B) − (Ṗ − ∂_x M) B.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StressResidual {
    pub max: f64,
    pub l2: f64,
    /// L² norm of ∂_xσ alone, for scale.
    pub scale: f64,
}

/// Pointwise stress-identity residual at t + Δt/2 between two consecutive
/// snapshots, over interior nodes of the window with x in `range`
/// (everything when None).
pub fn verify_stress_identity(s0: &Snapshot, s1: &Snapshot, range: Option<(f64, f64)>) -> Result<StressResidual> {
    if s1.step != s0.step + 1 || s1.first != s0.first || s1.len() != s0.len() {
        return Err(Error::invalid("stress identity needs consecutive snapshots of one window"));
    }
    let (h, dt) = (s0.dx, s0.dt);
    let n = s0.len();
    // σ on half nodes at t + Δt/2; B there is native.
    let sigma: Vec<f64> = (0..n - 1)
        .map(|k| {
            let e = 0.25 * (s0.e[k] + s0.e[k + 1] + s1.e[k] + s1.e[k + 1]);
            stress_xx(e, s0.b_next[k])
        })
        .collect();
    let b0 = s0.to_nodes(&s0.b_mid());
    let b1 = s1.to_nodes(&s1.b_mid());
    let (mut max, mut sum, mut ssum) = (0.0f64, 0.0, 0.0);
    for i in 1..n - 1 {
        if let Some((a, b)) = range {
            if s0.x[i] < a || s0.x[i] > b {
                continue;
            }
        }
        let div = (sigma[i] - sigma[i - 1]) / h;
        let dmom = EPS_0 * (s1.e[i] * b1[i] - s0.e[i] * b0[i]) / dt;
        let b_half = 0.5 * (s0.b_next[i - 1] + s0.b_next[i]);
        let curl_m = (s0.m_next[i] - s0.m_next[i - 1]) / h;
        let r = div - dmom - (s0.p_dot_next[i] - curl_m) * b_half;
        max = max.max(r.abs());
        sum += r * r;
        ssum += div * div;
    }
    Ok(StressResidual { max, l2: (sum * h).sqrt(), scale: (ssum * h).sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stress_examples() {
        let e0 = 3.0;
        let s = maxwell_stress([e0, 0.0, 0.0], [0.0; 3]);
        assert!((s.xx() - 0.5 * EPS_0 * e0 * e0).abs() < 1e-30);
        assert!((s.sigma[1][1] + 0.5 * EPS_0 * e0 * e0).abs() < 1e-30);
        let s = maxwell_stress([0.0, e0, 0.0], [0.0, 0.0, e0 / C]);
        assert!((s.xx() + EPS_0 * e0 * e0).abs() < 1e-26);
        assert!((stress_xx(e0, e0 / C) - s.xx()).abs() < 1e-9 * s.xx().abs());
        assert_eq!(maxwell_stress([0.0; 3], [0.0; 3]).sigma, [[0.0; 3]; 3]);
    }

    #[test]
    fn abraham_examples() {
        let e0 = 2.0;
        let p = abraham_momentum_density([0.0, e0, 0.0], [0.0, 0.0, e0 / (C * MU_0)]);
        assert!((p[0] - EPS_0 * e0 * e0 / C).abs() < 1e-12 * EPS_0 * e0 * e0 / C);
        assert_eq!(abraham_momentum_density([1.0, 2.0, 3.0], [2.0, 4.0, 6.0]), [0.0; 3]);
    }

    #[test]
    fn ab_phase_rejects_open_path() {
        let path = [([0.0; 3], [1.0; 3]), ([1.0, 0.0, 0.0], [1.0; 3]), ([1.0, 1.0, 0.0], [1.0; 3])];
        assert!(ab_phase(&path).is_err());
    }

    #[test]
    fn ab_phase_circle() {
        let g = 1e-34;
        let n = 4000;
        let path: Vec<_> = (0..=n)
            .map(|k| {
                let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                let (s, c) = th.sin_cos();
                let r = if k == n { [1.0, 0.0, 0.0] } else { [c, s, 0.0] };
                (r, [-r[1] * g, r[0] * g, 0.0])
            })
            .collect();
        let phi = ab_phase(&path).unwrap();
        let exact = -2.0 * std::f64::consts::PI * g / HBAR;
        assert!((phi - exact).abs() < 1e-6 * exact.abs());
    }
}

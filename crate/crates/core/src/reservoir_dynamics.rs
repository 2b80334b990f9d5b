//! 1D time-domain solver for E_y, B_z and the oscillator reservoirs of planar
//! slabs at rest (normal incidence along x).
//!
//! The update is a Störmer–Verlet split of the rest-frame Hamiltonian
//!
//! H = ∫ (D − P)²/(2ε₀) + B²/(2μ₀) − M B + ½Σ(Π_E² + ω²X_E²) + ½Σ(Π_B² + ω²X_B²) dx,
//!
//! with D = −Π_A, B = ∂_x A. D, X_E and Π_B live on integer time levels; A, B,
//! Π_E and X_B on half levels. E, D, P and X_E sit on grid nodes x_i; B, M and
//! X_B on half nodes x_{i+½}. A slab covers whole node cells, so its faces lie
//! on half nodes; magnetic oscillators on a face carry half weight.

use crate::constants::{C, EPS_0, MU_0};
use crate::susceptibility::{FamilyReservoir, ReservoirDiscretization};
use crate::{Error, Result};
use rayon::prelude::*;

/// Uniform grid of `nx` cells on [x_min, x_min + nx·dx].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid1D {
    pub x_min: f64,
    pub dx: f64,
    pub nx: usize,
    pub dt: f64,
}

pub const MAX_COURANT: f64 = 0.5;

impl Grid1D {
    pub fn new(x_min: f64, dx: f64, nx: usize, courant: f64) -> Result<Self> {
        if !(dx > 0.0) || nx < 8 {
            return Err(Error::invalid("grid needs dx > 0 and at least 8 cells"));
        }
        if !(courant > 0.0 && courant <= MAX_COURANT) {
            return Err(Error::invalid(format!("Courant number {courant} outside (0, {MAX_COURANT}]")));
        }
        Ok(Grid1D { x_min, dx, nx, dt: courant * dx / C })
    }

    pub fn courant(&self) -> f64 {
        C * self.dt / self.dx
    }

    pub fn x_max(&self) -> f64 {
        self.x_min + self.nx as f64 * self.dx
    }

    pub fn node(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx
    }

    pub fn half(&self, k: usize) -> f64 {
        self.x_min + (k as f64 + 0.5) * self.dx
    }

    /// Nearest half node to x, as a face position.
    pub fn snap_face(&self, x: f64) -> f64 {
        let k = ((x - self.x_min) / self.dx - 0.5).round();
        self.x_min + (k + 0.5) * self.dx
    }

    fn validate(&self) -> Result<()> {
        if self.courant() > MAX_COURANT * (1.0 + 1e-12) {
            return Err(Error::invalid(format!("Courant number {} exceeds {MAX_COURANT}", self.courant())));
        }
        Ok(())
    }
}

/// Centre-of-mass variables of the body. Planar: `mass` is per unit area.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BodyState {
    pub mass: f64,
    pub position: f64,
    pub velocity: f64,
    pub extent: (f64, f64),
}

pub const VELOCITY_WARNING: f64 = 1e-3;

impl BodyState {
    pub fn new(mass: f64, extent: (f64, f64)) -> Result<Self> {
        if !(mass > 0.0) || !(extent.0 < extent.1) {
            return Err(Error::invalid("body needs mass > 0 and x_L < x_R"));
        }
        Ok(BodyState { mass, position: 0.5 * (extent.0 + extent.1), velocity: 0.0, extent })
    }

    pub fn fast(&self) -> bool {
        self.velocity.abs() / C > VELOCITY_WARNING
    }
}

/// Gaussian pulse placed in the grid as an initial condition,
/// E = E₀ exp(−ξ²/(2(cτ)²)) cos(ω ξ/c) with ξ the distance from the centre
/// along the direction of travel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PulseSource {
    /// Carrier [rad/s]; 0 gives a carrier-free Gaussian.
    pub carrier: f64,
    /// Envelope width τ [s].
    pub width: f64,
    /// Peak field [V/m].
    pub amplitude: f64,
    /// Node holding the envelope centre at t = 0.
    pub launch_cell: usize,
    /// +1 travels towards +x, −1 towards −x.
    pub direction: i8,
}

impl PulseSource {
    pub fn field(&self, xi: f64) -> f64 {
        let s = C * self.width;
        self.amplitude * (-0.5 * (xi / s).powi(2)).exp() * (self.carrier * xi / C).cos()
    }
}

/// Continuous wave injected through a total-field/scattered-field boundary
/// on the left of `node`, travelling towards +x.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CwSource {
    pub omega: f64,
    pub amplitude: f64,
    /// First node of the total-field region.
    pub node: usize,
    /// sin² switch-on time [s].
    pub ramp: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Boundary {
    /// E = 0 at both ends; the discrete energy is then exactly conserved.
    Pec,
    /// Graded matched conductivity over `cells` cells at each end.
    Absorbing { cells: usize },
}

/// A slab [x_left, x_right] filled with one reservoir.
#[derive(Clone, Debug)]
pub struct Slab {
    pub x_left: f64,
    pub x_right: f64,
    pub reservoir: ReservoirDiscretization,
}

#[derive(Clone, Debug)]
struct Family {
    /// Physical couplings: √ε₀·a_j (electric) or b_j/√μ₀ (magnetic).
    c: Vec<f64>,
    w2: Vec<f64>,
}

impl Family {
    fn electric(r: &FamilyReservoir) -> Self {
        Family { c: r.couplings.iter().map(|a| a * EPS_0.sqrt()).collect(), w2: r.nodes.iter().map(|w| w * w).collect() }
    }

    fn magnetic(r: &FamilyReservoir) -> Self {
        Family { c: r.couplings.iter().map(|b| b / MU_0.sqrt()).collect(), w2: r.nodes.iter().map(|w| w * w).collect() }
    }

    fn len(&self) -> usize {
        self.c.len()
    }
}

#[derive(Clone, Debug)]
struct SlabGrid {
    /// First and last node inside the slab.
    lo: usize,
    hi: usize,
    /// Half nodes lo−1 ..= hi; the two faces carry weight ½.
    half_lo: usize,
    half_scale: Vec<f64>,
    e: Family,
    b: Family,
}

impl SlabGrid {
    fn cells(&self) -> usize {
        self.hi - self.lo + 1
    }

    fn halves(&self) -> usize {
        self.half_scale.len()
    }
}

/// Reservoir amplitudes of one slab. Electric arrays are cell-major
/// (cells × N_E), magnetic arrays half-node-major.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SlabFields {
    pub x_e: Vec<f64>,
    pub pi_e: Vec<f64>,
    pub x_b: Vec<f64>,
    pub pi_b: Vec<f64>,
}

/// Dynamical state after `step` updates: q-variables (D, X_E, Π_B, and the
/// derived E, P) at t = step·Δt; p-variables (A, B, Π_E, X_B) at t − Δt/2.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldState {
    pub step: usize,
    pub t: f64,
    pub d: Vec<f64>,
    pub e: Vec<f64>,
    pub p: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub slabs: Vec<SlabFields>,
}

struct Tfsf {
    src: CwSource,
    aux_e: Vec<f64>,
    aux_b: Vec<f64>,
    aux_sig_e: Vec<f64>,
    aux_sig_b: Vec<f64>,
}

/// Offset of the TF/SF node inside the auxiliary line.
const AUX_NODE: usize = 4;

/// Fields at one instant over a window of nodes, with every time-staggered
/// quantity available on both sides of the sampling time.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    pub dx: f64,
    /// Global index of the first node in the window.
    pub first: usize,
    /// Node quantities at t.
    pub x: Vec<f64>,
    pub e: Vec<f64>,
    pub p: Vec<f64>,
    /// Ṗ = Σ c Π_E at t ∓ Δt/2.
    pub p_dot_prev: Vec<f64>,
    pub p_dot_next: Vec<f64>,
    /// Σ_j ∂_x X_j Π_j at t (reservoir momentum density).
    pub reservoir_momentum: Vec<f64>,
    /// A at t ∓ Δt/2 on nodes.
    pub a_prev: Vec<f64>,
    pub a_next: Vec<f64>,
    /// Half-node quantities between consecutive window nodes, at t ∓ Δt/2.
    pub b_prev: Vec<f64>,
    pub b_next: Vec<f64>,
    pub m_prev: Vec<f64>,
    pub m_next: Vec<f64>,
    /// Nodes inside any slab.
    pub in_body: Vec<bool>,
    /// Raw electric reservoir per slab: (first node, N_E, X_E at t), and
    /// `reservoir_momentum`, filled only for detailed captures.
    pub raw_x_e: Vec<(usize, usize, Vec<f64>)>,
    pub detailed: bool,
}

impl Snapshot {
    pub fn len(&self) -> usize {
        self.e.len()
    }

    pub fn is_empty(&self) -> bool {
        self.e.is_empty()
    }

    /// B at t on half nodes.
    pub fn b_mid(&self) -> Vec<f64> {
        self.b_prev.iter().zip(&self.b_next).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    /// H = B/μ₀ − M at t on half nodes.
    pub fn h_mid(&self) -> Vec<f64> {
        (0..self.b_prev.len())
            .map(|k| 0.5 * ((self.b_prev[k] + self.b_next[k]) / MU_0 - self.m_prev[k] - self.m_next[k]))
            .collect()
    }

    /// Rows (x, E, B, P, M) at the nodes, B and M averaged to the node and
    /// to time t.
    pub fn columns(&self) -> Vec<[f64; 5]> {
        let b = self.to_nodes(&self.b_mid());
        let m: Vec<f64> = self.m_prev.iter().zip(&self.m_next).map(|(a, b)| 0.5 * (a + b)).collect();
        let m = self.to_nodes(&m);
        (0..self.len()).map(|i| [self.x[i], self.e[i], b[i], self.p[i], m[i]]).collect()
    }

    /// Node-centred value of a half-node array; the ends copy their neighbour.
    pub fn to_nodes(&self, half: &[f64]) -> Vec<f64> {
        let n = self.e.len();
        (0..n)
            .map(|i| match (i, half.len()) {
                (_, 0) => 0.0,
                (0, _) => half[0],
                (i, m) if i >= m => half[m - 1],
                (i, _) => 0.5 * (half[i - 1] + half[i]),
            })
            .collect()
    }
}

pub struct Simulation {
    grid: Grid1D,
    slabs: Vec<SlabGrid>,
    boundary: Boundary,
    sig_e: Vec<f64>,
    sig_b: Vec<f64>,
    state: FieldState,
    scratch_b: Vec<f64>,
    tfsf: Option<Tfsf>,
    reference_norm: f64,
    /// Nodes (or half nodes) covered by a magnetic half-node entry, for M.
    m_half: Vec<f64>,
}

const PARALLEL_MIN: usize = 8192;

impl Simulation {
    pub fn new(grid: Grid1D, slabs: Vec<Slab>, boundary: Boundary) -> Result<Self> {
        grid.validate()?;
        let n_nodes = grid.nx + 1;
        let abs_cells = match boundary {
            Boundary::Pec => 0,
            Boundary::Absorbing { cells } => {
                if cells < 8 || 2 * cells + 8 > grid.nx {
                    return Err(Error::invalid("absorber needs >= 8 cells and room for the interior"));
                }
                cells
            }
        };
        let mut grids: Vec<SlabGrid> = Vec::new();
        let mut state_slabs = Vec::new();
        for s in &slabs {
            if !(s.x_left < s.x_right) {
                return Err(Error::invalid("slab needs x_left < x_right"));
            }
            let lo = ((s.x_left - grid.x_min) / grid.dx).floor() as isize + 1;
            let hi = ((s.x_right - grid.x_min) / grid.dx).ceil() as isize - 1;
            let lo = lo.max(0) as usize;
            let hi = hi.max(0) as usize;
            if hi < lo {
                return Err(Error::invalid("slab is thinner than one cell"));
            }
            if lo < abs_cells + 2 || hi + abs_cells + 2 > grid.nx {
                return Err(Error::invalid("slab overlaps the boundary region"));
            }
            if grids.iter().any(|g| !(hi < g.lo || lo > g.hi)) {
                return Err(Error::invalid("slabs overlap"));
            }
            let e = Family::electric(&s.reservoir.electric);
            let b = Family::magnetic(&s.reservoir.magnetic);
            check_oscillator_stability(&s.reservoir.electric, grid.dt)?;
            check_oscillator_stability(&s.reservoir.magnetic, grid.dt)?;
            let halves = hi - lo + 2;
            let mut half_scale = vec![1.0; halves];
            half_scale[0] = 0.5f64.sqrt();
            half_scale[halves - 1] = 0.5f64.sqrt();
            let cells = hi - lo + 1;
            state_slabs.push(SlabFields {
                x_e: vec![0.0; cells * e.len()],
                pi_e: vec![0.0; cells * e.len()],
                x_b: vec![0.0; halves * b.len()],
                pi_b: vec![0.0; halves * b.len()],
            });
            grids.push(SlabGrid { lo, hi, half_lo: lo - 1, half_scale, e, b });
        }
        let (sig_e, sig_b) = absorber_profile(&grid, abs_cells, abs_cells);
        let state = FieldState {
            step: 0,
            t: 0.0,
            d: vec![0.0; n_nodes],
            e: vec![0.0; n_nodes],
            p: vec![0.0; n_nodes],
            a: vec![0.0; n_nodes],
            b: vec![0.0; grid.nx],
            slabs: state_slabs,
        };
        Ok(Simulation {
            grid,
            slabs: grids,
            boundary,
            sig_e,
            sig_b,
            state,
            scratch_b: vec![0.0; grid.nx],
            tfsf: None,
            reference_norm: 0.0,
            m_half: vec![0.0; grid.nx],
        })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn state(&self) -> &FieldState {
        &self.state
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// (first, last) node of every slab.
    pub fn slab_nodes(&self) -> Vec<(usize, usize)> {
        self.slabs.iter().map(|s| (s.lo, s.hi)).collect()
    }

    /// Face positions actually used for the slabs (snapped to half nodes).
    pub fn body_extent(&self) -> Option<(f64, f64)> {
        let lo = self.slabs.iter().map(|s| s.lo).min()?;
        let hi = self.slabs.iter().map(|s| s.hi).max()?;
        Some((self.grid.half(lo - 1), self.grid.half(hi)))
    }

    pub fn in_body(&self, i: usize) -> bool {
        self.slabs.iter().any(|s| s.lo <= i && i <= s.hi)
    }

    /// Place a pulse in vacuum as the initial condition. E is set at t = 0
    /// and B, A at t = −Δt/2, consistent with free propagation.
    pub fn launch_pulse(&mut self, pulse: &PulseSource) -> Result<()> {
        if pulse.direction != 1 && pulse.direction != -1 {
            return Err(Error::invalid("pulse direction must be +1 or -1"));
        }
        if !(pulse.width > 0.0) || pulse.launch_cell > self.grid.nx {
            return Err(Error::invalid("pulse needs width > 0 and a launch node on the grid"));
        }
        let g = self.grid;
        let dir = pulse.direction as f64;
        let xc = g.node(pulse.launch_cell);
        let reach = 6.0 * C * pulse.width;
        for i in 0..=g.nx {
            let x = g.node(i);
            if (x - xc).abs() < reach && (self.in_body(i) || self.sig_e[i] > 0.0) {
                return Err(Error::invalid("pulse must start in vacuum clear of slabs and absorbers"));
            }
        }
        for i in 1..g.nx {
            let e = pulse.field(dir * (g.node(i) - xc));
            self.state.e[i] += e;
            self.state.d[i] += EPS_0 * e;
        }
        // At t = −Δt/2 the pulse sat cΔt/2 behind its t = 0 position.
        let back = 0.5 * C * g.dt;
        for k in 0..g.nx {
            let xi = dir * (g.half(k) - xc) + back;
            self.state.b[k] += dir * pulse.field(xi) / C;
        }
        self.rebuild_potential();
        self.reference_norm = self.reference_norm.max(self.field_norm());
        Ok(())
    }

    /// Set the electric oscillator `j` of `cell` (counted from the slab's first
    /// node) to amplitude `x` at rest.
    pub fn excite_oscillator(&mut self, slab: usize, cell: usize, j: usize, x: f64) -> Result<()> {
        let sg = self.slabs.get(slab).ok_or_else(|| Error::invalid("no such slab"))?;
        let ne = sg.e.len();
        if cell >= sg.cells() || j >= ne {
            return Err(Error::invalid("oscillator index out of range"));
        }
        let w2 = sg.e.w2[j];
        self.state.slabs[slab].x_e[cell * ne + j] = x;
        self.update_constitutive();
        self.reference_norm = self.reference_norm.max(self.field_norm()).max(x * x * w2 * self.grid.dx);
        Ok(())
    }

    /// X of electric oscillator `j` in `cell` of `slab`.
    pub fn oscillator(&self, slab: usize, cell: usize, j: usize) -> f64 {
        let ne = self.slabs[slab].e.len();
        self.state.slabs[slab].x_e[cell * ne + j]
    }

    /// Node frequencies of the electric reservoir of `slab`.
    pub fn oscillator_frequency(&self, slab: usize, j: usize) -> f64 {
        self.slabs[slab].e.w2[j].sqrt()
    }

    /// Reconstruct A from B (A = 0 at the left end), keeping B = ∂_x A.
    fn rebuild_potential(&mut self) {
        let h = self.grid.dx;
        self.state.a[0] = 0.0;
        for k in 0..self.grid.nx {
            self.state.a[k + 1] = self.state.a[k] + h * self.state.b[k];
        }
    }

    pub fn set_cw_source(&mut self, src: CwSource) -> Result<()> {
        let abs_cells = match self.boundary {
            Boundary::Absorbing { cells } => cells,
            Boundary::Pec => return Err(Error::invalid("a CW source needs absorbing boundaries")),
        };
        if src.node <= abs_cells + 1 || src.node >= self.grid.nx - abs_cells - 1 || self.in_body(src.node) {
            return Err(Error::invalid("TF/SF node must lie in vacuum between the absorbers"));
        }
        if !(src.omega > 0.0) {
            return Err(Error::invalid("CW frequency must be positive"));
        }
        let aux_cells = AUX_NODE + 16 + abs_cells;
        let aux_grid = Grid1D { x_min: 0.0, dx: self.grid.dx, nx: aux_cells, dt: self.grid.dt };
        let (se, sb) = absorber_profile(&aux_grid, 0, abs_cells);
        self.tfsf = Some(Tfsf {
            src,
            aux_e: vec![0.0; aux_cells + 1],
            aux_b: vec![0.0; aux_cells],
            aux_sig_e: se,
            aux_sig_b: sb,
        });
        let length = self.grid.nx as f64 * self.grid.dx;
        self.reference_norm = self.reference_norm.max(EPS_0 * src.amplitude.powi(2) * length);
        Ok(())
    }

    /// Incident (E at the TF/SF node at t, H at the half node before it at
    /// t − Δt/2), if a CW source is active.
    pub fn incident_fields(&self) -> Option<(f64, f64)> {
        self.tfsf.as_ref().map(|s| (s.aux_e[AUX_NODE], s.aux_b[AUX_NODE - 1] / MU_0))
    }

    /// Advance one time step.
    pub fn step(&mut self) -> Result<()> {
        self.step_inner(None).map(|_| ())
    }

    /// Advance one step and capture nodes `first..=last` at the current time
    /// (before the advance), with both half-step neighbours of the staggered
    /// variables.
    pub fn step_capture(&mut self, first: usize, last: usize, raw: bool) -> Result<Snapshot> {
        if first >= last || last > self.grid.nx {
            return Err(Error::invalid("capture window must be a nonempty node range"));
        }
        Ok(self.step_inner(Some((first, last, raw)))?.unwrap())
    }

    fn step_inner(&mut self, capture: Option<(usize, usize, bool)>) -> Result<Option<Snapshot>> {
        let g = self.grid;
        let (dt, h) = (g.dt, g.dx);
        let n = self.state.step;
        let t = self.state.t;

        let mut snap = capture.map(|(first, last, raw)| self.begin_snapshot(first, last, raw));

        // Kick: p(n−½) → p(n+½) from q(n).
        self.scratch_b.copy_from_slice(&self.state.b);
        for k in 0..g.nx {
            let curl = (self.state.e[k + 1] - self.state.e[k]) / h;
            let s = 0.5 * self.sig_b[k] * dt / EPS_0;
            self.state.b[k] = ((1.0 - s) * self.state.b[k] - dt * curl) / (1.0 + s);
        }
        if let Some(src) = &self.tfsf {
            // Half node left of the TF/SF node is scattered-field; its curl
            // must see only the scattered part of E at the TF node.
            let k = src.src.node - 1;
            self.state.b[k] += dt / h * src.aux_e[AUX_NODE];
        }
        for (ai, ei) in self.state.a.iter_mut().zip(&self.state.e) {
            *ai -= dt * ei;
        }
        let e_field = &self.state.e;
        let b_old = &self.scratch_b;
        for (sg, sf) in self.slabs.iter().zip(self.state.slabs.iter_mut()) {
            kick_slab(sg, sf, e_field, b_old, dt);
        }
        if let Some(src) = &mut self.tfsf {
            aux_kick(src, dt, h);
        }

        if let Some(s) = snap.as_mut() {
            self.finish_snapshot(s);
        }

        // Drift: q(n) → q(n+1) from p(n+½).
        self.magnetization_into_scratch();
        let m = &self.m_half;
        let hfield = |k: usize| self.state.b[k] / MU_0 - m[k];
        let mut dnew = self.state.d.clone();
        for i in 1..g.nx {
            let curl = (hfield(i) - hfield(i - 1)) / h;
            if self.sig_e[i] > 0.0 {
                let s = 0.5 * self.sig_e[i] * dt / EPS_0;
                dnew[i] = ((1.0 - s) * self.state.d[i] - dt * curl) / (1.0 + s);
            } else {
                dnew[i] -= dt * curl;
            }
        }
        if let Some(src) = &self.tfsf {
            let i = src.src.node;
            dnew[i] += dt / h * src.aux_b[AUX_NODE - 1] / MU_0;
        }
        self.state.d = dnew;
        for (sg, sf) in self.slabs.iter().zip(self.state.slabs.iter_mut()) {
            drift_slab(sg, sf, &self.state.b, dt);
        }
        self.state.step = n + 1;
        self.state.t = t + dt;
        if let Some(src) = &mut self.tfsf {
            aux_drift(src, dt, h, self.state.t);
        }
        self.update_constitutive();

        if self.state.step % 32 == 0 {
            let norm = self.field_norm();
            let growth = (norm / self.reference_norm.max(f64::MIN_POSITIVE)).sqrt();
            if !norm.is_finite() || (self.reference_norm > 0.0 && growth > 1e6) {
                return Err(Error::Unstable { step: self.state.step, growth });
            }
        }
        Ok(snap)
    }

    fn magnetization_into_scratch(&mut self) {
        self.m_half.iter_mut().for_each(|v| *v = 0.0);
        for (sg, sf) in self.slabs.iter().zip(&self.state.slabs) {
            let nb = sg.b.len();
            if nb == 0 {
                continue;
            }
            for (q, scale) in sg.half_scale.iter().enumerate() {
                let y = &sf.x_b[q * nb..(q + 1) * nb];
                let m: f64 = sg.b.c.iter().zip(y).map(|(c, y)| c * y).sum();
                self.m_half[sg.half_lo + q] += scale * m;
            }
        }
    }

    /// P from X_E and E = (D − P)/ε₀.
    fn update_constitutive(&mut self) {
        for (sg, sf) in self.slabs.iter().zip(&self.state.slabs) {
            let ne = sg.e.len();
            for q in 0..sg.cells() {
                let x = &sf.x_e[q * ne..(q + 1) * ne];
                self.state.p[sg.lo + q] = sg.e.c.iter().zip(x).map(|(c, x)| c * x).sum();
            }
        }
        for i in 0..=self.grid.nx {
            self.state.e[i] = (self.state.d[i] - self.state.p[i]) / EPS_0;
        }
    }

    /// Σ (ε₀E² + B²/μ₀) dx, a cheap proxy for the field energy.
    pub fn field_norm(&self) -> f64 {
        let h = self.grid.dx;
        let e: f64 = self.state.d.iter().map(|d| d * d / EPS_0).sum();
        let b: f64 = self.state.b.iter().map(|b| b * b / MU_0).sum();
        (e + b) * h
    }

    /// Discrete energy conserved exactly by the update (PEC, no sources):
    /// V(q^n) + T(p^{n−½}, p^{n+½}) with T the symmetric bilinear form of the
    /// p-quadratic part of H. Per unit area [J/m²].
    pub fn total_energy(&self) -> f64 {
        let g = self.grid;
        let (dt, h) = (g.dt, g.dx);
        let st = &self.state;
        // p(n+½) with the conservative kick only.
        let b_next: Vec<f64> = (0..g.nx).map(|k| st.b[k] - dt * (st.e[k + 1] - st.e[k]) / h).collect();
        let mut v = 0.0;
        for i in 0..=g.nx {
            let w = if i == 0 || i == g.nx { 0.5 } else { 1.0 };
            v += w * (st.d[i] - st.p[i]).powi(2) / (2.0 * EPS_0);
        }
        let mut t: f64 = (0..g.nx).map(|k| st.b[k] * b_next[k] / (2.0 * MU_0)).sum();
        for (sg, sf) in self.slabs.iter().zip(&st.slabs) {
            let ne = sg.e.len();
            for q in 0..sg.cells() {
                let e = st.e[sg.lo + q];
                for j in 0..ne {
                    let idx = q * ne + j;
                    let x = sf.x_e[idx];
                    let p_prev = sf.pi_e[idx];
                    let p_next = p_prev + dt * (sg.e.c[j] * e - sg.e.w2[j] * x);
                    v += 0.5 * sg.e.w2[j] * x * x;
                    t += 0.5 * p_prev * p_next;
                }
            }
            let nb = sg.b.len();
            for q in 0..sg.halves() {
                let k = sg.half_lo + q;
                let s = sg.half_scale[q];
                let (mut m_prev, mut m_next) = (0.0, 0.0);
                for j in 0..nb {
                    let idx = q * nb + j;
                    let pi = sf.pi_b[idx];
                    let y_prev = sf.x_b[idx];
                    let y_next = y_prev + dt * pi;
                    v += 0.5 * pi * pi;
                    t += 0.5 * sg.b.w2[j] * y_prev * y_next;
                    m_prev += s * sg.b.c[j] * y_prev;
                    m_next += s * sg.b.c[j] * y_next;
                }
                t -= 0.5 * (m_prev * b_next[k] + m_next * st.b[k]);
            }
        }
        (v + t) * h
    }

    /// Energy held by the oscillators, ½Σ(Π² + ω²X²)·dx with Π taken at the
    /// state's half step. Approximate to O(Δt²).
    pub fn reservoir_energy(&self) -> f64 {
        let h = self.grid.dx;
        let mut u = 0.0;
        for (sg, sf) in self.slabs.iter().zip(&self.state.slabs) {
            let ne = sg.e.len();
            for (idx, (x, p)) in sf.x_e.iter().zip(&sf.pi_e).enumerate() {
                u += 0.5 * (p * p + sg.e.w2[idx % ne] * x * x);
            }
            let nb = sg.b.len();
            for (idx, (y, p)) in sf.x_b.iter().zip(&sf.pi_b).enumerate() {
                u += 0.5 * (p * p + sg.b.w2[idx % nb] * y * y);
            }
        }
        u * h
    }

    /// Field energy density ε₀E²/2 + B²/(2μ₀) on nodes, B averaged to the
    /// node (in space) from the state's half step.
    pub fn field_energy_density(&self) -> Vec<f64> {
        let g = self.grid;
        let st = &self.state;
        let nx = g.nx;
        // Magnetic part uses B(n-½)B(n+½) so that vacuum sums match `total_energy`.
        let bb: Vec<f64> =
            (0..nx).map(|k| st.b[k] * (st.b[k] - g.dt * (st.e[k + 1] - st.e[k]) / g.dx) / (2.0 * MU_0)).collect();
        (0..=nx)
            .map(|i| {
                let magnetic = match i {
                    0 => bb[0],
                    i if i == nx => bb[nx - 1],
                    i => 0.5 * (bb[i - 1] + bb[i]),
                };
                (st.d[i] - st.p[i]).powi(2) / (2.0 * EPS_0) + magnetic
            })
            .collect()
    }

    /// Field momentum ε₀∫E B dx over the whole grid.
    pub fn field_momentum(&self) -> f64 {
        let st = &self.state;
        let nx = self.grid.nx;
        (1..nx).map(|i| EPS_0 * st.e[i] * 0.5 * (st.b[i - 1] + st.b[i])).sum::<f64>() * self.grid.dx
    }

    fn begin_snapshot(&self, first: usize, last: usize, raw: bool) -> Snapshot {
        let g = self.grid;
        let st = &self.state;
        let mut p_dot_prev = vec![0.0; last - first + 1];
        let mut reservoir_momentum = vec![0.0; last - first + 1];
        let mut raw_x_e = Vec::new();
        for (sg, sf) in self.slabs.iter().zip(&st.slabs) {
            let ne = sg.e.len();
            if ne == 0 {
                continue;
            }
            for q in 0..sg.cells() {
                let i = sg.lo + q;
                if i < first || i > last {
                    continue;
                }
                let pi = &sf.pi_e[q * ne..(q + 1) * ne];
                p_dot_prev[i - first] = sg.e.c.iter().zip(pi).map(|(c, p)| c * p).sum();
                if raw {
                    reservoir_momentum[i - first] = 0.5 * reservoir_gradient_momentum(sg, sf, q, g.dx);
                }
            }
            if raw {
                raw_x_e.push((sg.lo, ne, sf.x_e.clone()));
            }
        }
        let halves = last - first;
        let m_prev = self.magnetization_now();
        Snapshot {
            step: st.step,
            t: st.t,
            dt: g.dt,
            dx: g.dx,
            first,
            x: (first..=last).map(|i| g.node(i)).collect(),
            e: st.e[first..=last].to_vec(),
            p: st.p[first..=last].to_vec(),
            p_dot_prev,
            p_dot_next: vec![0.0; last - first + 1],
            reservoir_momentum,
            a_prev: st.a[first..=last].to_vec(),
            a_next: vec![],
            b_prev: st.b[first..first + halves].to_vec(),
            b_next: vec![],
            m_prev: m_prev[first..first + halves].to_vec(),
            m_next: vec![],
            in_body: (first..=last).map(|i| self.in_body(i)).collect(),
            raw_x_e,
            detailed: raw,
        }
    }

    fn finish_snapshot(&self, s: &mut Snapshot) {
        let st = &self.state;
        let first = s.first;
        let last = first + s.e.len() - 1;
        let halves = last - first;
        for (sg, sf) in self.slabs.iter().zip(&st.slabs) {
            let ne = sg.e.len();
            if ne == 0 {
                continue;
            }
            for q in 0..sg.cells() {
                let i = sg.lo + q;
                if i < first || i > last {
                    continue;
                }
                let pi = &sf.pi_e[q * ne..(q + 1) * ne];
                s.p_dot_next[i - first] = sg.e.c.iter().zip(pi).map(|(c, p)| c * p).sum();
                if s.detailed {
                    s.reservoir_momentum[i - first] += 0.5 * reservoir_gradient_momentum(sg, sf, q, s.dx);
                }
            }
        }
        s.a_next = st.a[first..=last].to_vec();
        s.b_next = st.b[first..first + halves].to_vec();
        s.m_next = self.magnetization_now()[first..first + halves].to_vec();
    }

    fn magnetization_now(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.grid.nx];
        for (sg, sf) in self.slabs.iter().zip(&self.state.slabs) {
            let nb = sg.b.len();
            if nb == 0 {
                continue;
            }
            for (q, scale) in sg.half_scale.iter().enumerate() {
                let y = &sf.x_b[q * nb..(q + 1) * nb];
                m[sg.half_lo + q] += scale * sg.b.c.iter().zip(y).map(|(c, y)| c * y).sum::<f64>();
            }
        }
        m
    }
}

/// Σ_j ∂_x X_j Π_j in cell q by centred differences, X = 0 outside the slab.
fn reservoir_gradient_momentum(sg: &SlabGrid, sf: &SlabFields, q: usize, h: f64) -> f64 {
    let ne = sg.e.len();
    let cells = sg.cells();
    let at = |q: isize, j: usize| -> f64 {
        if q < 0 || q as usize >= cells {
            0.0
        } else {
            sf.x_e[q as usize * ne + j]
        }
    };
    let qi = q as isize;
    (0..ne)
        .map(|j| (at(qi + 1, j) - at(qi - 1, j)) / (2.0 * h) * sf.pi_e[q * ne + j])
        .sum()
}

fn check_oscillator_stability(r: &FamilyReservoir, dt: f64) -> Result<()> {
    if r.is_empty() {
        return Ok(());
    }
    let w_max = r.nodes.iter().fold(0.0f64, |m, w| m.max(*w));
    let sum_a2: f64 = r.couplings.iter().map(|a| a * a).sum();
    let bound = dt * (w_max * w_max + sum_a2).sqrt();
    if bound >= 1.9 {
        return Err(Error::invalid(format!(
            "time step too coarse for the reservoir: dt*sqrt(w_max^2 + sum a^2) = {bound:.3} (needs < 1.9); refine the grid"
        )));
    }
    Ok(())
}

fn absorber_profile(grid: &Grid1D, left: usize, right: usize) -> (Vec<f64>, Vec<f64>) {
    let mut se = vec![0.0; grid.nx + 1];
    let mut sb = vec![0.0; grid.nx];
    let cells = left.max(right);
    if cells == 0 {
        return (se, sb);
    }
    let l = cells as f64 * grid.dx;
    // Cubic grading; normal-incidence round trip amplitude e^{−16}.
    let sigma_max = 2.0 * EPS_0 * C * 16.0 / l;
    let depth = |x: f64| -> f64 {
        let a = if left > 0 { (grid.x_min + l - x) / l } else { 0.0 };
        let b = if right > 0 { (x - (grid.x_max() - l)) / l } else { 0.0 };
        a.max(b).max(0.0)
    };
    for (i, s) in se.iter_mut().enumerate() {
        *s = sigma_max * depth(grid.node(i)).powi(3);
    }
    for (k, s) in sb.iter_mut().enumerate() {
        *s = sigma_max * depth(grid.half(k)).powi(3);
    }
    (se, sb)
}

fn kick_slab(sg: &SlabGrid, sf: &mut SlabFields, e: &[f64], _b_old: &[f64], dt: f64) {
    let ne = sg.e.len();
    if ne > 0 {
        let update = |(q, (pi, x)): (usize, (&mut [f64], &[f64]))| {
            let ei = e[sg.lo + q];
            for j in 0..ne {
                pi[j] += dt * (sg.e.c[j] * ei - sg.e.w2[j] * x[j]);
            }
        };
        if sf.pi_e.len() >= PARALLEL_MIN {
            sf.pi_e.par_chunks_mut(ne).zip(sf.x_e.par_chunks(ne)).enumerate().for_each(update);
        } else {
            sf.pi_e.chunks_mut(ne).zip(sf.x_e.chunks(ne)).enumerate().for_each(update);
        }
    }
    let nb = sg.b.len();
    if nb > 0 {
        for (y, p) in sf.x_b.iter_mut().zip(&sf.pi_b) {
            *y += dt * p;
        }
    }
}

fn drift_slab(sg: &SlabGrid, sf: &mut SlabFields, b: &[f64], dt: f64) {
    let ne = sg.e.len();
    if ne > 0 {
        if sf.x_e.len() >= PARALLEL_MIN {
            sf.x_e.par_iter_mut().zip(sf.pi_e.par_iter()).for_each(|(x, p)| *x += dt * p);
        } else {
            for (x, p) in sf.x_e.iter_mut().zip(&sf.pi_e) {
                *x += dt * p;
            }
        }
    }
    let nb = sg.b.len();
    if nb > 0 {
        for q in 0..sg.halves() {
            let bk = b[sg.half_lo + q] * sg.half_scale[q];
            for j in 0..nb {
                let idx = q * nb + j;
                sf.pi_b[idx] += dt * (sg.b.c[j] * bk - sg.b.w2[j] * sf.x_b[idx]);
            }
        }
    }
}

fn aux_kick(src: &mut Tfsf, dt: f64, h: f64) {
    for k in 0..src.aux_b.len() {
        let curl = (src.aux_e[k + 1] - src.aux_e[k]) / h;
        let s = 0.5 * src.aux_sig_b[k] * dt / EPS_0;
        src.aux_b[k] = ((1.0 - s) * src.aux_b[k] - dt * curl) / (1.0 + s);
    }
}

fn aux_drift(src: &mut Tfsf, dt: f64, h: f64, t_new: f64) {
    let n = src.aux_e.len();
    for i in 1..n - 1 {
        let curl = (src.aux_b[i] - src.aux_b[i - 1]) / (h * MU_0);
        let s = 0.5 * src.aux_sig_e[i] * dt / EPS_0;
        src.aux_e[i] = ((1.0 - s) * src.aux_e[i] - dt * curl / EPS_0) / (1.0 + s);
    }
    let cw = src.src;
    let ramp = if t_new >= cw.ramp { 1.0 } else { (0.5 * std::f64::consts::PI * t_new / cw.ramp).sin().powi(2) };
    // The hard source sits AUX_NODE cells upstream of the TF/SF node.
    src.aux_e[0] = cw.amplitude * ramp * (cw.omega * t_new).sin();
}

/// Slab of the experiment before its reservoir is discretized.
#[derive(Clone, Debug)]
pub struct SlabModel {
    pub x_left: f64,
    pub x_right: f64,
    pub model: crate::SusceptibilityModel,
}

#[derive(Clone, Debug)]
pub struct PulseExperiment {
    pub grid: Grid1D,
    pub boundary: Boundary,
    pub slabs: Vec<SlabModel>,
    /// Requested reservoir nodes per pole.
    pub reservoir_nodes: usize,
    pub reservoir_options: crate::susceptibility::ReservoirOptions,
    pub pulse: PulseSource,
    pub steps: usize,
    /// Full-grid snapshot every this many steps (0: none).
    pub snapshot_every: usize,
    /// Integrate M·R̈ = F for a body of this areal mass [kg/m²].
    pub body_mass: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct PulseOutcome {
    pub force: crate::forces::BodyForce,
    pub snapshots: Vec<Snapshot>,
    pub reflectance: f64,
    pub transmittance: f64,
    /// Oscillator energy plus field energy inside the body, as a fraction.
    pub absorbance: f64,
    pub energy_initial: f64,
    pub energy_final: f64,
    /// ε₀∫E B dx at the start and end.
    pub momentum_initial: f64,
    pub momentum_final: f64,
    pub body: Option<BodyState>,
    pub reservoir_count: usize,
    pub warnings: Vec<String>,
}

impl PulseOutcome {
    pub fn closure_error(&self) -> f64 {
        1.0 - self.reflectance - self.transmittance - self.absorbance
    }
}

/// Reservoir for one model with ω_max at the options' cutoff.
pub fn reservoir_for(
    model: &crate::SusceptibilityModel,
    nodes: usize,
    horizon: f64,
    opts: &crate::susceptibility::ReservoirOptions,
) -> Result<ReservoirDiscretization> {
    use crate::susceptibility::{cutoff_frequency, discretize_reservoir_with};
    let w_max = cutoff_frequency(model, crate::Family::Electric, opts.cutoff)
        .max(cutoff_frequency(model, crate::Family::Magnetic, opts.cutoff));
    // Step just past the cutoff so the discretizer's own edge check passes.
    discretize_reservoir_with(model, nodes, 1.01 * w_max, horizon, opts)
}

/// Everything recorded by a pulse run, with the stepper in its final state.
pub struct PulseTrace {
    pub sim: Simulation,
    pub force: crate::forces::BodyForce,
    pub snapshots: Vec<Snapshot>,
    pub body: Option<BodyState>,
    pub warnings: Vec<String>,
    pub energy_initial: f64,
    pub momentum_initial: f64,
    /// First and last node of the body.
    pub body_nodes: (usize, usize),
}

/// Tightest reservoir cutoff (1e-6 of peak Im χ, else 1e-4) whose ω_max a
/// step of `dt` resolves with margin for every model.
pub fn time_domain_cutoff(models: &[&crate::SusceptibilityModel], dt: f64) -> f64 {
    use crate::susceptibility::cutoff_frequency;
    use crate::Family;
    let resolves = |rel: f64| {
        models.iter().all(|m| {
            [Family::Electric, Family::Magnetic].iter().all(|&f| {
                let w = cutoff_frequency(m, f, rel);
                let p2: f64 = m.poles(f).iter().map(|p| p.plasma * p.plasma).sum();
                dt * (w * w + p2).sqrt() < 1.5
            })
        })
    };
    if resolves(1e-6) {
        1e-6
    } else {
        1e-4
    }
}

impl PulseExperiment {
    /// PEC box: gap | layers | gap. Each gap is 17cτ + 4·(total thickness)
    /// rounded up to a quarter wavelength; the pulse starts 6cτ from the wall
    /// on its side and the run ends once it has cleared the far face by 8cτ
    /// (allowing a group index of 4 inside). Layer thicknesses are rounded to
    /// whole cells. `pulse_length` is cτ [m].
    pub fn layered(
        layers: &[(f64, crate::SusceptibilityModel)],
        wavelength: f64,
        cells_per_wavelength: usize,
        pulse_length: f64,
        direction: i8,
    ) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::invalid("need at least one layer"));
        }
        if !(wavelength > 0.0 && pulse_length > 0.0) || cells_per_wavelength < 8 {
            return Err(Error::invalid("need wavelength > 0, pulse length > 0 and >= 8 cells per wavelength"));
        }
        if direction != 1 && direction != -1 {
            return Err(Error::invalid("direction must be +1 or -1"));
        }
        let h = wavelength / cells_per_wavelength as f64;
        let mut cells = Vec::with_capacity(layers.len());
        for (t, _) in layers {
            let n = (t / h).round();
            if !(n >= 1.0) {
                return Err(Error::invalid(format!("layer thickness {t:e} m is below one cell ({h:e} m)")));
            }
            cells.push(n as usize);
        }
        let thick = cells.iter().sum::<usize>() as f64 * h;
        let quarter = 0.25 * wavelength;
        let gap = (((17.0 * pulse_length + 4.0 * thick) / quarter).ceil() * quarter / h).round() as usize;
        let nx = 2 * gap + cells.iter().sum::<usize>();
        if nx > 1 << 24 {
            return Err(Error::Infeasible(format!("layout needs {nx} cells")));
        }
        let grid = Grid1D::new(-0.5 * h, h, nx, MAX_COURANT)?;
        let mut slabs = Vec::with_capacity(layers.len());
        let mut x = gap as f64 * h;
        for ((_, m), n) in layers.iter().zip(&cells) {
            let x1 = x + *n as f64 * h;
            slabs.push(SlabModel { x_left: x, x_right: x1, model: m.clone() });
            x = x1;
        }
        let off = (6.0 * pulse_length / h).round() as usize;
        let launch_cell = if direction > 0 { off } else { nx - off };
        let travel = gap as f64 * h + 2.0 * pulse_length + 4.0 * thick;
        let steps = (2.0 * travel / h).round() as usize;
        let models: Vec<&crate::SusceptibilityModel> = layers.iter().map(|l| &l.1).collect();
        let cutoff = time_domain_cutoff(&models, grid.dt);
        Ok(PulseExperiment {
            grid,
            boundary: Boundary::Pec,
            slabs,
            reservoir_nodes: 200,
            reservoir_options: crate::susceptibility::ReservoirOptions { cutoff, ..Default::default() },
            pulse: PulseSource {
                carrier: 2.0 * std::f64::consts::PI * C / wavelength,
                width: pulse_length / C,
                amplitude: 1.0,
                launch_cell,
                direction,
            },
            steps,
            snapshot_every: 0,
            body_mass: None,
        })
    }

    /// Reservoir options with the pulse spectrum (carrier ± 3/τ) as drive band
    /// unless one is set already.
    fn options(&self) -> crate::susceptibility::ReservoirOptions {
        let mut o = self.reservoir_options.clone();
        if o.drive_band.is_none() && self.pulse.carrier > 0.0 {
            let w = 3.0 / self.pulse.width;
            o.drive_band = Some(((self.pulse.carrier - w).max(0.0), self.pulse.carrier + w));
        }
        o
    }

    pub fn build(&self) -> Result<Simulation> {
        let horizon = self.steps as f64 * self.grid.dt;
        let opts = self.options();
        let slabs = self
            .slabs
            .iter()
            .map(|s| {
                Ok(Slab {
                    x_left: s.x_left,
                    x_right: s.x_right,
                    reservoir: reservoir_for(&s.model, self.reservoir_nodes, horizon, &opts)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut sim = Simulation::new(self.grid, slabs, self.boundary)?;
        sim.launch_pulse(&self.pulse)?;
        Ok(sim)
    }

    /// Launch the pulse, step, and record the force balance every step.
    pub fn trace(&self) -> Result<PulseTrace> {
        let mut sim = self.build()?;
        let nodes = sim.slab_nodes();
        let lo = nodes.iter().map(|n| n.0).min().ok_or_else(|| Error::invalid("experiment has no slab"))?;
        let hi = nodes.iter().map(|n| n.1).max().unwrap();
        let extent = sim.body_extent().unwrap();
        let energy_initial = sim.total_energy();
        let momentum_initial = sim.field_momentum();
        let mut window = Vec::with_capacity(self.steps);
        let mut snapshots = Vec::new();
        let mut body = match self.body_mass {
            Some(m) => Some(BodyState::new(m, extent)?),
            None => None,
        };
        let mut warnings = Vec::new();
        for n in 0..self.steps {
            if self.snapshot_every > 0 && n % self.snapshot_every == 0 {
                // Capture from a clone so the force window stays contiguous.
                let mut probe = sim.clone_state();
                snapshots.push(probe.step_capture(0, self.grid.nx, false)?);
            }
            window.push(sim.step_capture(lo - 2, hi + 2, false)?);
        }
        let force = crate::forces::body_force(&window, extent)?;
        warnings.extend(force.warnings.iter().cloned());
        if let Some(b) = body.as_mut() {
            for w in force.records.windows(2) {
                let dt = w[1].t - w[0].t;
                let v0 = b.velocity;
                b.velocity += 0.5 * (w[0].net + w[1].net) / b.mass * dt;
                b.position += 0.5 * (v0 + b.velocity) * dt;
                if b.fast() {
                    warnings.push(format!("|v|/c exceeded {VELOCITY_WARNING:.0e} at t = {:.3e} s", w[1].t));
                    break;
                }
            }
        }
        Ok(PulseTrace { sim, force, snapshots, body, warnings, energy_initial, momentum_initial, body_nodes: (lo, hi) })
    }

    /// `trace`, then energy fractions once the pulse has left the slab.
    pub fn run(&self) -> Result<PulseOutcome> {
        let PulseTrace { sim, force, snapshots, body, warnings, energy_initial, momentum_initial, body_nodes } =
            self.trace()?;
        let (lo, hi) = body_nodes;
        let reservoir_count = sim.slabs.iter().map(|s| s.e.len().max(s.b.len())).max().unwrap_or(0);

        let density = sim.field_energy_density();
        let g = sim.grid;
        let (mut left, mut right, mut inside) = (0.0, 0.0, 0.0);
        for (i, u) in density.iter().enumerate() {
            let w = if i == 0 || i == g.nx { 0.5 } else { 1.0 } * g.dx;
            if i < lo {
                left += w * u;
            } else if i > hi {
                right += w * u;
            } else {
                inside += w * u;
            }
        }
        // Pulse must have left the faces.
        let reach = ((4.0 * C * self.pulse.width / g.dx).ceil() as usize).max(2);
        let near: f64 = density
            .iter()
            .enumerate()
            .filter(|(i, _)| (*i < lo && lo - i <= reach) || (*i > hi && i - hi <= reach))
            .map(|(_, u)| u * g.dx)
            .sum();
        if near > 1e-4 * energy_initial {
            return Err(Error::NoConvergence {
                what: "pulse separation from the slab",
                estimate: near / energy_initial,
                tolerance: 1e-4,
            });
        }
        let absorbed = sim.reservoir_energy() + inside;
        let (back, ahead) = if self.pulse.direction > 0 { (left, right) } else { (right, left) };
        Ok(PulseOutcome {
            force,
            snapshots,
            reflectance: back / energy_initial,
            transmittance: ahead / energy_initial,
            absorbance: absorbed / energy_initial,
            energy_initial,
            energy_final: sim.total_energy(),
            momentum_initial,
            momentum_final: sim.field_momentum(),
            body,
            reservoir_count,
            warnings,
        })
    }
}

impl Simulation {
    /// Independent copy of the stepper (fields, reservoirs and sources).
    pub fn clone_state(&self) -> Simulation {
        Simulation {
            grid: self.grid,
            slabs: self.slabs.clone(),
            boundary: self.boundary,
            sig_e: self.sig_e.clone(),
            sig_b: self.sig_b.clone(),
            state: self.state.clone(),
            scratch_b: self.scratch_b.clone(),
            tfsf: self.tfsf.as_ref().map(|t| Tfsf {
                src: t.src,
                aux_e: t.aux_e.clone(),
                aux_b: t.aux_b.clone(),
                aux_sig_e: t.aux_sig_e.clone(),
                aux_sig_b: t.aux_sig_b.clone(),
            }),
            reference_norm: self.reference_norm,
            m_half: self.m_half.clone(),
        }
    }
}

/// Steady illumination through a TF/SF boundary with absorbing ends.
#[derive(Clone, Debug)]
pub struct CwExperiment {
    pub grid: Grid1D,
    pub absorber_cells: usize,
    pub slabs: Vec<SlabModel>,
    pub reservoir_nodes: usize,
    pub reservoir_options: crate::susceptibility::ReservoirOptions,
    pub source: CwSource,
    /// Periods after the ramp before averaging starts.
    pub settle_periods: usize,
    pub average_periods: usize,
    /// Node right of the body where the transmitted phasor is read.
    pub probe_node: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CwOutcome {
    /// Cycle-averaged σ_xx(x_R⁺) − σ_xx(x_L⁻) [N/m²].
    pub pressure: f64,
    /// Cycle-averaged Lorentz force on the body [N/m²].
    pub net: f64,
    /// ½ε₀c|E_inc|² from the incident phasor [W/m²].
    pub intensity: f64,
    pub incident: crate::Complex64,
    /// Scattered phasor just left of the TF/SF node, over the incident one.
    pub reflection: crate::Complex64,
    /// Phasor at the probe node over the incident one.
    pub transmission: crate::Complex64,
}

impl CwExperiment {
    pub fn run(&self) -> Result<CwOutcome> {
        use crate::Complex64;
        let dt = self.grid.dt;
        let period = 2.0 * std::f64::consts::PI / self.source.omega;
        let settle = ((self.source.ramp + self.settle_periods as f64 * period) / dt).ceil() as usize;
        let avg = (self.average_periods as f64 * period / dt).round() as usize;
        if avg < 2 {
            return Err(Error::invalid("averaging window is shorter than two steps"));
        }
        let horizon = (settle + avg) as f64 * dt;
        let mut opts = self.reservoir_options.clone();
        if opts.drive_band.is_none() {
            opts.drive_band = Some((0.95 * self.source.omega, 1.05 * self.source.omega));
        }
        let slabs = self
            .slabs
            .iter()
            .map(|s| {
                Ok(Slab {
                    x_left: s.x_left,
                    x_right: s.x_right,
                    reservoir: reservoir_for(&s.model, self.reservoir_nodes, horizon, &opts)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut sim = Simulation::new(self.grid, slabs, Boundary::Absorbing { cells: self.absorber_cells })?;
        sim.set_cw_source(self.source)?;
        let nodes = sim.slab_nodes();
        let lo = nodes.iter().map(|n| n.0).min().ok_or_else(|| Error::invalid("experiment has no slab"))?;
        let hi = nodes.iter().map(|n| n.1).max().unwrap();
        if self.source.node + 2 >= lo || self.probe_node <= hi || self.probe_node + self.absorber_cells >= self.grid.nx {
            return Err(Error::invalid("need TF/SF node < body < probe node < absorber"));
        }
        let extent = sim.body_extent().unwrap();
        for _ in 0..settle {
            sim.step()?;
        }
        let mut window = Vec::with_capacity(avg + 2);
        let (mut inc, mut refl, mut trans) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for k in 0..avg + 2 {
            if (1..=avg).contains(&k) {
                let ph = Complex64::from_polar(1.0, -self.source.omega * sim.state().t);
                let (e_inc, _) = sim.incident_fields().unwrap();
                inc += e_inc * ph;
                refl += sim.state().e[self.source.node - 1] * ph;
                trans += sim.state().e[self.probe_node] * ph;
            }
            window.push(sim.step_capture(lo - 2, hi + 2, false)?);
        }
        let force = crate::forces::body_force(&window, extent)?;
        // Drop the one-sided end records; average over whole periods.
        let recs = &force.records[1..avg + 1];
        let pressure = recs.iter().map(|r| r.surface).sum::<f64>() / avg as f64;
        let net = recs.iter().map(|r| r.net).sum::<f64>() / avg as f64;
        let scale = 2.0 / avg as f64;
        let (inc, refl, trans) = (inc * scale, refl * scale, trans * scale);
        Ok(CwOutcome {
            pressure,
            net,
            intensity: 0.5 * EPS_0 * C * inc.norm_sqr(),
            incident: inc,
            reflection: refl / inc,
            transmission: trans / inc,
        })
    }
}

use crate::config::RunConfig;
use emforce::casimir::{casimir_pressure_halfspaces, net_vacuum_force_isolated};
use emforce::reservoir_dynamics::PulseExperiment;
use emforce::susceptibility::kk_real_from_imag;
use emforce::wavepacket::{diagnostics, mean_acceleration, ForceSource};
use emforce::{
    Complex64, Error, Family, FluctuationKernel, QuadratureSpec, Result, SusceptibilityModel, WavePacketParams,
};

/// Result of a command before it is serialized.
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
    /// `# key: value` lines after the standard header.
    pub meta: Vec<(String, String)>,
    pub relations: &'static str,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}

fn family(name: Option<&str>) -> Result<Family> {
    match name.unwrap_or("electric") {
        "electric" => Ok(Family::Electric),
        "magnetic" => Ok(Family::Magnetic),
        other => Err(Error::Config(format!("family must be electric or magnetic, got {other:?}"))),
    }
}

fn model_path(cfg: &mut RunConfig) -> Result<String> {
    let mut g = cfg.general();
    let path = g.str_opt("model").map(str::to_string);
    g.finish()?;
    path.ok_or_else(|| Error::Config("missing model = <file>".into()))
}

/// Highest ω₀ + γ among the poles, a natural frequency scale.
fn top_frequency(model: &SusceptibilityModel, fam: Family) -> Result<f64> {
    let top = model.poles(fam).iter().map(|p| p.resonance + p.damping).fold(0.0, f64::max);
    if top > 0.0 {
        Ok(top)
    } else {
        Err(invalid("model has no poles in the requested family"))
    }
}

pub fn kk_check(cfg: &mut RunConfig, tolerance: Option<f64>) -> Result<Table> {
    let path = model_path(cfg)?;
    let model = cfg.model(&path)?;
    let mut s = cfg.section("kk");
    let fam = family(s.str_opt("family"))?;
    let top = top_frequency(&model, fam)?;
    let grid_max = s.f64_or("grid_max", 20.0 * top)?;
    // Default spacing puts ~20 samples across the narrowest line.
    let narrowest = model.poles(fam).iter().map(|p| p.damping).fold(f64::INFINITY, f64::min);
    let resolved = ((20.0 * grid_max / narrowest).ceil() as usize).div_ceil(2) * 2;
    let intervals = s.usize_or("grid_points", resolved.clamp(4096, 1 << 22))?;
    let eval_max = s.f64_or("eval_max", 3.0 * top)?;
    let eval_points = s.usize_or("eval_points", 301)?;
    s.finish()?;
    if intervals < 16 || eval_points < 2 || !(grid_max > 0.0) || !(eval_max > 0.0 && eval_max < grid_max) {
        return Err(invalid("kk needs grid_points >= 16, eval_points >= 2 and 0 < eval_max < grid_max"));
    }
    let tol = tolerance.unwrap_or(1e-3);
    let w: Vec<f64> = (0..=intervals).map(|i| grid_max * i as f64 / intervals as f64).collect();
    let im: Vec<f64> = w.iter().map(|&x| model.im_chi(fam, x)).collect();
    let mut rows = Vec::with_capacity(eval_points);
    let mut worst = 0.0f64;
    for k in 0..eval_points {
        let at = eval_max * k as f64 / (eval_points - 1) as f64;
        let exact = model.chi(fam, Complex64::new(at, 0.0));
        let got = kk_real_from_imag(&w, &im, at, tol)?;
        let rel = (got - exact.re).abs() / exact.norm();
        worst = worst.max(rel);
        rows.push(vec![at, exact.re, got, rel]);
    }
    Ok(Table {
        columns: vec!["omega", "re_chi_analytic", "re_chi_kk", "rel_error"],
        rows,
        meta: vec![("max_rel_error".into(), format!("{worst:e}"))],
        relations: "Kramers-Kronig principal value of Im chi; Lorentz-pole susceptibility",
    })
}

pub fn pulse_pressure(cfg: &mut RunConfig, tolerance: Option<f64>) -> Result<Table> {
    let path = model_path(cfg)?;
    let model = cfg.model(&path)?;
    let mut s = cfg.section("pulse");
    let wavelength = s.f64_req("wavelength")?;
    let thickness = s.f64_req("thickness")?;
    let cpl = s.usize_or("cells_per_wavelength", 40)?;
    let pulse_length = s.f64_or("pulse_length", 1.5 * wavelength)?;
    let direction = s.i64_or("direction", 1)?;
    let nodes = s.usize_or("reservoir_nodes", 200)?;
    let every = s.usize_or("record_every", 1)?;
    let mass = s.f64_opt("areal_mass")?;
    s.finish()?;
    if every == 0 || nodes < 2 {
        return Err(invalid("record_every must be >= 1 and reservoir_nodes >= 2"));
    }
    let direction = i8::try_from(direction).map_err(|_| invalid("direction must be +1 or -1"))?;
    let mut exp = PulseExperiment::layered(&[(thickness, model)], wavelength, cpl, pulse_length, direction)?;
    exp.reservoir_nodes = nodes;
    exp.body_mass = mass;
    let out = exp.run()?;
    let tol = tolerance.unwrap_or(5e-3);
    let closure = out.closure_error();
    if closure.abs() > tol {
        return Err(Error::NoConvergence { what: "energy closure R + T + A = 1", estimate: closure.abs(), tolerance: tol });
    }
    let rows = out
        .force
        .records
        .iter()
        .step_by(every)
        .map(|r| vec![r.t, r.surface, r.abraham_rate, r.net, r.residual])
        .collect();
    let mut meta = vec![
        ("reflectance".into(), format!("{:e}", out.reflectance)),
        ("transmittance".into(), format!("{:e}", out.transmittance)),
        ("absorbance".into(), format!("{:e}", out.absorbance)),
        ("closure_error".into(), format!("{closure:e}")),
        ("impulse".into(), format!("{:e}", out.force.integrate(|r| r.net))),
        ("energy_drift".into(), format!("{:e}", out.energy_final / out.energy_initial - 1.0)),
        ("cells".into(), exp.grid.nx.to_string()),
        ("steps".into(), exp.steps.to_string()),
        ("reservoir_nodes".into(), out.reservoir_count.to_string()),
    ];
    if let Some(b) = out.body {
        meta.push(("position".into(), format!("{:e}", b.position)));
        meta.push(("velocity".into(), format!("{:e}", b.velocity)));
    }
    meta.extend(out.warnings.iter().map(|w| ("warning".to_string(), w.clone())));
    Ok(Table {
        columns: vec!["t", "surface", "abraham_rate", "net", "residual"],
        rows,
        meta,
        relations: "Maxwell stress at the vacuum faces; Abraham momentum E x H / c^2; Lorentz force on P and M",
    })
}

pub fn casimir(cfg: &mut RunConfig, tolerance: Option<f64>) -> Result<Table> {
    let (left, right) = {
        let mut g = cfg.general();
        let both = g.str_opt("model").map(str::to_string);
        let l = g.str_opt("left_model").map(str::to_string);
        let r = g.str_opt("right_model").map(str::to_string);
        g.finish()?;
        match (both, l, r) {
            (Some(m), None, None) => (m.clone(), m),
            (None, Some(l), Some(r)) => (l, r),
            _ => return Err(Error::Config("give either model or both left_model and right_model".into())),
        }
    };
    let lm = cfg.model(&left)?;
    let rm = if right == left { lm.clone() } else { cfg.model(&right)? };
    let mut s = cfg.section("casimir");
    let d_min = s.f64_req("gap_min")?;
    let d_max = s.f64_or("gap_max", d_min)?;
    let points = s.usize_or("points", if d_max > d_min { 5 } else { 1 })?;
    let n_xi = s.usize_or("xi_nodes", 20)?;
    let n_k = s.usize_or("k_nodes", 20)?;
    s.finish()?;
    if !(d_min > 0.0 && d_max >= d_min) || points == 0 || (points == 1 && d_max > d_min) {
        return Err(invalid("need 0 < gap_min <= gap_max and enough points to span them"));
    }
    let mut q = QuadratureSpec::new(n_xi, n_k)?;
    if let Some(t) = tolerance {
        q = q.with_tolerance(t);
    }
    let mut rows = Vec::with_capacity(points);
    for k in 0..points {
        let d = if points == 1 { d_min } else { d_min * (d_max / d_min).powf(k as f64 / (points - 1) as f64) };
        let r = casimir_pressure_halfspaces(&lm, &rm, d, &q)?;
        rows.push(vec![d, r.pressure, r.error]);
    }
    Ok(Table {
        columns: vec!["d", "pressure", "error"],
        rows,
        meta: vec![("nodes".into(), format!("{n_xi} x {n_k}, doubled for the error column"))],
        relations: "regularized vacuum stress at imaginary frequency between planar half-spaces",
    })
}

pub fn packet(cfg: &mut RunConfig, tolerance: Option<f64>) -> Result<Table> {
    let path = model_path(cfg)?;
    let model = cfg.model(&path)?;
    let mut s = cfg.section("packet");
    let params = WavePacketParams::new(s.f64_req("mass")?, s.f64_req("alpha")?, s.f64_or("center", 0.0)?)?;
    let t_max = s.f64_req("t_max")?;
    let points = s.usize_or("points", 200)?;
    let strength = s.f64_or("kernel_strength", 1.0)?;
    let top = top_frequency(&model, Family::Electric)?;
    let peak = model.absorption_peak(Family::Electric, 4.0 * top);
    let omega_max = s.f64_or("kernel_omega_max", 3.0 * peak)?;
    let nodes = s.usize_or("kernel_nodes", 2000)?;
    let thickness = s.f64_opt("thickness")?;
    let area = s.f64_or("area", 1.0)?;
    s.finish()?;
    if !(t_max > 0.0) || points < 2 {
        return Err(invalid("packet needs t_max > 0 and at least 2 points"));
    }
    let kernel = FluctuationKernel::from_model(&model, strength, omega_max, nodes)?;
    let acceleration = match thickness {
        Some(t) => {
            let pressure = net_vacuum_force_isolated(&model, t, &QuadratureSpec::default())?;
            mean_acceleration(&ForceSource::Isolated { pressure, area }, &params)
        }
        None => 0.0,
    };
    let ts: Vec<f64> = (0..points).map(|i| t_max * i as f64 / (points - 1) as f64).collect();
    let rows = diagnostics(&params, &kernel, acceleration, &ts, tolerance.unwrap_or(1e-2))?
        .into_iter()
        .map(|d| vec![d.t, d.variance, d.mean_shift, d.envelope])
        .collect();
    Ok(Table {
        columns: vec!["t", "variance", "mean_shift", "envelope"],
        rows,
        meta: vec![
            ("spreading_time".into(), format!("{:e}", params.spreading_time())),
            ("absorption_peak".into(), format!("{peak:e}")),
            ("acceleration".into(), format!("{acceleration:e}")),
        ],
        relations: "free Gaussian spreading; pair-creation factor F(t, W, W'); Ehrenfest mean force",
    })
}

//! Subcommand arguments, their validation, and the artifacts each writes.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use plaplace_core::annulus::{c_curve, minimize_annulus, shoot_annulus, SolveOptions, MIN_SOLVER_CELLS};
use plaplace_core::bubbles::{
    additivity_check, config_energy, config_norm_p, BubbleConfigSpec, McParams, MIN_SAMPLES,
};
use plaplace_core::calibration::{
    build_family, nodal_level, sample_span, sign_changing_candidate, span_energy_bound, threshold_l0,
    threshold_l0_multi, threshold_small_hole,
};
use plaplace_core::radial::{AnnulusSpec, P_MARGIN, P_MIN};
use plaplace_core::sobolev::{
    calibrate_talenti, default_sobolev_cells, default_truncation, sobolev_constant, sobolev_quantum, MIN_SOBOLEV_CELLS,
    MIN_TRUNCATION,
};
use plaplace_core::symmetry::{annulus_sample, close_group, fixed_subspace, min_orbit_card, mu_g, GroupSpec};

use crate::{verify, Command, Failure, EXIT_NONCONVERGENCE};

#[derive(Debug, Clone, Args, Serialize)]
pub struct SobolevArgs {
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub dim: usize,
    #[arg(long)]
    pub p: f64,
    /// Outer truncation radius (default grows with the tail decay).
    #[arg(long)]
    pub truncation: Option<f64>,
    /// Log cells over [1/T, T] (default 512 per decade).
    #[arg(long)]
    pub cells: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Descent,
    Shooting,
    Both,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SolverFlags {
    #[arg(long, default_value_t = 20_000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub residual_tol: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub energy_tol: f64,
}

impl SolverFlags {
    fn options(&self) -> SolveOptions {
        SolveOptions {
            max_iters: self.max_iters,
            residual_tol: self.residual_tol,
            energy_tol: self.energy_tol,
            ..SolveOptions::default()
        }
    }

    fn check(&self, c: &mut Checks) {
        c.require(self.max_iters >= 1, || "--max-iters must be at least 1".into());
        c.require(self.residual_tol > 0.0, || format!("--residual-tol must be positive, got {}", self.residual_tol));
        c.require(self.energy_tol > 0.0, || format!("--energy-tol must be positive, got {}", self.energy_tol));
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AnnulusArgs {
    #[arg(long = "R1")]
    #[serde(rename = "R1")]
    pub r1: f64,
    #[arg(long = "R2")]
    #[serde(rename = "R2")]
    pub r2: f64,
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub dim: usize,
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = 1024)]
    pub cells: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Both)]
    pub method: MethodArg,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverFlags,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CurveArgs {
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub dim: usize,
    #[arg(long)]
    pub p: f64,
    /// Comma-separated hole ratios in (0, 1).
    #[arg(long, value_delimiter = ',', required = true)]
    pub radii: Vec<f64>,
    #[arg(long, default_value_t = 2048)]
    pub cells: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverFlags,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CalibrateArgs {
    #[arg(long = "R1")]
    #[serde(rename = "R1")]
    pub r1: f64,
    #[arg(long = "R2")]
    #[serde(rename = "R2")]
    pub r2: f64,
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub dim: usize,
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub m: usize,
    #[arg(long, default_value_t = 512)]
    pub cells_per_annulus: usize,
    /// Random elements of span(omega_1, ..., omega_{k+1}) evaluated per k.
    #[arg(long, default_value_t = 10_000)]
    pub span_samples: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverFlags,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ThresholdsArgs {
    #[arg(long = "R1")]
    #[serde(rename = "R1")]
    pub r1: f64,
    #[arg(long = "R2")]
    #[serde(rename = "R2")]
    pub r2: f64,
    #[arg(long)]
    pub m: usize,
    #[arg(long = "N", default_value_t = 4)]
    #[serde(rename = "N")]
    pub dim: usize,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long, default_value_t = 1024)]
    pub cells: usize,
    /// Also locate the small-hole ratio for this absolute energy margin.
    #[arg(long)]
    pub delta: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverFlags,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OrbitArgs {
    /// JSON file with "dim" and row-major "generators".
    #[arg(long)]
    pub group: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    pub max_order: usize,
    /// With --p, also report mu_G on the annulus [R1, R2].
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long = "R1", default_value_t = 0.5)]
    #[serde(rename = "R1")]
    pub r1: f64,
    #[arg(long = "R2", default_value_t = 1.0)]
    #[serde(rename = "R2")]
    pub r2: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BubblesArgs {
    /// JSON configuration: N, p, optional alpha, bubbles, optional base CSV.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    /// Smaller grids and sample counts.
    #[arg(long)]
    pub quick: bool,
}

/// Collects every violated precondition before anything runs.
#[derive(Default)]
pub struct Checks(Vec<String>);

impl Checks {
    fn require(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            self.0.push(msg());
        }
    }

    fn exponent(&mut self, dim: usize, p: f64) {
        self.require(dim >= 2, || format!("--N must be at least 2, got {dim}"));
        if dim >= 2 {
            let hi = dim as f64 - P_MARGIN;
            self.require((P_MIN..=hi).contains(&p), || format!("--p must lie in [{P_MIN}, {hi}] for N = {dim}, got {p}"));
        }
    }

    fn annulus(&mut self, r1: f64, r2: f64) {
        self.require(r1 > 0.0 && r1.is_finite(), || format!("--R1 must be positive, got {r1}"));
        self.require(r2 > r1 && r2.is_finite(), || format!("--R2 must exceed --R1, got R1 = {r1}, R2 = {r2}"));
    }

    fn cells(&mut self, flag: &str, cells: usize, min: usize) {
        self.require(cells >= min, || format!("--{flag} must be at least {min}, got {cells}"));
    }

    fn finish(self) -> Result<(), Failure> {
        if self.0.is_empty() {
            Ok(())
        } else {
            Err(Failure::validation(self.0))
        }
    }
}

fn validate(command: &Command) -> Result<(), Failure> {
    let mut c = Checks::default();
    match command {
        Command::Sobolev(a) => {
            c.exponent(a.dim, a.p);
            if let Some(t) = a.truncation {
                c.require(t >= MIN_TRUNCATION, || format!("--truncation must be at least {MIN_TRUNCATION}, got {t}"));
            }
            if let Some(m) = a.cells {
                c.cells("cells", m, MIN_SOBOLEV_CELLS);
            }
        }
        Command::Annulus(a) => {
            c.exponent(a.dim, a.p);
            c.annulus(a.r1, a.r2);
            c.cells("cells", a.cells, MIN_SOLVER_CELLS);
            a.solver.check(&mut c);
        }
        Command::Curve(a) => {
            c.exponent(a.dim, a.p);
            for r in &a.radii {
                c.require(*r > 0.0 && *r < 1.0, || format!("--radii entries must lie in (0, 1), got {r}"));
            }
            c.cells("cells", a.cells, MIN_SOLVER_CELLS);
            a.solver.check(&mut c);
        }
        Command::Calibrate(a) => {
            c.exponent(a.dim, a.p);
            c.annulus(a.r1, a.r2);
            c.require(a.m >= 1, || "--m must be at least 1".into());
            c.cells("cells-per-annulus", a.cells_per_annulus, MIN_SOLVER_CELLS);
            a.solver.check(&mut c);
        }
        Command::Thresholds(a) => {
            c.exponent(a.dim, a.p);
            c.annulus(a.r1, a.r2);
            c.require(a.m >= 1, || "--m must be at least 1".into());
            c.cells("cells", a.cells, MIN_SOLVER_CELLS);
            if let Some(d) = a.delta {
                c.require(d > 0.0, || format!("--delta must be positive, got {d}"));
            }
            a.solver.check(&mut c);
        }
        Command::Orbit(a) => {
            c.require(a.max_order >= 1, || "--max-order must be at least 1".into());
            c.require(a.group.is_file(), || format!("--group {} is not a readable file", a.group.display()));
            c.annulus(a.r1, a.r2);
        }
        Command::Bubbles(a) => {
            c.require(a.input.is_file(), || format!("--input {} is not a readable file", a.input.display()));
            c.require(a.samples >= MIN_SAMPLES, || format!("--samples must be at least {MIN_SAMPLES}, got {}", a.samples));
        }
        Command::VerifyAll(_) => {}
    }
    c.finish()
}

fn name(command: &Command) -> &'static str {
    match command {
        Command::Sobolev(_) => "sobolev",
        Command::Annulus(_) => "annulus",
        Command::Curve(_) => "curve",
        Command::Calibrate(_) => "calibrate",
        Command::Thresholds(_) => "thresholds",
        Command::Orbit(_) => "orbit",
        Command::Bubbles(_) => "bubbles",
        Command::VerifyAll(_) => "verify-all",
    }
}

fn parameters(command: &Command) -> Value {
    let v = match command {
        Command::Sobolev(a) => serde_json::to_value(a),
        Command::Annulus(a) => serde_json::to_value(a),
        Command::Curve(a) => serde_json::to_value(a),
        Command::Calibrate(a) => serde_json::to_value(a),
        Command::Thresholds(a) => serde_json::to_value(a),
        Command::Orbit(a) => serde_json::to_value(a),
        Command::Bubbles(a) => serde_json::to_value(a),
        Command::VerifyAll(a) => serde_json::to_value(a),
    };
    v.unwrap_or(Value::Null)
}

/// Files written by a command, relative to the output directory.
struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
}

impl Outputs {
    fn json(&mut self, name: &str, value: &impl Serialize) -> Result<(), Failure> {
        std::fs::write(self.dir.join(name), serde_json::to_string_pretty(value)? + "\n")?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn text(&mut self, name: &str, text: &str) -> Result<(), Failure> {
        std::fs::write(self.dir.join(name), text)?;
        self.files.push(name.to_string());
        Ok(())
    }
}

pub fn run(command: &Command, output_dir: &Path, seed: u64) -> Result<(), Failure> {
    validate(command)?;
    std::fs::create_dir_all(output_dir)
        .map_err(|e| Failure::validation(vec![format!("output directory {} is not writable: {e}", output_dir.display())]))?;
    let mut out = Outputs { dir: output_dir.to_path_buf(), files: Vec::new() };
    let result = dispatch(command, &mut out, seed);
    let status = match &result {
        Ok(()) => json!("ok"),
        Err(f) => json!({ "exit_code": f.code, "errors": f.messages }),
    };
    let manifest = json!({
        "command": name(command),
        "parameters": parameters(command),
        "seed": seed,
        "output_dir": output_dir,
        "version": env!("CARGO_PKG_VERSION"),
        "outputs": out.files,
        "status": status,
    });
    std::fs::write(output_dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    result
}

fn dispatch(command: &Command, out: &mut Outputs, seed: u64) -> Result<(), Failure> {
    match command {
        Command::Sobolev(a) => sobolev(a, out),
        Command::Annulus(a) => annulus(a, out),
        Command::Curve(a) => curve(a, out),
        Command::Calibrate(a) => calibrate(a, out, seed),
        Command::Thresholds(a) => thresholds(a, out),
        Command::Orbit(a) => orbit(a, out, seed),
        Command::Bubbles(a) => bubbles(a, out, seed),
        Command::VerifyAll(a) => {
            let report = verify::run_all(a.quick, seed);
            out.json("verify.json", &report)?;
            if report.iter().all(|c| c.pass) {
                Ok(())
            } else {
                let failed = report.iter().filter(|c| !c.pass).map(|c| format!("check failed: {}", c.name)).collect();
                Err(Failure { code: crate::EXIT_NUMERIC, messages: failed })
            }
        }
    }
}

fn not_converged(what: &str) -> Failure {
    Failure { code: EXIT_NONCONVERGENCE, messages: vec![format!("{what} did not converge")] }
}

fn sobolev(a: &SobolevArgs, out: &mut Outputs) -> Result<(), Failure> {
    let t = a.truncation.unwrap_or_else(|| default_truncation(a.dim, a.p));
    let cells = a.cells.unwrap_or_else(|| default_sobolev_cells(t));
    let report = sobolev_constant(a.dim, a.p, t, cells)?;
    println!("S = {:.15e}  c_infty = {:.15e}", report.s, report.c_infty);
    out.json("sobolev.json", &report)
}

fn annulus(a: &AnnulusArgs, out: &mut Outputs) -> Result<(), Failure> {
    let spec = AnnulusSpec::new(a.r1, a.r2, a.dim, a.p)?;
    let opts = a.solver.options();
    let mut reports = serde_json::Map::new();
    let mut converged = true;
    let mut levels = Vec::new();
    if a.method != MethodArg::Shooting {
        let (u, rep) = minimize_annulus(&spec, a.cells, &opts)?;
        out.text("profile_descent.csv", &u.to_csv())?;
        println!("descent:  c = {:.15e}  residual = {:.3e}  iterations = {}", rep.level, rep.residual, rep.iterations);
        converged &= rep.converged;
        levels.push(rep.level);
        reports.insert("descent".into(), serde_json::to_value(&rep)?);
    }
    if a.method != MethodArg::Descent {
        let (u, rep) = shoot_annulus(&spec, a.cells, &opts)?;
        out.text("profile_shooting.csv", &u.to_csv())?;
        println!("shooting: c = {:.15e}  residual = {:.3e}", rep.level, rep.residual);
        levels.push(rep.level);
        reports.insert("shooting".into(), serde_json::to_value(&rep)?);
    }
    if let [d, s] = levels[..] {
        reports.insert("relative_difference".into(), json!((d - s).abs() / s));
    }
    out.json("annulus.json", &reports)?;
    if converged {
        Ok(())
    } else {
        Err(not_converged("descent"))
    }
}

fn curve(a: &CurveArgs, out: &mut Outputs) -> Result<(), Failure> {
    let curve = c_curve(a.dim, a.p, &a.radii, a.cells, &a.solver.options())?;
    out.text("curve.csv", &curve.to_csv())?;
    out.json("curve.json", &json!({ "curve": curve, "monotone": curve.is_monotone() }))?;
    for row in &curve.rows {
        println!("R = {:<10} c = {:.12e}  c/c_infty = {:.8}", row.ratio, row.level, row.level / curve.c_infty);
    }
    if curve.rows.iter().all(|r| r.converged) {
        Ok(())
    } else {
        Err(not_converged("a curve point"))
    }
}

fn calibrate(a: &CalibrateArgs, out: &mut Outputs, seed: u64) -> Result<(), Failure> {
    let spec = AnnulusSpec::new(a.r1, a.r2, a.dim, a.p)?;
    let family = build_family(&spec, a.m, a.cells_per_annulus, &a.solver.options())?;
    let manifest = family.write(out.dir.join("family"))?;
    out.files.extend(manifest.files.iter().map(|f| format!("family/{f}")));
    out.files.push("family/family.json".into());
    let candidate = sign_changing_candidate(&family)?;
    out.text("candidate.csv", &candidate.to_csv())?;
    let mut spans = Vec::new();
    for k in 1..a.m {
        let s = sample_span(&family, k, a.span_samples, seed.wrapping_add(k as u64))?;
        spans.push(json!({ "k": k, "bound": span_energy_bound(&family, k)?, "max_sampled": s.max_sampled, "samples": s.samples }));
    }
    let report = json!({
        "radii": family.radii,
        "levels": family.levels,
        "common_level": family.common_level,
        "level_spread": family.level_spread(),
        "candidate_energy": candidate.energy(),
        "candidate_nodal_level": nodal_level(&candidate)?,
        "span_bounds": spans,
    });
    println!("common level = {:.15e}  spread = {:.3e}", family.common_level, family.level_spread());
    out.json("calibration.json", &report)
}

fn thresholds(a: &ThresholdsArgs, out: &mut Outputs) -> Result<(), Failure> {
    let opts = a.solver.options();
    let single = threshold_l0(a.r1, a.r2, a.dim, a.p, a.cells, &opts)?;
    let multi = threshold_l0_multi(a.r1, a.r2, a.m, a.dim, a.p, a.cells, &opts)?;
    let small_hole = match a.delta {
        Some(d) => Some(threshold_small_hole(d, a.dim, a.p, a.cells, &opts)?),
        None => None,
    };
    println!("l0 (positive)       = {:.12}", single.l0);
    println!("l0 (m = {}, nodal)   = {:.12}", a.m, multi.l0);
    out.json("thresholds.json", &json!({ "l0_positive": single, "l0_nodal": multi, "small_hole": small_hole }))?;
    if single.converged && multi.converged {
        Ok(())
    } else {
        Err(not_converged("a threshold level"))
    }
}

fn orbit(a: &OrbitArgs, out: &mut Outputs, seed: u64) -> Result<(), Failure> {
    let text = std::fs::read_to_string(&a.group)?;
    let spec = GroupSpec::from_json(&text)?;
    let closure = close_group(&spec, a.max_order)?;
    let report = min_orbit_card(&closure, seed)?;
    let fix = if closure.is_complete() {
        let basis = fixed_subspace(&closure)?;
        Some((0..basis.ncols()).map(|k| basis.column(k).iter().copied().collect::<Vec<f64>>()).collect::<Vec<_>>())
    } else {
        None
    };
    let mu = match a.p {
        Some(p) if closure.is_complete() => {
            let c_infty = sobolev_quantum(spec.dim, p)?.c_infty;
            let points = annulus_sample(spec.dim, a.r1, a.r2, 1000, seed);
            Some(mu_g(&closure, &points, c_infty)?)
        }
        _ => None,
    };
    println!("order = {}  complete = {}  l = {}", closure.order(), closure.is_complete(), report.l);
    out.json(
        "orbit.json",
        &json!({ "order": closure.order(), "complete": closure.is_complete(), "fixed_basis": fix, "orbit": report, "mu_G": mu }),
    )
}

fn bubbles(a: &BubblesArgs, out: &mut Outputs, seed: u64) -> Result<(), Failure> {
    let text = std::fs::read_to_string(&a.input)?;
    let spec: BubbleConfigSpec = serde_json::from_str(&text)?;
    let profile = calibrate_talenti(spec.dim, spec.p, spec.alpha)?;
    let cfg = spec.build(profile)?;
    let params = McParams::new(a.samples, seed)?;
    let norm = config_norm_p(&cfg, &params)?;
    let energy = config_energy(&cfg, &params)?;
    let additivity = if cfg.bubbles().is_empty() { None } else { Some(additivity_check(&cfg, &params)?) };
    if cfg.warning() {
        eprintln!("warning: separation/scale ratio {:.3} is below 10", cfg.separation_ratio());
    }
    println!("norm = {:.10e} +- {:.2e}  energy = {:.10e} +- {:.2e}", norm.value, norm.std_error, energy.value, energy.std_error);
    out.json(
        "bubbles.json",
        &json!({
            "profile": profile,
            "images": cfg.image_count(),
            "separation_ratio": cfg.separation_ratio(),
            "warning": cfg.warning(),
            "gradient_norm": norm,
            "energy": energy,
            "additivity": additivity,
        }),
    )
}

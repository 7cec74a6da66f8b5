//! The invariant suite behind `verify-all`.

use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use plaplace_core::annulus::{minimize_annulus, scaling_check, shoot_annulus, SolveOptions};
use plaplace_core::bubbles::{
    additivity_check, energy_quantum_check, trivial_group, two_cap_check, BubbleConfig, McParams, TalentiBubble,
};
use plaplace_core::calibration::{build_family, sample_span};
use plaplace_core::radial::{AnnulusSpec, RadialFunction, RadialGrid};
use plaplace_core::sobolev::{calibrate_talenti, dilate, nehari_project, sobolev_quantum};
use plaplace_core::symmetry::{close_group, min_orbit_card, plane_rotation, Cardinality, GroupSpec};
use plaplace_core::Result;

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

type Check = fn(bool, u64) -> Result<(bool, String)>;

pub fn run_all(quick: bool, seed: u64) -> Vec<CheckResult> {
    let checks: [(&str, Check); 10] = [
        ("nehari identity", nehari_identity),
        ("dilation invariance", dilation_invariance),
        ("scaling identity", scaling_identity),
        ("level curve monotone above c_infty", level_curve),
        ("descent agrees with shooting", cross_solver),
        ("calibrated family has equal levels", calibration),
        ("span energy bound", span_bound),
        ("orbit arithmetic", orbits),
        ("bubble additivity", bubble_additivity),
        ("energy quantum", energy_quantum),
    ];
    checks
        .iter()
        .map(|(name, check)| {
            let start = Instant::now();
            let (pass, detail) = check(quick, seed).unwrap_or_else(|e| (false, e.to_string()));
            let seconds = start.elapsed().as_secs_f64();
            println!("[{}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
            CheckResult { name: name.to_string(), pass, detail, seconds }
        })
        .collect()
}

const CASES: [(usize, f64); 3] = [(3, 2.0), (4, 2.0), (4, 3.0)];

fn random_function(grid: &Arc<RadialGrid>, rng: &mut ChaCha8Rng) -> Result<RadialFunction> {
    let n = grid.len();
    let values = (0..n).map(|i| if i == 0 || i == n - 1 { 0.0 } else { rng.gen_range(-1.0..1.0) }).collect();
    RadialFunction::new(Arc::clone(grid), values, true)
}

fn nehari_identity(_: bool, seed: u64) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for (dim, p) in CASES {
        for (r1, r2) in [(0.5, 1.0), (0.1, 1.0), (1.0, 3.0)] {
            let grid = Arc::new(RadialGrid::logarithmic(r1, r2, 64, dim, p)?);
            for _ in 0..100 {
                let u = random_function(&grid, &mut rng)?;
                let j = nehari_project(&u)?.energy();
                let q = u.rayleigh_quotient()?;
                worst = worst.max((j - q.powf(dim as f64 / p) / dim as f64).abs() / j);
            }
        }
    }
    Ok((worst <= 1e-10, format!("max relative error {worst:.2e}")))
}

fn dilation_invariance(_: bool, seed: u64) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for (dim, p) in CASES {
        let grid = Arc::new(RadialGrid::logarithmic(0.2, 1.0, 128, dim, p)?);
        let u = random_function(&grid, &mut rng)?;
        for lambda in [0.1, 3.0, 10.0] {
            let j = u.energy();
            worst = worst.max((dilate(&u, lambda)?.energy() - j).abs() / j.abs());
        }
    }
    Ok((worst <= 1e-12, format!("max relative change {worst:.2e}")))
}

fn scaling_identity(quick: bool, _: u64) -> Result<(bool, String)> {
    let cells = if quick { 256 } else { 1024 };
    let d = scaling_check(&AnnulusSpec::new(0.2, 2.0, 4, 2.0)?, cells, &SolveOptions::default())?;
    Ok((d <= 1e-6, format!("|c(0.2,2) - c(0.1,1)| / c = {d:.2e}")))
}

fn level_curve(quick: bool, _: u64) -> Result<(bool, String)> {
    let cells = if quick { 512 } else { 2048 };
    let c_infty = sobolev_quantum(4, 2.0)?.c_infty;
    let curve = plaplace_core::annulus::c_curve(4, 2.0, &[0.5, 0.2, 0.1], cells, &SolveOptions::default())?;
    let floor = curve.rows.iter().all(|r| r.level >= c_infty * (1.0 - 2e-4));
    let last = curve.rows.last().map_or(f64::NAN, |r| r.level / c_infty);
    Ok((curve.is_monotone() && floor, format!("c(0.1,1)/c_infty = {last:.6}")))
}

fn cross_solver(quick: bool, _: u64) -> Result<(bool, String)> {
    let cells = if quick { 512 } else { 2048 };
    let opts = SolveOptions::default();
    let mut worst = 0.0f64;
    for (dim, p) in CASES {
        let spec = AnnulusSpec::new(0.5, 1.0, dim, p)?;
        let (_, d) = minimize_annulus(&spec, cells, &opts)?;
        let (_, s) = shoot_annulus(&spec, cells, &opts)?;
        worst = worst.max((d.level - s.level).abs() / s.level);
    }
    Ok((worst <= 1e-4, format!("max relative difference {worst:.2e}")))
}

fn calibration(quick: bool, _: u64) -> Result<(bool, String)> {
    let cells = if quick { 256 } else { 1024 };
    let opts = SolveOptions::default();
    let family = build_family(&AnnulusSpec::new(0.125, 1.0, 4, 2.0)?, 3, cells, &opts)?;
    let (_, direct) = minimize_annulus(&AnnulusSpec::new(0.5, 1.0, 4, 2.0)?, cells, &opts)?;
    let spread = family.level_spread();
    let gap = (family.common_level - direct.level).abs() / direct.level;
    Ok((spread <= 1e-6 && gap <= 1e-4, format!("spread {spread:.2e}, gap to c(0.5,1) {gap:.2e}")))
}

fn span_bound(quick: bool, seed: u64) -> Result<(bool, String)> {
    let family = build_family(&AnnulusSpec::new(0.125, 1.0, 4, 2.0)?, 3, 256, &SolveOptions::default())?;
    let s = sample_span(&family, 1, if quick { 1000 } else { 10_000 }, seed)?;
    Ok((s.max_sampled <= s.bound + 1e-12, format!("max sampled {:.10e} vs bound {:.10e}", s.max_sampled, s.bound)))
}

fn spec_of(dim: usize, generators: Vec<Vec<Vec<f64>>>) -> GroupSpec {
    GroupSpec { dim, generators }
}

fn orbits(_: bool, seed: u64) -> Result<(bool, String)> {
    let minus = spec_of(3, vec![vec![vec![-1.0, 0.0, 0.0], vec![0.0, -1.0, 0.0], vec![0.0, 0.0, -1.0]]]);
    let l_pm = min_orbit_card(&close_group(&minus, 100)?, seed)?.l;
    let a = 2.0 * std::f64::consts::PI / 3.0;
    let g = plane_rotation(4, 0, 1, a) * plane_rotation(4, 2, 3, a);
    let double = GroupSpec::from_matrices(4, &[g]);
    let l_double = min_orbit_card(&close_group(&double, 100)?, seed)?.l;
    let pass = l_pm == Cardinality::Finite(2) && l_double == Cardinality::Finite(3);
    Ok((pass, format!("l(+-I) = {l_pm}, l(double 2pi/3) = {l_double}")))
}

fn bubble_additivity(quick: bool, seed: u64) -> Result<(bool, String)> {
    let samples = if quick { 100_000 } else { 1_000_000 };
    let params = McParams::new(samples, seed)?;
    let profile = calibrate_talenti(4, 2.0, 1.0)?;
    let mut deviations = Vec::new();
    for sep in [10.0, 100.0, 1000.0] {
        let b1 = TalentiBubble::new(vec![0.0; 4], 1.0)?;
        let b2 = TalentiBubble::new(vec![sep, 0.0, 0.0, 0.0], 1.0)?;
        let cfg = BubbleConfig::new(profile, None, vec![(b1, trivial_group(4)), (b2, trivial_group(4))])?;
        deviations.push(additivity_check(&cfg, &params)?.gradient_norm.deviation);
    }
    let decreasing = deviations.windows(2).all(|w| w[1] < w[0]);
    Ok((decreasing, format!("deviations {:.2e}, {:.2e}, {:.2e}", deviations[0], deviations[1], deviations[2])))
}

fn energy_quantum(quick: bool, _: u64) -> Result<(bool, String)> {
    let profile = calibrate_talenti(4, 2.0, 1.0)?;
    let c_infty = sobolev_quantum(4, 2.0)?.c_infty;
    let q = energy_quantum_check(&profile, c_infty)?;
    let cells = if quick { 256 } else { 512 };
    let two = two_cap_check(&AnnulusSpec::new(1e-2, 1.0, 4, 2.0)?, cells, c_infty, &SolveOptions::default())?;
    let pass = q.relative_gap.abs() <= 1e-2 && q.min_perturbed >= c_infty * (1.0 - 1e-4) && two.ratio >= 0.99;
    Ok((pass, format!("phi/c_infty - 1 = {:.2e}, two caps / 2c_infty = {:.4}", q.relative_gap, two.ratio)))
}

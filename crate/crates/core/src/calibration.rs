//! Equal-energy families of radial bumps on a geometric partition of an
//! annulus, the sign-changing test functions built from them, and the
//! symmetry thresholds that the levels imply.

use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::annulus::{minimize_annulus, minimize_from, parabolic_bump, EnergyReport, SolveOptions};
use crate::error::{domain, Error, Result};
use crate::radial::{AnnulusSpec, RadialFunction, RadialGrid};
use crate::sobolev::{nehari_project, sobolev_quantum};

/// `R2 = r_0 > r_1 > ... > r_m = R1` with constant ratio `(R1/R2)^{1/m}`.
pub fn partition_radii(r1: f64, r2: f64, m: usize) -> Result<Vec<f64>> {
    if m == 0 {
        return domain("partition needs at least one annulus");
    }
    if !(r1 > 0.0 && r1 < r2 && r2.is_finite()) {
        return domain(format!("partition needs 0 < R1 < R2, got R1 = {r1}, R2 = {r2}"));
    }
    let log_ratio = (r1 / r2).ln() / m as f64;
    let mut radii: Vec<f64> = (0..=m).map(|i| r2 * (log_ratio * i as f64).exp()).collect();
    radii[0] = r2;
    radii[m] = r1;
    Ok(radii)
}

/// Nonnegative Nehari functions `omega_1..omega_m` with disjoint supports
/// `[r_i, r_{i-1}]`, all at the level `c(R1^{1/m}, R2^{1/m})`.
#[derive(Debug, Clone)]
pub struct CalibratedFamily {
    pub spec: AnnulusSpec,
    pub radii: Vec<f64>,
    /// Each member extended by zero to the full annulus grid.
    pub omegas: Vec<RadialFunction>,
    pub levels: Vec<f64>,
    pub common_level: f64,
    pub reports: Vec<EnergyReport>,
}

impl CalibratedFamily {
    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        self.omegas[0].grid()
    }

    /// Largest pairwise relative deviation between member levels.
    pub fn level_spread(&self) -> f64 {
        let hi = self.levels.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = self.levels.iter().copied().fold(f64::INFINITY, f64::min);
        (hi - lo) / self.common_level
    }

    /// `sum_i c_i omega_i`.
    pub fn combination(&self, coefficients: &[f64]) -> Result<RadialFunction> {
        if coefficients.len() > self.omegas.len() {
            return domain("more coefficients than family members");
        }
        let mut acc = RadialFunction::zeros(Arc::clone(self.grid()));
        for (c, w) in coefficients.iter().zip(&self.omegas) {
            acc = acc.axpy(*c, w)?;
        }
        Ok(acc)
    }

    /// Writes `family.json` plus `omega_<i>.csv` for each member into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<FamilyManifest> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let mut files = Vec::with_capacity(self.omegas.len());
        for (i, w) in self.omegas.iter().enumerate() {
            let name = format!("omega_{}.csv", i + 1);
            w.write_csv(dir.join(&name))?;
            files.push(name);
        }
        let manifest = FamilyManifest {
            spec: self.spec,
            radii: self.radii.clone(),
            levels: self.levels.clone(),
            common_level: self.common_level,
            files,
        };
        std::fs::write(dir.join("family.json"), serde_json::to_string_pretty(&manifest)?)?;
        Ok(manifest)
    }

    /// Reads a family written by [`CalibratedFamily::write`].
    pub fn read(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let manifest: FamilyManifest = serde_json::from_slice(&std::fs::read(dir.join("family.json"))?)?;
        let mut omegas: Vec<RadialFunction> = Vec::with_capacity(manifest.files.len());
        for name in &manifest.files {
            let w = RadialFunction::read_csv(dir.join(name), manifest.spec.dim, manifest.spec.p)?;
            // share one grid between members
            let w = match omegas.first() {
                Some(first) if first.grid().nodes() == w.grid().nodes() => {
                    RadialFunction::new(Arc::clone(first.grid()), w.values().to_vec(), w.is_dirichlet())?
                }
                Some(_) => return Err(Error::Parse(format!("{name} is on a different grid"))),
                None => w,
            };
            omegas.push(w);
        }
        Ok(Self {
            spec: manifest.spec,
            radii: manifest.radii,
            omegas,
            levels: manifest.levels,
            common_level: manifest.common_level,
            reports: Vec::new(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyManifest {
    pub spec: AnnulusSpec,
    pub radii: Vec<f64>,
    pub levels: Vec<f64>,
    pub common_level: f64,
    pub files: Vec<String>,
}

/// Builds the family on one global log grid of `m * cells_per_annulus`
/// cells whose nodes contain every partition radius, minimizing on each
/// sub-annulus independently.
pub fn build_family(
    spec: &AnnulusSpec,
    m: usize,
    cells_per_annulus: usize,
    opts: &SolveOptions,
) -> Result<CalibratedFamily> {
    spec.validate()?;
    if m == 0 {
        return domain("family needs at least one member");
    }
    let total = m * cells_per_annulus;
    let grid = Arc::new(RadialGrid::logarithmic(spec.r1, spec.r2, total, spec.dim, spec.p)?);
    let nominal = partition_radii(spec.r1, spec.r2, m)?;
    // member i (1-based) lives on nodes [(m-i) k, (m-i+1) k]
    let mut radii: Vec<f64> = (0..=m).map(|i| grid.nodes()[(m - i) * cells_per_annulus]).collect();
    radii[0] = nominal[0];
    radii[m] = nominal[m];
    let solved: Vec<(RadialFunction, EnergyReport)> = (1..=m)
        .into_par_iter()
        .map(|i| {
            let lo = (m - i) * cells_per_annulus;
            let sub = Arc::new(grid.restrict(lo, lo + cells_per_annulus)?);
            let (w, rep) = minimize_from(&parabolic_bump(sub), opts)?;
            if !rep.converged {
                return Err(Error::NonConvergence(format!(
                    "member {i} on [{:.6e}, {:.6e}] stopped after {} iterations (residual {:.3e})",
                    w.grid().inner(),
                    w.grid().outer(),
                    rep.iterations,
                    rep.residual
                )));
            }
            Ok((w.extend_by_zero(Arc::clone(&grid), lo)?, rep))
        })
        .collect::<Result<_>>()?;
    let (omegas, reports): (Vec<_>, Vec<_>) = solved.into_iter().unzip();
    let levels: Vec<f64> = omegas.iter().map(RadialFunction::energy).collect();
    let common_level = levels.iter().sum::<f64>() / m as f64;
    Ok(CalibratedFamily { spec: *spec, radii, omegas, levels, common_level, reports })
}

/// `sum_i (-1)^i omega_i`; a test function, not claimed to be a solution.
pub fn sign_changing_candidate(family: &CalibratedFamily) -> Result<RadialFunction> {
    let coefficients: Vec<f64> = (1..=family.len()).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    family.combination(&coefficients)
}

/// `max_{t>0} J(t u) = Q(u)^{N/p} / N`.
pub fn fiber_maximum(u: &RadialFunction) -> Result<f64> {
    Ok(nehari_project(u)?.energy())
}

/// `sum_{i=1}^{k+1} max_t J(t omega_i)`, the bound on `J` over
/// `span(omega_1, ..., omega_{k+1})`.
pub fn span_energy_bound(family: &CalibratedFamily, k: usize) -> Result<f64> {
    if k == 0 || k + 1 > family.len() {
        return domain(format!("span index k = {k} outside 1..={}", family.len().saturating_sub(1)));
    }
    family.omegas[..=k].iter().map(fiber_maximum).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpanSample {
    pub bound: f64,
    pub max_sampled: f64,
    pub samples: usize,
}

/// Evaluates `J` on random elements of `span(omega_1..omega_{k+1})`.
/// Coefficients are drawn around the Nehari points (uniform in `[-2, 2]`).
pub fn sample_span(family: &CalibratedFamily, k: usize, samples: usize, seed: u64) -> Result<SpanSample> {
    let bound = span_energy_bound(family, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_sampled = f64::NEG_INFINITY;
    for _ in 0..samples {
        let coefficients: Vec<f64> = (0..=k).map(|_| rng.gen_range(-2.0..2.0)).collect();
        max_sampled = max_sampled.max(family.combination(&coefficients)?.energy());
    }
    Ok(SpanSample { bound, max_sampled, samples })
}

/// `J(Pi u^+) + J(Pi u^-)`: the level of `u` after scaling each sign
/// component onto the Nehari manifold. Components that vanish contribute 0.
pub fn nodal_level(u: &RadialFunction) -> Result<f64> {
    let mut level = 0.0;
    for part in [u.positive_part(), u.negative_part()] {
        if !part.is_zero() {
            level += fiber_maximum(&part)?;
        }
    }
    Ok(level)
}

/// Relative tolerance attached to numerically computed levels.
pub const LEVEL_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdStatus {
    Located,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmallHoleThreshold {
    pub delta: f64,
    pub c_infty: f64,
    /// Largest ratio found with `c(R,1) <= c_infty + delta`.
    pub ratio: Option<f64>,
    pub level_at_ratio: Option<f64>,
    pub tolerance: f64,
    pub status: ThresholdStatus,
}

/// Log cells used for `c(R, 1)` in the threshold searches: 256 per decade of
/// the hole ratio, at least `base`.
pub fn cells_for_ratio(ratio: f64, base: usize) -> usize {
    let decades = (1.0 / ratio).log10().max(0.0);
    ((256.0 * decades).ceil() as usize).max(base)
}

/// Smallest ratio searched by [`threshold_small_hole`].
pub const SMALL_HOLE_FLOOR: f64 = 1e-6;

/// Bisection in `log R` for the largest `R` with `c(R, 1) <= c_infty + delta`,
/// relying on the monotonicity of `R -> c(R, 1)`.
pub fn threshold_small_hole(delta: f64, dim: usize, p: f64, base_cells: usize, opts: &SolveOptions) -> Result<SmallHoleThreshold> {
    if !(delta > 0.0) {
        return domain(format!("delta must be positive, got {delta}"));
    }
    let c_infty = sobolev_quantum(dim, p)?.c_infty;
    let tolerance = LEVEL_TOLERANCE * c_infty;
    let target = c_infty + delta;
    let level = |ratio: f64| -> Result<f64> {
        let spec = AnnulusSpec::new(ratio, 1.0, dim, p)?;
        let (_, rep) = minimize_annulus(&spec, cells_for_ratio(ratio, base_cells), opts)?;
        if !rep.converged {
            return Err(Error::NonConvergence(format!("c({ratio}, 1) did not converge")));
        }
        Ok(rep.level)
    };
    let mut report = SmallHoleThreshold {
        delta,
        c_infty,
        ratio: None,
        level_at_ratio: None,
        tolerance,
        status: ThresholdStatus::Inconclusive,
    };
    if delta <= 2.0 * tolerance {
        return Ok(report);
    }
    let (mut lo, mut hi) = (SMALL_HOLE_FLOOR.ln(), (0.999f64).ln());
    let mut c_lo = level(lo.exp())?;
    if c_lo > target {
        return Ok(report);
    }
    let c_hi = level(hi.exp())?;
    if c_hi <= target {
        lo = hi;
        c_lo = c_hi;
    } else {
        while hi - lo > 1e-3 {
            let mid = 0.5 * (lo + hi);
            let c = level(mid.exp())?;
            if c <= target {
                lo = mid;
                c_lo = c;
            } else {
                hi = mid;
            }
        }
    }
    report.ratio = Some(lo.exp());
    report.level_at_ratio = Some(c_lo);
    report.status = ThresholdStatus::Located;
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct L0Report {
    pub l0: f64,
    /// Level entering the numerator, before the multiplicity factor.
    pub level: f64,
    pub multiplicity: usize,
    pub c_infty: f64,
    pub converged: bool,
}

impl L0Report {
    /// Whether a group with minimal orbit size `l` clears the threshold.
    pub fn admits(&self, l: usize) -> bool {
        l as f64 > self.l0
    }
}

/// `c(R1, R2) / c_infty`.
pub fn threshold_l0(r1: f64, r2: f64, dim: usize, p: f64, cells: usize, opts: &SolveOptions) -> Result<L0Report> {
    let spec = AnnulusSpec::new(r1, r2, dim, p)?;
    let c_infty = sobolev_quantum(dim, p)?.c_infty;
    let (_, rep) = minimize_annulus(&spec, cells, opts)?;
    Ok(L0Report { l0: rep.level / c_infty, level: rep.level, multiplicity: 1, c_infty, converged: rep.converged })
}

/// `(m+1) c(R1^{1/(m+1)}, R2^{1/(m+1)}) / c_infty`.
pub fn threshold_l0_multi(
    r1: f64,
    r2: f64,
    m: usize,
    dim: usize,
    p: f64,
    cells: usize,
    opts: &SolveOptions,
) -> Result<L0Report> {
    if m == 0 {
        return domain("the multiplicity threshold needs m >= 1");
    }
    AnnulusSpec::new(r1, r2, dim, p)?;
    let root = 1.0 / (m + 1) as f64;
    let spec = AnnulusSpec::new(r1.powf(root), r2.powf(root), dim, p)?;
    let c_infty = sobolev_quantum(dim, p)?.c_infty;
    let (_, rep) = minimize_annulus(&spec, cells, opts)?;
    let factor = (m + 1) as f64;
    Ok(L0Report {
        l0: factor * rep.level / c_infty,
        level: rep.level,
        multiplicity: m + 1,
        c_infty,
        converged: rep.converged,
    })
}

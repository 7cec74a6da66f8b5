//! Talenti optimizers, the best Sobolev constant, the Nehari fibering map
//! and the critical dilation.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::radial::{check_exponent, RadialFunction, RadialGrid};

/// Radial profile `U(r) = [alpha + beta r^{p/(p-1)}]^{1 - N/p}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TalentiProfile {
    pub alpha: f64,
    pub beta: f64,
    pub dim: usize,
    pub p: f64,
}

impl TalentiProfile {
    pub fn new(alpha: f64, beta: f64, dim: usize, p: f64) -> Result<Self> {
        check_exponent(dim, p)?;
        if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
            return domain(format!("Talenti parameters must be positive, got alpha = {alpha}, beta = {beta}"));
        }
        Ok(Self { alpha, beta, dim, p })
    }

    fn conjugate(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    fn decay(&self) -> f64 {
        1.0 - self.dim as f64 / self.p
    }

    pub fn eval(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return domain(format!("Talenti profile evaluated at negative radius {r}"));
        }
        Ok(self.value(r))
    }

    /// `U(r)` for `r >= 0` without the range check.
    pub fn value(&self, r: f64) -> f64 {
        (self.alpha + self.beta * r.powf(self.conjugate())).powf(self.decay())
    }

    /// `U'(r)`.
    pub fn derivative(&self, r: f64) -> f64 {
        let q = self.conjugate();
        let base = self.alpha + self.beta * r.powf(q);
        self.decay() * base.powf(self.decay() - 1.0) * self.beta * q * r.powf(q - 1.0)
    }

    /// Natural length scale `(alpha/beta)^{(p-1)/p}` of the profile.
    pub fn length_scale(&self) -> f64 {
        (self.alpha / self.beta).powf(1.0 / self.conjugate())
    }

    /// Nodal samples on `grid` (no boundary condition imposed).
    pub fn sample(&self, grid: Arc<RadialGrid>) -> RadialFunction {
        RadialFunction::from_fn(grid, false, |r| self.value(r))
    }

    /// Radial ODE residual of the profile, measured on the calibration grid
    /// attached to `alpha`.
    pub fn residual(&self) -> Result<f64> {
        let grid = Arc::new(calibration_grid(self.dim, self.p, self.alpha)?);
        Ok(self.sample(grid).ode_residual())
    }
}

/// Cells of the log grid used to calibrate profiles.
pub const CALIBRATION_CELLS: usize = 1 << 15;
/// The calibration window spans this many length units on either side of `alpha`.
pub const CALIBRATION_SPAN: f64 = 1e3;

// The length scale of the exact optimizer is proportional to alpha, so a
// window proportional to alpha makes calibration dilation-equivariant.
fn calibration_grid(dim: usize, p: f64, alpha: f64) -> Result<RadialGrid> {
    RadialGrid::logarithmic(alpha / CALIBRATION_SPAN, alpha * CALIBRATION_SPAN, CALIBRATION_CELLS, dim, p)
}

/// Signed defect `(J'(U), U)_interior / int U^{p*}` of the sampled profile;
/// positive when `-Delta_p U` dominates `U^{p*-1}`.
fn nehari_defect(profile: &TalentiProfile, grid: &Arc<RadialGrid>) -> f64 {
    let u = profile.sample(Arc::clone(grid));
    let g = u.energy_gradient();
    let ps = grid.critical_exponent();
    let masses = grid.node_masses();
    let (mut num, mut den) = (0.0, 0.0);
    for i in 1..grid.len() - 1 {
        let v = u.values()[i];
        num += g[i] * v;
        den += masses[i] * v.powf(ps);
    }
    num / den
}

/// Finds `beta` such that the Talenti profile with the given `alpha` solves
/// `-Delta_p U = U^{p*-1}` on `R^N`, by bisection in `log beta` on the signed
/// discrete residual.
pub fn calibrate_talenti(dim: usize, p: f64, alpha: f64) -> Result<TalentiProfile> {
    check_exponent(dim, p)?;
    if !(alpha > 0.0 && alpha.is_finite()) {
        return domain(format!("alpha must be positive, got {alpha}"));
    }
    let grid = Arc::new(calibration_grid(dim, p, alpha)?);
    let defect = |log_beta: f64| -> f64 {
        let profile = TalentiProfile { alpha, beta: log_beta.exp(), dim, p };
        nehari_defect(&profile, &grid)
    };
    // dimensionally beta ~ alpha^{-1/(p-1)}
    let guess = -alpha.ln() / (p - 1.0);
    let (mut lo, mut hi) = (guess - 1.0, guess + 1.0);
    let (mut f_lo, mut f_hi) = (defect(lo), defect(hi));
    let mut expansions = 0;
    while f_lo.signum() == f_hi.signum() {
        if expansions > 60 || !f_lo.is_finite() || !f_hi.is_finite() {
            return Err(Error::Numeric(format!(
                "no sign change of the Talenti residual on log beta in [{lo:.3}, {hi:.3}] \
                 (defects {f_lo:.3e}, {f_hi:.3e})"
            )));
        }
        if f_lo > 0.0 {
            lo -= 2.0;
            f_lo = defect(lo);
        } else {
            hi += 2.0;
            f_hi = defect(hi);
        }
        expansions += 1;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = defect(mid);
        if f_mid == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    TalentiProfile::new(alpha, (0.5 * (lo + hi)).exp(), dim, p)
}

/// Estimate of the best Sobolev constant and the energy quantum it implies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SobolevReport {
    #[serde(rename = "S")]
    pub s: f64,
    pub c_infty: f64,
    #[serde(rename = "N")]
    pub dim: usize,
    pub p: f64,
    pub truncation_radius: f64,
    pub grid_size: usize,
}

/// `S^{N/p} / N`.
pub fn energy_quantum(s: f64, dim: usize, p: f64) -> f64 {
    let n = dim as f64;
    s.powf(n / p) / n
}

pub const MIN_TRUNCATION: f64 = 1e3;
pub const MIN_SOBOLEV_CELLS: usize = 512;

/// Sobolev quotient of the calibrated optimizer, sampled on a log grid over
/// `[1/T, T]`. The profile is extended as a constant into the inner ball and
/// tapered linearly in `log r` to zero over the outer decade.
pub fn sobolev_constant(dim: usize, p: f64, truncation_radius: f64, cells: usize) -> Result<SobolevReport> {
    check_exponent(dim, p)?;
    if !(truncation_radius >= MIN_TRUNCATION) {
        return domain(format!("truncation radius must be at least {MIN_TRUNCATION}, got {truncation_radius}"));
    }
    if cells < MIN_SOBOLEV_CELLS {
        return domain(format!("need at least {MIN_SOBOLEV_CELLS} cells, got {cells}"));
    }
    let profile = calibrate_talenti(dim, p, 1.0)?;
    let t = truncation_radius;
    let grid = Arc::new(RadialGrid::logarithmic(1.0 / t, t, cells, dim, p)?);
    let taper_start = t / 10.0;
    let u = RadialFunction::from_fn(grid, false, |r| {
        let taper = if r > taper_start { ((t / r).ln() / 10f64.ln()).max(0.0) } else { 1.0 };
        taper * profile.value(r)
    });
    let s = u.rayleigh_quotient()?;
    Ok(SobolevReport {
        s,
        c_infty: energy_quantum(s, dim, p),
        dim,
        p,
        truncation_radius,
        grid_size: cells,
    })
}

/// Truncation radius at which the discarded gradient tail of the optimizer,
/// decaying like `T^{-(N-p)/(p-1)}`, is about `1e-6`; within `[1e5, 1e12]`.
pub fn default_truncation(dim: usize, p: f64) -> f64 {
    let decay = (dim as f64 - p) / (p - 1.0);
    10f64.powf((6.0 / decay).clamp(5.0, 12.0))
}

/// 512 log cells per decade of `[1/T, T]`.
pub fn default_sobolev_cells(truncation_radius: f64) -> usize {
    let decades = 2.0 * truncation_radius.log10();
    ((512.0 * decades).ceil() as usize).max(MIN_SOBOLEV_CELLS)
}

/// [`sobolev_constant`] with the default truncation and resolution.
pub fn sobolev_quantum(dim: usize, p: f64) -> Result<SobolevReport> {
    let t = default_truncation(dim, p);
    sobolev_constant(dim, p, t, default_sobolev_cells(t))
}

/// Maximizer `t* = (a/b)^{1/(p*-p)}` of `t -> J(tu)` where `a = int |grad u|^p`
/// and `b = int |u|^{p*}`.
pub fn nehari_scale(a: f64, b: f64, p: f64, p_star: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return domain(format!("Nehari scaling needs positive norms, got a = {a}, b = {b}"));
    }
    Ok((a / b).powf(1.0 / (p_star - p)))
}

/// Radial projection `t* u` onto the discrete Nehari manifold.
pub fn nehari_project(u: &RadialFunction) -> Result<RadialFunction> {
    let grid = u.grid();
    let a = u.grad_norm_p();
    let b = u.lpstar_norm_pow();
    if u.is_zero() {
        return domain("cannot project the zero function onto the Nehari manifold");
    }
    let t = nehari_scale(a, b, grid.exponent(), grid.critical_exponent())?;
    Ok(u.scaled(t))
}

/// `u_lambda(r) = lambda^{(p-N)/p} u(r/lambda)`, carried on the dilated grid.
pub fn dilate(u: &RadialFunction, lambda: f64) -> Result<RadialFunction> {
    let grid = u.grid();
    if lambda == 1.0 {
        return Ok(u.clone());
    }
    let dilated = Arc::new(grid.dilate(lambda)?);
    let amp = lambda.powf((grid.exponent() - grid.dim() as f64) / grid.exponent());
    let values = u.values().iter().map(|v| amp * v).collect();
    RadialFunction::new(dilated, values, u.is_dirichlet())
}

//! Reference values computed without the library's own formulas.
#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use plaplace_core::radial::{RadialFunction, RadialGrid};
use plaplace_core::symmetry::{plane_rotation, GroupClosure};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// Best constant of `||u||_{p*}^p <= S^{-1} ||grad u||_p^p` on R^N from the
/// classical Gamma-function formula.
pub fn closed_form_sobolev(dim: usize, p: f64) -> f64 {
    let n = dim as f64;
    let ratio = gamma(n / p) * gamma(1.0 + n - n / p) / (gamma(1.0 + n / 2.0) * gamma(n));
    let k = PI.sqrt() * n.powf(1.0 / p) * ((n - p) / (p - 1.0)).powf((p - 1.0) / p) * ratio.powf(1.0 / n);
    k.powf(p)
}

pub fn closed_form_quantum(dim: usize, p: f64) -> f64 {
    closed_form_sobolev(dim, p).powf(dim as f64 / p) / dim as f64
}

/// Surface area of the unit sphere in R^N, via `|S^{N-1}| = N |B^N|`.
pub fn sphere_area(dim: usize) -> f64 {
    let n = dim as f64;
    n * PI.powf(n / 2.0) / gamma(n / 2.0 + 1.0)
}

/// `(int |u'|^p dx, int |u|^{p*} dx)` by exact cell integration of
/// `r^{N-1}` and the trapezoid rule on nodes.
pub fn norms(u: &RadialFunction) -> (f64, f64) {
    let g = u.grid();
    let (n, p) = (g.dim() as f64, g.exponent());
    let ps = n * p / (n - p);
    let r = g.nodes();
    let v = u.values();
    let w = sphere_area(g.dim());
    let mut grad = 0.0;
    let mut leb = 0.0;
    for k in 0..r.len() - 1 {
        let h = r[k + 1] - r[k];
        let slope = (v[k + 1] - v[k]) / h;
        grad += w * slope.abs().powf(p) * (r[k + 1].powf(n) - r[k].powf(n)) / n;
        leb += w * 0.5 * h * (v[k].abs().powf(ps) * r[k].powf(n - 1.0) + v[k + 1].abs().powf(ps) * r[k + 1].powf(n - 1.0));
    }
    (grad, leb)
}

pub fn energy(u: &RadialFunction) -> f64 {
    let g = u.grid();
    let (n, p) = (g.dim() as f64, g.exponent());
    let (a, b) = norms(u);
    a / p - b * (n - p) / (n * p)
}

/// `max_t J(t u)` from the two norms.
pub fn fiber_max(u: &RadialFunction) -> f64 {
    let g = u.grid();
    let (n, p) = (g.dim() as f64, g.exponent());
    let ps = n * p / (n - p);
    let (a, b) = norms(u);
    let t = (a / b).powf(1.0 / (ps - p));
    t.powf(p) * a / p - t.powf(ps) * b / ps
}

pub fn random_dirichlet(grid: &Arc<RadialGrid>, rng: &mut impl Rng) -> RadialFunction {
    let n = grid.len();
    let values = (0..n).map(|i| if i == 0 || i == n - 1 { 0.0 } else { rng.gen_range(-1.0..1.0) }).collect();
    RadialFunction::new(Arc::clone(grid), values, true).unwrap()
}

/// Positive smooth bump `sin(pi (r - a)/(b - a))` plus a random ripple.
pub fn random_bump(grid: &Arc<RadialGrid>, rng: &mut impl Rng) -> RadialFunction {
    let (a, b) = (grid.inner(), grid.outer());
    let k = rng.gen_range(1..4) as f64;
    let amp = rng.gen_range(0.0..0.5);
    RadialFunction::from_fn(Arc::clone(grid), true, |r| {
        let t = PI * (r - a) / (b - a);
        t.sin() * (1.0 + amp * (k * t).sin())
    })
}

/// Dimension of the common null space of `g - I` from the singular values
/// of the stacked matrix.
pub fn fix_dim_by_svd(c: &GroupClosure) -> usize {
    let n = c.dim();
    let mut stacked = DMatrix::zeros(n * c.order(), n);
    for (k, g) in c.elements().iter().enumerate() {
        stacked.view_mut((k * n, 0), (n, n)).copy_from(&(g - DMatrix::identity(n, n)));
    }
    let sv = stacked.svd(false, false).singular_values;
    sv.iter().filter(|s| **s <= 1e-6).count() + n.saturating_sub(sv.len())
}

/// Orbit size by brute-force pairwise comparison.
pub fn orbit_size(c: &GroupClosure, x: &[f64]) -> usize {
    let v = DVector::from_column_slice(x);
    let mut pts: Vec<DVector<f64>> = Vec::new();
    for g in c.elements() {
        let y = g * &v;
        if !pts.iter().any(|p| (p - &y).amax() <= 1e-8 * v.norm()) {
            pts.push(y);
        }
    }
    pts.len()
}

pub fn random_generator(dim: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    match rng.gen_range(0..4) {
        0 => {
            let mut perm: Vec<usize> = (0..dim).collect();
            perm.shuffle(rng);
            DMatrix::from_fn(dim, dim, |i, j| if perm[i] == j { 1.0 } else { 0.0 })
        }
        1 => DMatrix::from_fn(dim, dim, |i, j| if i == j { if rng.gen_bool(0.5) { -1.0 } else { 1.0 } } else { 0.0 }),
        2 => {
            let i = rng.gen_range(0..dim - 1);
            let j = rng.gen_range(i + 1..dim);
            plane_rotation(dim, i, j, 2.0 * PI / rng.gen_range(2..7) as f64)
        }
        _ => -DMatrix::identity(dim, dim),
    }
}

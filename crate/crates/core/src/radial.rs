//! Piecewise-linear radial functions on annuli and the discrete energies
//! of the critical p-Dirichlet problem.
//!
//! A radial function `u(|x|)` is stored by its nodal values on a
//! [`RadialGrid`]. The gradient term integrates `|u'|^p r^{N-1}` exactly on
//! every cell (the slope is cellwise constant), the critical Lebesgue term
//! uses the trapezoid rule on `|u|^{p*} r^{N-1}`. Both carry the surface
//! measure of the unit sphere so that the numbers are integrals over `R^N`.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Smallest admissible exponent.
pub const P_MIN: f64 = 1.1;
/// `p` must stay at least this far below the dimension.
pub const P_MARGIN: f64 = 0.1;
/// Minimum number of cells of a grid (one interior node at least).
pub const MIN_CELLS: usize = 2;

/// Critical Sobolev exponent `Np/(N-p)`.
pub fn critical_exponent(dim: usize, p: f64) -> f64 {
    let n = dim as f64;
    n * p / (n - p)
}

/// Surface measure of the unit sphere in `R^N`, `2 pi^{N/2} / Gamma(N/2)`.
pub fn sphere_measure(dim: usize) -> f64 {
    let n = dim as f64;
    2.0 * std::f64::consts::PI.powf(0.5 * n) / libm::tgamma(0.5 * n)
}

pub fn check_exponent(dim: usize, p: f64) -> Result<()> {
    if dim < 2 {
        return domain(format!("dimension must be at least 2, got {dim}"));
    }
    let upper = dim as f64 - P_MARGIN;
    if !(p.is_finite() && p >= P_MIN - 1e-12 && p <= upper + 1e-12) {
        return domain(format!(
            "exponent p = {p} outside the admissible range [{P_MIN}, {upper}] for N = {dim}"
        ));
    }
    Ok(())
}

/// `t -> |t|^{p-2} t`, extended by zero at the origin.
#[inline]
pub fn signed_pow(t: f64, q: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t.signum() * t.abs().powf(q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Uniform,
    Logarithmic,
}

impl std::str::FromStr for Spacing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Spacing::Uniform),
            "log" | "logarithmic" => Ok(Spacing::Logarithmic),
            other => Err(Error::Parse(format!("unknown spacing '{other}'"))),
        }
    }
}

/// One annulus instance `{R1 < |x| < R2}` of the critical problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnulusSpec {
    pub r1: f64,
    pub r2: f64,
    pub dim: usize,
    pub p: f64,
}

impl AnnulusSpec {
    pub fn new(r1: f64, r2: f64, dim: usize, p: f64) -> Result<Self> {
        let spec = Self { r1, r2, dim, p };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r1.is_finite() && self.r2.is_finite() && self.r1 > 0.0 && self.r1 < self.r2) {
            return domain(format!(
                "annulus radii must satisfy 0 < R1 < R2, got R1 = {}, R2 = {}",
                self.r1, self.r2
            ));
        }
        check_exponent(self.dim, self.p)
    }

    /// Hole ratio `R1/R2`.
    pub fn ratio(&self) -> f64 {
        self.r1 / self.r2
    }

    pub fn critical_exponent(&self) -> f64 {
        critical_exponent(self.dim, self.p)
    }

    /// The same problem rescaled to outer radius one.
    pub fn normalized(&self) -> Self {
        Self { r1: self.r1 / self.r2, r2: 1.0, ..*self }
    }
}

/// Nodes `r_0 < ... < r_M` together with the problem exponents and the
/// precomputed quadrature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    dim: usize,
    p: f64,
    spacing: Spacing,
    // sphere measure times the exact integral of r^{N-1} over each cell
    cell_weights: Vec<f64>,
    // sphere measure times the trapezoid weight of each node, times r_i^{N-1}
    node_masses: Vec<f64>,
}

impl RadialGrid {
    pub fn new(nodes: Vec<f64>, dim: usize, p: f64, spacing: Spacing) -> Result<Self> {
        check_exponent(dim, p)?;
        if nodes.len() < MIN_CELLS + 1 {
            return domain(format!(
                "a grid needs at least {} nodes, got {}",
                MIN_CELLS + 1,
                nodes.len()
            ));
        }
        if nodes.iter().any(|r| !r.is_finite()) || nodes[0] < 0.0 {
            return domain("grid nodes must be finite and nonnegative");
        }
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return domain("grid nodes must be strictly increasing");
        }
        let omega = sphere_measure(dim);
        let n = dim as f64;
        let cell_weights = nodes
            .windows(2)
            .map(|w| omega * shell_integral(w[0], w[1], n))
            .collect();
        let last = nodes.len() - 1;
        let node_masses = (0..nodes.len())
            .map(|i| {
                let left = if i > 0 { nodes[i] - nodes[i - 1] } else { 0.0 };
                let right = if i < last { nodes[i + 1] - nodes[i] } else { 0.0 };
                omega * 0.5 * (left + right) * nodes[i].powf(n - 1.0)
            })
            .collect();
        Ok(Self { nodes, dim, p, spacing, cell_weights, node_masses })
    }

    /// `cells` equal cells on `[a, b]`; `a` may be zero.
    pub fn uniform(a: f64, b: f64, cells: usize, dim: usize, p: f64) -> Result<Self> {
        check_cells(cells)?;
        if !(a >= 0.0 && a < b) {
            return domain(format!("uniform grid needs 0 <= a < b, got [{a}, {b}]"));
        }
        let h = (b - a) / cells as f64;
        let mut nodes: Vec<f64> = (0..=cells).map(|i| a + h * i as f64).collect();
        nodes[cells] = b;
        Self::new(nodes, dim, p, Spacing::Uniform)
    }

    /// `cells` cells on `[a, b]` equispaced in `log r`.
    pub fn logarithmic(a: f64, b: f64, cells: usize, dim: usize, p: f64) -> Result<Self> {
        check_cells(cells)?;
        if !(a > 0.0 && a < b) {
            return domain(format!("logarithmic grid needs 0 < a < b, got [{a}, {b}]"));
        }
        let (la, lb) = (a.ln(), b.ln());
        let step = (lb - la) / cells as f64;
        let mut nodes: Vec<f64> = (0..=cells).map(|i| (la + step * i as f64).exp()).collect();
        nodes[0] = a;
        nodes[cells] = b;
        Self::new(nodes, dim, p, Spacing::Logarithmic)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn cells(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn exponent(&self) -> f64 {
        self.p
    }

    pub fn critical_exponent(&self) -> f64 {
        critical_exponent(self.dim, self.p)
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    pub fn inner(&self) -> f64 {
        self.nodes[0]
    }

    pub fn outer(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn cell_weights(&self) -> &[f64] {
        &self.cell_weights
    }

    pub fn node_masses(&self) -> &[f64] {
        &self.node_masses
    }

    /// Interior block of the stiffness matrix of `int |grad v|^2 dx` for
    /// piecewise-linear `v`: (diagonal, off-diagonal).
    pub fn stiffness(&self) -> (Vec<f64>, Vec<f64>) {
        let coef: Vec<f64> = self
            .nodes
            .windows(2)
            .zip(&self.cell_weights)
            .map(|(w, c)| c / ((w[1] - w[0]) * (w[1] - w[0])))
            .collect();
        let m = self.cells() - 1;
        let diag = (0..m).map(|i| coef[i] + coef[i + 1]).collect();
        let off = (0..m.saturating_sub(1)).map(|i| -coef[i + 1]).collect();
        (diag, off)
    }

    /// Sub-grid made of nodes `lo..=hi`.
    pub fn restrict(&self, lo: usize, hi: usize) -> Result<Self> {
        if hi >= self.nodes.len() || hi < lo + MIN_CELLS {
            return domain(format!("invalid node range {lo}..={hi}"));
        }
        Self::new(self.nodes[lo..=hi].to_vec(), self.dim, self.p, self.spacing)
    }

    /// Grid with every node multiplied by `lambda`.
    pub fn dilate(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return domain(format!("dilation factor must be positive, got {lambda}"));
        }
        let nodes = self.nodes.iter().map(|r| r * lambda).collect();
        Self::new(nodes, self.dim, self.p, self.spacing)
    }

    /// Index of the node closest to `r`.
    pub fn nearest_node(&self, r: f64) -> usize {
        match self.nodes.binary_search_by(|x| x.total_cmp(&r)) {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) if i >= self.nodes.len() => self.nodes.len() - 1,
            Err(i) => {
                if (r - self.nodes[i - 1]) <= (self.nodes[i] - r) {
                    i - 1
                } else {
                    i
                }
            }
        }
    }
}

/// Thomas algorithm for a tridiagonal system.
pub(crate) fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = if n > 1 { upper[0] / diag[0] } else { 0.0 };
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let denom = diag[i] - lower[i - 1] * c[i - 1];
        if i < n - 1 {
            c[i] = upper[i] / denom;
        }
        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / denom;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

fn check_cells(cells: usize) -> Result<()> {
    if cells < MIN_CELLS {
        return domain(format!("need at least {MIN_CELLS} cells, got {cells}"));
    }
    Ok(())
}

/// `int_a^b r^{n-1} dr`, evaluated without cancellation for thin shells.
fn shell_integral(a: f64, b: f64, n: f64) -> f64 {
    if a > 0.0 {
        a.powf(n) * (n * (b / a).ln()).exp_m1() / n
    } else {
        b.powf(n) / n
    }
}

pub fn make_grid(spec: &AnnulusSpec, cells: usize, spacing: Spacing) -> Result<RadialGrid> {
    spec.validate()?;
    match spacing {
        Spacing::Uniform => RadialGrid::uniform(spec.r1, spec.r2, cells, spec.dim, spec.p),
        Spacing::Logarithmic => RadialGrid::logarithmic(spec.r1, spec.r2, cells, spec.dim, spec.p),
    }
}

/// Nodal values of a continuous piecewise-linear radial profile.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialFunction {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
    dirichlet: bool,
}

impl RadialFunction {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>, dirichlet: bool) -> Result<Self> {
        if values.len() != grid.len() {
            return domain(format!(
                "{} values supplied for a grid of {} nodes",
                values.len(),
                grid.len()
            ));
        }
        if dirichlet && (values[0] != 0.0 || values[values.len() - 1] != 0.0) {
            return domain("Dirichlet function must vanish at both end nodes");
        }
        if values.iter().any(|v| !v.is_finite()) {
            return domain("function values must be finite");
        }
        Ok(Self { grid, values, dirichlet })
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let values = vec![0.0; grid.len()];
        Self { grid, values, dirichlet: true }
    }

    /// Samples `f` at the nodes. With `dirichlet` the end values are set to zero.
    pub fn from_fn(grid: Arc<RadialGrid>, dirichlet: bool, f: impl Fn(f64) -> f64) -> Self {
        let mut values: Vec<f64> = grid.nodes().iter().map(|&r| f(r)).collect();
        if dirichlet {
            values[0] = 0.0;
            let last = values.len() - 1;
            values[last] = 0.0;
        }
        Self { grid, values, dirichlet }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_dirichlet(&self) -> bool {
        self.dirichlet
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map_values(|v| c * v)
    }

    pub fn abs(&self) -> Self {
        self.map_values(f64::abs)
    }

    pub fn positive_part(&self) -> Self {
        self.map_values(|v| v.max(0.0))
    }

    pub fn negative_part(&self) -> Self {
        self.map_values(|v| (-v).max(0.0))
    }

    fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|&v| f(v)).collect(),
            dirichlet: self.dirichlet,
        }
    }

    /// Nodewise `self + c * other` on a shared grid.
    pub fn axpy(&self, c: f64, other: &RadialFunction) -> Result<Self> {
        if self.grid.nodes() != other.grid.nodes() {
            return domain("functions live on different grids");
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + c * b)
            .collect();
        Ok(Self {
            grid: Arc::clone(&self.grid),
            values,
            dirichlet: self.dirichlet && other.dirichlet,
        })
    }

    /// Value of the piecewise-linear interpolant at radius `r`; zero outside the grid.
    pub fn interpolate(&self, r: f64) -> f64 {
        self.locate(r).map_or(0.0, |(k, t)| {
            self.values[k] + t * (self.values[k + 1] - self.values[k])
        })
    }

    /// Radial derivative of the interpolant at `r` (cell slope); zero outside the grid.
    pub fn slope_at(&self, r: f64) -> f64 {
        self.locate(r).map_or(0.0, |(k, _)| self.slope(k))
    }

    fn locate(&self, r: f64) -> Option<(usize, f64)> {
        let nodes = self.grid.nodes();
        if !(r >= nodes[0] && r <= nodes[nodes.len() - 1]) {
            return None;
        }
        let k = match nodes.binary_search_by(|x| x.total_cmp(&r)) {
            Ok(i) => i.min(nodes.len() - 2),
            Err(i) => i - 1,
        };
        Some((k, (r - nodes[k]) / (nodes[k + 1] - nodes[k])))
    }

    #[inline]
    fn slope(&self, k: usize) -> f64 {
        let r = self.grid.nodes();
        (self.values[k + 1] - self.values[k]) / (r[k + 1] - r[k])
    }

    /// `int |grad u|^p dx`.
    pub fn grad_norm_p(&self) -> f64 {
        let p = self.grid.exponent();
        self.grid
            .cell_weights()
            .iter()
            .enumerate()
            .map(|(k, w)| w * self.slope(k).abs().powf(p))
            .sum()
    }

    /// `int |u|^{p*} dx`.
    pub fn lpstar_norm_pow(&self) -> f64 {
        let ps = self.grid.critical_exponent();
        self.grid
            .node_masses()
            .iter()
            .zip(&self.values)
            .map(|(m, v)| m * v.abs().powf(ps))
            .sum()
    }

    /// `J(u) = (1/p) int |grad u|^p - (1/p*) int |u|^{p*}`.
    pub fn energy(&self) -> f64 {
        let p = self.grid.exponent();
        let ps = self.grid.critical_exponent();
        self.grad_norm_p() / p - self.lpstar_norm_pow() / ps
    }

    /// Sobolev quotient `int |grad u|^p / (int |u|^{p*})^{p/p*}`.
    pub fn rayleigh_quotient(&self) -> Result<f64> {
        let denom = self.lpstar_norm_pow();
        if self.is_zero() || denom <= 0.0 {
            return domain("Rayleigh quotient of the zero function");
        }
        let p = self.grid.exponent();
        let ps = self.grid.critical_exponent();
        Ok(self.grad_norm_p() / denom.powf(p / ps))
    }

    /// Partial derivatives of the discrete `J` with respect to every nodal value.
    pub fn energy_gradient(&self) -> Vec<f64> {
        let grid = &*self.grid;
        let p = grid.exponent();
        let ps = grid.critical_exponent();
        let r = grid.nodes();
        let w = grid.cell_weights();
        let mut g: Vec<f64> = grid
            .node_masses()
            .iter()
            .zip(&self.values)
            .map(|(m, &v)| -m * signed_pow(v, ps - 1.0))
            .collect();
        for k in 0..grid.cells() {
            let flux = w[k] * signed_pow(self.slope(k), p - 1.0) / (r[k + 1] - r[k]);
            g[k] -= flux;
            g[k + 1] += flux;
        }
        g
    }

    /// Relative residual of the radial Euler-Lagrange equation
    /// `-(r^{N-1}|u'|^{p-2}u')' = r^{N-1}|u|^{p*-2}u` in a discrete weak norm.
    ///
    /// With `g = J'(u)` restricted to the interior nodes and `K` the stiffness
    /// matrix of `int |grad v|^2` on the same grid, the value is
    /// `sqrt(g^T K^{-1} g * u^T K u) / int |grad u|^p`, which is invariant under
    /// the critical dilation and under `u -> -u`. Zero for `u = 0`.
    pub fn ode_residual(&self) -> f64 {
        let grid = &*self.grid;
        let g = self.energy_gradient();
        let interior = grid.len() - 2;
        if g[1..=interior].iter().all(|&x| x == 0.0) {
            return 0.0;
        }
        let (diag, off) = grid.stiffness();
        let rhs = &g[1..=interior];
        let x = solve_tridiagonal(&off, &diag, &off, rhs);
        let dual: f64 = rhs.iter().zip(&x).map(|(a, b)| a * b).sum();
        let r = grid.nodes();
        let energy: f64 = (0..grid.cells())
            .map(|k| {
                let h = r[k + 1] - r[k];
                let s = self.values[k + 1] - self.values[k];
                grid.cell_weights[k] * s * s / (h * h)
            })
            .sum();
        let gradient = self.grad_norm_p();
        if gradient == 0.0 {
            return f64::INFINITY;
        }
        (dual.max(0.0) * energy).sqrt() / gradient
    }

    /// Extension by zero onto a larger grid containing this grid's nodes as
    /// the contiguous block starting at node `offset`.
    pub fn extend_by_zero(&self, target: Arc<RadialGrid>, offset: usize) -> Result<Self> {
        let n = self.values.len();
        if offset + n > target.len() {
            return domain("sub-grid does not fit into the target grid");
        }
        let matches = self
            .grid
            .nodes()
            .iter()
            .zip(&target.nodes()[offset..offset + n])
            .all(|(a, b)| a == b);
        if !matches {
            return domain("sub-grid nodes do not coincide with the target nodes");
        }
        if self.values[0] != 0.0 || self.values[n - 1] != 0.0 {
            return domain("only functions vanishing at their end nodes extend by zero");
        }
        let mut values = vec![0.0; target.len()];
        values[offset..offset + n].copy_from_slice(&self.values);
        Self::new(target, values, true)
    }

    /// CSV text with header `r,value`, 17 significant digits per number.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,value\n");
        for (r, v) in self.grid.nodes().iter().zip(&self.values) {
            let _ = writeln!(out, "{r:.16e},{v:.16e}");
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    /// Parses `r,value` CSV. Spacing is detected from the nodes; the function
    /// carries the Dirichlet flag when both end values are zero.
    pub fn from_csv(reader: impl Read, dim: usize, p: f64) -> Result<Self> {
        let mut lines = BufReader::new(reader).lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty CSV".into()))??;
        if header.trim() != "r,value" {
            return Err(Error::Parse(format!("unexpected CSV header '{}'", header.trim())));
        }
        let (mut nodes, mut values) = (Vec::new(), Vec::new());
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split(',');
            let mut field = |name: &str| -> Result<f64> {
                parts
                    .next()
                    .ok_or_else(|| Error::Parse(format!("line {}: missing {name}", lineno + 2)))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 2)))
            };
            nodes.push(field("r")?);
            values.push(field("value")?);
        }
        let spacing = detect_spacing(&nodes);
        let grid = Arc::new(RadialGrid::new(nodes, dim, p, spacing)?);
        let dirichlet = values.first() == Some(&0.0) && values.last() == Some(&0.0);
        Self::new(grid, values, dirichlet)
    }

    pub fn read_csv(path: impl AsRef<Path>, dim: usize, p: f64) -> Result<Self> {
        Self::from_csv(std::fs::File::open(path)?, dim, p)
    }
}

fn detect_spacing(nodes: &[f64]) -> Spacing {
    if nodes.len() < 3 || nodes[0] <= 0.0 {
        return Spacing::Uniform;
    }
    let h0 = nodes[1] - nodes[0];
    let uniform = nodes
        .windows(2)
        .all(|w| ((w[1] - w[0]) - h0).abs() <= 1e-9 * h0.max(w[1].abs()));
    if uniform {
        Spacing::Uniform
    } else {
        Spacing::Logarithmic
    }
}

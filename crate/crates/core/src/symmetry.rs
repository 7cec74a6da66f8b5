//! Finite subgroups of O(N) given by generators: closure, fixed subspace,
//! orbits and the minimal orbit cardinality.

use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Max-entry tolerance for matrix equality and orthogonality.
pub const MATRIX_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ORDER: usize = 10_000;
/// Random unit vectors used for the sampling floor checks.
pub const FLOOR_SAMPLES: usize = 1_000;

const KEY_SEED: u64 = 0x5eed_0f_0b17;

/// Generators as row-major `dim x dim` arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub dim: usize,
    pub generators: Vec<Vec<Vec<f64>>>,
}

impl GroupSpec {
    pub fn from_matrices(dim: usize, generators: &[DMatrix<f64>]) -> Self {
        let generators = generators
            .iter()
            .map(|g| (0..g.nrows()).map(|i| g.row(i).iter().copied().collect()).collect())
            .collect();
        Self { dim, generators }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Validated generator matrices.
    pub fn matrices(&self) -> Result<Vec<DMatrix<f64>>> {
        if self.dim == 0 {
            return domain("group dimension must be at least 1");
        }
        let n = self.dim;
        let mut out = Vec::with_capacity(self.generators.len());
        for (k, rows) in self.generators.iter().enumerate() {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return domain(format!("generator {k} is not {n}x{n}"));
            }
            if rows.iter().flatten().any(|v| !v.is_finite()) {
                return domain(format!("generator {k} has non-finite entries"));
            }
            let g = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
            let defect = max_entry(&(g.transpose() * &g - DMatrix::identity(n, n)));
            if defect > MATRIX_TOL {
                return domain(format!("generator {k} is not orthogonal (|g^T g - I| = {defect:.3e})"));
            }
            out.push(g);
        }
        Ok(out)
    }
}

fn max_entry(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// Sorted index of vectors keyed by a fixed random linear functional, so
/// that approximate lookups are a range query instead of a linear scan.
struct KeyIndex {
    weights: Vec<f64>,
    keys: Vec<(f64, usize)>,
}

impl KeyIndex {
    fn new(len: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(KEY_SEED);
        Self { weights: (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect(), keys: Vec::new() }
    }

    fn key(&self, entries: &[f64]) -> f64 {
        entries.iter().zip(&self.weights).map(|(a, b)| a * b).sum()
    }

    /// Indices whose key lies within `radius` of `key`.
    fn candidates(&self, key: f64, radius: f64) -> impl Iterator<Item = usize> + '_ {
        let start = self.keys.partition_point(|(k, _)| *k < key - radius);
        self.keys[start..].iter().take_while(move |(k, _)| *k <= key + radius).map(|(_, i)| *i)
    }

    fn insert(&mut self, key: f64, index: usize) {
        let at = self.keys.partition_point(|(k, _)| *k < key);
        self.keys.insert(at, (key, index));
    }
}

#[derive(Debug, Clone)]
pub struct GroupClosure {
    dim: usize,
    elements: Vec<DMatrix<f64>>,
    complete: bool,
}

impl GroupClosure {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn elements(&self) -> &[DMatrix<f64>] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// False when the closure hit `max_order` before stabilizing.
    pub fn is_complete(&self) -> bool {
        self.complete
    }

    fn require_complete(&self) -> Result<()> {
        if self.complete {
            Ok(())
        } else {
            domain(format!("group closure stopped at {} elements without stabilizing", self.elements.len()))
        }
    }

    /// Distinct points of `{gx : g in G}` (within `1e-9 |x|`).
    pub fn orbit(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        if x.len() != self.dim {
            return domain(format!("point has {} coordinates, group acts on R^{}", x.len(), self.dim));
        }
        let v = DVector::from_column_slice(x);
        let tol = MATRIX_TOL * v.norm().max(f64::MIN_POSITIVE);
        let mut index = KeyIndex::new(self.dim);
        let mut points: Vec<Vec<f64>> = Vec::new();
        for g in &self.elements {
            let y: Vec<f64> = (g * &v).iter().copied().collect();
            let key = index.key(&y);
            let seen = index
                .candidates(key, tol * self.dim as f64)
                .any(|i| points[i].iter().zip(&y).all(|(a, b)| (a - b).abs() <= tol));
            if !seen {
                index.insert(key, points.len());
                points.push(y);
            }
        }
        Ok(points)
    }

    pub fn orbit_size(&self, x: &[f64]) -> Result<usize> {
        Ok(self.orbit(x)?.len())
    }
}

/// Breadth-first closure of the generators under left multiplication.
/// Finite subgroups of O(N) are closed under inverses automatically.
pub fn close_group(spec: &GroupSpec, max_order: usize) -> Result<GroupClosure> {
    if max_order == 0 {
        return domain("max_order must be at least 1");
    }
    let generators = spec.matrices()?;
    let n = spec.dim;
    let mut index = KeyIndex::new(n * n);
    let mut elements = vec![DMatrix::identity(n, n)];
    index.insert(index.key(elements[0].as_slice()), 0);
    let radius = MATRIX_TOL * (n * n) as f64;
    let mut head = 0;
    while head < elements.len() {
        for g in &generators {
            let h = g * &elements[head];
            let key = index.key(h.as_slice());
            let seen = index.candidates(key, radius).any(|i| max_entry(&(&elements[i] - &h)) <= MATRIX_TOL);
            if seen {
                continue;
            }
            if elements.len() == max_order {
                return Ok(GroupClosure { dim: n, elements, complete: false });
            }
            index.insert(key, elements.len());
            elements.push(h);
        }
        head += 1;
    }
    Ok(GroupClosure { dim: n, elements, complete: true })
}

/// Orthonormal basis (as columns) of the eigenvalue-1 eigenspace of a
/// symmetric projector-like matrix, keeping eigenvalues above `cut`.
fn eigenspace_above(m: DMatrix<f64>, cut: f64) -> DMatrix<f64> {
    let n = m.nrows();
    let eig = SymmetricEigen::new(m);
    let cols: Vec<DVector<f64>> =
        (0..n).filter(|&i| eig.eigenvalues[i] > cut).map(|i| eig.eigenvectors.column(i).into_owned()).collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Orthonormal basis of `Fix(G)` as the columns of the result, from the
/// group-average projector `(1/|G|) sum g`.
pub fn fixed_subspace(closure: &GroupClosure) -> Result<DMatrix<f64>> {
    closure.require_complete()?;
    let n = closure.dim;
    let mut avg = DMatrix::zeros(n, n);
    for g in &closure.elements {
        avg += g;
    }
    avg /= closure.order() as f64;
    // symmetrize away rounding; the exact average is an orthogonal projector
    let sym = (&avg + avg.transpose()) * 0.5;
    Ok(eigenspace_above(sym, 0.5))
}

/// Projector onto `Fix(g)` for a single orthogonal `g`.
fn element_fix_projector(g: &DMatrix<f64>) -> DMatrix<f64> {
    let n = g.nrows();
    // x^T (2I - g - g^T) x = |gx - x|^2; nonzero eigenvalues are >= 2 - 2cos(2pi/order)
    let defect = DMatrix::identity(n, n) * 2.0 - g - g.transpose();
    let basis = eigenspace_above(-defect, -1e-10);
    &basis * basis.transpose()
}

/// Projector onto the intersection of the ranges of two projectors.
fn intersect(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let miss = DMatrix::identity(n, n) * 2.0 - a - b;
    let basis = eigenspace_above(-miss, -1e-8);
    &basis * basis.transpose()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cardinality {
    Finite(usize),
    /// The closure overflowed; `lower_bound` is the smallest orbit seen
    /// under the truncated closure on random unit vectors.
    Infinite { lower_bound: usize },
}

impl Cardinality {
    pub fn finite(self) -> Option<usize> {
        match self {
            Cardinality::Finite(l) => Some(l),
            Cardinality::Infinite { .. } => None,
        }
    }

    /// `l > l0`, with the infinite marker clearing every finite threshold.
    pub fn exceeds(self, l0: f64) -> bool {
        match self {
            Cardinality::Finite(l) => l as f64 > l0,
            Cardinality::Infinite { .. } => true,
        }
    }
}

impl fmt::Display for Cardinality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cardinality::Finite(l) => write!(f, "{l}"),
            Cardinality::Infinite { lower_bound } => write!(f, "infinite (> {lower_bound} sampled)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitReport {
    pub l: Cardinality,
    pub fix_dim: usize,
    pub group_order: Option<usize>,
    /// A unit vector whose orbit has `l` points.
    pub witness: Vec<f64>,
    /// Smallest orbit among the random floor-check samples.
    pub sampled_min: usize,
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

fn generic_point(projector: &DMatrix<f64>, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let v = DVector::from_vec(random_unit(rng, projector.nrows()));
        let w = projector * v;
        let norm = w.norm();
        if norm > 1e-3 {
            return w.iter().map(|x| x / norm).collect();
        }
    }
}

/// Minimal orbit size over nonzero points. Stabilizers of points are
/// pointwise stabilizers of intersections of element fixed spaces, so a
/// generic point of every such intersection is a candidate witness.
pub fn min_orbit_card(closure: &GroupClosure, seed: u64) -> Result<OrbitReport> {
    let n = closure.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if !closure.complete {
        let mut floor = usize::MAX;
        let mut witness = Vec::new();
        for _ in 0..FLOOR_SAMPLES {
            let x = random_unit(&mut rng, n);
            let size = closure.orbit_size(&x)?;
            if size < floor {
                floor = size;
                witness = x;
            }
        }
        return Ok(OrbitReport {
            l: Cardinality::Infinite { lower_bound: floor },
            fix_dim: 0,
            group_order: None,
            witness,
            sampled_min: floor,
        });
    }
    let fix = fixed_subspace(closure)?;
    let mut sampled_min = usize::MAX;
    let mut sampled_witness = Vec::new();
    for _ in 0..FLOOR_SAMPLES {
        let x = random_unit(&mut rng, n);
        let size = closure.orbit_size(&x)?;
        if size < sampled_min {
            sampled_min = size;
            sampled_witness = x;
        }
    }
    if fix.ncols() > 0 {
        return Ok(OrbitReport {
            l: Cardinality::Finite(1),
            fix_dim: fix.ncols(),
            group_order: Some(closure.order()),
            witness: fix.column(0).iter().copied().collect(),
            sampled_min,
        });
    }
    // lattice of nonzero intersections of the element fixed spaces
    let mut lattice: Vec<DMatrix<f64>> = Vec::new();
    let push = |lattice: &mut Vec<DMatrix<f64>>, p: DMatrix<f64>| -> bool {
        if p.trace() < 0.5 || lattice.iter().any(|q| max_entry(&(q - &p)) <= 1e-7) {
            return false;
        }
        lattice.push(p);
        true
    };
    for g in &closure.elements[1..] {
        push(&mut lattice, element_fix_projector(g));
    }
    let mut frontier = 0;
    while frontier < lattice.len() {
        let end = lattice.len();
        for i in frontier..end {
            for j in 0..i {
                let p = intersect(&lattice[i], &lattice[j]);
                push(&mut lattice, p);
            }
        }
        frontier = end;
        if lattice.len() > 100_000 {
            return Err(Error::Numeric("fixed-space lattice too large".into()));
        }
    }
    // the sampled minimum covers points with trivial stabilizer
    let (mut l, mut witness) = (sampled_min, sampled_witness);
    for p in &lattice {
        let x = generic_point(p, &mut rng);
        let size = closure.orbit_size(&x)?;
        if size < l {
            l = size;
            witness = x;
        }
    }
    Ok(OrbitReport { l: Cardinality::Finite(l), fix_dim: 0, group_order: Some(closure.order()), witness, sampled_min })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuG {
    pub min_orbit: usize,
    pub c_infty: f64,
    pub value: f64,
}

/// `(min orbit size over the sampled points) * c_infty`.
pub fn mu_g(closure: &GroupClosure, points: &[Vec<f64>], c_infty: f64) -> Result<MuG> {
    closure.require_complete()?;
    if points.is_empty() {
        return domain("mu_G needs at least one sample point");
    }
    let mut min_orbit = usize::MAX;
    for x in points {
        min_orbit = min_orbit.min(closure.orbit_size(x)?);
    }
    Ok(MuG { min_orbit, c_infty, value: min_orbit as f64 * c_infty })
}

/// Uniform-direction points with radius uniform in `[r1, r2]`.
pub fn annulus_sample(dim: usize, r1: f64, r2: f64, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let r = rng.gen_range(r1..=r2);
            random_unit(&mut rng, dim).into_iter().map(|x| r * x).collect()
        })
        .collect()
}

/// Minimal distance between distinct orbit points of `y`; infinite for a
/// singleton orbit.
pub fn orbit_separation(y: &[f64], closure: &GroupClosure) -> Result<f64> {
    closure.require_complete()?;
    if y.iter().all(|v| *v == 0.0) {
        return domain("orbit separation of the origin is undefined");
    }
    let orbit = closure.orbit(y)?;
    let mut best = f64::INFINITY;
    for (i, a) in orbit.iter().enumerate() {
        for b in &orbit[..i] {
            let d = a.iter().zip(b).map(|(x, z)| (x - z).powi(2)).sum::<f64>().sqrt();
            best = best.min(d);
        }
    }
    Ok(best)
}

/// Rotation by `angle` in the coordinate plane `(i, j)` of R^dim.
pub fn plane_rotation(dim: usize, i: usize, j: usize, angle: f64) -> DMatrix<f64> {
    let mut g = DMatrix::identity(dim, dim);
    let (s, c) = angle.sin_cos();
    g[(i, i)] = c;
    g[(j, j)] = c;
    g[(i, j)] = -s;
    g[(j, i)] = s;
    g
}

/// Haar-random orthogonal matrix (QR of a Gaussian matrix, sign-fixed).
pub fn random_orthogonal(dim: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let a = DMatrix::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = a.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for k in 0..dim {
        if r[(k, k)] < 0.0 {
            q.column_mut(k).neg_mut();
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn group(dim: usize, gens: &[DMatrix<f64>]) -> GroupClosure {
        close_group(&GroupSpec::from_matrices(dim, gens), DEFAULT_MAX_ORDER).unwrap()
    }

    #[test]
    fn small_closures() {
        let id = group(3, &[DMatrix::identity(3, 3)]);
        assert_eq!(id.order(), 1);
        assert_eq!(fixed_subspace(&id).unwrap().ncols(), 3);
        assert_eq!(min_orbit_card(&id, 1).unwrap().l, Cardinality::Finite(1));

        let pm = group(3, &[-DMatrix::identity(3, 3)]);
        assert_eq!(pm.order(), 2);
        assert_eq!(fixed_subspace(&pm).unwrap().ncols(), 0);
        assert_eq!(min_orbit_card(&pm, 1).unwrap().l, Cardinality::Finite(2));
        assert!((orbit_separation(&[1.0, 0.0, 0.0], &pm).unwrap() - 2.0).abs() < 1e-15);

        let five = group(4, &[plane_rotation(4, 0, 1, 2.0 * PI / 5.0)]);
        assert_eq!(five.order(), 5);
        let fix = fixed_subspace(&five).unwrap();
        assert_eq!(fix.ncols(), 2);
        for k in 0..2 {
            assert!(fix[(0, k)].abs() < 1e-12 && fix[(1, k)].abs() < 1e-12);
        }
    }

    #[test]
    fn double_block_rotation_has_minimal_orbit_three() {
        let a = 2.0 * PI / 3.0;
        let g = plane_rotation(4, 0, 1, a) * plane_rotation(4, 2, 3, a);
        let c = group(4, &[g]);
        assert_eq!(c.order(), 3);
        let rep = min_orbit_card(&c, 3).unwrap();
        assert_eq!(rep.l, Cardinality::Finite(3));
        assert_eq!(rep.fix_dim, 0);
        assert_eq!(c.orbit_size(&rep.witness).unwrap(), 3);
        let y = [1.0, 0.0, 0.0, 0.0];
        let s = orbit_separation(&y, &c).unwrap();
        assert!((s - 3f64.sqrt()).abs() < 1e-12);
        let y2 = [2.0, 0.0, 0.0, 0.0];
        assert!((orbit_separation(&y2, &c).unwrap() - 2.0 * s).abs() < 1e-12);
    }

    #[test]
    fn stabilizer_lattice_finds_non_regular_orbits() {
        // C4 on the (0,1) plane and a flip of coordinate 2: order 8, Fix = {0};
        // generic orbits have 8 points, the plane 4, the axis e_2 only 2
        let g1 = plane_rotation(3, 0, 1, PI / 2.0);
        let mut g2 = DMatrix::identity(3, 3);
        g2[(2, 2)] = -1.0;
        let c = group(3, &[g1, g2]);
        assert_eq!(c.order(), 8);
        let rep = min_orbit_card(&c, 5).unwrap();
        assert_eq!(rep.l, Cardinality::Finite(2));
        assert!(rep.sampled_min >= 2);
    }

    #[test]
    fn overflow_is_flagged() {
        let c = close_group(&GroupSpec::from_matrices(2, &[plane_rotation(2, 0, 1, 1.0)]), 50).unwrap();
        assert!(!c.is_complete());
        assert_eq!(c.order(), 50);
        assert!(fixed_subspace(&c).is_err());
        let rep = min_orbit_card(&c, 1).unwrap();
        assert!(matches!(rep.l, Cardinality::Infinite { lower_bound } if lower_bound >= 50));
        assert!(rep.l.exceeds(1e6));
    }

    #[test]
    fn rejects_bad_generators() {
        let spec = GroupSpec { dim: 2, generators: vec![vec![vec![1.0, 0.1], vec![0.0, 1.0]]] };
        assert!(close_group(&spec, 10).is_err());
        let spec = GroupSpec { dim: 2, generators: vec![vec![vec![1.0, 0.0]]] };
        assert!(close_group(&spec, 10).is_err());
        let pm = group(2, &[-DMatrix::identity(2, 2)]);
        assert!(orbit_separation(&[0.0, 0.0], &pm).is_err());
        assert!(mu_g(&pm, &[], 1.0).is_err());
    }

    #[test]
    fn mu_g_on_annuli() {
        let pm = group(3, &[-DMatrix::identity(3, 3)]);
        let pts = annulus_sample(3, 0.5, 1.0, 200, 7);
        let m = mu_g(&pm, &pts, 2.5).unwrap();
        assert_eq!(m.min_orbit, 2);
        assert_eq!(m.value, 5.0);
        let rot = group(3, &[plane_rotation(3, 0, 1, PI / 2.0)]);
        let m = mu_g(&rot, &[vec![0.0, 0.0, 0.7], vec![0.7, 0.0, 0.0]], 2.5).unwrap();
        assert_eq!(m.min_orbit, 1);
    }

    #[test]
    fn json_spec() {
        let spec = GroupSpec::from_json(r#"{"dim": 2, "generators": [[[0, -1], [1, 0]]]}"#).unwrap();
        assert_eq!(close_group(&spec, 100).unwrap().order(), 4);
        let rep = min_orbit_card(&close_group(&spec, 100).unwrap(), 0).unwrap();
        let text = serde_json::to_string(&rep).unwrap();
        assert!(text.contains("\"l\":4"));
    }
}

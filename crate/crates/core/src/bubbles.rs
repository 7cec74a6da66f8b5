//! Sums of rescaled Talenti bubbles replicated over group orbits, Monte
//! Carlo integration of their energies over R^N, and the additivity and
//! energy-quantum checks.

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::annulus::SolveOptions;
use crate::calibration::{build_family, nodal_level, sign_changing_candidate};
use crate::error::{domain, Error, Result};
use crate::ode::advance;
use crate::radial::{check_exponent, critical_exponent, sphere_measure, AnnulusSpec, RadialFunction};
use crate::symmetry::{close_group, GroupClosure, GroupSpec, DEFAULT_MAX_ORDER};
use crate::sobolev::TalentiProfile;

/// Separation-to-scale ratio below which a configuration is flagged.
pub const SEPARATION_WARNING: f64 = 10.0;
pub const MIN_SAMPLES: usize = 10_000;
pub const DEFAULT_SAMPLES: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TalentiBubble {
    pub center: Vec<f64>,
    pub scale: f64,
}

impl TalentiBubble {
    pub fn new(center: Vec<f64>, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return domain(format!("bubble scale must be positive, got {scale}"));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return domain("bubble center has non-finite coordinates");
        }
        Ok(Self { center, scale })
    }
}

/// One placed copy of a profile: `scale^{(p-N)/p} U(|x - center| / scale)`.
#[derive(Debug, Clone, PartialEq)]
struct Image {
    center: Vec<f64>,
    scale: f64,
    amplitude: f64,
}

#[derive(Debug, Clone)]
pub struct BubbleConfig {
    profile: TalentiProfile,
    base: Option<RadialFunction>,
    /// Each bubble with the number of distinct points in its orbit.
    bubbles: Vec<(TalentiBubble, usize)>,
    images: Vec<Image>,
    separation_ratio: f64,
}

impl BubbleConfig {
    pub fn new(
        profile: TalentiProfile,
        base: Option<RadialFunction>,
        bubbles: Vec<(TalentiBubble, GroupClosure)>,
    ) -> Result<Self> {
        let (dim, p) = (profile.dim, profile.p);
        if let Some(b) = &base {
            if b.grid().dim() != dim || b.grid().exponent() != p {
                return domain("base function uses a different (N, p) than the profile");
            }
        }
        let mut images = Vec::new();
        let mut orbit_sizes = Vec::with_capacity(bubbles.len());
        for (bubble, group) in &bubbles {
            if bubble.center.len() != dim || group.dim() != dim {
                return domain(format!("bubble center or group does not act on R^{dim}"));
            }
            let orbit = if bubble.center.iter().all(|c| *c == 0.0) {
                vec![bubble.center.clone()]
            } else {
                group.orbit(&bubble.center)?
            };
            orbit_sizes.push(orbit.len());
            let amplitude = bubble.scale.powf((p - dim as f64) / p);
            images.extend(orbit.into_iter().map(|center| Image { center, scale: bubble.scale, amplitude }));
        }
        let mut separation_ratio = f64::INFINITY;
        for (i, a) in images.iter().enumerate() {
            for b in &images[..i] {
                let d = distance(&a.center, &b.center);
                separation_ratio = separation_ratio.min(d / a.scale.max(b.scale));
            }
        }
        let bubbles = bubbles.into_iter().map(|(b, _)| b).zip(orbit_sizes).collect();
        Ok(Self { profile, base, bubbles, images, separation_ratio })
    }

    pub fn profile(&self) -> &TalentiProfile {
        &self.profile
    }

    pub fn base(&self) -> Option<&RadialFunction> {
        self.base.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.profile.dim
    }

    /// Bubbles with their orbit sizes.
    pub fn bubbles(&self) -> &[(TalentiBubble, usize)] {
        &self.bubbles
    }

    pub fn image_count(&self) -> usize {
        self.images.len()
    }

    /// Smallest center distance over the larger scale, across all images.
    pub fn separation_ratio(&self) -> f64 {
        self.separation_ratio
    }

    pub fn warning(&self) -> bool {
        self.separation_ratio < SEPARATION_WARNING
    }

    fn image_value_gradient(&self, im: &Image, x: &[f64], grad: &mut [f64]) -> f64 {
        let rho = distance(x, &im.center);
        let s = rho / im.scale;
        if rho > 0.0 {
            let radial = im.amplitude * self.profile.derivative(s) / (im.scale * rho);
            for ((g, xi), ci) in grad.iter_mut().zip(x).zip(&im.center) {
                *g += radial * (xi - ci);
            }
        }
        im.amplitude * self.profile.value(s)
    }

    fn base_value_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let Some(base) = &self.base else { return 0.0 };
        let r = norm(x);
        let slope = base.slope_at(r);
        if slope != 0.0 && r > 0.0 {
            for (g, xi) in grad.iter_mut().zip(x) {
                *g += slope * xi / r;
            }
        }
        base.interpolate(r)
    }

    /// Value and gradient of the configuration at `x`.
    pub fn value_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; x.len()];
        let mut value = self.base_value_gradient(x, &mut grad);
        for im in &self.images {
            value += self.image_value_gradient(im, x, &mut grad);
        }
        (value, grad)
    }

    /// Sum over parts of the integrand, and the integrand of the sum.
    fn split_densities(&self, x: &[f64], functional: Functional) -> (f64, f64) {
        let n = x.len();
        let mut total_grad = vec![0.0; n];
        let mut part_grad = vec![0.0; n];
        let mut total_value = 0.0;
        let mut parts = 0.0;
        if self.base.is_some() {
            let v = self.base_value_gradient(x, &mut part_grad);
            parts += functional.density(v, &part_grad, &self.profile);
            total_value += v;
            for (t, g) in total_grad.iter_mut().zip(&part_grad) {
                *t += g;
            }
        }
        for im in &self.images {
            part_grad.iter_mut().for_each(|g| *g = 0.0);
            let v = self.image_value_gradient(im, x, &mut part_grad);
            parts += functional.density(v, &part_grad, &self.profile);
            total_value += v;
            for (t, g) in total_grad.iter_mut().zip(&part_grad) {
                *t += g;
            }
        }
        (functional.density(total_value, &total_grad, &self.profile), parts)
    }
}

/// `v_0(|x|) + sum over images of the rescaled profile`.
pub fn evaluate_config(cfg: &BubbleConfig, x: &[f64]) -> f64 {
    cfg.value_gradient(x).0
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Functional {
    /// `int |grad v|^p`.
    GradientNorm,
    /// `int |grad v|^p / p - |v|^{p*} / p*`.
    Energy,
}

impl Functional {
    fn density(self, value: f64, grad: &[f64], profile: &TalentiProfile) -> f64 {
        let p = profile.p;
        let g = norm(grad).powf(p);
        match self {
            Functional::GradientNorm => g,
            Functional::Energy => {
                let ps = critical_exponent(profile.dim, p);
                g / p - value.abs().powf(ps) / ps
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McParams {
    pub samples_per_stratum: usize,
    pub seed: u64,
}

impl Default for McParams {
    fn default() -> Self {
        Self { samples_per_stratum: DEFAULT_SAMPLES, seed: 0 }
    }
}

impl McParams {
    pub fn new(samples_per_stratum: usize, seed: u64) -> Result<Self> {
        let params = Self { samples_per_stratum, seed };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples_per_stratum < MIN_SAMPLES {
            return domain(format!(
                "at least {MIN_SAMPLES} samples per stratum are required, got {}",
                self.samples_per_stratum
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
}

impl McEstimate {
    /// `|value - reference| <= k * std_error`.
    pub fn within(&self, reference: f64, k: f64) -> bool {
        (self.value - reference).abs() <= k * self.std_error
    }
}

/// Sampling components: one radial proposal per image, one centered far
/// field, and a uniform shell over the base annulus when present.
#[derive(Debug, Clone)]
enum Stratum {
    /// Log-logistic radius of the given shape around `center`, in units of `scale`.
    Radial { center: Vec<f64>, scale: f64, shape: f64 },
    Shell { r1: f64, r2: f64 },
}

impl Stratum {
    fn draw(&self, rng: &mut ChaCha8Rng, dim: usize, out: &mut [f64]) {
        let mut norm2 = 0.0;
        for o in out.iter_mut() {
            *o = rng.sample(StandardNormal);
            norm2 += *o * *o;
        }
        let inv = 1.0 / norm2.sqrt();
        match self {
            Stratum::Radial { center, scale, shape } => {
                let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
                let r = scale * (u / (1.0 - u)).powf(1.0 / shape);
                for (o, c) in out.iter_mut().zip(center) {
                    *o = c + r * inv * *o;
                }
            }
            Stratum::Shell { r1, r2 } => {
                let n = dim as f64;
                let u: f64 = rng.gen();
                let r = (r1.powf(n) + u * (r2.powf(n) - r1.powf(n))).powf(1.0 / n);
                out.iter_mut().for_each(|o| *o *= r * inv);
            }
        }
    }

    /// Density with respect to Lebesgue measure on R^N.
    fn density(&self, x: &[f64], dim: usize, omega: f64) -> f64 {
        let n = dim as f64;
        match self {
            Stratum::Radial { center, scale, shape } => {
                let rho = distance(x, center);
                let s = rho / scale;
                let sk = s.powf(*shape);
                let f = shape * sk / s / (1.0 + sk).powi(2);
                f / (scale * omega * rho.powf(n - 1.0))
            }
            Stratum::Shell { r1, r2 } => {
                let r = norm(x);
                if r >= *r1 && r <= *r2 {
                    n / (omega * (r2.powf(n) - r1.powf(n)))
                } else {
                    0.0
                }
            }
        }
    }
}

fn strata(cfg: &BubbleConfig) -> Vec<Stratum> {
    let (dim, p) = (cfg.profile.dim, cfg.profile.p);
    // tail exponent of |grad U|^p r^N
    let shape = (dim as f64 - p) / (p - 1.0);
    let length = cfg.profile.length_scale();
    let mut out: Vec<Stratum> = cfg
        .images
        .iter()
        .map(|im| Stratum::Radial { center: im.center.clone(), scale: im.scale * length, shape })
        .collect();
    let mut far = cfg.images.iter().map(|im| norm(&im.center) + im.scale * length).fold(0.0, f64::max);
    if let Some(base) = &cfg.base {
        far = far.max(base.grid().outer());
        out.push(Stratum::Shell { r1: base.grid().inner(), r2: base.grid().outer() });
    }
    if far == 0.0 {
        far = length;
    }
    out.push(Stratum::Radial { center: vec![0.0; dim], scale: far, shape });
    out
}

/// Deterministic-mixture importance sampling: equal samples from every
/// stratum, each weighted by `1 / sum_k q_k(x)`. Returns one estimate per
/// integrand in `eval`.
fn mixture_estimate<const K: usize>(
    cfg: &BubbleConfig,
    params: &McParams,
    eval: impl Fn(&[f64]) -> [f64; K] + Sync,
) -> Result<[McEstimate; K]> {
    params.validate()?;
    let dim = cfg.profile.dim;
    let omega = sphere_measure(dim);
    let strata = strata(cfg);
    let n = params.samples_per_stratum;
    let per_stratum: Vec<[(f64, f64); K]> = strata
        .par_iter()
        .enumerate()
        .map(|(j, stratum)| {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream(j as u64);
            let mut x = vec![0.0; dim];
            let mut sum = [0.0; K];
            let mut sum2 = [0.0; K];
            for _ in 0..n {
                stratum.draw(&mut rng, dim, &mut x);
                let q: f64 = strata.iter().map(|s| s.density(&x, dim, omega)).sum();
                if !(q.is_finite() && q > 0.0) {
                    continue;
                }
                let f = eval(&x);
                for k in 0..K {
                    let w = f[k] / q;
                    sum[k] += w;
                    sum2[k] += w * w;
                }
            }
            let mut out = [(0.0, 0.0); K];
            for k in 0..K {
                let mean = sum[k] / n as f64;
                let var = (sum2[k] / n as f64 - mean * mean).max(0.0) * n as f64 / (n as f64 - 1.0);
                out[k] = (mean, var / n as f64);
            }
            out
        })
        .collect();
    let mut result = [McEstimate { value: 0.0, std_error: 0.0, samples: n * strata.len() }; K];
    for k in 0..K {
        let value: f64 = per_stratum.iter().map(|s| s[k].0).sum();
        let var: f64 = per_stratum.iter().map(|s| s[k].1).sum();
        if !value.is_finite() {
            return Err(Error::Numeric("Monte Carlo estimate is not finite".into()));
        }
        result[k] = McEstimate { value, std_error: var.sqrt(), samples: n * strata.len() };
    }
    Ok(result)
}

/// Monte Carlo estimate of `int_{R^N} |grad v|^p`.
pub fn config_norm_p(cfg: &BubbleConfig, params: &McParams) -> Result<McEstimate> {
    let [est] = mixture_estimate(cfg, params, |x| {
        let (_, g) = cfg.value_gradient(x);
        [norm(&g).powf(cfg.profile.p)]
    })?;
    Ok(est)
}

/// Monte Carlo estimate of the whole-space energy of the configuration.
pub fn config_energy(cfg: &BubbleConfig, params: &McParams) -> Result<McEstimate> {
    let [est] = mixture_estimate(cfg, params, |x| {
        let (v, g) = cfg.value_gradient(x);
        [Functional::Energy.density(v, &g, &cfg.profile)]
    })?;
    Ok(est)
}

/// `int_0^infty h(r) dr` for an integrand concentrated around `scale` whose
/// tail decays like `r^{-1-decay}`: adaptive integration in `log r` over
/// twenty decades plus the power-law tail beyond.
fn radial_integral(h: impl Fn(f64) -> f64, scale: f64, decay: f64) -> Result<f64> {
    let (lo, hi) = ((scale * 1e-10).ln(), (scale * 1e10).ln());
    let mut y = [0.0];
    advance(&|t: f64, _: &[f64; 1]| [h(t.exp()) * t.exp()], lo, &mut y, hi, 1e-13, 0.1)
        .map_err(Error::Numeric)?;
    let r = hi.exp();
    Ok(y[0] + h(r) * r / decay)
}

/// Whole-space integrals of a radial profile `f` with derivative `df`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialIntegrals {
    /// `int |grad f|^p`.
    pub gradient: f64,
    /// `int |f|^{p*}`.
    pub critical: f64,
}

impl RadialIntegrals {
    /// `int |grad f|^p / p - |f|^{p*} / p*`.
    pub fn energy(&self, dim: usize, p: f64) -> f64 {
        self.gradient / p - self.critical / critical_exponent(dim, p)
    }

    /// Energy of the Nehari projection, `Q^{N/p} / N`.
    pub fn projected_energy(&self, dim: usize, p: f64) -> f64 {
        let q = self.gradient / self.critical.powf(p / critical_exponent(dim, p));
        q.powf(dim as f64 / p) / dim as f64
    }
}

/// Radial quadrature for a profile decaying like `r^{-(N-p)/(p-1)}`.
pub fn radial_integrals(
    dim: usize,
    p: f64,
    scale: f64,
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
) -> Result<RadialIntegrals> {
    check_exponent(dim, p)?;
    let n = dim as f64;
    let omega = sphere_measure(dim);
    let ps = critical_exponent(dim, p);
    let kappa = (n - p) / (p - 1.0);
    let gradient = radial_integral(|r| omega * df(r).abs().powf(p) * r.powf(n - 1.0), scale, kappa)?;
    let critical = radial_integral(|r| omega * f(r).abs().powf(ps) * r.powf(n - 1.0), scale, n / (p - 1.0))?;
    Ok(RadialIntegrals { gradient, critical })
}

pub fn profile_integrals(profile: &TalentiProfile) -> Result<RadialIntegrals> {
    radial_integrals(
        profile.dim,
        profile.p,
        profile.length_scale(),
        |r| profile.value(r),
        |r| profile.derivative(r),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdditivityPart {
    /// Estimate of the functional on the whole configuration.
    pub estimate: McEstimate,
    /// Base value plus orbit-weighted bubble values.
    pub prediction: f64,
    /// `|estimate - prediction| / |prediction|`.
    pub deviation: f64,
    /// Standard error of `deviation`.
    pub deviation_std: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdditivityReport {
    pub gradient_norm: AdditivityPart,
    pub energy: AdditivityPart,
    pub separation_ratio: f64,
    pub warning: bool,
}

/// Compares the configuration against the sum of its parts. The MC part
/// only integrates the interaction `F(sum) - sum F(parts)`, and the parts
/// come from radial quadrature, so the estimate is unbiased and its error
/// scales with the interaction rather than with the total.
pub fn additivity_check(cfg: &BubbleConfig, params: &McParams) -> Result<AdditivityReport> {
    if cfg.bubbles.is_empty() {
        return domain("additivity check needs at least one bubble");
    }
    let (dim, p) = (cfg.profile.dim, cfg.profile.p);
    let single = profile_integrals(&cfg.profile)?;
    let copies: f64 = cfg.bubbles.iter().map(|(_, k)| *k as f64).sum();
    let (base_norm, base_energy) = cfg.base.as_ref().map_or((0.0, 0.0), |b| (b.grad_norm_p(), b.energy()));
    let predicted = [base_norm + copies * single.gradient, base_energy + copies * single.energy(dim, p)];
    let [dn, de] = mixture_estimate(cfg, params, |x| {
        let (gn_total, gn_parts) = cfg.split_densities(x, Functional::GradientNorm);
        let (e_total, e_parts) = cfg.split_densities(x, Functional::Energy);
        [gn_total - gn_parts, e_total - e_parts]
    })?;
    let part = |interaction: McEstimate, prediction: f64| AdditivityPart {
        estimate: McEstimate { value: prediction + interaction.value, ..interaction },
        prediction,
        deviation: interaction.value.abs() / prediction.abs(),
        deviation_std: interaction.std_error / prediction.abs(),
    };
    Ok(AdditivityReport {
        gradient_norm: part(dn, predicted[0]),
        energy: part(de, predicted[1]),
        separation_ratio: cfg.separation_ratio,
        warning: cfg.warning(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbedLevel {
    pub label: String,
    pub parameter: f64,
    pub level: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumReport {
    pub c_infty: f64,
    pub phi_infty: f64,
    pub relative_gap: f64,
    /// Nehari-projected levels of perturbed profiles.
    pub perturbed: Vec<PerturbedLevel>,
    pub min_perturbed: f64,
}

/// Energy of the profile against `c_infty`, and the projected levels of
/// nearby non-optimal profiles.
pub fn energy_quantum_check(profile: &TalentiProfile, c_infty: f64) -> Result<QuantumReport> {
    let (dim, p) = (profile.dim, profile.p);
    let phi_infty = profile_integrals(profile)?.energy(dim, p);
    let mut perturbed = Vec::new();
    for factor in [0.5, 0.9, 1.1, 2.0] {
        let q = TalentiProfile::new(profile.alpha, profile.beta * factor, dim, p)?;
        let level = profile_integrals(&q)?.projected_energy(dim, p);
        perturbed.push(PerturbedLevel { label: "beta".into(), parameter: factor, level });
    }
    // (1 + r^q)^{-kappa/q}: same tail as the optimizer, wrong exponent
    let kappa = (dim as f64 - p) / (p - 1.0);
    let conj = p / (p - 1.0);
    for q in [0.8 * conj, 1.25 * conj, 2.0 * conj] {
        let f = |r: f64| (1.0 + r.powf(q)).powf(-kappa / q);
        let df = |r: f64| -kappa * r.powf(q - 1.0) * (1.0 + r.powf(q)).powf(-kappa / q - 1.0);
        let level = radial_integrals(dim, p, 1.0, f, df)?.projected_energy(dim, p);
        perturbed.push(PerturbedLevel { label: "exponent".into(), parameter: q, level });
    }
    let min_perturbed = perturbed.iter().map(|l| l.level).fold(f64::INFINITY, f64::min);
    Ok(QuantumReport { c_infty, phi_infty, relative_gap: (phi_infty - c_infty) / c_infty, perturbed, min_perturbed })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoCapReport {
    pub spec: AnnulusSpec,
    pub level: f64,
    pub c_infty: f64,
    /// `level / (2 c_infty)`.
    pub ratio: f64,
}

/// Nodal level of the two-member sign-changing candidate on `spec`.
pub fn two_cap_check(spec: &AnnulusSpec, cells_per_cap: usize, c_infty: f64, opts: &SolveOptions) -> Result<TwoCapReport> {
    let family = build_family(spec, 2, cells_per_cap, opts)?;
    let level = nodal_level(&sign_changing_candidate(&family)?)?;
    Ok(TwoCapReport { spec: *spec, level, c_infty, ratio: level / (2.0 * c_infty) })
}

/// JSON form of a configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BubbleConfigSpec {
    #[serde(rename = "N")]
    pub dim: usize,
    pub p: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub bubbles: Vec<BubbleEntry>,
    /// CSV of the radial base function.
    #[serde(default)]
    pub base: Option<PathBuf>,
}

fn default_alpha() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BubbleEntry {
    pub center: Vec<f64>,
    pub scale: f64,
    /// Symmetry group replicating the bubble; trivial when absent.
    #[serde(default)]
    pub group: Option<GroupSpec>,
}

impl BubbleConfigSpec {
    pub fn build(&self, profile: TalentiProfile) -> Result<BubbleConfig> {
        if profile.dim != self.dim || profile.p != self.p {
            return domain("profile does not match the configuration's (N, p)");
        }
        let mut bubbles = Vec::with_capacity(self.bubbles.len());
        for entry in &self.bubbles {
            let spec = entry.group.clone().unwrap_or(GroupSpec { dim: self.dim, generators: Vec::new() });
            if spec.dim != self.dim {
                return domain(format!("group acts on R^{}, configuration on R^{}", spec.dim, self.dim));
            }
            let group = close_group(&spec, DEFAULT_MAX_ORDER)?;
            if !group.is_complete() {
                return domain("bubble group closure did not stabilize");
            }
            bubbles.push((TalentiBubble::new(entry.center.clone(), entry.scale)?, group));
        }
        let base = match &self.base {
            Some(path) => Some(RadialFunction::read_csv(path, self.dim, self.p)?),
            None => None,
        };
        BubbleConfig::new(profile, base, bubbles)
    }
}

/// The trivial group on R^dim.
pub fn trivial_group(dim: usize) -> GroupClosure {
    close_group(&GroupSpec { dim, generators: Vec::new() }, 1).expect("trivial group")
}

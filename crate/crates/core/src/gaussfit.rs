//! Sum-of-Gaussians fitting on a 256-level curve.
//!
//! Initial parameters come from a low-degree least-squares polynomial: its
//! prominent maxima seed the component heights and centers, and the distance
//! to the nearest polynomial minimum or root seeds the widths. Batch gradient
//! descent on `J = ½ Σ_g (Σ_i F_i(g) − H(g))²` then refines all parameters.
//!
//! After fitting, the dominance structure of the mixture is recorded as
//! *reaches*: maximal runs of gray levels on which one component is at least
//! as large as every other one. Reach endpoints are the crossovers.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::histogram::NormalizedHistogram;
use crate::{Series, LEVELS, MAX_LEVEL};

pub const MIN_HEIGHT: f64 = 1e-6;
pub const MAX_HEIGHT: f64 = 1.5;
pub const MIN_SIGMA: f64 = 0.5;
pub const MAX_SIGMA: f64 = 256.0;

/// Width used when the polynomial yields no usable peak.
pub const FALLBACK_SIGMA: f64 = 32.0;

const POLY_DEGREES: [usize; 5] = [4, 6, 8, 10, 12];
const POLY_RMS_TARGET: f64 = 0.05;

const GROWTH_STREAK_LIMIT: usize = 20;
const EDGE_SPAN: usize = 5;
const MAX_RESTARTS: usize = 5;

/// `a · exp(−(x − μ)² / 2σ²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gaussian1D {
    pub a: f64,
    pub mu: f64,
    pub sigma: f64,
}

impl Gaussian1D {
    pub fn new(a: f64, mu: f64, sigma: f64) -> Self {
        Self { a, mu, sigma }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        let d = (x - self.mu) / self.sigma;
        self.a * (-0.5 * d * d).exp()
    }

    pub fn series(&self) -> Series {
        let mut s = [0.0; LEVELS];
        for (g, v) in s.iter_mut().enumerate() {
            *v = self.eval(g as f64);
        }
        s
    }

    fn clamped(self) -> Self {
        Self {
            a: self.a.clamp(MIN_HEIGHT, MAX_HEIGHT),
            mu: self.mu.clamp(0.0, MAX_LEVEL),
            sigma: self.sigma.clamp(MIN_SIGMA, MAX_SIGMA),
        }
    }
}

/// How `ρ` turns a gradient into a parameter step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepRule {
    /// `p ← p − ρ ∂J/∂p` with a constant `ρ`. `ρ` is halved and the descent
    /// restarted when `J` stays above its best value for 20 iterations.
    Fixed,
    /// Each parameter's step is divided by its Gauss-Newton curvature
    /// `Σ_g (∂F_i/∂p)²`, which evens out the very different scales of
    /// heights, centers and widths. `ρ` grows by 20% after every step that
    /// lowers `J` and halves (rejecting the step) otherwise.
    #[default]
    Scaled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    /// Initial learning constant of the update `p ← p − ρ ∂J/∂p`.
    pub rho: f64,
    pub max_iters: usize,
    /// Stop once an accepted step changes `J` by less than this.
    pub tol: f64,
    /// Polynomial maxima lower than this fraction of the highest one are ignored.
    pub peak_ignore_ratio: f64,
    /// After descent, components shorter than this fraction of the tallest
    /// one are dropped and the rest refitted. Zero keeps every component.
    pub prune_ratio: f64,
    pub step_rule: StepRule,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            rho: 1e-4,
            max_iters: 2000,
            tol: 1e-9,
            peak_ignore_ratio: 0.1,
            prune_ratio: 0.1,
            step_rule: StepRule::Scaled,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::contract(format!("rho must be positive, got {}", self.rho)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::contract(format!("tol must be positive, got {}", self.tol)));
        }
        if !(0.0..1.0).contains(&self.peak_ignore_ratio) {
            return Err(Error::contract(format!(
                "peak_ignore_ratio must lie in [0, 1), got {}",
                self.peak_ignore_ratio
            )));
        }
        if !(0.0..1.0).contains(&self.prune_ratio) {
            return Err(Error::contract(format!(
                "prune_ratio must lie in [0, 1), got {}",
                self.prune_ratio
            )));
        }
        Ok(())
    }
}

/// Closed run of gray levels `[start, end]` dominated by `component`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Reach {
    pub component: usize,
    pub start: usize,
    pub end: usize,
}

impl Reach {
    pub fn contains(&self, g: usize) -> bool {
        (self.start..=self.end).contains(&g)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureFit {
    /// Sorted by center.
    pub gaussians: Vec<Gaussian1D>,
    /// Midpoints of consecutive centers.
    pub partition_points: Vec<f64>,
    /// Ordered by start level; together they cover `0..=255`.
    pub reaches: Vec<Reach>,
    pub final_objective: f64,
    /// Gradient steps taken (rejected adaptive steps included).
    pub iterations: usize,
    /// Set when the fixed-step restart budget ran out.
    pub diverged: bool,
}

impl MixtureFit {
    /// Builds a fit from raw components: sorts them, derives partition
    /// points and reaches. The objective is left at zero.
    pub fn from_gaussians(mut gaussians: Vec<Gaussian1D>) -> Result<Self> {
        if gaussians.is_empty() {
            return Err(Error::contract("a mixture needs at least one component"));
        }
        gaussians.sort_by(|x, y| x.mu.total_cmp(&y.mu));
        let partition_points = partition_points(&gaussians);
        let reaches = compute_reaches(&gaussians);
        Ok(Self {
            gaussians,
            partition_points,
            reaches,
            final_objective: 0.0,
            iterations: 0,
            diverged: false,
        })
    }

    pub fn len(&self) -> usize {
        self.gaussians.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaussians.is_empty()
    }

    pub fn eval(&self, x: f64) -> f64 {
        eval_mixture(self, x)
    }

    pub fn series(&self) -> Series {
        let mut s = [0.0; LEVELS];
        for (g, v) in s.iter_mut().enumerate() {
            *v = self.eval(g as f64);
        }
        s
    }

    pub fn component_series(&self, i: usize) -> Series {
        self.gaussians[i].series()
    }

    /// Index of the smallest component whose reach contains `g`.
    pub fn domain_of(&self, g: usize) -> usize {
        domain_of(self, g)
    }

    /// The reach of `domain_of(g)` that contains `g`; its endpoints are the
    /// crossovers used in PDF generation.
    pub fn domain_reach(&self, g: usize) -> &Reach {
        self.reaches
            .iter()
            .filter(|r| r.contains(g))
            .min_by_key(|r| r.component)
            .expect("reaches cover every gray level")
    }

    /// Hull of all levels dominated by component `i`, if any.
    pub fn reach_of(&self, i: usize) -> Option<(usize, usize)> {
        let mut it = self.reaches.iter().filter(|r| r.component == i);
        let first = it.next()?;
        let last = it.last().unwrap_or(first);
        Some((first.start, last.end))
    }
}

pub fn eval_mixture(fit: &MixtureFit, x: f64) -> f64 {
    fit.gaussians.iter().map(|c| c.eval(x)).sum()
}

pub fn partition_points(gaussians: &[Gaussian1D]) -> Vec<f64> {
    gaussians
        .windows(2)
        .map(|w| 0.5 * (w[0].mu + w[1].mu))
        .collect()
}

/// `½ Σ_g (Σ_i F_i(g) − target(g))²`.
pub fn objective(gaussians: &[Gaussian1D], target: &Series) -> f64 {
    let mut j = 0.0;
    for (g, &t) in target.iter().enumerate() {
        let x = g as f64;
        let r: f64 = gaussians.iter().map(|c| c.eval(x)).sum::<f64>() - t;
        j += r * r;
    }
    0.5 * j
}

/// Per-level argmax scan. A level where several components tie for the
/// maximum belongs to all of their reaches.
pub fn compute_reaches(gaussians: &[Gaussian1D]) -> Vec<Reach> {
    let n = gaussians.len();
    if n == 0 {
        return Vec::new();
    }
    let mut values = vec![0.0; n];
    let mut ties: Vec<Vec<usize>> = Vec::with_capacity(LEVELS);
    for g in 0..LEVELS {
        for (v, c) in values.iter_mut().zip(gaussians) {
            *v = c.eval(g as f64);
        }
        let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let eps = best.abs() * 1e-12;
        ties.push((0..n).filter(|&i| values[i] >= best - eps).collect());
    }
    let owner = |g: usize| ties[g][0];

    let mut reaches = Vec::new();
    let mut start = 0;
    for g in 1..=LEVELS {
        if g == LEVELS || owner(g) != owner(start) {
            let component = owner(start);
            let mut lo = start;
            let mut hi = g - 1;
            if lo > 0 && ties[lo - 1].contains(&component) {
                lo -= 1;
            }
            if hi + 1 < LEVELS && ties[hi + 1].contains(&component) {
                hi += 1;
            }
            reaches.push(Reach {
                component,
                start: lo,
                end: hi,
            });
            start = g;
        }
    }
    reaches
}

pub fn domain_of(fit: &MixtureFit, g: usize) -> usize {
    fit.domain_reach(g).component
}

/// Least-squares polynomial on the normalized abscissa `t = (g − 127.5) / 127.5`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    /// Ascending powers of `t`.
    coeffs: Vec<f64>,
}

const HALF_RANGE: f64 = MAX_LEVEL / 2.0;

impl Polynomial {
    pub fn fit(values: &Series, degree: usize) -> Result<Self> {
        let cols = degree + 1;
        let mut design = DMatrix::<f64>::zeros(LEVELS, cols);
        for g in 0..LEVELS {
            let t = (g as f64 - HALF_RANGE) / HALF_RANGE;
            let mut p = 1.0;
            for k in 0..cols {
                design[(g, k)] = p;
                p *= t;
            }
        }
        let rhs = DVector::from_column_slice(values);
        let svd = design.svd(true, true);
        let sol = svd
            .solve(&rhs, 1e-12)
            .map_err(|e| Error::contract(format!("polynomial least squares failed: {e}")))?;
        Ok(Self {
            coeffs: sol.iter().copied().collect(),
        })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Value at gray level `g` (real-valued).
    pub fn eval(&self, g: f64) -> f64 {
        let t = (g - HALF_RANGE) / HALF_RANGE;
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    /// Derivative with respect to the gray level.
    pub fn derivative(&self) -> Polynomial {
        let coeffs = if self.coeffs.len() <= 1 {
            vec![0.0]
        } else {
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c / HALF_RANGE)
                .collect()
        };
        Polynomial { coeffs }
    }

    pub fn rms_residual(&self, values: &Series) -> f64 {
        let ss: f64 = values
            .iter()
            .enumerate()
            .map(|(g, &v)| (self.eval(g as f64) - v).powi(2))
            .sum();
        (ss / LEVELS as f64).sqrt()
    }

    /// Real roots in `[0, 255]`, located by sign changes on a quarter-level
    /// grid and refined by bisection.
    pub fn roots_in_range(&self) -> Vec<f64> {
        const STEPS: usize = 4 * (LEVELS - 1);
        let step = MAX_LEVEL / STEPS as f64;
        let mut roots = Vec::new();
        let mut x0 = 0.0;
        let mut f0 = self.eval(x0);
        if f0 == 0.0 {
            roots.push(0.0);
        }
        for k in 1..=STEPS {
            let x1 = k as f64 * step;
            let f1 = self.eval(x1);
            if f1 == 0.0 {
                roots.push(x1);
            } else if f0 != 0.0 && (f0 < 0.0) != (f1 < 0.0) {
                roots.push(self.bisect(x0, x1, f0));
            }
            x0 = x1;
            f0 = f1;
        }
        roots
    }

    fn bisect(&self, mut lo: f64, mut hi: f64, f_lo: f64) -> f64 {
        let neg_lo = f_lo < 0.0;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let fm = self.eval(mid);
            if fm == 0.0 {
                return mid;
            }
            if (fm < 0.0) == neg_lo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Critical points of the polynomial on the closed range `[0, 255]`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Extrema {
    /// Local maxima as `(location, value)`, endpoints included.
    pub maxima: Vec<(f64, f64)>,
    /// Interior local minima.
    pub minima: Vec<f64>,
    pub roots: Vec<f64>,
}

pub fn polynomial_extrema(poly: &Polynomial) -> Extrema {
    let d = poly.derivative();
    let dd = d.derivative();
    let mut ex = Extrema {
        roots: poly.roots_in_range(),
        ..Default::default()
    };
    for x in d.roots_in_range() {
        // classify by the sign change of the derivative around the root
        let h = 1e-3;
        let left = d.eval(x - h);
        let right = d.eval(x + h);
        let is_max = if left > 0.0 && right < 0.0 {
            true
        } else if left < 0.0 && right > 0.0 {
            false
        } else {
            dd.eval(x) < 0.0
        };
        if x <= 0.0 || x >= MAX_LEVEL {
            continue;
        }
        if is_max {
            ex.maxima.push((x, poly.eval(x)));
        } else {
            ex.minima.push(x);
        }
    }
    if d.eval(0.0) < 0.0 {
        ex.maxima.push((0.0, poly.eval(0.0)));
    }
    if d.eval(MAX_LEVEL) > 0.0 {
        ex.maxima.push((MAX_LEVEL, poly.eval(MAX_LEVEL)));
    }
    ex.maxima.sort_by(|x, y| x.0.total_cmp(&y.0));
    ex
}

/// Lowest degree from the schedule 4, 6, …, 12 whose RMS residual is below
/// 0.05; degree 12 if none is.
pub fn fit_lowest_degree_polynomial(values: &Series) -> Result<Polynomial> {
    let mut last = None;
    for &deg in &POLY_DEGREES {
        let poly = Polynomial::fit(values, deg)?;
        if poly.rms_residual(values) < POLY_RMS_TARGET {
            return Ok(poly);
        }
        last = Some(poly);
    }
    Ok(last.expect("degree schedule is non-empty"))
}

/// An endpoint maximum of the polynomial is kept only when the histogram
/// itself falls away from that edge; otherwise it is usually the tail of an
/// interior component that the polynomial bent upwards.
fn edge_is_peak(values: &Series, low_edge: bool) -> bool {
    let level = |k: usize| if low_edge { values[k] } else { values[LEVELS - 1 - k] };
    let near = (0..EDGE_SPAN).map(level).sum::<f64>() / EDGE_SPAN as f64;
    let next = (EDGE_SPAN..3 * EDGE_SPAN).map(level).sum::<f64>() / (2 * EDGE_SPAN) as f64;
    near >= next
}

/// Initial mixture parameters from the polynomial heuristic.
pub fn heuristic_init(h: &NormalizedHistogram, cfg: &FitConfig) -> Result<MixtureFit> {
    cfg.validate()?;
    let values = h.values();
    if values.iter().all(|&v| v == 0.0) {
        return Err(Error::contract("cannot initialize a fit on an all-zero histogram"));
    }
    let poly = fit_lowest_degree_polynomial(values)?;
    let ex = polynomial_extrema(&poly);

    let highest = ex
        .maxima
        .iter()
        .map(|&(_, v)| v)
        .fold(f64::NEG_INFINITY, f64::max);
    let threshold = cfg.peak_ignore_ratio * highest;
    let anchors: Vec<f64> = ex.minima.iter().chain(&ex.roots).copied().collect();

    let gaussians: Vec<Gaussian1D> = ex
        .maxima
        .iter()
        .filter(|&&(_, v)| v > 0.0 && v >= threshold)
        .filter(|&&(x, _)| (x > 0.0 && x < MAX_LEVEL) || edge_is_peak(values, x == 0.0))
        .map(|&(mu, a)| {
            let sigma = anchors
                .iter()
                .map(|&x| (x - mu).abs())
                .filter(|&d| d > 1e-6)
                .fold(f64::INFINITY, f64::min);
            let sigma = if sigma.is_finite() { sigma } else { FALLBACK_SIGMA };
            Gaussian1D::new(a, mu, sigma.max(MIN_SIGMA)).clamped()
        })
        .collect();

    let gaussians = if gaussians.is_empty() {
        let g = h.argmax();
        vec![Gaussian1D::new(values[g], g as f64, FALLBACK_SIGMA).clamped()]
    } else {
        gaussians
    };
    let mut fit = MixtureFit::from_gaussians(gaussians)?;
    fit.final_objective = objective(&fit.gaussians, values);
    Ok(fit)
}

struct Evaluation {
    objective: f64,
    /// `F_i(g)`, component-major.
    component_values: Vec<f64>,
    residual: Series,
}

fn evaluate(gaussians: &[Gaussian1D], target: &Series) -> Evaluation {
    let n = gaussians.len();
    let mut component_values = vec![0.0; n * LEVELS];
    let mut residual = [0.0; LEVELS];
    for (i, c) in gaussians.iter().enumerate() {
        let row = &mut component_values[i * LEVELS..(i + 1) * LEVELS];
        for (g, v) in row.iter_mut().enumerate() {
            *v = c.eval(g as f64);
            residual[g] += *v;
        }
    }
    let mut j = 0.0;
    for (r, &t) in residual.iter_mut().zip(target) {
        *r -= t;
        j += *r * *r;
    }
    Evaluation {
        objective: 0.5 * j,
        component_values,
        residual,
    }
}

/// `(∂J/∂a, ∂J/∂μ, ∂J/∂σ)` for each component.
fn gradient(gaussians: &[Gaussian1D], ev: &Evaluation) -> Vec<[f64; 3]> {
    gaussians
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let row = &ev.component_values[i * LEVELS..(i + 1) * LEVELS];
            let s2 = c.sigma * c.sigma;
            let s3 = s2 * c.sigma;
            let (mut da, mut dmu, mut dsigma) = (0.0, 0.0, 0.0);
            for (g, (&f, &r)) in row.iter().zip(&ev.residual).enumerate() {
                let x = g as f64 - c.mu;
                let rf = r * f;
                da += r * (-0.5 * x * x / s2).exp();
                dmu += rf * x / s2;
                dsigma += rf * x * x / s3;
            }
            [da, dmu, dsigma]
        })
        .collect()
}

/// Diagonal of the Gauss-Newton matrix, `Σ_g (∂F_i(g)/∂p)²` per parameter.
fn curvature(gaussians: &[Gaussian1D], ev: &Evaluation) -> Vec<[f64; 3]> {
    gaussians
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let row = &ev.component_values[i * LEVELS..(i + 1) * LEVELS];
            let s2 = c.sigma * c.sigma;
            let s3 = s2 * c.sigma;
            let (mut ca, mut cmu, mut csigma) = (0.0, 0.0, 0.0);
            for (g, &f) in row.iter().enumerate() {
                let x = g as f64 - c.mu;
                let fa = f / c.a;
                let fmu = f * x / s2;
                let fsigma = f * x * x / s3;
                ca += fa * fa;
                cmu += fmu * fmu;
                csigma += fsigma * fsigma;
            }
            [ca + 1e-12, cmu + 1e-12, csigma + 1e-12]
        })
        .collect()
}

/// Analytic gradient of [`objective`], exposed for verification.
pub fn objective_gradient(gaussians: &[Gaussian1D], target: &Series) -> Vec<[f64; 3]> {
    gradient(gaussians, &evaluate(gaussians, target))
}

fn step(gaussians: &[Gaussian1D], grad: &[[f64; 3]], rho: f64) -> Vec<Gaussian1D> {
    gaussians
        .iter()
        .zip(grad)
        .map(|(c, g)| {
            Gaussian1D::new(c.a - rho * g[0], c.mu - rho * g[1], c.sigma - rho * g[2]).clamped()
        })
        .collect()
}

/// Gradient-descent refinement of `init` against `target`.
pub fn fit_mixture(target: &Series, init: &MixtureFit, cfg: &FitConfig) -> Result<MixtureFit> {
    cfg.validate()?;
    if init.is_empty() {
        return Err(Error::contract("fit_mixture needs a non-empty initialization"));
    }
    if target.iter().any(|v| !v.is_finite()) {
        return Err(Error::contract("fit target contains non-finite values"));
    }
    let descend = |start| match cfg.step_rule {
        StepRule::Scaled => descend_scaled(target, start, cfg),
        StepRule::Fixed => descend_fixed(target, start, cfg),
    };
    let start: Vec<Gaussian1D> = init.gaussians.iter().map(|c| c.clamped()).collect();
    let (mut params, mut objective, mut iterations, mut diverged) = descend(start);
    // Ringing in the polynomial can seed spurious peaks; descent shrinks
    // them but does not remove them.
    while cfg.max_iters > 0 && cfg.prune_ratio > 0.0 {
        let tallest = params.iter().map(|c| c.a).fold(0.0, f64::max);
        let kept: Vec<Gaussian1D> = params
            .iter()
            .copied()
            .filter(|c| c.a >= cfg.prune_ratio * tallest)
            .collect();
        if kept.len() == params.len() {
            break;
        }
        let (p, j, n, d) = descend(kept);
        params = p;
        objective = j;
        iterations += n;
        diverged |= d;
    }
    let mut fit = MixtureFit::from_gaussians(params)?;
    fit.final_objective = objective;
    fit.iterations = iterations;
    fit.diverged = diverged;
    Ok(fit)
}

fn scaled_gradient(params: &[Gaussian1D], ev: &Evaluation) -> Vec<[f64; 3]> {
    gradient(params, ev)
        .into_iter()
        .zip(curvature(params, ev))
        .map(|(g, c)| [g[0] / c[0], g[1] / c[1], g[2] / c[2]])
        .collect()
}

fn descend_scaled(
    target: &Series,
    mut params: Vec<Gaussian1D>,
    cfg: &FitConfig,
) -> (Vec<Gaussian1D>, f64, usize, bool) {
    let mut rho = cfg.rho;
    let rho_floor = cfg.rho * 1e-12;
    let mut current = evaluate(&params, target);
    let mut grad = scaled_gradient(&params, &current);
    let mut iters = 0;
    while iters < cfg.max_iters {
        iters += 1;
        let candidate = step(&params, &grad, rho);
        let ev = evaluate(&candidate, target);
        if ev.objective.is_finite() && ev.objective <= current.objective {
            let delta = current.objective - ev.objective;
            params = candidate;
            current = ev;
            grad = scaled_gradient(&params, &current);
            rho = (rho * 1.2).min(1.0);
            if delta < cfg.tol {
                break;
            }
        } else {
            rho *= 0.5;
            if rho < rho_floor {
                break;
            }
        }
    }
    (params, current.objective, iters, false)
}

fn descend_fixed(
    target: &Series,
    init: Vec<Gaussian1D>,
    cfg: &FitConfig,
) -> (Vec<Gaussian1D>, f64, usize, bool) {
    let mut rho = cfg.rho;
    let mut params = init.clone();
    let mut current = evaluate(&params, target);
    let mut best = (params.clone(), current.objective);
    let mut growth_streak = 0;
    let mut restarts = 0;
    let mut iters = 0;
    let mut diverged = false;
    while iters < cfg.max_iters {
        iters += 1;
        let grad = gradient(&params, &current);
        let next = step(&params, &grad, rho);
        let ev = evaluate(&next, target);
        let delta = ev.objective - current.objective;
        // with the clamp box J cannot grow without bound, so growth is
        // judged against the best value seen rather than the last step
        if !ev.objective.is_finite() || ev.objective > best.1 {
            growth_streak += 1;
        } else {
            growth_streak = 0;
            best = (next.clone(), ev.objective);
        }
        if growth_streak >= GROWTH_STREAK_LIMIT || !ev.objective.is_finite() {
            if restarts == MAX_RESTARTS {
                diverged = true;
                break;
            }
            restarts += 1;
            rho *= 0.5;
            params = init.clone();
            current = evaluate(&params, target);
            growth_streak = 0;
            continue;
        }
        params = next;
        current = ev;
        if growth_streak == 0 && delta.abs() < cfg.tol {
            break;
        }
    }
    (best.0, best.1, iters, diverged)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample(components: &[Gaussian1D]) -> Series {
        let mut s = [0.0; LEVELS];
        for (g, v) in s.iter_mut().enumerate() {
            *v = components.iter().map(|c| c.eval(g as f64)).sum();
        }
        s
    }

    fn normalized(components: &[Gaussian1D]) -> NormalizedHistogram {
        NormalizedHistogram::from_values(sample(components).map(|v| v.min(1.0))).unwrap()
    }

    #[test]
    fn eval_closed_forms() {
        let c = Gaussian1D::new(0.7, 100.0, 12.0);
        assert_eq!(c.eval(100.0), 0.7);
        assert!((c.eval(112.0) - 0.7 * (-0.5f64).exp()).abs() < 1e-15);
        assert!((c.eval(88.0) - 0.7 * (-0.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn mixture_eval_is_sum_of_terms() {
        let a = Gaussian1D::new(0.8, 60.0, 14.0);
        let b = Gaussian1D::new(0.4, 170.0, 30.0);
        let fit = MixtureFit::from_gaussians(vec![b, a]).unwrap();
        for g in 0..LEVELS {
            let x = g as f64;
            let oracle = 0.8 * (-(x - 60.0).powi(2) / (2.0 * 196.0)).exp()
                + 0.4 * (-(x - 170.0).powi(2) / (2.0 * 900.0)).exp();
            assert!((eval_mixture(&fit, x) - oracle).abs() < 1e-12);
        }
        assert_eq!(fit.gaussians[0].mu, 60.0);
    }

    #[test]
    fn single_component_reaches_everything() {
        let fit = MixtureFit::from_gaussians(vec![Gaussian1D::new(1.0, 40.0, 9.0)]).unwrap();
        assert_eq!(
            fit.reaches,
            vec![Reach {
                component: 0,
                start: 0,
                end: 255
            }]
        );
        assert!(fit.partition_points.is_empty());
    }

    #[test]
    fn symmetric_pair_crosses_at_midpoint() {
        let fit = MixtureFit::from_gaussians(vec![
            Gaussian1D::new(1.0, 64.0, 20.0),
            Gaussian1D::new(1.0, 192.0, 20.0),
        ])
        .unwrap();
        assert_eq!(fit.partition_points, vec![128.0]);
        assert_eq!(fit.reaches.len(), 2);
        assert_eq!((fit.reaches[0].start, fit.reaches[0].end), (0, 128));
        assert_eq!((fit.reaches[1].start, fit.reaches[1].end), (128, 255));
        assert_eq!(fit.domain_of(64), 0);
        assert_eq!(fit.domain_of(128), 0);
        assert_eq!(fit.domain_of(129), 1);
    }

    #[test]
    fn unequal_heights_crossover_matches_scan_and_analytic() {
        let gs = vec![
            Gaussian1D::new(1.0, 64.0, 30.0),
            Gaussian1D::new(0.5, 192.0, 30.0),
        ];
        let fit = MixtureFit::from_gaussians(gs.clone()).unwrap();
        // brute-force: last level where the first component is >= the second
        let last_first = (0..LEVELS)
            .filter(|&g| gs[0].eval(g as f64) >= gs[1].eval(g as f64))
            .max()
            .unwrap();
        assert_eq!(fit.reaches[0].end, last_first);
        assert_eq!(fit.reaches[1].start, last_first + 1);
        // equal-value solution of a1 e^{-(x-m1)^2/2s^2} = a2 e^{-(x-m2)^2/2s^2}
        let s2 = 900.0;
        let x = (2.0 * s2 * (1.0f64 / 0.5).ln() + 192.0f64.powi(2) - 64.0f64.powi(2))
            / (2.0 * (192.0 - 64.0));
        assert!((fit.reaches[0].end as f64 - x).abs() <= 1.0);
    }

    proptest! {
        #[test]
        fn reaches_tile_and_domain_is_minimal(
            params in proptest::collection::vec((0.05f64..1.5, 0.0f64..255.0, 1.0f64..80.0), 1..5)
        ) {
            let gs: Vec<_> = params.iter().map(|&(a, m, s)| Gaussian1D::new(a, m, s)).collect();
            let fit = MixtureFit::from_gaussians(gs).unwrap();
            prop_assert_eq!(fit.reaches[0].start, 0);
            prop_assert_eq!(fit.reaches.last().unwrap().end, 255);
            for w in fit.reaches.windows(2) {
                // consecutive reaches touch or share one crossover level
                prop_assert!(w[1].start == w[0].end || w[1].start == w[0].end + 1);
            }
            for g in 0..LEVELS {
                let d = fit.domain_of(g);
                let vals: Vec<f64> = fit.gaussians.iter().map(|c| c.eval(g as f64)).collect();
                let best = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(vals[d] >= best - 1e-12 * best);
                let containing: Vec<usize> = fit.reaches.iter()
                    .filter(|r| r.contains(g)).map(|r| r.component).collect();
                prop_assert!(containing.contains(&d));
                prop_assert_eq!(containing.iter().copied().min().unwrap(), d);
            }
            for w in fit.partition_points.windows(2) {
                prop_assert!(w[0] <= w[1]);
            }
            for (i, pp) in fit.partition_points.iter().enumerate() {
                prop_assert!(fit.gaussians[i].mu <= *pp && *pp <= fit.gaussians[i + 1].mu);
            }
        }

        #[test]
        fn mixture_dominates_each_component(
            params in proptest::collection::vec((0.05f64..1.5, 0.0f64..255.0, 1.0f64..80.0), 1..5),
            g in 0usize..256,
        ) {
            let gs: Vec<_> = params.iter().map(|&(a, m, s)| Gaussian1D::new(a, m, s)).collect();
            let fit = MixtureFit::from_gaussians(gs).unwrap();
            let total = fit.eval(g as f64);
            for c in &fit.gaussians {
                prop_assert!(total >= c.eval(g as f64));
            }
        }
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        let target = sample(&[
            Gaussian1D::new(0.9, 80.0, 18.0),
            Gaussian1D::new(0.5, 170.0, 25.0),
        ]);
        let gs = vec![
            Gaussian1D::new(0.7, 85.0, 22.0),
            Gaussian1D::new(0.6, 160.0, 20.0),
        ];
        let grad = objective_gradient(&gs, &target);
        let h = 1e-6;
        for i in 0..gs.len() {
            for k in 0..3 {
                let bump = |sign: f64| {
                    let mut p = gs.clone();
                    match k {
                        0 => p[i].a += sign * h,
                        1 => p[i].mu += sign * h,
                        _ => p[i].sigma += sign * h,
                    }
                    objective(&p, &target)
                };
                let fd = (bump(1.0) - bump(-1.0)) / (2.0 * h);
                assert!(
                    (fd - grad[i][k]).abs() < 1e-5 * fd.abs().max(1.0),
                    "component {i} param {k}: fd {fd} analytic {}",
                    grad[i][k]
                );
            }
        }
    }

    #[test]
    fn polynomial_recovers_exact_cubic() {
        let mut values = [0.0; LEVELS];
        for (g, v) in values.iter_mut().enumerate() {
            let t = (g as f64 - 127.5) / 127.5;
            *v = 0.3 - 0.2 * t + 0.5 * t * t * t;
        }
        let p = Polynomial::fit(&values, 4).unwrap();
        assert!(p.rms_residual(&values) < 1e-12);
        let roots = p.roots_in_range();
        for r in roots {
            assert!(p.eval(r).abs() < 1e-9);
        }
    }

    #[test]
    fn init_single_gaussian() {
        let h = normalized(&[Gaussian1D::new(1.0, 128.0, 20.0)]);
        let fit = heuristic_init(&h, &FitConfig::default()).unwrap();
        assert_eq!(fit.len(), 1, "{fit:?}");
        assert!((fit.gaussians[0].mu - 128.0).abs() <= 4.0);
    }

    #[test]
    fn init_symmetric_bimodal() {
        let h = normalized(&[
            Gaussian1D::new(1.0, 64.0, 16.0),
            Gaussian1D::new(1.0, 192.0, 16.0),
        ]);
        let fit = heuristic_init(&h, &FitConfig::default()).unwrap();
        assert_eq!(fit.len(), 2, "{fit:?}");
        assert!((fit.partition_points[0] - 128.0).abs() < 0.5, "{:?}", fit.partition_points);
    }

    #[test]
    fn init_ignores_small_peak() {
        let h = normalized(&[
            Gaussian1D::new(1.0, 70.0, 18.0),
            Gaussian1D::new(0.05, 190.0, 18.0),
        ]);
        let fit = heuristic_init(&h, &FitConfig::default()).unwrap();
        assert_eq!(fit.len(), 1, "{fit:?}");
    }

    #[test]
    fn init_rejects_zero_histogram() {
        let h = NormalizedHistogram::from_values([0.0; LEVELS]).unwrap();
        assert!(matches!(
            heuristic_init(&h, &FitConfig::default()),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn zero_iterations_returns_init() {
        let target = sample(&[Gaussian1D::new(0.9, 100.0, 15.0)]);
        let init = MixtureFit::from_gaussians(vec![Gaussian1D::new(0.8, 95.0, 20.0)]).unwrap();
        let cfg = FitConfig {
            max_iters: 0,
            ..Default::default()
        };
        let fit = fit_mixture(&target, &init, &cfg).unwrap();
        assert_eq!(fit.gaussians, init.gaussians);
        assert_eq!(fit.final_objective, objective(&init.gaussians, &target));
    }

    #[test]
    fn recovers_single_gaussian() {
        let truth = Gaussian1D::new(0.9, 100.0, 15.0);
        let h = normalized(&[truth]);
        let cfg = FitConfig::default();
        let init = heuristic_init(&h, &cfg).unwrap();
        let fit = fit_mixture(h.values(), &init, &cfg).unwrap();
        assert_eq!(fit.len(), 1);
        let c = fit.gaussians[0];
        assert!((c.a - truth.a).abs() / truth.a < 0.02, "{c:?}");
        assert!((c.mu - truth.mu).abs() / truth.mu < 0.02, "{c:?}");
        assert!((c.sigma - truth.sigma).abs() / truth.sigma < 0.02, "{c:?}");
        assert!(fit.final_objective <= init.final_objective);
    }

    #[test]
    fn objective_non_increasing_over_accepted_steps() {
        let target = sample(&[
            Gaussian1D::new(0.8, 70.0, 20.0),
            Gaussian1D::new(0.6, 180.0, 12.0),
        ]);
        let h = NormalizedHistogram::from_values(target).unwrap();
        let cfg = FitConfig::default();
        let init = heuristic_init(&h, &cfg).unwrap();
        let mut prev = objective(&init.gaussians, &target);
        let mut fit = init.clone();
        for _ in 0..40 {
            let next = fit_mixture(
                &target,
                &fit,
                &FitConfig {
                    max_iters: 10,
                    ..cfg.clone()
                },
            )
            .unwrap();
            let j = objective(&next.gaussians, &target);
            assert!(j <= prev + 1e-15, "{j} > {prev}");
            prev = j;
            fit = next;
        }
    }

    #[test]
    fn fixed_step_divergence_sets_flag_and_keeps_best() {
        let target = sample(&[Gaussian1D::new(0.9, 100.0, 15.0)]);
        let init = MixtureFit::from_gaussians(vec![Gaussian1D::new(0.5, 90.0, 25.0)]).unwrap();
        let cfg = FitConfig {
            rho: 1e6,
            step_rule: StepRule::Fixed,
            ..Default::default()
        };
        let fit = fit_mixture(&target, &init, &cfg).unwrap();
        assert!(fit.diverged);
        assert!(fit.final_objective <= objective(&init.gaussians, &target));
    }

    #[test]
    fn fixed_step_small_rho_improves() {
        let target = sample(&[Gaussian1D::new(0.9, 100.0, 15.0)]);
        let init = MixtureFit::from_gaussians(vec![Gaussian1D::new(0.5, 95.0, 20.0)]).unwrap();
        let cfg = FitConfig {
            rho: 1e-3,
            step_rule: StepRule::Fixed,
            ..Default::default()
        };
        let fit = fit_mixture(&target, &init, &cfg).unwrap();
        assert!(!fit.diverged);
        assert!(fit.final_objective < objective(&init.gaussians, &target));
    }

    #[test]
    fn translation_consistent() {
        let cfg = FitConfig::default();
        let base = normalized(&[Gaussian1D::new(0.9, 90.0, 14.0)]);
        let moved = normalized(&[Gaussian1D::new(0.9, 120.0, 14.0)]);
        let fa = fit_mixture(base.values(), &heuristic_init(&base, &cfg).unwrap(), &cfg).unwrap();
        let fb = fit_mixture(moved.values(), &heuristic_init(&moved, &cfg).unwrap(), &cfg).unwrap();
        assert!((fb.gaussians[0].mu - fa.gaussians[0].mu - 30.0).abs() <= 1.0);
    }
}

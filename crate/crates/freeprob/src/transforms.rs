//! The analytic engine: Cauchy transforms G, their F = 1/G and H = F − z
//! companions, Stieltjes inversion, R-transform coefficients, the
//! subordination fixed point, free additive convolution of measures, and
//! continuous convolution powers.
//!
//! Everything operates on the open upper half plane ℂ⁺. Numerical recipes:
//! densities are recovered by evaluating −Im G(x+iε)/π at two heights and
//! extrapolating linearly to ε = 0; square roots of quadratics take the
//! branch that behaves like z at infinity with its cut on the support
//! interval; fixed points use plain Picard iteration with an optional
//! Aitken Δ² acceleration that falls back to the plain step whenever the
//! accelerated candidate leaves the half plane.

use rayon::prelude::*;

use crate::cumulants::cumulants_from_moments;
use crate::measures::{moments_of_measure, trapezoid, Atom};
use crate::{Complex64, Error, Measure, Result};

/// Bound for R-transform coefficient extraction.
pub const MAX_R_SERIES_ORDER: usize = 14;
/// Default number of output grid points for convolution results.
pub const DEFAULT_OUT_POINTS: usize = 2001;
/// Recovered atoms lighter than this are discarded as numerical dust.
pub const ATOM_KEEP_THRESHOLD: f64 = 1e-2;
/// A genuine residue is ε-stable (slice ratio → 1); a candidate sitting on a
/// square-root edge of the continuous part scales like √ε (ratio √2 between
/// doubled heights) and is rejected by this bound.
pub const ATOM_SLICE_RATIO: f64 = 1.25;
/// Output mass may deviate this much from its target before renormalization
/// is refused and the inversion reported as failed.
pub const MASS_RECOVERY_TOLERANCE: f64 = 0.02;
/// Relative L¹ drift between the two ε slices above which the inversion is
/// declared inconsistent (the signature of unrepresented atomic mass).
pub const EPS_CONSISTENCY_THRESHOLD: f64 = 0.25;
/// Grid points are processed in fixed chunks so that warm starts — and
/// therefore results — do not depend on how many threads run.
const SCAN_CHUNK: usize = 256;

fn require_upper(z: Complex64) -> Result<()> {
    if !(z.im > 0.0) || !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::invalid(format!(
            "evaluation point must lie in the open upper half plane, got {z}"
        )));
    }
    Ok(())
}

fn finite(c: Complex64) -> bool {
    c.re.is_finite() && c.im.is_finite()
}

/// √((z−a)(z−b)) as the product of principal square roots of the factors:
/// the branch that is ~z near ∞ and whose only cut is the segment [a,b]
/// (the two half-line cuts of the factors cancel on (−∞, a)).
pub fn sqrt_two_cuts(z: Complex64, a: f64, b: f64) -> Complex64 {
    (z - a).sqrt() * (z - b).sqrt()
}

/// Evaluator of the analytic transforms of a probability measure on ℂ⁺.
///
/// Only the Cauchy transform G is required; F = 1/G and H = F − z follow.
/// For a probability measure, Im G < 0, Im F ≥ Im z, and Im H ≥ 0 on ℂ⁺.
pub trait TransformEvaluator: Sync {
    /// Cauchy transform G(z) = ∫ dμ(t)/(z−t), for Im z > 0.
    fn g_at(&self, z: Complex64) -> Result<Complex64>;

    /// Reciprocal Cauchy transform F(z) = 1/G(z).
    fn f_at(&self, z: Complex64) -> Result<Complex64> {
        let g = self.g_at(z)?;
        if g.norm() == 0.0 {
            return Err(Error::numeric(format!("G({z}) = 0; F is undefined there")));
        }
        Ok(g.inv())
    }

    /// H(z) = F(z) − z; maps ℂ⁺ into its closure, and H ≡ −a exactly for δ_a.
    fn h_at(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.f_at(z)? - z)
    }
}

/// Transform evaluation for a gridded [`Measure`]: atoms are summed exactly
/// and the density contributes through precomputed trapezoid weights,
/// G(z) = Σ w_j/(z−a_j) + Σ c_i ρ_i/(z−x_i).
#[derive(Debug, Clone)]
pub struct MeasureEvaluator {
    atoms: Vec<Atom>,
    xs: Vec<f64>,
    weights: Vec<f64>,
}

impl MeasureEvaluator {
    pub fn new(mu: &Measure) -> MeasureEvaluator {
        let grid = mu.density_grid();
        let vals = mu.density_values();
        let mut weights = vec![0.0; grid.len()];
        for i in 0..grid.len() {
            let left = if i > 0 { grid[i] - grid[i - 1] } else { 0.0 };
            let right = if i + 1 < grid.len() { grid[i + 1] - grid[i] } else { 0.0 };
            weights[i] = 0.5 * (left + right) * vals[i];
        }
        MeasureEvaluator { atoms: mu.atoms().to_vec(), xs: grid.to_vec(), weights }
    }
}

impl TransformEvaluator for MeasureEvaluator {
    fn g_at(&self, z: Complex64) -> Result<Complex64> {
        require_upper(z)?;
        let (mut re, mut im) = (0.0f64, 0.0f64);
        for a in &self.atoms {
            let dx = z.re - a.x;
            let inv = a.w / (dx * dx + z.im * z.im);
            re += dx * inv;
            im -= z.im * inv;
        }
        for (x, w) in self.xs.iter().zip(&self.weights) {
            let dx = z.re - x;
            let inv = w / (dx * dx + z.im * z.im);
            re += dx * inv;
            im -= z.im * inv;
        }
        Ok(Complex64::new(re, im))
    }
}

/// Closed-form Cauchy transforms of the standard laws, used as exact
/// references against the quadrature evaluators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedForm {
    /// Semicircle of variance σ²: G = (z − √(z²−4σ²))/(2σ²).
    Semicircle { sigma: f64 },
    /// Free Poisson rate λ: G = (z+1−λ − √((z−a)(z−b)))/(2z).
    FreePoisson { lambda: f64 },
    /// Symmetric Bernoulli ½(δ₋₁+δ₁): G = z/(z²−1).
    Bernoulli,
    /// Arcsine on [−2,2]: G = 1/√(z²−4).
    Arcsine,
    /// Standard Cauchy: G = 1/(z+i); F and H are exact translations.
    Cauchy,
    /// Point mass: G = 1/(z−a), H ≡ −a.
    Dirac { a: f64 },
    /// t-fold free self-convolution of the symmetric Bernoulli law, t ≥ 1:
    /// G = (t√(z²−4(t−1)) − z(t−2))/(2(z²−t²)).
    BernoulliPower { t: f64 },
}

impl TransformEvaluator for ClosedForm {
    fn g_at(&self, z: Complex64) -> Result<Complex64> {
        require_upper(z)?;
        Ok(match *self {
            ClosedForm::Semicircle { sigma } => {
                let r = 2.0 * sigma;
                (z - sqrt_two_cuts(z, -r, r)) / (2.0 * sigma * sigma)
            }
            ClosedForm::FreePoisson { lambda } => {
                let s = lambda.sqrt();
                let a = (1.0 - s) * (1.0 - s);
                let b = (1.0 + s) * (1.0 + s);
                (z + 1.0 - lambda - sqrt_two_cuts(z, a, b)) / (2.0 * z)
            }
            ClosedForm::Bernoulli => z / (z * z - 1.0),
            ClosedForm::Arcsine => sqrt_two_cuts(z, -2.0, 2.0).inv(),
            ClosedForm::Cauchy => (z + Complex64::i()).inv(),
            ClosedForm::Dirac { a } => (z - a).inv(),
            ClosedForm::BernoulliPower { t } => {
                let half_edge = 2.0 * (t - 1.0).sqrt();
                let root = sqrt_two_cuts(z, -half_edge, half_edge);
                (root * t - z * (t - 2.0)) / ((z * z - t * t) * 2.0)
            }
        })
    }

    fn f_at(&self, z: Complex64) -> Result<Complex64> {
        match *self {
            ClosedForm::Dirac { a } => {
                require_upper(z)?;
                Ok(z - a)
            }
            ClosedForm::Cauchy => {
                require_upper(z)?;
                Ok(z + Complex64::i())
            }
            ClosedForm::Bernoulli => {
                require_upper(z)?;
                Ok(z - z.inv())
            }
            ClosedForm::Semicircle { sigma } => {
                require_upper(z)?;
                let r = 2.0 * sigma;
                Ok((z + sqrt_two_cuts(z, -r, r)) / 2.0)
            }
            ClosedForm::Arcsine => {
                require_upper(z)?;
                Ok(sqrt_two_cuts(z, -2.0, 2.0))
            }
            _ => {
                let g = self.g_at(z)?;
                if g.norm() == 0.0 {
                    return Err(Error::numeric(format!("G({z}) = 0; F is undefined there")));
                }
                Ok(g.inv())
            }
        }
    }

    fn h_at(&self, z: Complex64) -> Result<Complex64> {
        match *self {
            ClosedForm::Dirac { a } => {
                require_upper(z)?;
                Ok(Complex64::new(-a, 0.0))
            }
            ClosedForm::Cauchy => {
                require_upper(z)?;
                Ok(Complex64::i())
            }
            ClosedForm::Bernoulli => {
                require_upper(z)?;
                Ok(-z.inv())
            }
            _ => Ok(self.f_at(z)? - z),
        }
    }
}

/// Cauchy transform of a measure at a single point (one-off convenience;
/// build a [`MeasureEvaluator`] for repeated evaluation).
pub fn cauchy(mu: &Measure, z: Complex64) -> Result<Complex64> {
    MeasureEvaluator::new(mu).g_at(z)
}

/// F(z) = 1/G(z) of a measure.
pub fn f_transform(mu: &Measure, z: Complex64) -> Result<Complex64> {
    MeasureEvaluator::new(mu).f_at(z)
}

/// H(z) = F(z) − z of a measure.
pub fn htransform(mu: &Measure, z: Complex64) -> Result<Complex64> {
    MeasureEvaluator::new(mu).h_at(z)
}

/// Free cumulants κ₁..κ_K of a compact measure — the coefficient view of the
/// R-transform R(z) = Σ κₙ zⁿ⁻¹ — obtained through quadrature moments.
pub fn r_transform_series(mu: &Measure, order: usize) -> Result<Vec<f64>> {
    if order == 0 || order > MAX_R_SERIES_ORDER {
        return Err(Error::invalid(format!(
            "R-series order must lie in 1..={MAX_R_SERIES_ORDER}, got {order}"
        )));
    }
    if mu.is_non_compact() {
        return Err(Error::invalid(
            "R-transform coefficients require compact support",
        ));
    }
    cumulants_from_moments(&moments_of_measure(mu, order)?)
}

/// Outcome of a subordination solve: the fixed point ω(z) with its iteration
/// count and final residual |ω − g_z(ω)|.
#[derive(Debug, Clone, Copy)]
pub struct SubordinationResult {
    pub z: Complex64,
    pub omega: Complex64,
    pub iterations: usize,
    pub residual: f64,
}

/// Knobs for the fixed-point solver. `tol` is relative to max(1, |z|);
/// `aitken` opts into Δ² acceleration (plain Picard is the guaranteed
/// default); `warm_start` seeds the iteration, e.g. with a neighboring ω.
#[derive(Debug, Clone, Copy)]
pub struct SubordinationOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub aitken: bool,
    pub warm_start: Option<Complex64>,
}

impl Default for SubordinationOptions {
    fn default() -> Self {
        SubordinationOptions { tol: 1e-10, max_iter: 20_000, aitken: false, warm_start: None }
    }
}

/// Picard iteration of `map` from `start`, with optional Aitken Δ²
/// acceleration (Steffensen cycles). Accelerated candidates are rejected in
/// favor of the plain step whenever they dip below `floor_im` or blow up.
/// Returns (fixed point, number of map evaluations, final residual);
/// convergence is confirmed with a genuine residual check, so the returned
/// residual is ≤ `tol_abs`.
fn picard_fixed_point(
    map: &dyn Fn(Complex64) -> Result<Complex64>,
    start: Complex64,
    floor_im: f64,
    tol_abs: f64,
    max_iter: usize,
    aitken: bool,
) -> Result<(Complex64, usize, f64)> {
    let mut w = start;
    let mut evals = 0usize;
    let mut last_step = f64::INFINITY;
    while evals < max_iter {
        let w1 = map(w)?;
        evals += 1;
        last_step = (w1 - w).norm();
        if last_step <= tol_abs {
            let residual = (map(w1)? - w1).norm();
            evals += 1;
            if residual <= tol_abs {
                return Ok((w1, evals, residual));
            }
            w = w1;
            continue;
        }
        if !aitken || evals + 1 > max_iter {
            w = w1;
            continue;
        }
        let w2 = map(w1)?;
        evals += 1;
        let step2 = (w2 - w1).norm();
        if step2 <= tol_abs {
            let residual = (map(w2)? - w2).norm();
            evals += 1;
            if residual <= tol_abs {
                return Ok((w2, evals, residual));
            }
            w = w2;
            continue;
        }
        let denom = w2 - w1 - (w1 - w);
        let accelerated = if denom.norm() > 1e-300 {
            let d1 = w1 - w;
            w - d1 * d1 / denom
        } else {
            w2
        };
        w = if finite(accelerated) && accelerated.im >= floor_im { accelerated } else { w2 };
    }
    Err(Error::numeric(format!(
        "fixed point did not converge within {max_iter} map evaluations \
         (last step {last_step:.3e}, tolerance {tol_abs:.3e})"
    )))
}

/// Subordination fixed point for μ ⊞ ν over arbitrary evaluators:
/// iterates ω ← z + H_ν(z + H_μ(ω)) from ω₀ = z (or a warm start). The
/// result satisfies G_{μ⊞ν}(z) = G_μ(ω(z)).
pub fn subordinate_evaluators(
    mu: &dyn TransformEvaluator,
    nu: &dyn TransformEvaluator,
    z: Complex64,
    opts: SubordinationOptions,
) -> Result<SubordinationResult> {
    require_upper(z)?;
    if !(opts.tol > 0.0) || opts.max_iter == 0 {
        return Err(Error::invalid("solver needs tol > 0 and max_iter ≥ 1"));
    }
    let map = |w: Complex64| -> Result<Complex64> { Ok(z + nu.h_at(z + mu.h_at(w)?)?) };
    let tol_abs = opts.tol * z.norm().max(1.0);
    let floor_im = z.im - 1e-12;
    let start = opts
        .warm_start
        .filter(|s| finite(*s) && s.im >= floor_im)
        .unwrap_or(z);
    let (omega, iterations, residual) =
        picard_fixed_point(&map, start, floor_im, tol_abs, opts.max_iter, opts.aitken)?;
    Ok(SubordinationResult { z, omega, iterations, residual })
}

/// Subordination fixed point of two measures at one point (plain Picard).
pub fn subordinate(
    mu: &Measure,
    nu: &Measure,
    z: Complex64,
    tol: f64,
    max_iter: usize,
) -> Result<SubordinationResult> {
    let me = MeasureEvaluator::new(mu);
    let ne = MeasureEvaluator::new(nu);
    subordinate_evaluators(
        &me,
        &ne,
        z,
        SubordinationOptions { tol, max_iter, ..SubordinationOptions::default() },
    )
}

fn validate_out_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 8 {
        return Err(Error::invalid("output grid needs ≥ 8 points"));
    }
    if grid.iter().any(|x| !x.is_finite()) || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("output grid must be finite and strictly ascending"));
    }
    Ok(())
}

fn validate_eps_pair(e1: f64, e2: f64) -> Result<()> {
    if !(e2 > 0.0) || !(e1 > e2) || !e1.is_finite() {
        return Err(Error::invalid(format!(
            "ε schedule must satisfy ε₁ > ε₂ > 0, got ({e1}, {e2})"
        )));
    }
    Ok(())
}

fn median_spacing(grid: &[f64]) -> f64 {
    if grid.len() < 2 {
        return 0.0;
    }
    let mut gaps: Vec<f64> = grid.windows(2).map(|w| w[1] - w[0]).collect();
    gaps.sort_by(f64::total_cmp);
    gaps[gaps.len() / 2]
}

/// Default ε schedule for an output grid: (4h, 2h) with h the output
/// spacing, floored against the input grids' spacing so that quadrature
/// evaluators stay accurate at height ε.
fn auto_eps(out_grid: &[f64], inputs: &[&Measure]) -> (f64, f64) {
    let h_out = median_spacing(out_grid);
    let h_in = inputs
        .iter()
        .map(|m| median_spacing(m.density_grid()))
        .fold(0.0f64, f64::max);
    let e2 = (2.0 * h_out).max(6.0 * h_in).max(1e-9);
    (2.0 * e2, e2)
}

/// Density slice: d_ε(x) = −Im G(x+iε)/π evaluated over a grid.
fn density_slice(g: &dyn TransformEvaluator, grid: &[f64], eps: f64) -> Result<Vec<f64>> {
    grid.iter()
        .map(|&x| Ok(-g.g_at(Complex64::new(x, eps))?.im / std::f64::consts::PI))
        .collect()
}

/// Linear extrapolation of the two slices to ε = 0, pointwise.
fn extrapolate_slices(d1: &[f64], d2: &[f64], e1: f64, e2: f64) -> Vec<f64> {
    d1.iter()
        .zip(d2)
        .map(|(&a, &b)| (e1 * b - e2 * a) / (e1 - e2))
        .collect()
}

/// Relative L¹ drift between the two slices; large drift means the ε limit
/// has not stabilized — the signature of atomic mass hiding under the
/// Poisson kernel (whose slice *mass* looks deceptively correct).
fn slice_drift(grid: &[f64], d1: &[f64], d2: &[f64]) -> f64 {
    let diff: Vec<f64> = d1.iter().zip(d2).map(|(a, b)| (a - b).abs()).collect();
    let base = trapezoid(grid, d2).abs().max(1e-12);
    trapezoid(grid, &diff) / base
}

fn check_consistency(grid: &[f64], d1: &[f64], d2: &[f64]) -> Result<()> {
    let drift = slice_drift(grid, d1, d2);
    if drift > EPS_CONSISTENCY_THRESHOLD {
        return Err(Error::numeric(format!(
            "inversion is ε-inconsistent (relative L¹ drift {drift:.3} between slices): \
             atomic mass or insufficient resolution; a density-only inversion cannot \
             represent it"
        )));
    }
    Ok(())
}

/// Clamp to ≥ 0 and renormalize to `target_mass` if within tolerance.
fn finalize_density(
    grid: &[f64],
    mut values: Vec<f64>,
    target_mass: f64,
) -> Result<Vec<f64>> {
    for v in &mut values {
        if !v.is_finite() {
            return Err(Error::numeric("inverted density is not finite"));
        }
        *v = v.max(0.0);
    }
    let mass = trapezoid(grid, &values);
    if (mass - target_mass).abs() > MASS_RECOVERY_TOLERANCE {
        return Err(Error::numeric(format!(
            "recovered density mass {mass:.6} deviates from target {target_mass:.6} \
             by more than {MASS_RECOVERY_TOLERANCE}: atoms or insufficient grid coverage"
        )));
    }
    if target_mass > 0.0 && mass > 0.0 {
        let scale = target_mass / mass;
        for v in &mut values {
            *v *= scale;
        }
    }
    Ok(values)
}

/// Recovers the absolutely continuous part of the measure behind a Cauchy
/// transform: evaluates −Im G(x+iε)/π on the two smallest ε of the schedule,
/// extrapolates linearly to ε = 0, clamps, and renormalizes to unit mass
/// (within 2%; larger deficits raise an error, as does ε-inconsistency —
/// both signal atoms or an under-resolved grid).
pub fn stieltjes_invert(
    g: &dyn TransformEvaluator,
    grid: &[f64],
    eps_schedule: &[f64],
) -> Result<Measure> {
    validate_out_grid(grid)?;
    if eps_schedule.len() < 2 || eps_schedule.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
        return Err(Error::invalid(
            "ε schedule needs at least two positive finite values",
        ));
    }
    let mut eps = eps_schedule.to_vec();
    eps.sort_by(f64::total_cmp);
    let (e2, e1) = (eps[0], eps[1]);
    validate_eps_pair(e1, e2)?;
    let d1 = density_slice(g, grid, e1)?;
    let d2 = density_slice(g, grid, e2)?;
    check_consistency(grid, &d1, &d2)?;
    let values = finalize_density(grid, extrapolate_slices(&d1, &d2, e1, e2), 1.0)?;
    let radius = grid[0].abs().max(grid.last().unwrap().abs());
    Measure::new(Vec::new(), Some((grid.to_vec(), values)), radius)
}

/// Aggregate solver statistics across a grid scan.
#[derive(Debug, Clone, Copy, Default, serde::Serialize, serde::Deserialize)]
pub struct SolverDiagnostics {
    pub max_iterations: usize,
    pub max_residual: f64,
    pub points: usize,
}

impl SolverDiagnostics {
    fn absorb(&mut self, iterations: usize, residual: f64) {
        self.max_iterations = self.max_iterations.max(iterations);
        self.max_residual = self.max_residual.max(residual);
        self.points += 1;
    }

    fn merge(mut self, other: SolverDiagnostics) -> SolverDiagnostics {
        self.max_iterations = self.max_iterations.max(other.max_iterations);
        self.max_residual = self.max_residual.max(other.max_residual);
        self.points += other.points;
        self
    }
}

/// One solved point of a density scan.
struct PointSolve {
    g: Complex64,
    omega: Complex64,
    iterations: usize,
    residual: f64,
}

/// Runs `solve` over grid × {ε}, warm-starting each point from its left
/// neighbor within fixed-size chunks. Chunks execute in parallel; since the
/// chunking is fixed, results are identical for any thread count.
fn scan_grid(
    grid: &[f64],
    eps: f64,
    solve: &(dyn Fn(Complex64, Option<Complex64>) -> Result<PointSolve> + Sync),
) -> Result<(Vec<f64>, SolverDiagnostics)> {
    let chunks: Vec<(Vec<f64>, SolverDiagnostics)> = grid
        .par_chunks(SCAN_CHUNK)
        .map(|chunk| {
            let mut values = Vec::with_capacity(chunk.len());
            let mut diag = SolverDiagnostics::default();
            let mut warm: Option<Complex64> = None;
            for &x in chunk {
                let z = Complex64::new(x, eps);
                let point = solve(z, warm)
                    .map_err(|e| Error::numeric(format!("solve failed at x = {x}: {e}")))?;
                warm = Some(point.omega);
                diag.absorb(point.iterations, point.residual);
                values.push(-point.g.im / std::f64::consts::PI);
            }
            Ok((values, diag))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut values = Vec::with_capacity(grid.len());
    let mut diag = SolverDiagnostics::default();
    for (chunk_values, chunk_diag) in chunks {
        values.extend(chunk_values);
        diag = diag.merge(chunk_diag);
    }
    Ok((values, diag))
}

/// Options for measure-level convolution operations.
#[derive(Debug, Clone)]
pub struct ConvolveOptions {
    /// Output grid; defaults to 2001 uniform points over the summed support.
    pub out_grid: Option<Vec<f64>>,
    /// ε schedule (ε₁ > ε₂); defaults to (4h, 2h) floored by input spacing.
    pub eps: Option<(f64, f64)>,
    pub tol: f64,
    pub max_iter: usize,
    pub aitken: bool,
}

impl Default for ConvolveOptions {
    fn default() -> Self {
        ConvolveOptions {
            out_grid: None,
            eps: None,
            tol: 1e-10,
            max_iter: 20_000,
            aitken: false,
        }
    }
}

/// Uniform grid of `n` points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::invalid(format!("need finite lo < hi, got [{lo}, {hi}]")));
    }
    if n < 2 {
        return Err(Error::invalid("grid needs ≥ 2 points"));
    }
    Ok((0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect())
}

fn reject_non_compact(mu: &Measure, what: &str) -> Result<()> {
    if mu.is_non_compact() {
        return Err(Error::invalid(format!(
            "{what} requires compactly supported measures"
        )));
    }
    Ok(())
}

/// Free additive convolution μ ⊞ ν with solver diagnostics: subordination at
/// each grid point x+iε for two heights ε, then Stieltjes extrapolation.
/// Dirac factors shift exactly without touching the solver.
pub fn free_convolve_with(
    mu: &Measure,
    nu: &Measure,
    opts: &ConvolveOptions,
) -> Result<(Measure, SolverDiagnostics)> {
    reject_non_compact(mu, "free_convolve")?;
    reject_non_compact(nu, "free_convolve")?;
    if let Some(a) = nu.as_dirac() {
        return Ok((mu.shifted(a)?, SolverDiagnostics::default()));
    }
    if let Some(a) = mu.as_dirac() {
        return Ok((nu.shifted(a)?, SolverDiagnostics::default()));
    }
    let radius = mu.support_radius() + nu.support_radius();
    let grid = match &opts.out_grid {
        Some(g) => g.clone(),
        None => linspace(-radius, radius, DEFAULT_OUT_POINTS)?,
    };
    validate_out_grid(&grid)?;
    let (e1, e2) = opts.eps.unwrap_or_else(|| auto_eps(&grid, &[mu, nu]));
    validate_eps_pair(e1, e2)?;
    let me = MeasureEvaluator::new(mu);
    let ne = MeasureEvaluator::new(nu);
    let solve = |z: Complex64, warm: Option<Complex64>| -> Result<PointSolve> {
        let sub = subordinate_evaluators(
            &me,
            &ne,
            z,
            SubordinationOptions {
                tol: opts.tol,
                max_iter: opts.max_iter,
                aitken: opts.aitken,
                warm_start: warm,
            },
        )?;
        Ok(PointSolve {
            g: me.g_at(sub.omega)?,
            omega: sub.omega,
            iterations: sub.iterations,
            residual: sub.residual,
        })
    };
    let (d1, diag1) = scan_grid(&grid, e1, &solve)?;
    let (d2, diag2) = scan_grid(&grid, e2, &solve)?;
    check_consistency(&grid, &d1, &d2)?;
    let values = finalize_density(&grid, extrapolate_slices(&d1, &d2, e1, e2), 1.0)?;
    let out_radius = radius.max(grid[0].abs()).max(grid.last().unwrap().abs());
    let measure = Measure::new(Vec::new(), Some((grid, values)), out_radius)?;
    Ok((measure, diag1.merge(diag2)))
}

/// Free additive convolution μ ⊞ ν (see [`free_convolve_with`]).
pub fn free_convolve(
    mu: &Measure,
    nu: &Measure,
    out_grid: Option<&[f64]>,
    eps: Option<(f64, f64)>,
) -> Result<Measure> {
    let opts = ConvolveOptions {
        out_grid: out_grid.map(<[f64]>::to_vec),
        eps,
        ..ConvolveOptions::default()
    };
    free_convolve_with(mu, nu, &opts).map(|(m, _)| m)
}

/// Free convolution power μ^{⊞t} for t ≥ 1, with diagnostics.
///
/// Solves the semigroup fixed point u(z) = z/t + (1−1/t)·F_μ(u(z)), so that
/// G_{μ^{⊞t}}(z) = G_μ(u(z)) — the analytic continuation of scaling every
/// free cumulant by t. Atoms δ_a of μ persist at t·a with weight
/// t·w − (t−1) while positive; they are recovered by residue extrapolation
/// ŵ = lim ε·(−Im G(t·a+iε)) and their Poisson tails are subtracted from
/// the density slices before inversion.
pub fn convolution_power_with(
    mu: &Measure,
    t: f64,
    opts: &ConvolveOptions,
) -> Result<(Measure, SolverDiagnostics)> {
    if !(t >= 1.0) || !t.is_finite() {
        return Err(Error::invalid(format!("convolution power needs t ≥ 1, got {t}")));
    }
    reject_non_compact(mu, "convolution_power")?;
    if t == 1.0 {
        return Ok((mu.clone(), SolverDiagnostics::default()));
    }
    if let Some(a) = mu.as_dirac() {
        let pos = t * a;
        let m = Measure::new(vec![(pos, 1.0)], None, pos.abs().max(1.0))?;
        return Ok((m, SolverDiagnostics::default()));
    }
    let radius = t * mu.support_radius();
    let grid = match &opts.out_grid {
        Some(g) => g.clone(),
        None => linspace(-radius, radius, DEFAULT_OUT_POINTS)?,
    };
    validate_out_grid(&grid)?;
    let (e1, e2) = opts.eps.unwrap_or_else(|| auto_eps(&grid, &[mu]));
    validate_eps_pair(e1, e2)?;
    let eval = MeasureEvaluator::new(mu);
    let scale = 1.0 - 1.0 / t;
    let solve = |z: Complex64, warm: Option<Complex64>| -> Result<PointSolve> {
        let map = |u: Complex64| -> Result<Complex64> { Ok(z / t + eval.f_at(u)? * scale) };
        let tol_abs = opts.tol * z.norm().max(1.0);
        let floor_im = z.im / t - 1e-12;
        let start = warm.filter(|s| finite(*s) && s.im >= floor_im).unwrap_or(z);
        let (u, iterations, residual) =
            picard_fixed_point(&map, start, floor_im, tol_abs, opts.max_iter, opts.aitken)?;
        Ok(PointSolve { g: eval.g_at(u)?, omega: u, iterations, residual })
    };

    // Residue pass: candidate atoms sit at t·a for each atom a of μ.
    let mut atoms: Vec<(f64, f64)> = Vec::new();
    let mut diag = SolverDiagnostics::default();
    for atom in mu.atoms() {
        let pos = t * atom.x;
        let mut slices = [0.0f64; 2];
        for (slot, eps) in slices.iter_mut().zip([e1, e2]) {
            let point = solve(Complex64::new(pos, eps), None).map_err(|e| {
                Error::numeric(format!("atom residue solve failed at x = {pos}: {e}"))
            })?;
            diag.absorb(point.iterations, point.residual);
            *slot = eps * (-point.g.im);
        }
        let w = ((e1 * slices[1] - e2 * slices[0]) / (e1 - e2)).clamp(0.0, 1.0);
        let stable = slices[0] <= ATOM_SLICE_RATIO * slices[1];
        if w > ATOM_KEEP_THRESHOLD && stable {
            atoms.push((pos, w));
        }
    }

    let (mut d1, diag1) = scan_grid(&grid, e1, &solve)?;
    let (mut d2, diag2) = scan_grid(&grid, e2, &solve)?;
    diag = diag.merge(diag1).merge(diag2);
    // Subtract the recovered atoms' Poisson kernels from each slice so the
    // extrapolated density carries only the absolutely continuous part.
    for (slice, eps) in [(&mut d1, e1), (&mut d2, e2)] {
        for (value, &x) in slice.iter_mut().zip(&grid) {
            for &(pos, w) in &atoms {
                let dx = x - pos;
                *value -= w * eps / (std::f64::consts::PI * (dx * dx + eps * eps));
            }
        }
    }
    check_consistency(&grid, &d1, &d2)?;
    let atom_mass: f64 = atoms.iter().map(|&(_, w)| w).sum();
    let target = (1.0 - atom_mass).max(0.0);
    let density = if target <= 1e-9 {
        None
    } else {
        let values = finalize_density(&grid, extrapolate_slices(&d1, &d2, e1, e2), target)?;
        Some((grid.clone(), values))
    };
    let out_radius = radius
        .max(grid[0].abs())
        .max(grid.last().unwrap().abs())
        .max(atoms.iter().fold(0.0f64, |m, &(p, _)| m.max(p.abs())));
    let measure = Measure::new(atoms, density, out_radius)?;
    Ok((measure, diag))
}

/// Free convolution power μ^{⊞t}, t ≥ 1 (see [`convolution_power_with`]).
pub fn convolution_power(mu: &Measure, t: f64, out_grid: Option<&[f64]>) -> Result<Measure> {
    let opts =
        ConvolveOptions { out_grid: out_grid.map(<[f64]>::to_vec), ..ConvolveOptions::default() };
    convolution_power_with(mu, t, &opts).map(|(m, _)| m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{
        make_arcsine, make_bernoulli, make_cauchy, make_dirac, make_free_poisson,
        make_semicircle, make_two_point,
    };
    use crate::partitions::catalan;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn assert_close(got: Complex64, want: Complex64, tol: f64, what: &str) {
        let err = (got - want).norm();
        assert!(err <= tol, "{what}: got {got}, want {want} (err {err:.3e} > {tol:.1e})");
    }

    /// Deterministic low-tech generator for scattering test points.
    struct SplitMix(u64);

    impl SplitMix {
        fn next_f64(&mut self) -> f64 {
            self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
            let mut z = self.0;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
            ((z ^ (z >> 31)) >> 11) as f64 / (1u64 << 53) as f64
        }

        fn upper_point(&mut self) -> Complex64 {
            c(8.0 * self.next_f64() - 4.0, 3.0 * self.next_f64() + 1e-3)
        }
    }

    fn semicircle_series(z: Complex64, terms: usize) -> Complex64 {
        let mut sum = Complex64::new(0.0, 0.0);
        for k in 0..=terms / 2 {
            let cat: f64 = catalan(k).to_string().parse().unwrap();
            sum += cat / z.powi(2 * k as i32 + 1);
        }
        sum
    }

    #[test]
    fn two_cut_sqrt_behaves_like_z_at_infinity_with_cut_only_on_the_segment() {
        let big = c(3.0e6, 2.0e6);
        let ratio = sqrt_two_cuts(big, -2.0, 2.0) / big;
        assert_close(ratio, c(1.0, 0.0), 1e-10, "asymptotic ratio");
        // Continuous across the real axis outside [a,b]...
        for x in [-5.0, 3.5] {
            let above = sqrt_two_cuts(c(x, 1e-9), -2.0, 2.0);
            let below = sqrt_two_cuts(c(x, -1e-9), -2.0, 2.0);
            assert_close(above, below, 1e-6, "continuity off the cut");
            assert!(above.im.abs() < 1e-6, "real off the cut, got {above}");
        }
        // ...and jumps across it inside.
        let above = sqrt_two_cuts(c(0.5, 1e-9), -2.0, 2.0);
        let below = sqrt_two_cuts(c(0.5, -1e-9), -2.0, 2.0);
        assert!((above - below).norm() > 1.0, "expected a branch jump, got {above} vs {below}");
    }

    #[test]
    fn cauchy_transform_of_a_point_mass_is_the_resolvent() {
        let mu = make_dirac(0.7).unwrap();
        for z in [c(0.0, 1.0), c(2.5, 0.3), c(-4.0, 0.01)] {
            let want = (z - 0.7).inv();
            assert_close(cauchy(&mu, z).unwrap(), want, 1e-15, "atomic resolvent");
            assert_close(
                ClosedForm::Dirac { a: 0.7 }.g_at(z).unwrap(),
                want,
                0.0,
                "closed-form resolvent",
            );
        }
    }

    #[test]
    fn cauchy_transform_of_the_two_point_law_matches_its_rational_form() {
        let mu = make_bernoulli();
        for z in [c(0.0, 1.0), c(1.4, 0.2), c(-0.3, 2.5)] {
            let want = z / (z * z - 1.0);
            assert_close(cauchy(&mu, z).unwrap(), want, 1e-14, "two-point law");
            assert_close(ClosedForm::Bernoulli.g_at(z).unwrap(), want, 1e-15, "closed form");
        }
    }

    #[test]
    fn quadrature_cauchy_transform_matches_the_closed_forms() {
        let semi = make_semicircle(1.0).unwrap();
        let mp = make_free_poisson(1.0).unwrap();
        let points = [c(0.0, 3.0), c(0.0, 2.0), c(0.3, 0.7), c(-1.2, 0.05)];
        for z in points {
            assert_close(
                cauchy(&semi, z).unwrap(),
                ClosedForm::Semicircle { sigma: 1.0 }.g_at(z).unwrap(),
                1e-6,
                "semicircle quadrature",
            );
        }
        // The 1/√x edge forces clustered quadrature; its budget is a touch
        // wider than for the smooth-edged semicircle.
        for z in [c(0.5, 0.2), c(2.0, 1.0), c(-1.0, 0.5)] {
            assert_close(
                cauchy(&mp, z).unwrap(),
                ClosedForm::FreePoisson { lambda: 1.0 }.g_at(z).unwrap(),
                5e-6,
                "free Poisson quadrature",
            );
        }
    }

    #[test]
    fn moment_series_converges_to_the_cauchy_transform_inside_its_disc() {
        let closed = ClosedForm::Semicircle { sigma: 1.0 };
        // Radius-3 point: 24 moment terms are plenty.
        let z = c(0.0, 3.0);
        let err = (semicircle_series(z, 24) - closed.g_at(z).unwrap()).norm();
        assert!(err <= 1e-6, "interior series error {err:.3e}");
        // On the boundary |z| = 2 the same truncation is slow — that is why
        // the tight comparison probes strictly inside the disc.
        let z = c(0.0, 2.0);
        let err = (semicircle_series(z, 24) - closed.g_at(z).unwrap()).norm();
        assert!(
            (1e-3..1e-2).contains(&err),
            "boundary series error should be visible, got {err:.3e}"
        );
    }

    #[test]
    fn transform_evaluation_requires_the_open_upper_half_plane() {
        let mu = make_semicircle(1.0).unwrap();
        for z in [c(1.0, 0.0), c(0.0, -1.0), c(f64::NAN, 1.0)] {
            assert!(matches!(cauchy(&mu, z), Err(Error::Invalid(_))), "accepted {z}");
            assert!(ClosedForm::Bernoulli.g_at(z).is_err());
        }
    }

    #[test]
    fn reciprocal_and_shift_transforms_are_exact_for_the_simple_laws() {
        let z = c(0.4, 1.3);
        // Point mass: H ≡ −a, bit-exact in the closed form.
        assert_eq!(ClosedForm::Dirac { a: 0.7 }.h_at(z).unwrap(), c(-0.7, 0.0));
        let dirac = make_dirac(0.7).unwrap();
        assert_close(htransform(&dirac, z).unwrap(), c(-0.7, 0.0), 1e-13, "atomic H");
        // Two-point law: F = z − 1/z.
        assert_close(f_transform(&make_bernoulli(), z).unwrap(), z - z.inv(), 1e-14, "F");
        assert_close(htransform(&make_bernoulli(), z).unwrap(), -z.inv(), 1e-14, "H");
    }

    #[test]
    fn transforms_map_the_upper_half_plane_correctly() {
        let laws: Vec<(&str, Measure)> = vec![
            ("semicircle", make_semicircle(1.0).unwrap()),
            ("free poisson 1", make_free_poisson(1.0).unwrap()),
            ("free poisson 1/2", make_free_poisson(0.5).unwrap()),
            ("arcsine", make_arcsine().unwrap()),
            ("two-point", make_two_point(-0.5, 1.5, 0.25).unwrap()),
        ];
        let mut rng = SplitMix(7);
        for (name, mu) in &laws {
            let eval = MeasureEvaluator::new(mu);
            for _ in 0..200 {
                let z = rng.upper_point();
                let g = eval.g_at(z).unwrap();
                assert!(g.im < 0.0, "{name}: Im G({z}) = {} not negative", g.im);
                let f = eval.f_at(z).unwrap();
                assert!(
                    f.im >= z.im - 1e-12,
                    "{name}: Im F({z}) = {} below Im z",
                    f.im
                );
            }
        }
        // Equality Im F = Im z holds only for point masses.
        let dirac = MeasureEvaluator::new(&make_dirac(1.0).unwrap());
        let z = c(0.3, 0.9);
        assert!((dirac.f_at(z).unwrap().im - z.im).abs() < 1e-14);
    }

    #[test]
    fn cauchy_transform_has_unit_mass_decay_far_from_the_support() {
        let laws = [
            make_semicircle(1.0).unwrap(),
            make_free_poisson(1.0).unwrap(),
            make_free_poisson(2.5).unwrap(),
            make_arcsine().unwrap(),
            make_bernoulli(),
            make_cauchy(40.0).unwrap(),
        ];
        for mu in &laws {
            let y = 1e3 * mu.support_radius();
            let z = c(0.0, y);
            let probe = (z * cauchy(mu, z).unwrap() - 1.0).norm();
            assert!(probe <= 1e-3, "decay probe {probe:.3e} at y = {y}");
        }
    }

    #[test]
    fn r_series_of_the_standard_laws_matches_their_cumulants() {
        let semi = r_transform_series(&make_semicircle(1.0).unwrap(), 6).unwrap();
        let want = [0.0, 1.0, 0.0, 0.0, 0.0, 0.0];
        for (k, (got, want)) in semi.iter().zip(want).enumerate() {
            assert!((got - want).abs() <= 1e-4, "semicircle κ_{}: {got}", k + 1);
        }
        let mp = r_transform_series(&make_free_poisson(1.0).unwrap(), 6).unwrap();
        for (k, got) in mp.iter().enumerate() {
            assert!((got - 1.0).abs() <= 2e-3, "free Poisson κ_{}: {got}", k + 1);
        }
        // Atomic laws have exact moments, so their cumulants are exact too:
        // the centered two-point law has κ = 0, 1, 0, −1, 0, 2.
        let coin = r_transform_series(&make_bernoulli(), 6).unwrap();
        let want = [0.0, 1.0, 0.0, -1.0, 0.0, 2.0];
        for (k, (got, want)) in coin.iter().zip(want).enumerate() {
            assert!((got - want).abs() <= 1e-10, "two-point κ_{}: {got}", k + 1);
        }
        assert!(matches!(
            r_transform_series(&make_bernoulli(), MAX_R_SERIES_ORDER + 1),
            Err(Error::Invalid(_))
        ));
        assert!(matches!(
            r_transform_series(&make_cauchy(40.0).unwrap(), 4),
            Err(Error::Invalid(_))
        ));
    }

    #[test]
    fn stieltjes_inversion_recovers_the_arcsine_density() {
        let grid = linspace(-2.0, 2.0, 2001).unwrap();
        // Schedule intentionally unsorted: the two smallest values are used.
        let mu = stieltjes_invert(&ClosedForm::Arcsine, &grid, &[0.002, 0.016, 0.004]).unwrap();
        let mass = trapezoid(mu.density_grid(), mu.density_values());
        assert!((mass - 1.0).abs() <= 1e-9, "mass {mass}");
        let mut sup = 0.0f64;
        for (x, d) in mu.density_grid().iter().zip(mu.density_values()) {
            if x.abs() <= 1.8 {
                let want = 1.0 / (std::f64::consts::PI * (4.0 - x * x).sqrt());
                sup = sup.max((d - want).abs());
            }
        }
        assert!(sup <= 5e-3, "sup error {sup:.3e} on |x| ≤ 1.8");
    }

    #[test]
    fn stieltjes_inversion_renormalizes_truncated_heavy_tails() {
        let grid = linspace(-50.0, 50.0, 2001).unwrap();
        let mu = stieltjes_invert(&ClosedForm::Cauchy, &grid, &[0.04, 0.02]).unwrap();
        let captured = 2.0 * 50.0f64.atan() / std::f64::consts::PI;
        for (x, d) in mu.density_grid().iter().zip(mu.density_values()) {
            if x.abs() <= 5.0 {
                let want = 1.0 / (std::f64::consts::PI * (1.0 + x * x));
                assert!(
                    (d * captured - want).abs() <= 1e-3,
                    "density at {x}: {d} (captured mass {captured})"
                );
            }
        }
    }

    #[test]
    fn stieltjes_inversion_refuses_a_pure_point_mass() {
        let grid = linspace(-1.0, 1.0, 801).unwrap();
        let err = stieltjes_invert(&ClosedForm::Dirac { a: 0.0 }, &grid, &[0.02, 0.01])
            .unwrap_err();
        assert!(matches!(err, Error::Numeric(_)));
        assert!(err.to_string().contains("atomic"), "message: {err}");
    }

    #[test]
    fn stieltjes_inversion_validates_the_eps_schedule() {
        let grid = linspace(-1.0, 1.0, 64).unwrap();
        let g = ClosedForm::Semicircle { sigma: 0.4 };
        assert!(matches!(stieltjes_invert(&g, &grid, &[0.01]), Err(Error::Invalid(_))));
        assert!(matches!(
            stieltjes_invert(&g, &grid, &[0.01, -0.02]),
            Err(Error::Invalid(_))
        ));
        assert!(matches!(
            stieltjes_invert(&g, &grid, &[0.01, 0.01]),
            Err(Error::Invalid(_))
        ));
        assert!(matches!(stieltjes_invert(&g, &[0.0, 1.0], &[0.02, 0.01]), Err(Error::Invalid(_))));
    }

    #[test]
    fn subordination_against_a_point_mass_converges_immediately() {
        let semi = MeasureEvaluator::new(&make_semicircle(1.0).unwrap());
        let z = c(0.3, 1.1);
        let res = subordinate_evaluators(
            &semi,
            &ClosedForm::Dirac { a: 0.7 },
            z,
            SubordinationOptions::default(),
        )
        .unwrap();
        assert_eq!(res.omega, z - 0.7, "constant H short-circuits the iteration");
        assert!(res.iterations <= 4, "iterations {}", res.iterations);
        assert_eq!(res.residual, 0.0);
        // Same story through the gridless atomic measure, up to rounding.
        let dirac = make_dirac(0.7).unwrap();
        let res = subordinate(&make_semicircle(1.0).unwrap(), &dirac, z, 1e-12, 100).unwrap();
        assert_close(res.omega, z - 0.7, 1e-12, "measure-backed point mass");
    }

    #[test]
    fn subordination_for_two_coin_flips_hits_the_known_fixed_point() {
        let z = c(0.0, 3.0);
        let want = c(0.0, (3.0 + 13.0f64.sqrt()) / 2.0);
        let coin = make_bernoulli();
        let res = subordinate(&coin, &coin, z, 1e-12, 1000).unwrap();
        assert_close(res.omega, want, 1e-9, "ω(3i)");
        assert!(res.residual <= 1e-12 * 3.0);
        assert!(res.omega.im >= z.im - 1e-12);
        let eval = ClosedForm::Bernoulli;
        let closed = subordinate_evaluators(&eval, &eval, z, SubordinationOptions::default())
            .unwrap();
        assert_close(closed.omega, want, 1e-9, "closed-form ω(3i)");
        // Aitken acceleration must land on the same fixed point.
        let fast = subordinate_evaluators(
            &eval,
            &eval,
            z,
            SubordinationOptions { aitken: true, ..SubordinationOptions::default() },
        )
        .unwrap();
        assert_close(fast.omega, want, 1e-9, "accelerated ω(3i)");
    }

    #[test]
    fn subordination_against_the_cauchy_law_shifts_by_i_exactly() {
        let semi = MeasureEvaluator::new(&make_semicircle(1.0).unwrap());
        let z = c(0.3, 0.45);
        let res =
            subordinate_evaluators(&semi, &ClosedForm::Cauchy, z, SubordinationOptions::default())
                .unwrap();
        assert_eq!(res.omega, z + Complex64::i(), "H ≡ i is exact");
        // The windowed, renormalized grid version only approximates this.
        let truncated = make_cauchy(40.0).unwrap();
        let res = subordinate(&make_semicircle(1.0).unwrap(), &truncated, z, 1e-10, 2000).unwrap();
        assert_close(res.omega, z + Complex64::i(), 0.05, "truncated Cauchy tail");
    }

    #[test]
    fn subordination_respects_the_iteration_budget() {
        let coin = make_bernoulli();
        let err = subordinate(&coin, &coin, c(1.999, 1e-4), 1e-13, 3).unwrap_err();
        assert!(matches!(err, Error::Numeric(_)));
        assert!(err.to_string().contains("converge"), "message: {err}");
    }

    #[test]
    fn omega_grows_like_z_far_from_the_support() {
        let coin = make_bernoulli();
        let z = c(0.0, 1e4);
        let res = subordinate(&coin, &coin, z, 1e-12, 200).unwrap();
        assert!((res.omega / z - 1.0).norm() <= 1e-3, "ω(iy)/iy = {}", res.omega / z);
    }

    #[test]
    fn free_convolution_of_two_semicircles_is_the_wider_semicircle() {
        let semi = make_semicircle(1.0).unwrap();
        let grid = linspace(-2.9, 2.9, 1201).unwrap();
        let (sum, diag) = free_convolve_with(
            &semi,
            &semi,
            &ConvolveOptions { out_grid: Some(grid), ..ConvolveOptions::default() },
        )
        .unwrap();
        let m = moments_of_measure(&sum, 4).unwrap();
        assert!((m[0]).abs() <= 1e-3, "m₁ = {}", m[0]);
        assert!((m[1] - 2.0).abs() <= 1e-3, "m₂ = {}", m[1]);
        assert!((m[3] - 8.0).abs() <= 1e-2 * 8.0, "m₄ = {}", m[3]);
        // Pointwise: σ² doubles, the shape stays semicircular.
        let wider = ClosedForm::Semicircle { sigma: std::f64::consts::SQRT_2 };
        for (x, d) in sum.density_grid().iter().zip(sum.density_values()) {
            if x.abs() <= 2.6 {
                let want = -wider.g_at(c(*x, 1e-9)).unwrap().im / std::f64::consts::PI;
                assert!((d - want).abs() <= 2e-3, "density at {x}: {d} vs {want}");
            }
        }
        assert!(diag.max_iterations >= 2);
        assert!(diag.max_residual <= 1e-9);
        assert_eq!(diag.points, 2 * 1201);
    }

    #[test]
    fn free_convolution_shifts_exactly_when_one_factor_is_a_point_mass() {
        let semi = make_semicircle(1.0).unwrap();
        let shifted = free_convolve(&semi, &make_dirac(0.7).unwrap(), None, None).unwrap();
        let direct = semi.shifted(0.7).unwrap();
        assert_eq!(shifted.density_grid(), direct.density_grid());
        assert_eq!(shifted.density_values(), direct.density_values());
        // Order does not matter for the shortcut either.
        let other = free_convolve(&make_dirac(0.7).unwrap(), &semi, None, None).unwrap();
        assert_eq!(other.density_grid(), direct.density_grid());
        // Two point masses add their positions.
        let two = free_convolve(
            &make_dirac(0.25).unwrap(),
            &make_dirac(-1.5).unwrap(),
            None,
            None,
        )
        .unwrap();
        assert_eq!(two.as_dirac(), Some(-1.25));
    }

    #[test]
    fn free_convolution_of_two_coin_flips_is_the_arcsine_law() {
        let coin = make_bernoulli();
        let grid = linspace(-2.0, 2.0, 4001).unwrap();
        // Atomic inputs have exact transforms, so the slice heights can sit
        // well below the default grid-tied schedule; the edge mismatch of the
        // smoothed 1/√ singularities shrinks like √ε. Down there the Picard
        // map is only marginally contractive (|ω| → 1 on the support), which
        // is exactly the regime the Δ² acceleration exists for.
        let (sum, _) = free_convolve_with(
            &coin,
            &coin,
            &ConvolveOptions {
                out_grid: Some(grid),
                eps: Some((4e-4, 2e-4)),
                aitken: true,
                ..ConvolveOptions::default()
            },
        )
        .unwrap();
        // L¹ distance against the closed-form density, edges included via
        // their finite grid neighbors.
        let mut diff = Vec::with_capacity(sum.density_grid().len());
        for (x, d) in sum.density_grid().iter().zip(sum.density_values()) {
            let want = if x.abs() < 2.0 {
                1.0 / (std::f64::consts::PI * (4.0 - x * x).sqrt())
            } else {
                *d // endpoints x = ±2 carry no width in the L¹ sum
            };
            diff.push((d - want).abs());
        }
        let l1 = trapezoid(sum.density_grid(), &diff);
        assert!(l1 <= 1e-2, "L¹ distance {l1:.4}");
    }

    #[test]
    fn free_convolution_is_commutative_and_agrees_with_the_cumulant_pipeline() {
        let semi = make_semicircle(1.0).unwrap();
        let mp = make_free_poisson(1.0).unwrap();
        let grid = linspace(-2.2, 6.2, 1201).unwrap();
        let ab = free_convolve(&semi, &mp, Some(&grid), None).unwrap();
        let ba = free_convolve(&mp, &semi, Some(&grid), None).unwrap();
        let m_ab = moments_of_measure(&ab, 6).unwrap();
        let m_ba = moments_of_measure(&ba, 6).unwrap();
        // Cumulants add freely: κ(semicircle) + κ(free Poisson) per order.
        let kappa: Vec<f64> =
            vec![0.0 + 1.0, 1.0 + 1.0, 0.0 + 1.0, 0.0 + 1.0, 0.0 + 1.0, 0.0 + 1.0];
        let m_pipeline = crate::cumulants::moments_from_cumulants(&kappa).unwrap();
        for k in 0..6 {
            let scale = m_pipeline[k].abs().max(1.0);
            assert!(
                (m_ab[k] - m_ba[k]).abs() <= 1e-3 * scale,
                "commutativity at order {}: {} vs {}",
                k + 1,
                m_ab[k],
                m_ba[k]
            );
            assert!(
                (m_ab[k] - m_pipeline[k]).abs() <= 2e-3 * scale,
                "pipeline at order {}: {} vs {}",
                k + 1,
                m_ab[k],
                m_pipeline[k]
            );
        }
    }

    #[test]
    fn convolution_power_at_t_equal_one_is_the_identity() {
        let mp = make_free_poisson(0.5).unwrap();
        let same = convolution_power(&mp, 1.0, None).unwrap();
        assert_eq!(same.density_grid(), mp.density_grid());
        assert_eq!(same.density_values(), mp.density_values());
        assert_eq!(same.atoms(), mp.atoms());
    }

    #[test]
    fn convolution_power_of_the_coin_flip_follows_the_closed_form_family() {
        let coin = make_bernoulli();
        // t = 2 is the arcsine law: purely continuous, atoms gone.
        let grid = linspace(-2.0, 2.0, 2001).unwrap();
        let arcsine = convolution_power(&coin, 2.0, Some(&grid)).unwrap();
        assert!(arcsine.atoms().is_empty(), "atoms vanish at t = 2");
        let mut sup = 0.0f64;
        for (x, d) in arcsine.density_grid().iter().zip(arcsine.density_values()) {
            if x.abs() <= 1.8 {
                let want = 1.0 / (std::f64::consts::PI * (4.0 - x * x).sqrt());
                sup = sup.max((d - want).abs());
            }
        }
        assert!(sup <= 1e-2, "t = 2 sup error {sup:.3e}");
        // t = 3: match the closed-form transform of the same family.
        let grid = linspace(-3.0, 3.0, 2001).unwrap();
        let cubed = convolution_power(&coin, 3.0, Some(&grid)).unwrap();
        assert!(cubed.atoms().is_empty(), "atoms vanish for t ≥ 2");
        let closed = ClosedForm::BernoulliPower { t: 3.0 };
        let mut sup = 0.0f64;
        for (x, d) in cubed.density_grid().iter().zip(cubed.density_values()) {
            if x.abs() <= 2.7 {
                let want = -closed.g_at(c(*x, 1e-9)).unwrap().im / std::f64::consts::PI;
                sup = sup.max((d - want).abs());
            }
        }
        assert!(sup <= 1e-2, "t = 3 sup error {sup:.3e}");
        // t = 3/2: atoms survive at ±t with weight (2−t)/2 = 1/4.
        let grid = linspace(-1.6, 1.6, 2001).unwrap();
        let (mid, diag) = convolution_power_with(
            &coin,
            1.5,
            &ConvolveOptions { out_grid: Some(grid), ..ConvolveOptions::default() },
        )
        .unwrap();
        assert_eq!(mid.atoms().len(), 2);
        for atom in mid.atoms() {
            assert!((atom.x.abs() - 1.5).abs() <= 1e-12, "atom at {}", atom.x);
            assert!((atom.w - 0.25).abs() <= 5e-3, "atom weight {}", atom.w);
        }
        assert!((mid.mass() - 1.0).abs() <= 1e-9);
        let closed = ClosedForm::BernoulliPower { t: 1.5 };
        for (x, d) in mid.density_grid().iter().zip(mid.density_values()) {
            if x.abs() <= 1.3 {
                let want = -closed.g_at(c(*x, 1e-9)).unwrap().im / std::f64::consts::PI;
                assert!((d - want).abs() <= 1e-2, "t = 3/2 density at {x}: {d} vs {want}");
            }
        }
        assert!(diag.points > 0);
        assert!(diag.max_residual <= 1e-9);
    }

    #[test]
    fn convolution_power_rejects_invalid_exponents_and_supports() {
        let coin = make_bernoulli();
        assert!(matches!(convolution_power(&coin, 0.5, None), Err(Error::Invalid(_))));
        assert!(matches!(convolution_power(&coin, f64::NAN, None), Err(Error::Invalid(_))));
        assert!(matches!(
            convolution_power(&make_cauchy(40.0).unwrap(), 2.0, None),
            Err(Error::Invalid(_))
        ));
        let bad_grid = [1.0, 0.5, 2.0];
        assert!(matches!(
            convolution_power(&coin, 2.0, Some(&bad_grid)),
            Err(Error::Invalid(_))
        ));
    }

    #[test]
    fn convolution_options_validate_the_eps_pair() {
        let coin = make_bernoulli();
        let err = free_convolve(&coin, &coin, None, Some((0.01, 0.02))).unwrap_err();
        assert!(matches!(err, Error::Invalid(_)));
        assert!(err.to_string().contains('ε'), "message: {err}");
    }

    #[test]
    fn point_mass_powers_scale_their_position() {
        let scaled = convolution_power(&make_dirac(-0.4).unwrap(), 3.0, None).unwrap();
        assert_eq!(scaled.as_dirac(), Some(-0.4 * 3.0));
    }
}

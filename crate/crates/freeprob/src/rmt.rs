//! Random-matrix Monte Carlo harness: samplers (GUE, Wigner, Haar unitary,
//! deterministic matrices built from a measure's quantiles), Hermitian
//! spectra, averaged trace moments with jackknife error bars, the exact
//! genus expansion for GUE moments, and the spectra of rotated/shifted sums
//! whose limits are free convolutions.
//!
//! Reproducibility: every trial draws from its own counter-derived
//! substream of the seed, and reductions use fixed-shape pairwise sums, so
//! results are bit-identical no matter how many threads run.

use faer::complex_native::c64;
use faer::{Mat, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::measures::{CdfTable, Histogram};
use crate::partitions::{enumerate_pairings, gamma_pi_orbits};
use crate::{Error, Measure, Result};

/// Largest trace-moment order for the exact genus expansion.
pub const MAX_GENUS_ORDER: usize = 14;
/// Hermiticity defect allowed on matrix construction.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;
/// Unitarity defect allowed when validating sampled unitaries.
pub const UNITARY_TOLERANCE: f64 = 1e-10;
/// Rough floating-op ceiling for a Monte Carlo run (trials · words · N³).
pub const MC_FLOP_BUDGET: f64 = 5e12;
/// Word letters index per-trial matrix substreams, which are one byte wide.
pub const MAX_WORD_LETTER: usize = 255;

/// Size, repetition, seeding, and threading of a Monte Carlo experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimulationConfig {
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub parallel: bool,
}

impl SimulationConfig {
    pub fn new(n: usize, trials: usize, seed: u64) -> Result<SimulationConfig> {
        let cfg = SimulationConfig { n, trials, seed, parallel: true };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::invalid(format!("matrix size must be ≥ 2, got {}", self.n)));
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials must be ≥ 1"));
        }
        Ok(())
    }

    fn budget(&self, words: usize) -> Result<()> {
        let cost = self.trials as f64 * words.max(1) as f64 * (self.n as f64).powi(3);
        if cost > MC_FLOP_BUDGET {
            return Err(Error::invalid(format!(
                "compute budget exceeded: trials·words·N³ ≈ {cost:.2e} > {MC_FLOP_BUDGET:.0e}; \
                 shrink --n or --trials"
            )));
        }
        Ok(())
    }
}

/// The substream for matrix number `matrix_idx` of trial `trial`: same seed,
/// counter-selected stream, so trials can be generated in any order (or in
/// parallel) with identical results.
fn substream(seed: u64, trial: usize, matrix_idx: usize) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(((trial as u64) << 8) | matrix_idx as u64);
    rng
}

fn conj(v: c64) -> c64 {
    c64::new(v.re, -v.im)
}

fn modulus(v: c64) -> f64 {
    v.re.hypot(v.im)
}

/// N×N complex Hermitian matrix (A = A*, enforced on construction).
#[derive(Debug, Clone)]
pub struct HermitianMatrix {
    mat: Mat<c64>,
}

impl HermitianMatrix {
    /// Validating constructor: square and A = A* within 1e−12 entrywise.
    pub fn from_mat(mat: Mat<c64>) -> Result<HermitianMatrix> {
        if mat.nrows() != mat.ncols() || mat.nrows() == 0 {
            return Err(Error::invalid("Hermitian matrix must be square and nonempty"));
        }
        let m = HermitianMatrix { mat };
        let defect = m.hermiticity_defect();
        if !(defect <= HERMITIAN_TOLERANCE) {
            return Err(Error::invalid(format!(
                "matrix is not Hermitian: max |A − A*| entry is {defect:.3e}"
            )));
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn as_mat(&self) -> &Mat<c64> {
        &self.mat
    }

    /// max_{ij} |A_ij − conj(A_ji)|.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.mat.nrows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let d = self.mat.read(i, j) - conj(self.mat.read(j, i));
                worst = worst.max(modulus(d));
            }
        }
        worst
    }
}

/// N×N complex unitary matrix. Construction from raw entries checks the
/// O(N³) invariant UU* = 1; the Haar sampler produces Q-factors that satisfy
/// it by construction and exposes the same check to the tests.
#[derive(Debug, Clone)]
pub struct UnitaryMatrix {
    mat: Mat<c64>,
}

impl UnitaryMatrix {
    pub fn from_mat(mat: Mat<c64>) -> Result<UnitaryMatrix> {
        if mat.nrows() != mat.ncols() || mat.nrows() == 0 {
            return Err(Error::invalid("unitary matrix must be square and nonempty"));
        }
        let u = UnitaryMatrix { mat };
        let defect = u.unitarity_defect();
        if !(defect <= UNITARY_TOLERANCE) {
            return Err(Error::invalid(format!(
                "matrix is not unitary: max |UU* − 1| entry is {defect:.3e}"
            )));
        }
        Ok(u)
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn as_mat(&self) -> &Mat<c64> {
        &self.mat
    }

    /// max entry of |UU* − 1|.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.mat.nrows();
        let prod = &self.mat * self.mat.adjoint();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) };
                worst = worst.max(modulus(prod.read(i, j) - want));
            }
        }
        worst
    }
}

fn draw_normal(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// GUE sample: diagonal real N(0, 1/N); off-diagonal (x+iy)/√(2N) with
/// x, y independent standard normals; Hermitian by construction, so the
/// entry covariance is E[a_ij a_kl] = δ_il δ_jk / N.
pub fn sample_gue(n: usize, rng: &mut impl Rng) -> Result<HermitianMatrix> {
    if n < 2 {
        return Err(Error::invalid(format!("matrix size must be ≥ 2, got {n}")));
    }
    let diag_scale = 1.0 / (n as f64).sqrt();
    let off_scale = 1.0 / (2.0 * n as f64).sqrt();
    let mut mat = Mat::<c64>::zeros(n, n);
    for i in 0..n {
        mat.write(i, i, c64::new(draw_normal(rng) * diag_scale, 0.0));
        for j in (i + 1)..n {
            let v = c64::new(draw_normal(rng) * off_scale, draw_normal(rng) * off_scale);
            mat.write(i, j, v);
            mat.write(j, i, conj(v));
        }
    }
    Ok(HermitianMatrix { mat })
}

/// Wigner sample: i.i.d. real entries from `entry` on the diagonal and
/// lower triangle, mirrored for symmetry, scaled by 1/√N. The entry law
/// must be centered (caller's responsibility).
pub fn sample_wigner<R: Rng, F: FnMut(&mut R) -> f64>(
    n: usize,
    entry: &mut F,
    rng: &mut R,
) -> Result<HermitianMatrix> {
    if n < 2 {
        return Err(Error::invalid(format!("matrix size must be ≥ 2, got {n}")));
    }
    let scale = 1.0 / (n as f64).sqrt();
    let mut mat = Mat::<c64>::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = c64::new(entry(rng) * scale, 0.0);
            mat.write(i, j, v);
            mat.write(j, i, v);
        }
    }
    Ok(HermitianMatrix { mat })
}

/// Haar-distributed unitary: QR of an i.i.d. complex-Gaussian (Ginibre)
/// matrix with the R-diagonal phases multiplied back into Q's columns.
/// Without that correction the Householder convention forces every R_kk
/// real-positive, which biases Q (E[tr Q] ≠ 0); the phase fix restores
/// translation invariance. A zero R_kk (probability zero) triggers one
/// resample before giving up.
pub fn sample_haar_unitary(n: usize, rng: &mut impl Rng) -> Result<UnitaryMatrix> {
    if n < 2 {
        return Err(Error::invalid(format!("matrix size must be ≥ 2, got {n}")));
    }
    for attempt in 0..2 {
        let mut g = Mat::<c64>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                g.write(i, j, c64::new(draw_normal(rng), draw_normal(rng)));
            }
        }
        let qr = g.qr();
        let q = qr.compute_thin_q();
        let r = qr.compute_thin_r();
        let mut phases = Vec::with_capacity(n);
        let mut degenerate = false;
        for k in 0..n {
            let d = r.read(k, k);
            let len = modulus(d);
            if len < f64::MIN_POSITIVE {
                degenerate = true;
                break;
            }
            phases.push(c64::new(d.re / len, d.im / len));
        }
        if degenerate {
            if attempt == 0 {
                continue;
            }
            return Err(Error::numeric("QR of the Gaussian sample was degenerate twice"));
        }
        let mat = Mat::from_fn(n, n, |i, j| q.read(i, j) * phases[j]);
        return Ok(UnitaryMatrix { mat });
    }
    unreachable!("loop returns on every path")
}

/// The N measure quantiles F⁻¹((j−½)/N), j = 1..N — the diagonal of the
/// deterministic matrix whose empirical spectral distribution approximates
/// μ. Values landing within rounding of an atom snap to it exactly.
pub fn measure_quantiles(mu: &Measure, n: usize) -> Result<Vec<f64>> {
    if mu.is_non_compact() {
        return Err(Error::invalid("quantile matrices require compact support"));
    }
    if n == 0 {
        return Err(Error::invalid("need at least one quantile"));
    }
    let cdf = mu.cdf_table();
    let snap = 1e-9 * mu.support_radius().max(1.0);
    let mut out = Vec::with_capacity(n);
    for j in 1..=n {
        let p = (j as f64 - 0.5) / n as f64;
        let mut q = cdf.quantile(p)?;
        if let Some(atom) = mu.atoms().iter().find(|a| (a.x - q).abs() <= snap) {
            q = atom.x;
        }
        out.push(q);
    }
    Ok(out)
}

/// Diagonal Hermitian matrix of the N measure quantiles; its empirical
/// eigenvalue distribution converges to μ as N grows.
pub fn deterministic_from_measure(mu: &Measure, n: usize) -> Result<HermitianMatrix> {
    if n < 2 {
        return Err(Error::invalid(format!("matrix size must be ≥ 2, got {n}")));
    }
    let quantiles = measure_quantiles(mu, n)?;
    let mut mat = Mat::<c64>::zeros(n, n);
    for (j, q) in quantiles.iter().enumerate() {
        mat.write(j, j, c64::new(*q, 0.0));
    }
    Ok(HermitianMatrix { mat })
}

/// All N eigenvalues of a Hermitian matrix, ascending.
pub fn eigenvalues_hermitian(a: &HermitianMatrix) -> Result<Vec<f64>> {
    let defect = a.hermiticity_defect();
    if !(defect <= HERMITIAN_TOLERANCE) {
        return Err(Error::invalid(format!(
            "matrix is not Hermitian: max |A − A*| entry is {defect:.3e}"
        )));
    }
    let mut eigs: Vec<f64> = a.as_mat().selfadjoint_eigenvalues(Side::Lower);
    eigs.sort_by(f64::total_cmp);
    Ok(eigs)
}

/// Exact GUE trace moment E[tr(A^m)] at size N via the genus expansion:
/// Σ over pairings π of {1..m} of N^{#(γπ)−1−m/2}, where γ is the long
/// cycle. Non-crossing pairings contribute exponent 0; each crossing costs
/// an even power of 1/N.
pub fn genus_expansion_exact(m: usize, n: usize) -> Result<f64> {
    if m == 0 || m % 2 != 0 || m > MAX_GENUS_ORDER {
        return Err(Error::invalid(format!(
            "genus expansion needs even m in 2..={MAX_GENUS_ORDER}, got {m}"
        )));
    }
    if n == 0 {
        return Err(Error::invalid("matrix size must be ≥ 1"));
    }
    let mut total = 0.0;
    for pairing in enumerate_pairings(m, false)? {
        let exponent = gamma_pi_orbits(&pairing) as i32 - 1 - (m / 2) as i32;
        total += (n as f64).powi(exponent);
    }
    Ok(total)
}

/// Fixed-shape pairwise sum: the bracketing depends only on the length, so
/// the result is independent of how the values were produced.
fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1..=8 => xs.iter().sum(),
        len => {
            let mid = len / 2;
            pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
        }
    }
}

/// A Monte Carlo average with its jackknife standard error.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MomentEstimate {
    pub mean: f64,
    /// Jackknife standard error of the mean; 0 when only one trial ran.
    pub stderr: f64,
}

/// Leave-one-out jackknife of the sample mean.
fn jackknife(values: &[f64]) -> MomentEstimate {
    let k = values.len();
    let mean = pairwise_sum(values) / k as f64;
    if k < 2 {
        return MomentEstimate { mean, stderr: 0.0 };
    }
    // For the mean, the leave-one-out replicates are θ_i = (S−x_i)/(k−1),
    // so the jackknife variance collapses to Σ(x_i−mean)²/(k(k−1)).
    let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let stderr = (pairwise_sum(&sq) / (k as f64 * (k - 1) as f64)).sqrt();
    MomentEstimate { mean, stderr }
}

/// Runs `trial` over 0..trials, optionally in parallel; the output vector is
/// indexed by trial, so scheduling cannot reorder it.
fn run_trials<T, F>(cfg: &SimulationConfig, trial: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    if cfg.parallel {
        (0..cfg.trials).into_par_iter().map(&trial).collect()
    } else {
        (0..cfg.trials).map(&trial).collect()
    }
}

/// Largest spectral-moment order the Monte Carlo estimators accept.
pub const MAX_MC_MOMENT_ORDER: usize = 64;

/// Normalized spectral moments tr(A^m)/N for m = 1..=max_m from a computed
/// spectrum, each power accumulated with the fixed-shape pairwise sum.
fn spectral_moments(eigs: &[f64], max_m: usize) -> Vec<f64> {
    let n = eigs.len() as f64;
    let mut powers = vec![1.0f64; eigs.len()];
    (1..=max_m)
        .map(|_| {
            for (p, l) in powers.iter_mut().zip(eigs) {
                *p *= l;
            }
            pairwise_sum(&powers) / n
        })
        .collect()
}

fn check_moment_order(max_m: usize) -> Result<()> {
    if max_m == 0 || max_m > MAX_MC_MOMENT_ORDER {
        return Err(Error::invalid(format!(
            "moment order must lie in 1..={MAX_MC_MOMENT_ORDER}, got {max_m}"
        )));
    }
    Ok(())
}

/// Jackknife of each column of a per-trial table of statistics.
fn jackknife_columns(rows: &[Vec<f64>]) -> Vec<MomentEstimate> {
    let cols = rows.first().map_or(0, Vec::len);
    (0..cols)
        .map(|j| {
            let column: Vec<f64> = rows.iter().map(|r| r[j]).collect();
            jackknife(&column)
        })
        .collect()
}

/// Monte Carlo estimates of the GUE trace moments E[tr(A^m)] for every
/// m = 1..=max_m, from one eigenvalue sweep per trial.
pub fn gue_moments_mc(max_m: usize, cfg: &SimulationConfig) -> Result<Vec<MomentEstimate>> {
    cfg.validate()?;
    cfg.budget(1)?;
    check_moment_order(max_m)?;
    let rows = run_trials(cfg, |trial| {
        let mut rng = substream(cfg.seed, trial, 0);
        let a = sample_gue(cfg.n, &mut rng)?;
        let eigs = eigenvalues_hermitian(&a)?;
        Ok(spectral_moments(&eigs, max_m))
    })?;
    Ok(jackknife_columns(&rows))
}

/// Monte Carlo estimate of the single GUE trace moment E[tr(A^m)].
pub fn gue_moment_mc(m: usize, cfg: &SimulationConfig) -> Result<MomentEstimate> {
    let mut all = gue_moments_mc(m, cfg)?;
    Ok(all.pop().expect("batch holds m entries"))
}

/// Entry law for real Wigner matrices; both choices are centered with unit
/// variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WignerEntries {
    Gaussian,
    Rademacher,
}

impl WignerEntries {
    fn draw(self, rng: &mut impl Rng) -> f64 {
        match self {
            WignerEntries::Gaussian => draw_normal(rng),
            WignerEntries::Rademacher => {
                if rng.gen::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }
}

/// Monte Carlo estimates of real Wigner trace moments E[tr(A^m)] for
/// m = 1..=max_m under the chosen entry law.
pub fn wigner_moments_mc(
    max_m: usize,
    entries: WignerEntries,
    cfg: &SimulationConfig,
) -> Result<Vec<MomentEstimate>> {
    cfg.validate()?;
    cfg.budget(1)?;
    check_moment_order(max_m)?;
    let rows = run_trials(cfg, |trial| {
        let mut rng = substream(cfg.seed, trial, 0);
        let mut entry = |r: &mut ChaCha12Rng| entries.draw(r);
        let a = sample_wigner(cfg.n, &mut entry, &mut rng)?;
        let eigs = eigenvalues_hermitian(&a)?;
        Ok(spectral_moments(&eigs, max_m))
    })?;
    Ok(jackknife_columns(&rows))
}

/// Monte Carlo estimates of Haar-unitary trace moments tr(U^k) for
/// k = 1..=max_k, as (real part, imaginary part) estimate pairs. All of
/// them vanish in expectation.
pub fn haar_traces_mc(
    max_k: usize,
    cfg: &SimulationConfig,
) -> Result<Vec<(MomentEstimate, MomentEstimate)>> {
    cfg.validate()?;
    check_moment_order(max_k)?;
    cfg.budget(max_k)?;
    let rows = run_trials(cfg, |trial| {
        let mut rng = substream(cfg.seed, trial, 0);
        let u = sample_haar_unitary(cfg.n, &mut rng)?;
        let mut row = Vec::with_capacity(2 * max_k);
        let mut power = u.as_mat().clone();
        for k in 1..=max_k {
            let mut t = c64::new(0.0, 0.0);
            for i in 0..cfg.n {
                t = t + power.read(i, i);
            }
            row.push(t.re / cfg.n as f64);
            row.push(t.im / cfg.n as f64);
            if k < max_k {
                power = &power * u.as_mat();
            }
        }
        Ok(row)
    })?;
    let flat = jackknife_columns(&rows);
    Ok(flat.chunks_exact(2).map(|pair| (pair[0], pair[1])).collect())
}

/// Monte Carlo estimate of a mixed moment E[tr(A_{w₁} A_{w₂} ⋯ A_{w_m})]
/// over independent GUE matrices indexed by the word's letters (1-based).
/// The expectation is real; the imaginary part of each sampled trace is
/// rounding noise and is dropped.
pub fn mixed_gue_moment_mc(word: &[usize], cfg: &SimulationConfig) -> Result<MomentEstimate> {
    cfg.validate()?;
    if word.is_empty() {
        return Err(Error::invalid("word must not be empty"));
    }
    if word.iter().any(|&l| l == 0 || l > MAX_WORD_LETTER) {
        return Err(Error::invalid(format!(
            "word letters must lie in 1..={MAX_WORD_LETTER}"
        )));
    }
    cfg.budget(word.len())?;
    let letters = *word.iter().max().unwrap();
    let values = run_trials(cfg, |trial| {
        let matrices: Vec<HermitianMatrix> = (0..letters)
            .map(|idx| {
                let mut rng = substream(cfg.seed, trial, idx);
                sample_gue(cfg.n, &mut rng)
            })
            .collect::<Result<_>>()?;
        let mut product = matrices[word[0] - 1].as_mat().clone();
        for &letter in &word[1..] {
            product = &product * matrices[letter - 1].as_mat();
        }
        let mut trace = c64::new(0.0, 0.0);
        for i in 0..cfg.n {
            trace = trace + product.read(i, i);
        }
        Ok(trace.re / cfg.n as f64)
    })?;
    Ok(jackknife(&values))
}

/// Pools every trial's eigenvalues, in trial order.
fn pooled_spectrum<F>(cfg: &SimulationConfig, trial: F) -> Result<Vec<f64>>
where
    F: Fn(usize) -> Result<Vec<f64>> + Sync,
{
    let per_trial = run_trials(cfg, trial)?;
    Ok(per_trial.into_iter().flatten().collect())
}

fn spectrum_histogram(samples: &[f64], radius: f64, bins: usize) -> Result<Histogram> {
    if bins == 0 {
        return Err(Error::invalid("need at least one histogram bin"));
    }
    // A hair of slack keeps boundary eigenvalues inside the outer bins.
    let r = radius * (1.0 + 1e-12) + 1e-12;
    let edges: Vec<f64> =
        (0..=bins).map(|k| -r + 2.0 * r * k as f64 / bins as f64).collect();
    Histogram::from_samples(samples, edges)
}

/// Spectra of U·diag(μ_A)·U* + diag(μ_B) over Haar-random U: the model whose
/// limiting eigenvalue distribution is the free convolution μ_A ⊞ μ_B.
pub fn rotated_sum_spectrum(
    mu_a: &Measure,
    mu_b: &Measure,
    cfg: &SimulationConfig,
    bins: usize,
) -> Result<Histogram> {
    cfg.validate()?;
    cfg.budget(3)?;
    let qa = measure_quantiles(mu_a, cfg.n)?;
    let qb = measure_quantiles(mu_b, cfg.n)?;
    let samples = pooled_spectrum(cfg, |trial| {
        let mut rng = substream(cfg.seed, trial, 0);
        let u = sample_haar_unitary(cfg.n, &mut rng)?;
        // U·diag(qa) is U with scaled columns; one matmul finishes U·D·U*.
        let scaled = Mat::from_fn(cfg.n, cfg.n, |i, j| u.as_mat().read(i, j) * qa[j]);
        let rotated = &scaled * u.as_mat().adjoint();
        // Symmetrize away matmul rounding so the eigensolver contract holds.
        let sum = Mat::from_fn(cfg.n, cfg.n, |i, j| {
            let v = (rotated.read(i, j) + conj(rotated.read(j, i))) * 0.5;
            if i == j {
                c64::new(v.re + qb[i], 0.0)
            } else {
                v
            }
        });
        eigenvalues_hermitian(&HermitianMatrix { mat: sum })
    })?;
    let radius = mu_a.support_radius() + mu_b.support_radius();
    spectrum_histogram(&samples, radius, bins)
}

/// Spectra of GUE + diag(μ_D): the limiting eigenvalue distribution is
/// semicircle ⊞ μ_D.
pub fn gue_plus_deterministic_spectrum(
    mu_d: &Measure,
    cfg: &SimulationConfig,
    bins: usize,
) -> Result<Histogram> {
    cfg.validate()?;
    cfg.budget(1)?;
    let qd = measure_quantiles(mu_d, cfg.n)?;
    let samples = pooled_spectrum(cfg, |trial| {
        let mut rng = substream(cfg.seed, trial, 0);
        let mut a = sample_gue(cfg.n, &mut rng)?;
        for j in 0..cfg.n {
            let v = a.mat.read(j, j);
            a.mat.write(j, j, c64::new(v.re + qd[j], 0.0));
        }
        eigenvalues_hermitian(&a)
    })?;
    // Semicircle support is [−2, 2]; finite-N spillover past the histogram
    // range is cut off, which the acceptance KS bound absorbs.
    let radius = 2.0 + mu_d.support_radius() + 1.0;
    spectrum_histogram(&samples, radius, bins)
}

/// Kolmogorov–Smirnov distance between a sample set and a reference CDF.
pub fn ks_distance(samples: &[f64], cdf: &CdfTable) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::invalid("KS distance needs at least one sample"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let k = sorted.len() as f64;
    let mut worst = 0.0f64;
    for (i, x) in sorted.iter().enumerate() {
        let f = cdf.eval(*x);
        worst = worst.max((f - i as f64 / k).abs());
        worst = worst.max((f - (i as f64 + 1.0) / k).abs());
    }
    Ok(worst)
}

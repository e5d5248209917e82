//! Variance maximization over pure product states.
//!
//! For a diagonal sector spectrum the variance of a product state depends
//! only on the local `|0⟩` probabilities p_1…p_N through the excitation
//! distribution P(e), the coefficients of Π_i [p_i + (1−p_i)x]. That
//! compresses the 2^N basis sum to an O(N²) convolution and makes the
//! gradient of the variance available in closed form, which the
//! optimizers below build on. The two-body case additionally has closed
//! forms for the optimal probability, the maximal QFI, and the 1+2-body
//! bound used by the interaction-order witness.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectrum::{binomial, ExcitationSpectrum};
use crate::split_seed;

/// Grid resolution of the symmetric-ansatz pre-scan.
const SYMMETRIC_SCAN_POINTS: usize = 10_000;

/// Newton polish target on |d(QFI)/dp|.
const NEWTON_DERIVATIVE_TOL: f64 = 1e-12;

/// Ascent stops when the projected gradient drops below this.
const PROJECTED_GRADIENT_TOL: f64 = 1e-10;

/// Iteration cap per gradient-ascent start.
const MAX_ASCENT_ITERATIONS: usize = 10_000;

/// Armijo slope fraction for the backtracking line search.
const ARMIJO_C: f64 = 1e-4;

/// Offset used for the single-coordinate perturbation starts.
const PERTURBATION_STEP: f64 = 0.25;

/// Relative slack under which two maxima count as tied.
const TIE_TOL: f64 = 1e-12;

/// Local |0⟩ probabilities p_1…p_N of a pure product state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductStateParams {
    probs: Vec<f64>,
}

impl ProductStateParams {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Domain("empty probability vector".into()));
        }
        for &p in &probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Domain(format!("probability {p} outside [0, 1]")));
            }
        }
        Ok(Self { probs })
    }

    /// The symmetric point p_i = p.
    pub fn symmetric(n: usize, p: f64) -> Result<Self> {
        Self::new(vec![p; n])
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// How an optimum was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OptMethod {
    SymmetricScan,
    MultiStartGradient,
    ClosedForm,
    StationaritySolve,
}

/// A certified stationary point of the product-state QFI.
#[derive(Debug, Clone, Serialize)]
pub struct OptimumReport {
    pub best_params: ProductStateParams,
    pub best_qfi: f64,
    pub method: OptMethod,
    /// Sup-norm of the projected variance gradient at `best_params`.
    pub stationarity_residual: f64,
}

/// P(e), e = 0…N: probability of exactly e local |1⟩ factors, computed
/// by convolving one qubit at a time.
pub fn excitation_distribution(params: &ProductStateParams) -> Vec<f64> {
    let mut dist = vec![1.0f64];
    for &p in params.probs() {
        let mut next = vec![0.0f64; dist.len() + 1];
        for (e, &d) in dist.iter().enumerate() {
            next[e] += d * p;
            next[e + 1] += d * (1.0 - p);
        }
        dist = next;
    }
    dist
}

fn check_lengths(spectrum: &ExcitationSpectrum, params: &ProductStateParams) -> Result<()> {
    if params.len() != spectrum.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: spectrum.n_qubits(),
            got: params.len(),
        });
    }
    Ok(())
}

/// (ΔH)² = Σ_e P(e) Ω_e² − (Σ_e P(e) Ω_e)² for a product state.
pub fn variance_product(
    spectrum: &ExcitationSpectrum,
    params: &ProductStateParams,
) -> Result<f64> {
    check_lengths(spectrum, params)?;
    let dist = excitation_distribution(params);
    let mut first = 0.0;
    let mut second = 0.0;
    for (e, &pr) in dist.iter().enumerate() {
        let w = spectrum.omega(e);
        first += pr * w;
        second += pr * w * w;
    }
    let var = second - first * first;
    Ok(if var < 0.0 && var >= -1e-12 { 0.0 } else { var })
}

/// The variance gradient ∂(ΔH)²/∂p_i, one entry per qubit.
///
/// Uses the leave-one-out distributions Q_i assembled from prefix and
/// suffix convolutions; P(e) = p_i Q_i(e) + (1−p_i) Q_i(e−1) gives
/// ∂P(e)/∂p_i = Q_i(e) − Q_i(e−1).
pub fn stationarity_residuals(
    spectrum: &ExcitationSpectrum,
    params: &ProductStateParams,
) -> Result<Vec<f64>> {
    check_lengths(spectrum, params)?;
    let n = params.len();
    let probs = params.probs();

    let mut prefix: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    prefix.push(vec![1.0]);
    for i in 0..n {
        let prev = &prefix[i];
        let mut next = vec![0.0f64; prev.len() + 1];
        for (e, &d) in prev.iter().enumerate() {
            next[e] += d * probs[i];
            next[e + 1] += d * (1.0 - probs[i]);
        }
        prefix.push(next);
    }
    let mut suffix: Vec<Vec<f64>> = vec![Vec::new(); n + 1];
    suffix[n] = vec![1.0];
    for i in (0..n).rev() {
        let prev = &suffix[i + 1];
        let mut next = vec![0.0f64; prev.len() + 1];
        for (e, &d) in prev.iter().enumerate() {
            next[e] += d * probs[i];
            next[e + 1] += d * (1.0 - probs[i]);
        }
        suffix[i] = next;
    }

    let dist = excitation_distribution(params);
    let first_moment: f64 = dist
        .iter()
        .enumerate()
        .map(|(e, &pr)| pr * spectrum.omega(e))
        .sum();

    let omegas = spectrum.omegas();
    let mut grad = vec![0.0f64; n];
    for i in 0..n {
        // Q_i = prefix[i] ⊛ suffix[i+1], the distribution without qubit i.
        let left = &prefix[i];
        let right = &suffix[i + 1];
        let mut q = vec![0.0f64; n];
        for (a, &la) in left.iter().enumerate() {
            for (b, &rb) in right.iter().enumerate() {
                q[a + b] += la * rb;
            }
        }
        let mut g = 0.0;
        for (e, &qe) in q.iter().enumerate() {
            let dw2 = omegas[e] * omegas[e] - omegas[e + 1] * omegas[e + 1];
            let dw = omegas[e] - omegas[e + 1];
            g += qe * (dw2 - 2.0 * first_moment * dw);
        }
        grad[i] = g;
    }
    Ok(grad)
}

/// Value, first, and second derivative of Σ_e C(N,e) p^{N−e}(1−p)^e w_e.
fn symmetric_moment(n: usize, weights: &[f64], p: f64) -> (f64, f64, f64) {
    let q = 1.0 - p;
    let mut value = 0.0;
    let mut d1 = 0.0;
    let mut d2 = 0.0;
    for (e, &w) in weights.iter().enumerate() {
        let c = binomial(n as u64, e as u64) as f64 * w;
        let a = (n - e) as i32;
        let b = e as i32;
        value += c * p.powi(a) * q.powi(b);
        let mut t1 = 0.0;
        if a > 0 {
            t1 += a as f64 * p.powi(a - 1) * q.powi(b);
        }
        if b > 0 {
            t1 -= b as f64 * p.powi(a) * q.powi(b - 1);
        }
        d1 += c * t1;
        let mut t2 = 0.0;
        if a > 1 {
            t2 += (a * (a - 1)) as f64 * p.powi(a - 2) * q.powi(b);
        }
        if a > 0 && b > 0 {
            t2 -= 2.0 * (a * b) as f64 * p.powi(a - 1) * q.powi(b - 1);
        }
        if b > 1 {
            t2 += (b * (b - 1)) as f64 * p.powi(a) * q.powi(b - 2);
        }
        d2 += c * t2;
    }
    (value, d1, d2)
}

/// QFI of the symmetric ansatz and its first two p-derivatives.
fn symmetric_qfi(spectrum: &ExcitationSpectrum, p: f64) -> (f64, f64, f64) {
    let n = spectrum.n_qubits();
    let omegas = spectrum.omegas();
    let squares: Vec<f64> = omegas.iter().map(|w| w * w).collect();
    let (m1, m1p, m1pp) = symmetric_moment(n, omegas, p);
    let (m2, m2p, m2pp) = symmetric_moment(n, &squares, p);
    let f = m2 - m1 * m1;
    let fp = m2p - 2.0 * m1 * m1p;
    let fpp = m2pp - 2.0 * (m1p * m1p + m1 * m1pp);
    (4.0 * f, 4.0 * fp, 4.0 * fpp)
}

/// Newton iteration on the QFI derivative, clamped to [0,1]; returns the
/// polished point and its QFI.
fn newton_polish(spectrum: &ExcitationSpectrum, start: f64) -> (f64, f64) {
    let mut p = start;
    let (mut best_value, _, _) = symmetric_qfi(spectrum, p);
    let mut best_p = p;
    for _ in 0..100 {
        let (value, d1, d2) = symmetric_qfi(spectrum, p);
        if value > best_value {
            best_value = value;
            best_p = p;
        }
        if d1.abs() < NEWTON_DERIVATIVE_TOL || d2 == 0.0 {
            break;
        }
        let step = d1 / d2;
        let next = (p - step).clamp(0.0, 1.0);
        if (next - p).abs() < 1e-17 {
            break;
        }
        p = next;
    }
    let (final_value, _, _) = symmetric_qfi(spectrum, p);
    if final_value >= best_value {
        (p, final_value)
    } else {
        (best_p, best_value)
    }
}

/// Maximize the QFI over the one-parameter family p_i = p: dense grid
/// scan followed by a Newton polish of the derivative.
///
/// Even-order spectra are palindromic, so p and 1−p are equally good;
/// the larger root is reported, matching the closed-form convention of
/// [`p_max_k2`].
pub fn optimize_symmetric(spectrum: &ExcitationSpectrum) -> OptimumReport {
    let mut best_p = 0.0;
    let mut best_value = f64::NEG_INFINITY;
    for i in 0..SYMMETRIC_SCAN_POINTS {
        let p = i as f64 / (SYMMETRIC_SCAN_POINTS - 1) as f64;
        let (value, _, _) = symmetric_qfi(spectrum, p);
        if value > best_value {
            best_value = value;
            best_p = p;
        }
    }
    let (mut p_star, mut value_star) = newton_polish(spectrum, best_p);
    // Probe the mirror basin and prefer the larger root on a tie.
    let (p_mirror, value_mirror) = newton_polish(spectrum, 1.0 - p_star);
    let tie = (value_mirror - value_star).abs() <= TIE_TOL * value_star.abs().max(1.0);
    if value_mirror > value_star + TIE_TOL * value_star.abs().max(1.0)
        || (tie && p_mirror > p_star)
    {
        p_star = p_mirror;
        value_star = value_mirror;
    }

    let n = spectrum.n_qubits();
    let params = ProductStateParams::symmetric(n, p_star).expect("p in range");
    let residual = projected_residual_norm(spectrum, &params);
    OptimumReport {
        best_params: params,
        best_qfi: value_star,
        method: OptMethod::SymmetricScan,
        stationarity_residual: residual,
    }
}

/// Sup-norm of the variance gradient with box-blocked components zeroed.
fn projected_residual_norm(spectrum: &ExcitationSpectrum, params: &ProductStateParams) -> f64 {
    let grad = stationarity_residuals(spectrum, params).expect("lengths match");
    grad.iter()
        .zip(params.probs())
        .map(|(&g, &p)| {
            if (p <= 0.0 && g < 0.0) || (p >= 1.0 && g > 0.0) {
                0.0
            } else {
                g.abs()
            }
        })
        .fold(0.0f64, f64::max)
}

struct AscentOutcome {
    probs: Vec<f64>,
    variance: f64,
    residual: f64,
}

/// Projected gradient ascent with backtracking line search on [0,1]^N.
fn ascend(spectrum: &ExcitationSpectrum, start: Vec<f64>) -> AscentOutcome {
    let mut x = ProductStateParams::new(start).expect("start in box");
    let mut fx = variance_product(spectrum, &x).expect("lengths match");
    // Warm-started step size: begin each line search at twice the last
    // accepted step instead of re-descending from 1.
    let mut alpha_seed = 1.0f64;
    for _ in 0..MAX_ASCENT_ITERATIONS {
        let grad = stationarity_residuals(spectrum, &x).expect("lengths match");
        let pg_norm = grad
            .iter()
            .zip(x.probs())
            .map(|(&g, &p)| {
                if (p <= 0.0 && g < 0.0) || (p >= 1.0 && g > 0.0) {
                    0.0
                } else {
                    g.abs()
                }
            })
            .fold(0.0f64, f64::max);
        if pg_norm < PROJECTED_GRADIENT_TOL {
            break;
        }
        let mut alpha = (alpha_seed * 2.0).min(1.0);
        let mut moved = false;
        while alpha > 1e-18 {
            let candidate: Vec<f64> = x
                .probs()
                .iter()
                .zip(&grad)
                .map(|(&p, &g)| (p + alpha * g).clamp(0.0, 1.0))
                .collect();
            let gain: f64 = candidate
                .iter()
                .zip(x.probs())
                .zip(&grad)
                .map(|((&c, &p), &g)| g * (c - p))
                .sum();
            if gain <= 0.0 {
                break;
            }
            let cand_params = ProductStateParams::new(candidate).expect("clamped");
            let fc = variance_product(spectrum, &cand_params).expect("lengths match");
            if fc >= fx + ARMIJO_C * gain {
                x = cand_params;
                fx = fc;
                alpha_seed = alpha;
                moved = true;
                break;
            }
            alpha *= 0.5;
        }
        if !moved {
            break;
        }
    }
    let residual = projected_residual_norm(spectrum, &x);
    AscentOutcome {
        probs: x.probs().to_vec(),
        variance: fx,
        residual,
    }
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}

/// Multi-start projected gradient ascent over the whole cube.
///
/// Starts are the symmetric optimum, its 2N single-coordinate
/// perturbations, and `n_starts` uniform random points with
/// counter-derived sub-seeds, so the outcome is independent of
/// scheduling. Ties are broken toward the lexicographically smallest
/// probability vector.
pub fn optimize_full(
    spectrum: &ExcitationSpectrum,
    n_starts: usize,
    seed: u64,
) -> Result<OptimumReport> {
    let n = spectrum.n_qubits();
    if n > 13 {
        return Err(Error::Domain(format!(
            "full optimization supported for at most 13 qubits, requested {n}"
        )));
    }
    let symmetric = optimize_symmetric(spectrum);
    let sym_p = symmetric.best_params.probs()[0];

    let mut starts: Vec<Vec<f64>> = Vec::with_capacity(1 + 2 * n + n_starts);
    starts.push(vec![sym_p; n]);
    for i in 0..n {
        for delta in [PERTURBATION_STEP, -PERTURBATION_STEP] {
            let mut s = vec![sym_p; n];
            s[i] = (s[i] + delta).clamp(0.0, 1.0);
            starts.push(s);
        }
    }
    for idx in 0..n_starts {
        let mut rng = ChaCha8Rng::seed_from_u64(split_seed(seed, idx as u64));
        starts.push((0..n).map(|_| rng.random::<f64>()).collect());
    }

    let outcomes: Vec<AscentOutcome> = starts
        .into_par_iter()
        .map(|s| ascend(spectrum, s))
        .collect();

    let mut best = &outcomes[0];
    for o in &outcomes[1..] {
        let tol = TIE_TOL * best.variance.abs().max(1.0);
        if o.variance > best.variance + tol
            || ((o.variance - best.variance).abs() <= tol && lex_less(&o.probs, &best.probs))
        {
            best = o;
        }
    }
    Ok(OptimumReport {
        best_params: ProductStateParams::new(best.probs.clone())?,
        best_qfi: 4.0 * best.variance,
        method: OptMethod::MultiStartGradient,
        stationarity_residual: best.residual,
    })
}

fn require_at_least_three(n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::Domain(format!(
            "closed forms require at least 3 qubits, got {n}"
        )));
    }
    Ok(n as f64)
}

/// Optimal symmetric probability for the pure two-body family:
/// (2N−3+√(2N²−7N+6)) / (4N−6).
pub fn p_max_k2(n: usize) -> Result<f64> {
    let nf = require_at_least_three(n)?;
    Ok((2.0 * nf - 3.0 + (2.0 * nf * nf - 7.0 * nf + 6.0).sqrt()) / (4.0 * nf - 6.0))
}

/// Maximal product-state QFI for the pure two-body family:
/// 2N(N−1)/(2(N−2)+1).
pub fn f_max_k2(n: usize) -> Result<f64> {
    let nf = require_at_least_three(n)?;
    Ok(2.0 * nf * (nf - 1.0) / (2.0 * (nf - 2.0) + 1.0))
}

/// Real roots of c3·x³ + c2·x² + c1·x + c0, via the depressed cubic.
fn solve_cubic_real(c3: f64, c2: f64, c1: f64, c0: f64) -> Vec<f64> {
    let scale = c3.abs().max(c2.abs()).max(c1.abs()).max(c0.abs());
    if scale == 0.0 {
        return Vec::new();
    }
    if c3.abs() < 1e-14 * scale {
        // Quadratic fallback.
        if c2.abs() < 1e-14 * scale {
            if c1.abs() < 1e-14 * scale {
                return Vec::new();
            }
            return vec![-c0 / c1];
        }
        let disc = c1 * c1 - 4.0 * c2 * c0;
        if disc < 0.0 {
            return Vec::new();
        }
        let s = disc.sqrt();
        return vec![(-c1 + s) / (2.0 * c2), (-c1 - s) / (2.0 * c2)];
    }
    let a = c2 / c3;
    let b = c1 / c3;
    let c = c0 / c3;
    // x = t − a/3 gives t³ + pt·t + q = 0.
    let pt = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let shift = -a / 3.0;
    let disc = q * q / 4.0 + pt * pt * pt / 27.0;
    let mut roots = if disc > 1e-18 {
        let s = disc.sqrt();
        let t = (-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt();
        vec![t + shift]
    } else if pt.abs() < 1e-18 {
        vec![shift]
    } else if disc.abs() <= 1e-18 {
        let u = 3.0 * q / pt;
        vec![u + shift, -u / 2.0 + shift]
    } else {
        // Three real roots: trigonometric form.
        let r = (-pt / 3.0).sqrt();
        let cos_arg = (3.0 * q / (2.0 * pt * r)).clamp(-1.0, 1.0);
        let theta = cos_arg.acos();
        (0..3)
            .map(|k| 2.0 * r * ((theta - 2.0 * std::f64::consts::PI * k as f64) / 3.0).cos() + shift)
            .collect()
    };
    // One Newton step per root tightens the closed forms.
    for x in &mut roots {
        let f = ((c3 * *x + c2) * *x + c1) * *x + c0;
        let df = (3.0 * c3 * *x + 2.0 * c2) * *x + c1;
        if df != 0.0 {
            *x -= f / df;
        }
    }
    roots
}

/// Quartic whose maximum over [0,1] is the 1+2-body product-state bound.
fn b12_polynomial(n: f64, p: f64) -> f64 {
    let bracket = (n - 2.0) * (n - 2.0)
        + 2.0 * (n - 1.0) * p * ((2.0 * n - 3.0) * p - (2.0 * n - 5.0));
    -16.0 * n * p * (p - 1.0) / ((n + 1.0) * (n + 1.0)) * bracket
}

/// The bound B₁₊₂(N): maximal product-state QFI of the normalized family
/// member with equal one- and two-body weights. QFI above it certifies
/// terms of order ≥ 3.
pub fn bound_b12(n: usize) -> Result<f64> {
    let nf = require_at_least_three(n)?;
    let a = 2.0 * (nf - 1.0) * (2.0 * nf - 3.0);
    let b = -2.0 * (nf - 1.0) * (2.0 * nf - 5.0);
    let c = (nf - 2.0) * (nf - 2.0);
    // Up to the constant prefactor the quartic is A p⁴ + (B−A) p³ +
    // (C−B) p² − C p; its stationary points are the cubic's roots.
    let roots = solve_cubic_real(4.0 * a, 3.0 * (b - a), 2.0 * (c - b), -c);
    let mut best = 0.0f64; // endpoints p = 0, 1 both give 0
    for root in roots {
        if (-1e-9..=1.0 + 1e-9).contains(&root) {
            best = best.max(b12_polynomial(nf, root.clamp(0.0, 1.0)));
        }
    }
    if best == 0.0 {
        // Fallback: dense scan. The cubic always has an interior maximizer
        // for n ≥ 3, so this is a numerical safety net only.
        for i in 0..=SYMMETRIC_SCAN_POINTS {
            let p = i as f64 / SYMMETRIC_SCAN_POINTS as f64;
            best = best.max(b12_polynomial(nf, p));
        }
    }
    Ok(best)
}

//! Detection of ≥3-body interaction terms from product-state QFI.
//!
//! The criterion: any product state whose QFI against a normalized family
//! Hamiltonian strictly exceeds the two-body ceiling B₁₊₂(N) certifies
//! that the Hamiltonian carries interaction terms of order at least 3.
//! The module also provides the field-tuned Ising Hamiltonian with an
//! adjustable three-body admixture, a coupling scan against the bound,
//! and a seeded Monte-Carlo estimate of how often random product states
//! reveal a random admixture.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::product_opt::{bound_b12, optimize_full};
use crate::qfi::{qfi_pure, PureState};
use crate::spectrum::{build_spectrum, HamiltonianSpec, Normalization, AXIS_X};
use crate::split_seed;

/// 97.5% normal quantile, for the two-sided 95% Wilson interval.
const WILSON_Z: f64 = 1.959963984540054;

/// Monte-Carlo state construction is dense; cap the qubit count.
const MAX_MONTE_CARLO_QUBITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    AtLeastThreeLocal,
    Inconclusive,
}

/// Outcome of comparing an observed QFI against the two-body ceiling.
#[derive(Debug, Clone, Serialize)]
pub struct WitnessReport {
    pub n_qubits: usize,
    pub bound: f64,
    pub observed_qfi: f64,
    pub verdict: Verdict,
}

/// Strict comparison of an observed QFI against B₁₊₂(N). Equality stays
/// inconclusive.
pub fn detect(observed_qfi: f64, n: usize) -> Result<WitnessReport> {
    if !observed_qfi.is_finite() || observed_qfi < 0.0 {
        return Err(Error::Domain(format!(
            "observed QFI must be a nonnegative number, got {observed_qfi}"
        )));
    }
    let bound = bound_b12(n)?;
    let verdict = if observed_qfi > bound {
        Verdict::AtLeastThreeLocal
    } else {
        Verdict::Inconclusive
    };
    Ok(WitnessReport {
        n_qubits: n,
        bound,
        observed_qfi,
        verdict,
    })
}

/// The complete-graph Ising Hamiltonian with field tuned to the coupling
/// (equal one- and two-body weights, x axis) plus a three-body admixture
/// γ₃, normalized as a whole to operator norm N/2.
pub fn ising_with_field(n: usize, gamma3: f64) -> Result<HamiltonianSpec> {
    if n < 3 {
        return Err(Error::Domain(format!(
            "the contaminated Ising example needs at least 3 qubits, got {n}"
        )));
    }
    if !gamma3.is_finite() || gamma3 < 0.0 {
        return Err(Error::Domain(format!(
            "three-body weight must be nonnegative, got {gamma3}"
        )));
    }
    let mut couplings = BTreeMap::from([(1, 1.0), (2, 1.0)]);
    if gamma3 != 0.0 {
        couplings.insert(3, gamma3);
    }
    HamiltonianSpec::new(n, couplings, AXIS_X, Normalization::OperatorNormHalfN)
}

/// One row of a three-body admixture scan.
#[derive(Debug, Clone, Serialize)]
pub struct GammaScanRow {
    pub gamma3: f64,
    pub max_product_qfi: f64,
    pub bound: f64,
    pub violated: bool,
}

/// For each γ₃ on the grid, maximize the product-state QFI of the
/// contaminated Ising Hamiltonian and compare it to B₁₊₂(N).
///
/// Product states map to product states under the local rotation to the
/// diagonal basis, so the optimization runs on the sector spectrum.
pub fn gamma_scan(
    n: usize,
    gamma3_grid: &[f64],
    n_starts: usize,
    seed: u64,
) -> Result<Vec<GammaScanRow>> {
    if gamma3_grid.is_empty() {
        return Err(Error::Domain("empty γ₃ grid".into()));
    }
    if gamma3_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Domain("γ₃ grid must be ascending".into()));
    }
    let bound = bound_b12(n)?;
    let mut rows = Vec::with_capacity(gamma3_grid.len());
    for (i, &gamma3) in gamma3_grid.iter().enumerate() {
        let spec = ising_with_field(n, gamma3)?;
        let spectrum = build_spectrum(&spec)?;
        let report = optimize_full(&spectrum, n_starts, split_seed(seed, i as u64))?;
        rows.push(GammaScanRow {
            gamma3,
            max_product_qfi: report.best_qfi,
            bound,
            violated: report.best_qfi > bound,
        });
    }
    Ok(rows)
}

/// Tally of a seeded random-violation experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloReport {
    pub samples: u64,
    pub violations: u64,
    pub frequency: f64,
    pub wilson_interval_95: (f64, f64),
    pub seed: u64,
}

fn wilson_interval_95(violations: u64, samples: u64) -> (f64, f64) {
    let n = samples as f64;
    let phat = violations as f64 / n;
    let z2 = WILSON_Z * WILSON_Z;
    let denom = 1.0 + z2 / n;
    let center = (phat + z2 / (2.0 * n)) / denom;
    let half = WILSON_Z / denom * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Per sample: γ₃ uniform on [0,1], one Haar-random pure product state
/// (local |0⟩ probability uniform, phase uniform), pure-state QFI against
/// the renormalized contaminated Ising Hamiltonian, strict comparison to
/// B₁₊₂(N).
///
/// Each sample owns a counter-derived sub-seed, so the tally is
/// reproducible bit-for-bit regardless of how samples are scheduled.
pub fn monte_carlo_violation(n: usize, samples: u64, seed: u64) -> Result<MonteCarloReport> {
    run_monte_carlo(n, samples, seed, None)
}

/// Degenerate hook: identical sampling but with γ₃ pinned. Pinning 0
/// must produce zero violations — no 1+2-body member beats its own bound.
pub fn monte_carlo_violation_fixed_gamma(
    n: usize,
    samples: u64,
    seed: u64,
    gamma3: f64,
) -> Result<MonteCarloReport> {
    run_monte_carlo(n, samples, seed, Some(gamma3))
}

fn run_monte_carlo(
    n: usize,
    samples: u64,
    seed: u64,
    gamma3_override: Option<f64>,
) -> Result<MonteCarloReport> {
    if samples == 0 {
        return Err(Error::Domain("sample count must be at least 1".into()));
    }
    if n > MAX_MONTE_CARLO_QUBITS {
        return Err(Error::ResourceLimit(format!(
            "Monte-Carlo states limited to {MAX_MONTE_CARLO_QUBITS} qubits, requested {n}"
        )));
    }
    let bound = bound_b12(n)?;
    // Surface construction errors before entering the parallel region.
    ising_with_field(n, gamma3_override.unwrap_or(1.0))?;

    let violations: u64 = (0..samples)
        .into_par_iter()
        .map(|i| -> Result<u64> {
            let mut rng = ChaCha8Rng::seed_from_u64(split_seed(seed, i));
            // Draw order is part of the reproducibility contract:
            // γ₃ first, then (probability, phase) per qubit.
            let drawn_gamma3: f64 = rng.random();
            let gamma3 = gamma3_override.unwrap_or(drawn_gamma3);
            let mut probs = Vec::with_capacity(n);
            let mut phases = Vec::with_capacity(n);
            for _ in 0..n {
                probs.push(rng.random::<f64>());
                phases.push(rng.random::<f64>() * std::f64::consts::TAU);
            }
            let spectrum = build_spectrum(&ising_with_field(n, gamma3)?)?;
            let state = PureState::product(&probs, &phases)?;
            let qfi = qfi_pure(&state, &spectrum)?;
            Ok(u64::from(qfi.value > bound))
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;

    Ok(MonteCarloReport {
        samples,
        violations,
        frequency: violations as f64 / samples as f64,
        wilson_interval_95: wilson_interval_95(violations, samples),
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::product_opt::{variance_product, ProductStateParams};
    use crate::spectrum::HamiltonianSpec;

    #[test]
    fn detect_named_cases() {
        let r = detect(9.0, 3).unwrap();
        assert_eq!(r.verdict, Verdict::AtLeastThreeLocal);
        assert!((r.bound - 2.68).abs() < 0.005);

        // Exactly at the bound stays inconclusive (strict inequality).
        let bound = bound_b12(3).unwrap();
        let r = detect(bound, 3).unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);

        let r = detect(4.8, 4).unwrap();
        assert_eq!(r.verdict, Verdict::AtLeastThreeLocal);
        assert!((r.bound - 3.61).abs() < 0.005);

        assert!(detect(1.0, 2).is_err());
        assert!(detect(-0.5, 3).is_err());
        assert!(detect(f64::NAN, 3).is_err());
    }

    #[test]
    fn ising_spectrum_matches_z_axis_family_at_zero_gamma() {
        let ising = build_spectrum(&ising_with_field(3, 0.0).unwrap()).unwrap();
        let plain = build_spectrum(&HamiltonianSpec::up_to_order(3, 2).unwrap()).unwrap();
        assert_eq!(ising, plain);
    }

    #[test]
    fn ising_n3_sector_values() {
        // Raw sectors are (3+3γ/2, −3γ/2, −1+3γ/2, −3γ/2); the rescale
        // divides by (2+γ)/1.5 … spot-check γ₃ = 1.
        let s = build_spectrum(&ising_with_field(3, 1.0).unwrap()).unwrap();
        let expected = [1.5, -0.5, 1.0 / 6.0, -0.5];
        for (got, want) in s.omegas().iter().zip(expected) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn ising_rejects_bad_inputs() {
        assert!(ising_with_field(2, 0.5).is_err());
        assert!(ising_with_field(3, -0.1).is_err());
        assert!(ising_with_field(3, f64::INFINITY).is_err());
    }

    #[test]
    fn gamma_scan_zero_point_meets_bound() {
        let rows = gamma_scan(3, &[0.0], 60, 5).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(!rows[0].violated);
        assert!(
            (rows[0].max_product_qfi - rows[0].bound).abs() < 1e-6,
            "{} vs {}",
            rows[0].max_product_qfi,
            rows[0].bound
        );
    }

    #[test]
    fn gamma_scan_detects_admixture_at_one() {
        let rows = gamma_scan(3, &[1.0], 60, 5).unwrap();
        assert!(rows[0].violated, "{rows:?}");
    }

    #[test]
    fn gamma_scan_large_admixture_approaches_heisenberg() {
        let rows = gamma_scan(3, &[1000.0], 60, 5).unwrap();
        assert!(
            (rows[0].max_product_qfi - 9.0).abs() < 0.05,
            "{}",
            rows[0].max_product_qfi
        );
    }

    #[test]
    fn gamma_scan_validates_grid() {
        assert!(gamma_scan(3, &[], 10, 1).is_err());
        assert!(gamma_scan(3, &[0.5, 0.2], 10, 1).is_err());
    }

    #[test]
    fn monte_carlo_zero_gamma_never_violates() {
        let report = monte_carlo_violation_fixed_gamma(3, 2_000, 11, 0.0).unwrap();
        assert_eq!(report.violations, 0);
        assert_eq!(report.frequency, 0.0);
    }

    #[test]
    fn monte_carlo_seeded_repeatability() {
        let a = monte_carlo_violation(3, 5_000, 4).unwrap();
        let b = monte_carlo_violation(3, 5_000, 4).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.frequency.to_bits(), b.frequency.to_bits());
        assert!(a.wilson_interval_95.0 <= a.frequency);
        assert!(a.frequency <= a.wilson_interval_95.1);
    }

    #[test]
    fn monte_carlo_qfi_never_exceeds_cap() {
        // Indirect cap check: even forcing the strongest admixture the
        // sampled frequency cannot involve QFI above N², because the
        // violation count with bound N² would be zero.
        let report = monte_carlo_violation(3, 2_000, 99).unwrap();
        assert!(report.violations <= report.samples);
    }

    #[test]
    fn single_sample_violation_constructed_from_scan_optimum() {
        // The γ₃ = 1 optimizer output certifies a violating product state.
        let spectrum = build_spectrum(&ising_with_field(3, 1.0).unwrap()).unwrap();
        let report = optimize_full(&spectrum, 60, 17).unwrap();
        let bound = bound_b12(3).unwrap();
        assert!(report.best_qfi > bound);
        let qfi = 4.0
            * variance_product(
                &spectrum,
                &ProductStateParams::new(report.best_params.probs().to_vec()).unwrap(),
            )
            .unwrap();
        assert!(qfi > bound);

        // And the Monte-Carlo path counts such a state: search a seed
        // whose single sample lands in the violation region.
        let mut hit = None;
        for seed in 0..5_000u64 {
            let r = monte_carlo_violation_fixed_gamma(3, 1, seed, 1.0).unwrap();
            if r.violations == 1 {
                hit = Some(seed);
                break;
            }
        }
        let seed = hit.expect("violation region has substantial Haar measure at γ₃ = 1");
        let again = monte_carlo_violation_fixed_gamma(3, 1, seed, 1.0).unwrap();
        assert_eq!(again.violations, 1);
    }

    #[test]
    fn monte_carlo_rejects_bad_arguments() {
        assert!(monte_carlo_violation(3, 0, 1).is_err());
        assert!(monte_carlo_violation(2, 10, 1).is_err());
        assert!(monte_carlo_violation(13, 10, 1).is_err());
    }
}

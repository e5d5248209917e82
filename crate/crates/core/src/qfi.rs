//! Quantum Fisher information for pure and mixed states.
//!
//! For a pure state the QFI of a Hermitian generator A is 4(ΔA)²; for a
//! mixed state it is the spectral sum
//! F = 2 Σ_{k,l} (λ_k−λ_l)²/(λ_k+λ_l) |⟨k|A|l⟩|²
//! over eigenpairs of ρ with non-vanishing denominator. The two-copy
//! form Tr[(𝟙⊗A² − A⊗A)ρ⊗ρ] is evaluated through its algebraic identity
//! Tr[ρA²] − (Tr[ρA])² rather than by materializing 4^N tensors.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::oracle::{jacobi_hermitian, mat_mul, DenseOperator, DensityMatrix};
use crate::spectrum::ExcitationSpectrum;

/// Variance values above this floor count as negative (a bug), below it
/// as rounding noise to clamp.
const VARIANCE_CLAMP: f64 = -1e-12;

/// Pairs of ρ-eigenvalues whose sum is below this are skipped in the
/// mixed-state sum.
const EIGENVALUE_SUM_CUTOFF: f64 = 1e-12;

/// A unit vector in the 2^N computational basis.
#[derive(Debug, Clone)]
pub struct PureState {
    dim: usize,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if !dim.is_power_of_two() {
            return Err(Error::Domain(format!("dimension {dim} is not a power of 2")));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("state norm² {norm} instead of 1")));
        }
        Ok(Self { dim, amplitudes })
    }

    /// The computational basis state |idx⟩.
    pub fn basis(dim: usize, idx: usize) -> Result<Self> {
        if idx >= dim {
            return Err(Error::Domain(format!("basis index {idx} outside 0..{dim}")));
        }
        let mut amplitudes = vec![Complex64::ZERO; dim];
        amplitudes[idx] = Complex64::new(1.0, 0.0);
        Self::new(amplitudes)
    }

    /// Product state ⊗_j (√p_j |0⟩ + e^{iφ_j} √(1−p_j) |1⟩), qubit 0 as
    /// the most significant bit.
    pub fn product(probs: &[f64], phases: &[f64]) -> Result<Self> {
        let n = probs.len();
        if phases.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: phases.len(),
            });
        }
        if n == 0 || n > crate::spectrum::MAX_QUBITS {
            return Err(Error::Domain(format!("qubit count {n} unsupported")));
        }
        for &p in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Domain(format!("probability {p} outside [0, 1]")));
            }
        }
        let dim = 1usize << n;
        let mut amplitudes = Vec::with_capacity(dim);
        for idx in 0..dim {
            let mut amp = Complex64::new(1.0, 0.0);
            for (j, (&p, &phi)) in probs.iter().zip(phases).enumerate() {
                let bit = (idx >> (n - 1 - j)) & 1;
                if bit == 0 {
                    amp *= p.sqrt();
                } else {
                    amp *= Complex64::from_polar((1.0 - p).sqrt(), phi);
                }
            }
            amplitudes.push(amp);
        }
        Ok(Self { dim, amplitudes })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }
}

/// Which evaluation route produced a QFI value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum QfiMethod {
    PureVariance,
    MixedEigen,
    TwoCopy,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct QfiValue {
    pub value: f64,
    pub method: QfiMethod,
}

/// A Hermitian phase generator a pure state can take moments against.
pub trait Generator {
    fn dim(&self) -> usize;

    /// (⟨A⟩, ⟨A²⟩) in the given state.
    fn moments(&self, state: &PureState) -> Result<(f64, f64)>;
}

impl Generator for DenseOperator {
    fn dim(&self) -> usize {
        self.dim()
    }

    fn moments(&self, state: &PureState) -> Result<(f64, f64)> {
        let a_psi = self.mul_vec(state.amplitudes())?;
        let mut first = 0.0;
        let mut second = 0.0;
        for (a, psi) in a_psi.iter().zip(state.amplitudes()) {
            first += (psi.conj() * a).re;
            second += a.norm_sqr();
        }
        Ok((first, second))
    }
}

impl Generator for ExcitationSpectrum {
    fn dim(&self) -> usize {
        1usize << self.n_qubits()
    }

    /// The state is interpreted in the diagonal basis: each basis index
    /// contributes its sector value by popcount.
    fn moments(&self, state: &PureState) -> Result<(f64, f64)> {
        if state.dim() != Generator::dim(self) {
            return Err(Error::DimensionMismatch {
                expected: Generator::dim(self),
                got: state.dim(),
            });
        }
        let mut first = 0.0;
        let mut second = 0.0;
        for (idx, amp) in state.amplitudes().iter().enumerate() {
            let w = self.omega(idx.count_ones() as usize);
            let prob = amp.norm_sqr();
            first += prob * w;
            second += prob * w * w;
        }
        Ok((first, second))
    }
}

/// ⟨A²⟩ − ⟨A⟩², clamped to 0 against −1e-12 rounding noise.
pub fn variance<G: Generator + ?Sized>(state: &PureState, generator: &G) -> Result<f64> {
    if state.dim() != generator.dim() {
        return Err(Error::DimensionMismatch {
            expected: generator.dim(),
            got: state.dim(),
        });
    }
    let (first, second) = generator.moments(state)?;
    let var = second - first * first;
    Ok(if var < 0.0 && var >= VARIANCE_CLAMP {
        0.0
    } else {
        var
    })
}

/// Pure-state QFI: 4(ΔA)².
pub fn qfi_pure<G: Generator + ?Sized>(state: &PureState, generator: &G) -> Result<QfiValue> {
    Ok(QfiValue {
        value: 4.0 * variance(state, generator)?,
        method: QfiMethod::PureVariance,
    })
}

/// Mixed-state QFI via the eigendecomposition of ρ.
pub fn qfi_mixed(rho: &DensityMatrix, a: &DenseOperator) -> Result<QfiValue> {
    let dim = rho.dim();
    if a.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: a.dim(),
        });
    }
    let mut work = rho.entries().to_vec();
    let (lambda, vectors) = jacobi_hermitian(dim, &mut work)?;

    // a_vec[l] = A |l⟩ for each eigenvector of ρ.
    let a_vec: Vec<Vec<Complex64>> = (0..dim)
        .map(|l| a.mul_vec(&vectors[l * dim..(l + 1) * dim]))
        .collect::<Result<_>>()?;

    let mut total = 0.0;
    for k in 0..dim {
        let vk = &vectors[k * dim..(k + 1) * dim];
        for l in 0..dim {
            let denom = lambda[k] + lambda[l];
            if denom <= EIGENVALUE_SUM_CUTOFF {
                continue;
            }
            let diff = lambda[k] - lambda[l];
            if diff == 0.0 {
                continue;
            }
            let overlap: Complex64 = vk
                .iter()
                .zip(&a_vec[l])
                .map(|(v, av)| v.conj() * av)
                .sum();
            total += diff * diff / denom * overlap.norm_sqr();
        }
    }
    Ok(QfiValue {
        value: 2.0 * total,
        method: QfiMethod::MixedEigen,
    })
}

/// Tr[(𝟙⊗A² − A⊗A)(ρ⊗ρ)], i.e. the variance of A in ρ, evaluated as
/// Tr[ρA²] − (Tr[ρA])².
pub fn two_copy_variance(rho: &DensityMatrix, a: &DenseOperator) -> Result<f64> {
    let dim = rho.dim();
    if a.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: a.dim(),
        });
    }
    let a_squared = mat_mul(dim, a.entries(), a.entries());
    let mut tr_rho_a = Complex64::ZERO;
    let mut tr_rho_a2 = Complex64::ZERO;
    for i in 0..dim {
        for j in 0..dim {
            let r = rho.entries()[i * dim + j];
            tr_rho_a += r * a.entries()[j * dim + i];
            tr_rho_a2 += r * a_squared[j * dim + i];
        }
    }
    Ok(tr_rho_a2.re - tr_rho_a.re * tr_rho_a.re)
}

//! Brute-force dense operators and a Jacobi eigensolver.
//!
//! This module materializes family Hamiltonians as explicit 2^N × 2^N
//! matrices by enumerating every site subset of each coupled order, with
//! no use of the sector formula. Everything the analytic path claims is
//! validated against these matrices.
//!
//! Basis convention: lexicographic, qubit 0 is the most significant bit,
//! `|0⟩` before `|1⟩`. With that ordering `popcount(index)` is the
//! excitation count of the basis state.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectrum::{binomial, HamiltonianSpec, Normalization};

/// Dense-construction qubit cap (dim 4096, ~270 MB of complex entries).
pub const MAX_DENSE_QUBITS: usize = 12;

/// Entrywise Hermiticity tolerance.
const HERMITICITY_TOL: f64 = 1e-12;

/// Jacobi convergence: off-diagonal Frobenius mass below this fraction of ‖A‖_F.
const JACOBI_OFF_TOL: f64 = 1e-14;

/// Sweep cap for the cyclic Jacobi iteration.
const JACOBI_MAX_SWEEPS: usize = 100;

/// A dense Hermitian operator in the computational basis, row-major.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    dim: usize,
    entries: Vec<Complex64>,
    is_diagonal: bool,
}

impl DenseOperator {
    /// Wrap raw entries, checking squareness and Hermiticity.
    pub fn from_entries(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if !dim.is_power_of_two() {
            return Err(Error::Domain(format!("dimension {dim} is not a power of 2")));
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        let dev = hermiticity_deviation(dim, &entries);
        if dev > HERMITICITY_TOL {
            return Err(Error::NotHermitian(dev));
        }
        let is_diagonal = (0..dim)
            .all(|r| (0..dim).all(|c| r == c || entries[r * dim + c] == Complex64::ZERO));
        Ok(Self {
            dim,
            entries,
            is_diagonal,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn is_diagonal(&self) -> bool {
        self.is_diagonal
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.entries[i * self.dim + i].re).collect()
    }

    /// y = A·x.
    pub fn mul_vec(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        if self.is_diagonal {
            return Ok((0..self.dim)
                .map(|i| self.entries[i * self.dim + i] * x[i])
                .collect());
        }
        let mut y = vec![Complex64::ZERO; self.dim];
        for r in 0..self.dim {
            let row = &self.entries[r * self.dim..(r + 1) * self.dim];
            let mut acc = Complex64::ZERO;
            for (a, b) in row.iter().zip(x) {
                acc += a * b;
            }
            y[r] = acc;
        }
        Ok(y)
    }
}

fn hermiticity_deviation(dim: usize, entries: &[Complex64]) -> f64 {
    let mut dev = 0.0f64;
    for r in 0..dim {
        for c in r..dim {
            let d = (entries[r * dim + c] - entries[c * dim + r].conj()).norm();
            dev = dev.max(d);
        }
    }
    dev
}

/// The 2×2 local operator n̂·σ.
fn axis_operator(axis: [f64; 3]) -> [Complex64; 4] {
    let (nx, ny, nz) = (axis[0], axis[1], axis[2]);
    [
        Complex64::new(nz, 0.0),
        Complex64::new(nx, -ny),
        Complex64::new(nx, ny),
        Complex64::new(-nz, 0.0),
    ]
}

/// Iterate all `n`-bit masks of popcount `k` (Gosper's hack), ascending.
fn masks_of_weight(n: usize, k: usize) -> impl Iterator<Item = u64> {
    let limit = 1u64 << n;
    let mut mask = if k == 0 { 0 } else { (1u64 << k) - 1 };
    let mut done = false;
    std::iter::from_fn(move || {
        if done || mask >= limit {
            return None;
        }
        let current = mask;
        if k == 0 {
            done = true;
        } else {
            let c = mask & mask.wrapping_neg();
            let r = mask + c;
            mask = (((r ^ mask) >> 2) / c) | r;
        }
        Some(current)
    })
}

/// Raw z-basis diagonal of the weighted subset sum, one entry per basis
/// index, before any overall rescale. Each order carries its conventional
/// (N/2)/C(N,k') prefactor.
fn raw_z_diagonal(spec: &HamiltonianSpec) -> Vec<f64> {
    let n = spec.n_qubits();
    let dim = spec.dim();
    let mut diag = vec![0.0f64; dim];
    for (&order, &gamma) in spec.couplings() {
        if gamma == 0.0 {
            continue;
        }
        let weight = gamma * (n as f64 / 2.0) / binomial(n as u64, order as u64) as f64;
        for mask in masks_of_weight(n, order) {
            for (idx, slot) in diag.iter_mut().enumerate() {
                // Product of σz eigenvalues over the subset: parity of set bits.
                let sign = if (idx as u64 & mask).count_ones() % 2 == 0 {
                    1.0
                } else {
                    -1.0
                };
                *slot += weight * sign;
            }
        }
    }
    diag
}

/// Materialize a spec as a dense Hermitian matrix by direct subset
/// enumeration. The overall rescale (when requested) is derived from the
/// matrix itself — the z-basis diagonal maximum — so the construction
/// stays independent of the analytic sector formula.
pub fn build_dense(spec: &HamiltonianSpec) -> Result<DenseOperator> {
    let n = spec.n_qubits();
    if n > MAX_DENSE_QUBITS {
        return Err(Error::ResourceLimit(format!(
            "dense construction limited to {MAX_DENSE_QUBITS} qubits, requested {n}"
        )));
    }
    let dim = spec.dim();

    // The norm of the full operator equals the norm of its z-axis twin
    // (conjugation by a product of local unitaries), and that twin is
    // diagonal, so its norm is the max |diagonal entry|.
    let z_diag = raw_z_diagonal(spec);
    let max_abs = z_diag.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = match spec.normalization() {
        Normalization::None => 1.0,
        Normalization::OperatorNormHalfN => {
            let weight_scale: f64 = spec.couplings().values().map(|g| g.abs()).sum();
            if max_abs <= weight_scale * (n as f64 / 2.0) * 1e-12 {
                return Err(Error::DegenerateSpec);
            }
            (n as f64 / 2.0) / max_abs
        }
    };

    if spec.is_z_axis() {
        let mut entries = vec![Complex64::ZERO; dim * dim];
        for (idx, &v) in z_diag.iter().enumerate() {
            entries[idx * dim + idx] = Complex64::new(v * scale, 0.0);
        }
        return Ok(DenseOperator {
            dim,
            entries,
            is_diagonal: true,
        });
    }

    let local = axis_operator(spec.axis());
    let mut entries = vec![Complex64::ZERO; dim * dim];
    for (&order, &gamma) in spec.couplings() {
        if gamma == 0.0 {
            continue;
        }
        let weight = scale * gamma * (n as f64 / 2.0) / binomial(n as u64, order as u64) as f64;
        for mask in masks_of_weight(n, order) {
            // Qubit i occupies bit (n−1−i); the subset mask is over qubit
            // positions, so map it onto bit positions once.
            let bit_mask = {
                let mut b = 0usize;
                for q in 0..n {
                    if mask & (1 << q) != 0 {
                        b |= 1 << (n - 1 - q);
                    }
                }
                b
            };
            let member_bits: Vec<usize> =
                (0..n).filter(|&b| bit_mask & (1 << b) != 0).collect();
            for row in 0..dim {
                // Columns differ from the row only on subset bits.
                for assign in 0..(1usize << order) {
                    let mut col = row & !bit_mask;
                    let mut amp = Complex64::new(1.0, 0.0);
                    for (t, &b) in member_bits.iter().enumerate() {
                        let rbit = (row >> b) & 1;
                        let cbit = (assign >> t) & 1;
                        col |= cbit << b;
                        amp *= local[rbit * 2 + cbit];
                    }
                    entries[row * dim + col] += weight * amp;
                }
            }
        }
    }
    DenseOperator::from_entries(dim, entries)
}

/// Result of a Hermitian eigendecomposition: ascending eigenvalues and
/// the matching orthonormal eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    dim: usize,
    pub eigenvalues: Vec<f64>,
    /// Column-major: eigenvector i occupies `[i*dim .. (i+1)*dim]`.
    vectors: Vec<Complex64>,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eigenvector(&self, i: usize) -> &[Complex64] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }
}

/// Cyclic Jacobi eigendecomposition of a Hermitian matrix.
///
/// Sweeps annihilate each off-diagonal pair in turn with a phased plane
/// rotation; stops when the off-diagonal Frobenius mass drops below
/// 1e-14·‖A‖_F, errs after 100 sweeps.
pub fn eigendecompose_hermitian(a: &DenseOperator) -> Result<EigenDecomposition> {
    let dim = a.dim();
    let dev = hermiticity_deviation(dim, &a.entries);
    if dev > HERMITICITY_TOL {
        return Err(Error::NotHermitian(dev));
    }
    if a.is_diagonal {
        // Diagonal fast path: sort the diagonal, permute basis columns.
        let mut order: Vec<usize> = (0..dim).collect();
        let diag = a.diagonal();
        order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
        let mut vectors = vec![Complex64::ZERO; dim * dim];
        let mut eigenvalues = Vec::with_capacity(dim);
        for (col, &src) in order.iter().enumerate() {
            eigenvalues.push(diag[src]);
            vectors[col * dim + src] = Complex64::new(1.0, 0.0);
        }
        return Ok(EigenDecomposition {
            dim,
            eigenvalues,
            vectors,
        });
    }
    let mut work = a.entries.clone();
    let (eigenvalues, vectors) = jacobi_hermitian(dim, &mut work)?;
    Ok(EigenDecomposition {
        dim,
        eigenvalues,
        vectors,
    })
}

fn off_diagonal_mass(dim: usize, m: &[Complex64]) -> f64 {
    let mut sum = 0.0;
    for r in 0..dim {
        for c in 0..dim {
            if r != c {
                sum += m[r * dim + c].norm_sqr();
            }
        }
    }
    sum.sqrt()
}

/// In-place cyclic Jacobi on row-major Hermitian `m`; returns ascending
/// eigenvalues and column-major eigenvectors.
pub(crate) fn jacobi_hermitian(
    dim: usize,
    m: &mut [Complex64],
) -> Result<(Vec<f64>, Vec<Complex64>)> {
    let frob: f64 = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    // Column-major accumulator, starts as the identity.
    let mut v = vec![Complex64::ZERO; dim * dim];
    for i in 0..dim {
        v[i * dim + i] = Complex64::new(1.0, 0.0);
    }
    let threshold = JACOBI_OFF_TOL * frob;
    let mut converged = frob == 0.0 || off_diagonal_mass(dim, m) <= threshold;
    let mut sweeps = 0;
    while !converged {
        if sweeps >= JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence(JACOBI_MAX_SWEEPS));
        }
        for p in 0..dim {
            for q in (p + 1)..dim {
                let apq = m[p * dim + q];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let phase = apq / r;
                let app = m[p * dim + p].re;
                let aqq = m[q * dim + q].re;
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // Columns p and q of every row; restore rows from Hermiticity.
                for k in 0..dim {
                    let akp = m[k * dim + p];
                    let akq = m[k * dim + q];
                    m[k * dim + p] = c * akp - s * phase.conj() * akq;
                    m[k * dim + q] = s * phase * akp + c * akq;
                }
                for k in 0..dim {
                    m[p * dim + k] = m[k * dim + p].conj();
                    m[q * dim + k] = m[k * dim + q].conj();
                }
                let new_pp = c * c * app - 2.0 * s * c * r + s * s * aqq;
                let new_qq = s * s * app + 2.0 * s * c * r + c * c * aqq;
                m[p * dim + p] = Complex64::new(new_pp, 0.0);
                m[q * dim + q] = Complex64::new(new_qq, 0.0);
                m[p * dim + q] = Complex64::ZERO;
                m[q * dim + p] = Complex64::ZERO;

                for k in 0..dim {
                    let vkp = v[p * dim + k];
                    let vkq = v[q * dim + k];
                    v[p * dim + k] = c * vkp - s * phase.conj() * vkq;
                    v[q * dim + k] = s * phase * vkp + c * vkq;
                }
            }
        }
        sweeps += 1;
        converged = off_diagonal_mass(dim, m) <= threshold;
    }

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| m[i * dim + i].re.total_cmp(&m[j * dim + j].re));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| m[i * dim + i].re).collect();
    let mut vectors = vec![Complex64::ZERO; dim * dim];
    for (col, &src) in order.iter().enumerate() {
        vectors[col * dim..(col + 1) * dim].copy_from_slice(&v[src * dim..(src + 1) * dim]);
    }
    Ok((eigenvalues, vectors))
}

/// C = A·B for square row-major complex matrices.
pub(crate) fn mat_mul(dim: usize, a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut c = vec![Complex64::ZERO; dim * dim];
    for i in 0..dim {
        for k in 0..dim {
            let aik = a[i * dim + k];
            if aik == Complex64::ZERO {
                continue;
            }
            let brow = &b[k * dim..(k + 1) * dim];
            let crow = &mut c[i * dim..(i + 1) * dim];
            for (cv, bv) in crow.iter_mut().zip(brow) {
                *cv += aik * bv;
            }
        }
    }
    c
}

/// A dim×dim positive-semidefinite, unit-trace Hermitian matrix.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

/// Trace tolerance for density-matrix validation.
const TRACE_TOL: f64 = 1e-12;
/// Eigenvalue floor for positive semidefiniteness.
const PSD_TOL: f64 = -1e-10;

impl DensityMatrix {
    /// Validate Hermiticity, unit trace, and positive semidefiniteness.
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        let dev = hermiticity_deviation(dim, &entries);
        if dev > HERMITICITY_TOL {
            return Err(Error::NotDensity(format!(
                "Hermiticity deviation {dev:.3e}"
            )));
        }
        let trace: Complex64 = (0..dim).map(|i| entries[i * dim + i]).sum();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(Error::NotDensity(format!("trace {trace} instead of 1")));
        }
        let mut work = entries.clone();
        let (eigenvalues, _) = jacobi_hermitian(dim, &mut work)?;
        if eigenvalues[0] < PSD_TOL {
            return Err(Error::NotDensity(format!(
                "smallest eigenvalue {:.3e}",
                eigenvalues[0]
            )));
        }
        Ok(Self { dim, entries })
    }

    /// |ψ⟩⟨ψ| for a unit vector.
    pub fn from_pure(amplitudes: &[Complex64]) -> Result<Self> {
        let dim = amplitudes.len();
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NotDensity(format!("state norm² {norm} instead of 1")));
        }
        let mut entries = vec![Complex64::ZERO; dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                entries[r * dim + c] = amplitudes[r] * amplitudes[c].conj();
            }
        }
        Ok(Self { dim, entries })
    }

    /// Convex mixture Σ w_i |ψ_i⟩⟨ψ_i| of unit vectors; weights must sum to 1.
    pub fn mixture(parts: &[(f64, Vec<Complex64>)]) -> Result<Self> {
        let dim = parts
            .first()
            .map(|(_, v)| v.len())
            .ok_or_else(|| Error::NotDensity("empty mixture".into()))?;
        let mut entries = vec![Complex64::ZERO; dim * dim];
        for (w, amps) in parts {
            if amps.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: amps.len(),
                });
            }
            for r in 0..dim {
                for c in 0..dim {
                    entries[r * dim + c] += *w * amps[r] * amps[c].conj();
                }
            }
        }
        Self::new(dim, entries)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let mut entries = vec![Complex64::ZERO; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = Complex64::new(1.0 / dim as f64, 0.0);
        }
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{build_spectrum, AXIS_X, AXIS_Z};
    use std::collections::BTreeMap;

    fn diag_operator(values: &[f64]) -> DenseOperator {
        let dim = values.len();
        let mut entries = vec![Complex64::ZERO; dim * dim];
        for (i, &v) in values.iter().enumerate() {
            entries[i * dim + i] = Complex64::new(v, 0.0);
        }
        DenseOperator {
            dim,
            entries,
            is_diagonal: true,
        }
    }

    #[test]
    fn dense_pair_interaction_n3_diagonal() {
        let spec = HamiltonianSpec::single_order(3, 2).unwrap();
        let op = build_dense(&spec).unwrap();
        assert!(op.is_diagonal());
        let expected = [1.5, -0.5, -0.5, -0.5, -0.5, -0.5, -0.5, 1.5];
        for (got, want) in op.diagonal().iter().zip(expected) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn dense_single_body_n2() {
        let spec = HamiltonianSpec::single_order(2, 1).unwrap();
        let op = build_dense(&spec).unwrap();
        let diag = op.diagonal();
        assert_eq!(diag, vec![1.0, 0.0, 0.0, -1.0]);
    }

    #[test]
    fn dense_three_body_x_axis_spectrum() {
        let spec = HamiltonianSpec::new(
            3,
            BTreeMap::from([(3, 1.0)]),
            AXIS_X,
            Normalization::OperatorNormHalfN,
        )
        .unwrap();
        let op = build_dense(&spec).unwrap();
        assert!(!op.is_diagonal());
        let eig = eigendecompose_hermitian(&op).unwrap();
        for (i, &lam) in eig.eigenvalues.iter().enumerate() {
            let want = if i < 4 { -1.5 } else { 1.5 };
            assert!((lam - want).abs() < 1e-10, "λ_{i} = {lam}");
        }
    }

    #[test]
    fn dense_rejects_large_n() {
        let spec = HamiltonianSpec::single_order(13, 1).unwrap();
        assert!(matches!(
            build_dense(&spec),
            Err(Error::ResourceLimit(_))
        ));
    }

    #[test]
    fn eigendecompose_identity() {
        let op = diag_operator(&[1.0, 1.0, 1.0, 1.0]);
        let eig = eigendecompose_hermitian(&op).unwrap();
        assert_eq!(eig.eigenvalues, vec![1.0; 4]);
    }

    #[test]
    fn eigendecompose_sorts_diagonal() {
        let op = diag_operator(&[3.0, 1.0, 2.0, 0.5]);
        let eig = eigendecompose_hermitian(&op).unwrap();
        assert_eq!(eig.eigenvalues, vec![0.5, 1.0, 2.0, 3.0]);
        // Eigenvector columns must still map to the right sources.
        for (col, src) in [(0usize, 3usize), (1, 1), (2, 2), (3, 0)] {
            assert_eq!(eig.eigenvector(col)[src], Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn dense_n3_pair_eigenvalue_multiset() {
        let spec = HamiltonianSpec::single_order(3, 2).unwrap();
        let op = build_dense(&spec).unwrap();
        let eig = eigendecompose_hermitian(&op).unwrap();
        let low = eig.eigenvalues.iter().filter(|&&l| (l + 0.5).abs() < 1e-12).count();
        let high = eig.eigenvalues.iter().filter(|&&l| (l - 1.5).abs() < 1e-12).count();
        assert_eq!((low, high), (6, 2));
    }

    #[test]
    fn jacobi_known_2x2() {
        // [[1, i], [-i, 1]] has eigenvalues 0 and 2.
        let entries = vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(1.0, 0.0),
        ];
        let op = DenseOperator::from_entries(2, entries).unwrap();
        let eig = eigendecompose_hermitian(&op).unwrap();
        assert!((eig.eigenvalues[0] - 0.0).abs() < 1e-12);
        assert!((eig.eigenvalues[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn jacobi_residual_and_reconstruction() {
        // Deterministic pseudo-random Hermitian matrix.
        let dim = 16;
        let mut state = 0x2545F4914F6CDD1Du64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut entries = vec![Complex64::ZERO; dim * dim];
        for r in 0..dim {
            entries[r * dim + r] = Complex64::new(next(), 0.0);
            for c in (r + 1)..dim {
                let z = Complex64::new(next(), next());
                entries[r * dim + c] = z;
                entries[c * dim + r] = z.conj();
            }
        }
        let op = DenseOperator::from_entries(dim, entries).unwrap();
        let eig = eigendecompose_hermitian(&op).unwrap();

        let norm: f64 = op.entries().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for i in 0..dim {
            let v = eig.eigenvector(i);
            let av = op.mul_vec(v).unwrap();
            let resid = av
                .iter()
                .zip(v)
                .map(|(a, b)| (a - eig.eigenvalues[i] * b).norm())
                .fold(0.0f64, f64::max);
            assert!(resid < 1e-10 * norm, "residual {resid} for λ_{i}");
        }
        // Orthonormality of the eigenvector columns.
        for i in 0..dim {
            for j in 0..dim {
                let dot: Complex64 = eig
                    .eigenvector(i)
                    .iter()
                    .zip(eig.eigenvector(j))
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot.norm() - want).abs() < 1e-10, "⟨{i}|{j}⟩ = {dot}");
            }
        }
        // V diag(λ) V† = A.
        let mut recon = vec![Complex64::ZERO; dim * dim];
        for k in 0..dim {
            let v = eig.eigenvector(k);
            for r in 0..dim {
                for c in 0..dim {
                    recon[r * dim + c] += eig.eigenvalues[k] * v[r] * v[c].conj();
                }
            }
        }
        for (a, b) in recon.iter().zip(op.entries()) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn eigendecompose_rejects_non_hermitian() {
        let entries = vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        ];
        assert!(DenseOperator::from_entries(2, entries).is_err());
    }

    #[test]
    fn dense_matches_analytic_spectrum_small() {
        for n in 2..=6 {
            for m in 1..=n.min(5) {
                let spec = HamiltonianSpec::up_to_order(n, m).unwrap();
                let dense = build_dense(&spec).unwrap();
                let mut diag = dense.diagonal();
                diag.sort_by(|a, b| a.total_cmp(b));
                let analytic = build_spectrum(&spec).unwrap().expand_sorted();
                for (d, a) in diag.iter().zip(&analytic) {
                    assert!((d - a).abs() < 1e-12, "n={n} m={m}: {d} vs {a}");
                }
            }
        }
    }

    #[test]
    fn dense_axis_invariance_n4() {
        let couplings = BTreeMap::from([(1, 1.0), (2, 1.0), (3, 0.5)]);
        let z = HamiltonianSpec::new(
            4,
            couplings.clone(),
            AXIS_Z,
            Normalization::OperatorNormHalfN,
        )
        .unwrap();
        let x =
            HamiltonianSpec::new(4, couplings, AXIS_X, Normalization::OperatorNormHalfN).unwrap();
        let mut z_eigs = build_dense(&z).unwrap().diagonal();
        z_eigs.sort_by(|a, b| a.total_cmp(b));
        let x_eigs = eigendecompose_hermitian(&build_dense(&x).unwrap())
            .unwrap()
            .eigenvalues;
        for (a, b) in z_eigs.iter().zip(&x_eigs) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn dense_norm_constant_matches_analytic() {
        // The dense rescale is derived from the subset-sum diagonal; it must
        // coincide with the analytic norm constant.
        for (n, m) in [(3, 2), (4, 3), (5, 2), (6, 4)] {
            let spec = HamiltonianSpec::up_to_order(n, m).unwrap();
            let dense_max = build_dense(&spec)
                .unwrap()
                .diagonal()
                .iter()
                .fold(0.0f64, |acc, v| acc.max(v.abs()));
            assert!((dense_max - n as f64 / 2.0).abs() < 1e-12, "n={n} m={m}");
        }
    }

    #[test]
    fn density_matrix_validation() {
        let rho = DensityMatrix::maximally_mixed(4);
        assert_eq!(rho.dim(), 4);

        let amps = vec![
            Complex64::new(0.6, 0.0),
            Complex64::new(0.0, 0.8),
        ];
        let pure = DensityMatrix::from_pure(&amps).unwrap();
        let trace: Complex64 = (0..2).map(|i| pure.entries()[i * 2 + i]).sum();
        assert!((trace.re - 1.0).abs() < 1e-12);

        // Trace 2 is rejected.
        let bad = vec![
            Complex64::new(1.0, 0.0),
            Complex64::ZERO,
            Complex64::ZERO,
            Complex64::new(1.0, 0.0),
        ];
        assert!(DensityMatrix::new(2, bad).is_err());

        // A negative eigenvalue is rejected.
        let neg = vec![
            Complex64::new(1.5, 0.0),
            Complex64::ZERO,
            Complex64::ZERO,
            Complex64::new(-0.5, 0.0),
        ];
        assert!(matches!(
            DensityMatrix::new(2, neg),
            Err(Error::NotDensity(_))
        ));
    }

    #[test]
    fn masks_of_weight_counts() {
        for n in 1..=10usize {
            for k in 0..=n {
                let count = masks_of_weight(n, k).count() as u128;
                assert_eq!(count, binomial(n as u64, k as u64), "n={n} k={k}");
                for mask in masks_of_weight(n, k) {
                    assert_eq!(mask.count_ones() as usize, k);
                    assert!(mask < (1 << n));
                }
            }
        }
    }
}

//! Analytic excitation-sector spectra of the symmetric k-body Ising family.
//!
//! Every member of the family is a permutation-symmetric sum of `n̂·σ`
//! strings of fixed interaction order, so it is constant on each
//! excitation sector (the basis states with exactly `e` local `|1⟩`
//! factors). The full 2^N spectrum therefore compresses to N+1 sector
//! values Ω_e with binomial degeneracies C(N, e). Each pure order k'
//! carries the conventional prefactor (N/2)/C(N, k') so that a
//! single-order Hamiltonian has operator norm N/2; sums of orders can
//! additionally be rescaled as a whole to restore that norm.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest qubit count the analytic family supports.
pub const MAX_QUBITS: usize = 16;

/// Tolerance on `‖axis‖ = 1`.
const AXIS_UNIT_TOL: f64 = 1e-12;

pub const AXIS_X: [f64; 3] = [1.0, 0.0, 0.0];
pub const AXIS_Y: [f64; 3] = [0.0, 1.0, 0.0];
pub const AXIS_Z: [f64; 3] = [0.0, 0.0, 1.0];

/// How the assembled operator is rescaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Normalization {
    /// Keep the raw weighted sum of per-order terms.
    None,
    /// Rescale the total so that `max_e |Ω_e| = N/2`.
    OperatorNormHalfN,
}

/// Exact binomial coefficient C(n, k); 0 when `k > n`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // The running product of i+1 consecutive integers divides evenly.
        acc = acc * (n - i) as u128 / (i as u128 + 1);
    }
    acc
}

/// Sector size C(n, e).
pub fn degeneracy(n: usize, e: usize) -> Result<u64> {
    if e > n {
        return Err(Error::Domain(format!(
            "excitation count {e} exceeds qubit count {n}"
        )));
    }
    Ok(binomial(n as u64, e as u64) as u64)
}

/// Sector eigenvalue ω_e of the pure order-k' family member on n qubits.
///
/// ω_e = (N/2) · Σ_j (−1)^j C(e,j) C(N−e, k'−j) / C(N, k'), with the
/// signed sum accumulated in exact integers and the division done last.
pub fn omega_term(n: usize, k_prime: usize, e: usize) -> Result<f64> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::Domain(format!(
            "qubit count {n} outside 1..={MAX_QUBITS}"
        )));
    }
    if e > n {
        return Err(Error::Domain(format!(
            "excitation count {e} exceeds qubit count {n}"
        )));
    }
    if k_prime == 0 || k_prime > n {
        return Err(Error::Domain(format!(
            "interaction order {k_prime} outside 1..={n}"
        )));
    }
    let mut signed_sum: i128 = 0;
    for j in 0..=e.min(k_prime) {
        let term =
            (binomial(e as u64, j as u64) * binomial((n - e) as u64, (k_prime - j) as u64)) as i128;
        if j % 2 == 0 {
            signed_sum += term;
        } else {
            signed_sum -= term;
        }
    }
    let numer = n as i128 * signed_sum;
    let denom = 2 * binomial(n as u64, k_prime as u64);
    Ok(numer as f64 / denom as f64)
}

/// Symbolic description of one member of the family.
///
/// `couplings` maps interaction order k' to its weight γ_{k'}; the
/// canonical H_{k≤m} has γ_{k'} = 1 for every k' ≤ m. `axis` is the
/// common local direction n̂ of the `n̂·σ` factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecJson", into = "SpecJson")]
pub struct HamiltonianSpec {
    n_qubits: usize,
    couplings: BTreeMap<usize, f64>,
    axis: [f64; 3],
    normalization: Normalization,
}

/// Wire form: `{"n": 3, "couplings": {"2": 1.0}, "axis": [0,0,1], "normalized": true}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct SpecJson {
    n: usize,
    couplings: BTreeMap<usize, f64>,
    axis: [f64; 3],
    normalized: bool,
}

impl TryFrom<SpecJson> for HamiltonianSpec {
    type Error = Error;

    fn try_from(j: SpecJson) -> Result<Self> {
        let normalization = if j.normalized {
            Normalization::OperatorNormHalfN
        } else {
            Normalization::None
        };
        HamiltonianSpec::new(j.n, j.couplings, j.axis, normalization)
    }
}

impl From<HamiltonianSpec> for SpecJson {
    fn from(spec: HamiltonianSpec) -> Self {
        SpecJson {
            n: spec.n_qubits,
            couplings: spec.couplings,
            axis: spec.axis,
            normalized: spec.normalization == Normalization::OperatorNormHalfN,
        }
    }
}

impl HamiltonianSpec {
    pub fn new(
        n_qubits: usize,
        couplings: BTreeMap<usize, f64>,
        axis: [f64; 3],
        normalization: Normalization,
    ) -> Result<Self> {
        if !(2..=MAX_QUBITS).contains(&n_qubits) {
            return Err(Error::InvalidSpec(format!(
                "qubit count {n_qubits} outside 2..={MAX_QUBITS}"
            )));
        }
        for (&order, &gamma) in &couplings {
            if order == 0 || order > n_qubits {
                return Err(Error::InvalidSpec(format!(
                    "interaction order {order} outside 1..={n_qubits}"
                )));
            }
            if !gamma.is_finite() {
                return Err(Error::InvalidSpec(format!(
                    "coupling for order {order} is not finite"
                )));
            }
        }
        if !couplings.values().any(|&g| g != 0.0) {
            return Err(Error::InvalidSpec(
                "at least one coupling must be nonzero".into(),
            ));
        }
        let norm = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        if (norm - 1.0).abs() > AXIS_UNIT_TOL {
            return Err(Error::InvalidSpec(format!(
                "axis must be a unit vector, got norm {norm}"
            )));
        }
        Ok(Self {
            n_qubits,
            couplings,
            axis,
            normalization,
        })
    }

    /// The pure order-k family member (γ_k = 1), z axis, normalized.
    pub fn single_order(n_qubits: usize, k: usize) -> Result<Self> {
        Self::new(
            n_qubits,
            BTreeMap::from([(k, 1.0)]),
            AXIS_Z,
            Normalization::OperatorNormHalfN,
        )
    }

    /// H_{k≤m}: unit weight on every order up to m, z axis, normalized.
    pub fn up_to_order(n_qubits: usize, m: usize) -> Result<Self> {
        if m == 0 || m > n_qubits {
            return Err(Error::InvalidSpec(format!(
                "maximal order {m} outside 1..={n_qubits}"
            )));
        }
        Self::new(
            n_qubits,
            (1..=m).map(|k| (k, 1.0)).collect(),
            AXIS_Z,
            Normalization::OperatorNormHalfN,
        )
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn couplings(&self) -> &BTreeMap<usize, f64> {
        &self.couplings
    }

    pub fn axis(&self) -> [f64; 3] {
        self.axis
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    /// Hilbert-space dimension 2^N.
    pub fn dim(&self) -> usize {
        1usize << self.n_qubits
    }

    pub fn is_z_axis(&self) -> bool {
        self.axis == AXIS_Z
    }
}

/// The compressed spectrum: one eigenvalue per excitation sector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExcitationSpectrum {
    n_qubits: usize,
    omegas: Vec<f64>,
    degeneracies: Vec<u64>,
    norm_constant: f64,
}

impl ExcitationSpectrum {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Sector eigenvalues Ω_0 … Ω_N.
    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn omega(&self, e: usize) -> f64 {
        self.omegas[e]
    }

    pub fn degeneracies(&self) -> &[u64] {
        &self.degeneracies
    }

    /// The rescale factor actually applied to the raw weighted sum (1 when unnormalized).
    pub fn norm_constant(&self) -> f64 {
        self.norm_constant
    }

    pub fn max_abs_omega(&self) -> f64 {
        self.omegas.iter().fold(0.0, |m, w| m.max(w.abs()))
    }

    /// All 2^N eigenvalues, sector values expanded by degeneracy, ascending.
    pub fn expand_sorted(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(1 << self.n_qubits);
        for (e, &w) in self.omegas.iter().enumerate() {
            out.extend(std::iter::repeat(w).take(self.degeneracies[e] as usize));
        }
        out.sort_by(|a, b| a.total_cmp(b));
        out
    }
}

/// Assemble the sector spectrum Ω_e = Σ_{k'} γ_{k'} ω_e^{N,k'} of a spec,
/// applying the requested operator-norm rescaling to the total.
///
/// The local axis does not enter: the spectrum is invariant under the
/// local unitary that rotates n̂ to ẑ.
pub fn build_spectrum(spec: &HamiltonianSpec) -> Result<ExcitationSpectrum> {
    let n = spec.n_qubits();
    let mut omegas = vec![0.0f64; n + 1];
    let mut weight_scale = 0.0f64;
    for (&order, &gamma) in spec.couplings() {
        if gamma == 0.0 {
            continue;
        }
        weight_scale += gamma.abs();
        for (e, slot) in omegas.iter_mut().enumerate() {
            *slot += gamma * omega_term(n, order, e)?;
        }
    }
    let max_abs = omegas.iter().fold(0.0f64, |m, w| m.max(w.abs()));
    let mut norm_constant = 1.0;
    if spec.normalization() == Normalization::OperatorNormHalfN {
        // weight_scale * N/2 bounds the raw norm; anything 12 orders below
        // it is cancellation noise, not a normalizable operator.
        if max_abs <= weight_scale * (n as f64 / 2.0) * 1e-12 {
            return Err(Error::DegenerateSpec);
        }
        norm_constant = (n as f64 / 2.0) / max_abs;
        for w in &mut omegas {
            *w *= norm_constant;
        }
    }
    let degeneracies = (0..=n)
        .map(|e| degeneracy(n, e))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExcitationSpectrum {
        n_qubits: n,
        omegas,
        degeneracies,
        norm_constant,
    })
}

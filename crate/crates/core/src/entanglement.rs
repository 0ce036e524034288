//! Quantum-information observables over reduced density matrices: one- and
//! two-orbital von Neumann entropies, the two-orbital mutual information
//! matrix, block-entropy profiles, total correlation and entanglement-bond
//! counts. Natural logarithm throughout (nats).
//!
//! Sign convention: the mutual information emitted here is the non-negative
//! quantity `I_ij = s(1)_i + s(1)_j - s(2)_ij`, the weight consumed by the
//! ordering cost function and the graph Laplacian. The signed block-growth
//! ledger quantity (which is <= 0) lives with the DMRG sweep diagnostics.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fci::SubsetRdm;

#[derive(Debug, Error)]
pub enum EntanglementError {
    #[error("density matrix trace deviates from 1 by {0:.3e}")]
    NotNormalized(f64),
    #[error("subadditivity violated for pair ({i}, {j}): s2 = {s2} > s1_i + s1_j = {bound} + 1e-10")]
    Subadditivity { i: usize, j: usize, s2: f64, bound: f64 },
    #[error("dimension mismatch: {0}")]
    SizeMismatch(String),
    #[error("negative entropy input at orbital {0}")]
    NegativeEntropy(usize),
}

pub type Result<T> = std::result::Result<T, EntanglementError>;

/// -Σ w ln w over an eigenvalue list, with 0 ln 0 := 0 and small negative
/// round-off clamped away.
pub fn entropy_of_spectrum(weights: &[f64]) -> f64 {
    let mut s = 0.0;
    for &w in weights {
        if w > 1e-300 {
            s -= w * w.ln();
        }
    }
    s.max(0.0)
}

/// Von Neumann entropy of a reduced density matrix (nats).
pub fn entropy_of_rdm(rho: &SubsetRdm) -> Result<f64> {
    let dev = (rho.trace() - 1.0).abs();
    if dev > 1e-8 {
        return Err(EntanglementError::NotNormalized(dev));
    }
    Ok(entropy_of_spectrum(&rho.eigenvalues()))
}

/// Single-orbital and block entropies of one sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntropyProfile {
    pub sweep_index: usize,
    /// s(1)_i per orbital (nats); each lies in [0, ln 4].
    pub s1: Vec<f64>,
    /// Block entropy s(l) for l = 0..=N; endpoints are exactly zero.
    pub block: Vec<f64>,
}

impl EntropyProfile {
    /// Largest entry-wise change against another profile of the same shape.
    pub fn max_delta(&self, other: &EntropyProfile) -> f64 {
        let d1 = self
            .s1
            .iter()
            .zip(&other.s1)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let d2 = self
            .block
            .iter()
            .zip(&other.block)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        d1.max(d2)
    }
}

/// Symmetric two-orbital mutual information with its entropy inputs.
#[derive(Debug, Clone)]
pub struct MutualInfoMatrix {
    pub n: usize,
    /// I_ij >= 0, zero diagonal.
    pub values: DMatrix<f64>,
    pub s1: Vec<f64>,
    /// Two-orbital entropies; diagonal unused (zero).
    pub s2: DMatrix<f64>,
}

impl MutualInfoMatrix {
    /// Column sums Σ_j I_ij — the diagonal of the graph Laplacian consumed by
    /// the ordering module.
    pub fn laplacian_degrees(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.values[(i, j)]).sum())
            .collect()
    }

    /// Graph Laplacian L = D - I.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let mut l = -self.values.clone();
        for (i, d) in self.laplacian_degrees().into_iter().enumerate() {
            l[(i, i)] = d;
        }
        l
    }
}

/// Builds the mutual information matrix from per-orbital entropies and the
/// pair-entropy table: `I_ij = s1_i + s1_j - s2_ij`, clamped at the -1e-10
/// tolerance. A larger subadditivity violation signals corrupt RDMs upstream
/// and is reported as an error.
pub fn mutual_information(s1: &[f64], s2: &DMatrix<f64>) -> Result<MutualInfoMatrix> {
    let n = s1.len();
    if s2.nrows() != n || s2.ncols() != n {
        return Err(EntanglementError::SizeMismatch(format!(
            "s1 has {n} entries, s2 is {}x{}",
            s2.nrows(),
            s2.ncols()
        )));
    }
    let mut values = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let raw = s1[i] + s1[j] - s2[(i, j)];
            if raw < -1e-10 {
                return Err(EntanglementError::Subadditivity {
                    i,
                    j,
                    s2: s2[(i, j)],
                    bound: s1[i] + s1[j],
                });
            }
            values[(i, j)] = raw.max(0.0);
        }
    }
    Ok(MutualInfoMatrix {
        n,
        values,
        s1: s1.to_vec(),
        s2: s2.clone(),
    })
}

/// Builds the full mutual-information object from measured one- and
/// two-orbital RDMs (any consistent source: exact oracle or DMRG sweep
/// measurement).
pub fn mutual_info_from_rdms(ones: &[SubsetRdm], pairs: &[SubsetRdm]) -> Result<MutualInfoMatrix> {
    let n = ones.len();
    let mut s1 = vec![0.0; n];
    for rdm in ones {
        if rdm.orbitals.len() != 1 || rdm.orbitals[0] >= n {
            return Err(EntanglementError::SizeMismatch(
                "one-orbital RDM set must cover orbitals 0..n".into(),
            ));
        }
        s1[rdm.orbitals[0]] = entropy_of_rdm(rdm)?;
    }
    let mut s2 = DMatrix::zeros(n, n);
    for rdm in pairs {
        if rdm.orbitals.len() != 2 {
            return Err(EntanglementError::SizeMismatch(
                "pair RDM with wrong subset size".into(),
            ));
        }
        let (i, j) = (rdm.orbitals[0], rdm.orbitals[1]);
        let s = entropy_of_rdm(rdm)?;
        s2[(i, j)] = s;
        s2[(j, i)] = s;
    }
    mutual_information(&s1, &s2)
}

/// Total quantum correlation I_Tot = Σ_i s(1)_i.
pub fn total_correlation(s1: &[f64]) -> f64 {
    s1.iter().sum()
}

/// Number of entanglement bonds per orbital: how many partners exceed the
/// threshold (default display cutoff 1e-4).
pub fn bond_count(i_mat: &MutualInfoMatrix, threshold: f64) -> Vec<usize> {
    (0..i_mat.n)
        .map(|i| {
            (0..i_mat.n)
                .filter(|&j| j != i && i_mat.values[(i, j)] > threshold)
                .count()
        })
        .collect()
}

pub const DEFAULT_BOND_THRESHOLD: f64 = 1e-4;

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_rdm(diag: [f64; 4]) -> SubsetRdm {
        SubsetRdm {
            orbitals: vec![0],
            matrix: DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&diag)),
        }
    }

    #[test]
    fn entropy_values() {
        assert_eq!(entropy_of_rdm(&diag_rdm([1.0, 0.0, 0.0, 0.0])).unwrap(), 0.0);
        let s = entropy_of_rdm(&diag_rdm([0.25; 4])).unwrap();
        assert!((s - 4.0f64.ln()).abs() < 1e-14);
        let s = entropy_of_rdm(&diag_rdm([0.0, 0.5, 0.5, 0.0])).unwrap();
        assert!((s - 2.0f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn non_normalized_rejected() {
        let bad = diag_rdm([0.5, 0.0, 0.0, 0.0]);
        assert!(matches!(
            entropy_of_rdm(&bad),
            Err(EntanglementError::NotNormalized(_))
        ));
    }

    #[test]
    fn product_state_has_zero_mutual_information() {
        let s1 = [0.3, 0.7];
        let mut s2 = DMatrix::zeros(2, 2);
        s2[(0, 1)] = 1.0;
        s2[(1, 0)] = 1.0;
        let m = mutual_information(&s1, &s2).unwrap();
        assert_eq!(m.values[(0, 1)], 0.0);
        assert_eq!(m.values[(1, 1)], 0.0);
    }

    #[test]
    fn subadditivity_violation_detected() {
        let s1 = [0.1, 0.1];
        let mut s2 = DMatrix::zeros(2, 2);
        s2[(0, 1)] = 0.5;
        s2[(1, 0)] = 0.5;
        assert!(matches!(
            mutual_information(&s1, &s2),
            Err(EntanglementError::Subadditivity { .. })
        ));
    }

    #[test]
    fn laplacian_degrees_match_column_sums() {
        let s1 = [1.0, 1.0, 1.0];
        let mut s2 = DMatrix::zeros(3, 3);
        for (i, j, v) in [(0, 1, 1.5), (0, 2, 1.9), (1, 2, 1.2)] {
            s2[(i, j)] = v;
            s2[(j, i)] = v;
        }
        let m = mutual_information(&s1, &s2).unwrap();
        let l = m.laplacian();
        let ones = nalgebra::DVector::from_element(3, 1.0);
        assert!((&l * ones).norm() < 1e-14);
        for (i, d) in m.laplacian_degrees().iter().enumerate() {
            assert!((l[(i, i)] - d).abs() < 1e-14);
        }
    }

    #[test]
    fn bond_counting() {
        let s1 = [1.0, 1.0, 1.0, 1.0];
        let mut s2 = DMatrix::from_element(4, 4, 2.0);
        s2[(0, 1)] = 1.5;
        s2[(1, 0)] = 1.5;
        let m = mutual_information(&s1, &s2).unwrap();
        assert_eq!(bond_count(&m, 1e-4), vec![1, 1, 0, 0]);
        assert_eq!(bond_count(&m, 10.0), vec![0, 0, 0, 0]);
        assert_eq!(total_correlation(&m.s1), 4.0);
    }
}

//! Reduced density matrices of one- and two-orbital subsets, computed two
//! independent ways: a brute-force partial trace over grouped amplitudes and
//! an expectation-value route through fermionized local transition operators.
//! Both use the same local basis (|0>, |dn>, |up>, |updn> per orbital with
//! |updn> = c†_up c†_dn |0>) and must agree entry by entry; the test suite
//! pins that.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use super::basis::{apply_dn, apply_up, below_mask};
use super::{FciError, Result, WaveVector};

/// Local configuration of one orbital inside a determinant: 0, dn, up, updn.
#[inline]
pub(crate) fn local_cfg(up: u64, dn: u64, orb: usize) -> u8 {
    (((up >> orb) & 1) * 2 + ((dn >> orb) & 1)) as u8
}

#[inline]
fn cfg_n(cfg: u8) -> u32 {
    ((cfg >> 1) + (cfg & 1)) as u32
}

/// Applies the fermionized transition operator |to><from| of one orbital to a
/// determinant. The returned sign is normalized so that on a single isolated
/// orbital the matrix of the operator is exactly the matrix unit E_{to,from}.
pub(crate) fn apply_transition(
    up: u64,
    dn: u64,
    orb: usize,
    from: u8,
    to: u8,
) -> Option<(u64, u64, f64)> {
    if local_cfg(up, dn, orb) != from {
        return None;
    }
    let f_up = from & 2 != 0;
    let f_dn = from & 1 != 0;
    let t_up = to & 2 != 0;
    let t_dn = to & 1 != 0;
    // Application order (rightmost first): ann up, ann dn, cre dn, cre up.
    let mut steps: Vec<(bool, bool)> = Vec::with_capacity(4);
    if f_up && !t_up {
        steps.push((false, true));
    }
    if f_dn && !t_dn {
        steps.push((false, false));
    }
    if !f_dn && t_dn {
        steps.push((true, false));
    }
    if !f_up && t_up {
        steps.push((true, true));
    }
    let run = |mut u: u64, mut d: u64, orb: usize| -> Option<(u64, u64, f64)> {
        let mut sign = 1.0;
        for &(dagger, is_up) in &steps {
            let (nu, nd, s) = if is_up {
                apply_up(u, d, dagger, orb)?
            } else {
                apply_dn(u, d, dagger, orb)?
            };
            u = nu;
            d = nd;
            sign *= s;
        }
        Some((u, d, sign))
    };
    // Local correction: the same string on an isolated orbital must give +1.
    let (lu, ld) = ((from as u64 >> 1) & 1, from as u64 & 1);
    let (_, _, local_sign) = run(lu, ld, 0).expect("transition consistent locally");
    let (u2, d2, global_sign) = run(up, dn, orb)?;
    Some((u2, d2, global_sign * local_sign))
}

/// Hermitian reduced density matrix of a 1- or 2-orbital subset.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetRdm {
    /// Sorted orbital indices; the local basis is the tensor product in this
    /// order (first orbital is the slow index).
    pub orbitals: Vec<usize>,
    pub matrix: DMatrix<f64>,
}

impl SubsetRdm {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    /// Eigenvalues sorted descending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let se = self.matrix.clone().symmetric_eigen();
        let mut vals: Vec<f64> = se.eigenvalues.iter().copied().collect();
        vals.sort_by(|a, b| b.total_cmp(a));
        vals
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        if (self.trace() - 1.0).abs() > tol {
            return Err(FciError::BadRdm(format!(
                "trace {} deviates from 1",
                self.trace()
            )));
        }
        for i in 0..self.dim() {
            for j in 0..i {
                if (self.matrix[(i, j)] - self.matrix[(j, i)]).abs() > tol {
                    return Err(FciError::BadRdm("not symmetric".into()));
                }
            }
        }
        if self.eigenvalues().iter().any(|&w| w < -tol) {
            return Err(FciError::BadRdm("negative eigenvalue".into()));
        }
        Ok(())
    }

    /// Partial trace of a two-orbital RDM onto one of its orbitals.
    pub fn trace_out(&self, keep: usize) -> Result<SubsetRdm> {
        if self.orbitals.len() != 2 {
            return Err(FciError::BadRdm("trace_out needs a two-orbital RDM".into()));
        }
        let pos = self
            .orbitals
            .iter()
            .position(|&o| o == keep)
            .ok_or_else(|| FciError::BadRdm(format!("orbital {keep} not in subset")))?;
        let mut out = DMatrix::zeros(4, 4);
        for a in 0..4 {
            for b in 0..4 {
                let mut acc = 0.0;
                for e in 0..4 {
                    let (i, j) = if pos == 0 {
                        (a * 4 + e, b * 4 + e)
                    } else {
                        (e * 4 + a, e * 4 + b)
                    };
                    acc += self.matrix[(i, j)];
                }
                out[(a, b)] = acc;
            }
        }
        Ok(SubsetRdm {
            orbitals: vec![keep],
            matrix: out,
        })
    }
}

fn checked_subset(n_orbitals: usize, orbitals: &[usize]) -> Result<Vec<usize>> {
    if orbitals.is_empty() || orbitals.len() > 2 {
        return Err(FciError::BadSubset(format!(
            "subset must hold 1 or 2 orbitals, got {}",
            orbitals.len()
        )));
    }
    let mut sorted = orbitals.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != orbitals.len() {
        return Err(FciError::BadSubset("orbital indices must be distinct".into()));
    }
    if sorted.iter().any(|&o| o >= n_orbitals) {
        return Err(FciError::BadSubset("orbital index out of range".into()));
    }
    Ok(sorted)
}

/// Partial trace of |psi><psi| over all orbitals outside `orbitals`.
///
/// Amplitude route: determinants are grouped by their environment
/// configuration; the fermionic sign comes from sorting the subset modes (in
/// on-site up-dn interleaved order) in front of the environment modes.
pub fn subset_rdm(psi: &WaveVector, orbitals: &[usize]) -> Result<SubsetRdm> {
    let basis = &psi.basis;
    let sorted = checked_subset(basis.n_orbitals, orbitals)?;
    let k = sorted.len();
    let dim = 4usize.pow(k as u32);
    let mut mask = 0u64;
    for &o in &sorted {
        mask |= 1 << o;
    }
    let mut groups: BTreeMap<(u64, u64), Vec<(usize, f64)>> = BTreeMap::new();
    for i in 0..basis.len() {
        let amp = psi.amplitudes[i];
        if amp == 0.0 {
            continue;
        }
        let (up, dn) = basis.det(i);
        let env_up = up & !mask;
        let env_dn = dn & !mask;

        let mut local = 0usize;
        let mut inversions: u32 = 0;
        for &o in &sorted {
            local = local * 4 + local_cfg(up, dn, o) as usize;
            if up & (1 << o) != 0 {
                inversions += (env_up & below_mask(o)).count_ones();
            }
            if dn & (1 << o) != 0 {
                inversions += env_up.count_ones() + (env_dn & below_mask(o)).count_ones();
            }
        }
        if k == 2 {
            // Global order lists up modes of both orbitals before their down
            // modes; the target interleaved order swaps (up_j, dn_i).
            let (i0, j0) = (sorted[0], sorted[1]);
            if up & (1 << j0) != 0 && dn & (1 << i0) != 0 {
                inversions += 1;
            }
        }
        let signed = if inversions % 2 == 0 { amp } else { -amp };
        groups.entry((env_up, env_dn)).or_default().push((local, signed));
    }
    let mut rho = DMatrix::zeros(dim, dim);
    for entries in groups.values() {
        for &(a, xa) in entries {
            for &(b, xb) in entries {
                rho[(a, b)] += xa * xb;
            }
        }
    }
    Ok(SubsetRdm {
        orbitals: sorted,
        matrix: rho,
    })
}

/// Assembles a two-orbital RDM from raw correlator expectations
/// `expect(a, a2, b, b2) = <psi| E^(i)_{a->a2} E^(j)_{b->b2} |psi>` (i < j,
/// rightmost operator applied first).
///
/// The operator product equals the graded tensor product of the two local
/// matrix units, which differs from the partial-trace matrix element by the
/// left parity whenever the right factor is odd:
/// `rho[(ab),(a2 b2)] = (-1)^{n(a)} <E E>` for odd `b -> b2`.
pub(crate) fn assemble_pair_rdm(mut expect: impl FnMut(u8, u8, u8, u8) -> f64) -> DMatrix<f64> {
    let mut rho = DMatrix::zeros(16, 16);
    for a in 0..4u8 {
        for b in 0..4u8 {
            for a2 in 0..4u8 {
                for b2 in 0..4u8 {
                    // Quantum-number balance: everything else vanishes.
                    if cfg_n(a2) + cfg_n(b2) != cfg_n(a) + cfg_n(b) {
                        continue;
                    }
                    let j_odd = (cfg_n(b) + cfg_n(b2)) % 2 == 1;
                    let sign = if j_odd && cfg_n(a) % 2 == 1 { -1.0 } else { 1.0 };
                    let row = (a * 4 + b) as usize;
                    let col = (a2 * 4 + b2) as usize;
                    rho[(row, col)] = sign * expect(a, a2, b, b2);
                }
            }
        }
    }
    rho
}

/// Same object through the correlator route: every matrix element is the
/// expectation value of a product of fermionized local transition operators.
pub fn correlator_rdm(psi: &WaveVector, orbitals: &[usize]) -> Result<SubsetRdm> {
    let basis = &psi.basis;
    let sorted = checked_subset(basis.n_orbitals, orbitals)?;
    let k = sorted.len();
    let dim = 4usize.pow(k as u32);
    let mut rho = DMatrix::zeros(dim, dim);
    let expect = |ops: &[(usize, u8, u8)]| -> f64 {
        // <psi| prod E^{(orb)}_{to,from} |psi>, rightmost applied first.
        let mut acc = 0.0;
        for i in 0..basis.len() {
            let amp = psi.amplitudes[i];
            if amp == 0.0 {
                continue;
            }
            let (mut up, mut dn) = basis.det(i);
            let mut coeff = amp;
            let mut ok = true;
            for &(orb, from, to) in ops.iter().rev() {
                match apply_transition(up, dn, orb, from, to) {
                    Some((u2, d2, s)) => {
                        up = u2;
                        dn = d2;
                        coeff *= s;
                    }
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                if let Some(j) = basis.index_of(up, dn) {
                    acc += coeff * psi.amplitudes[j];
                }
            }
        }
        acc
    };
    if k == 1 {
        let o = sorted[0];
        for a in 0..4u8 {
            for a2 in 0..4u8 {
                rho[(a as usize, a2 as usize)] = expect(&[(o, a, a2)]);
            }
        }
    } else {
        let (oi, oj) = (sorted[0], sorted[1]);
        rho = assemble_pair_rdm(|a, a2, b, b2| expect(&[(oi, a, a2), (oj, b, b2)]));
    }
    Ok(SubsetRdm {
        orbitals: sorted,
        matrix: rho,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fci::SectorBasis;

    fn random_state(n: usize, ne: usize, tsz: i32, seed: u64) -> WaveVector {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let basis = SectorBasis::enumerate(n, ne, tsz).unwrap();
        let mut rng = StdRng::seed_from_u64(seed);
        let mut amps: Vec<f64> = (0..basis.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm: f64 = amps.iter().map(|a| a * a).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|a| *a /= norm);
        WaveVector { basis, amplitudes: amps }
    }

    #[test]
    fn amplitude_and_correlator_routes_agree() {
        for seed in [5u64, 11, 23] {
            let psi = random_state(4, 4, 0, seed);
            for subset in [vec![0], vec![2], vec![0, 1], vec![1, 3], vec![0, 3]] {
                let a = subset_rdm(&psi, &subset).unwrap();
                let b = correlator_rdm(&psi, &subset).unwrap();
                let diff = (&a.matrix - &b.matrix).abs().max();
                assert!(diff < 1e-12, "subset {subset:?} seed {seed}: diff {diff}");
            }
        }
        let psi = random_state(3, 3, 1, 8);
        for subset in [vec![0, 2], vec![1, 2]] {
            let a = subset_rdm(&psi, &subset).unwrap();
            let b = correlator_rdm(&psi, &subset).unwrap();
            assert!((&a.matrix - &b.matrix).abs().max() < 1e-12);
        }
    }

    #[test]
    fn product_state_is_pure() {
        // |updn> ⊗ |0>: orbital 1 RDM is diag(1,0,0,0).
        let basis = SectorBasis::enumerate(2, 2, 0).unwrap();
        let idx = basis.index_of(0b01, 0b01).unwrap();
        let mut amps = vec![0.0; basis.len()];
        amps[idx] = 1.0;
        let psi = WaveVector { basis, amplitudes: amps };
        let rho = subset_rdm(&psi, &[1]).unwrap();
        let mut expected = DMatrix::zeros(4, 4);
        expected[(0, 0)] = 1.0;
        assert_eq!(rho.matrix, expected);
        let rho0 = subset_rdm(&psi, &[0]).unwrap();
        let mut expected0 = DMatrix::zeros(4, 4);
        expected0[(3, 3)] = 1.0;
        assert_eq!(rho0.matrix, expected0);
    }

    #[test]
    fn pair_rdm_traces_to_single() {
        let psi = random_state(4, 3, 1, 77);
        let pair = subset_rdm(&psi, &[1, 2]).unwrap();
        let single = subset_rdm(&psi, &[1]).unwrap();
        let traced = pair.trace_out(1).unwrap();
        assert!((&traced.matrix - &single.matrix).abs().max() < 1e-12);
        let single2 = subset_rdm(&psi, &[2]).unwrap();
        let traced2 = pair.trace_out(2).unwrap();
        assert!((&traced2.matrix - &single2.matrix).abs().max() < 1e-12);
    }

    #[test]
    fn full_system_pair_rdm_is_projector() {
        // For a 2-orbital system the pair RDM must be |psi><psi| in the
        // interleaved product basis.
        let psi = random_state(2, 2, 0, 13);
        let rho = subset_rdm(&psi, &[0, 1]).unwrap();
        let evs = rho.eigenvalues();
        assert!((evs[0] - 1.0).abs() < 1e-12);
        assert!(evs[1].abs() < 1e-12);
        assert!((rho.trace() - 1.0).abs() < 1e-12);
    }
}

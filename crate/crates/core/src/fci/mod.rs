//! Matrix-free full configuration interaction in a fixed (N_el, Sz) sector.
//!
//! Ground truth for everything else in the crate: energies, reduced density
//! matrices, entropies and total-spin expectations at desk scale.

mod basis;
mod ham;
mod rdm;

pub use basis::{binomial, enumerate_masks, SectorBasis, MAX_DETERMINANTS};
pub use ham::FciHamiltonian;
pub(crate) use rdm::assemble_pair_rdm;
pub use rdm::{correlator_rdm, subset_rdm, SubsetRdm};

use std::collections::BTreeMap;

use thiserror::Error;

use crate::integrals::IntegralSet;
use crate::solver::{lowest_eigenpairs, DavidsonOpts, SolverError};

#[derive(Debug, Error)]
pub enum FciError {
    #[error("infeasible sector: {n_orbitals} orbitals, {n_electrons} electrons, 2Sz = {two_sz}")]
    InfeasibleSector {
        n_orbitals: usize,
        n_electrons: usize,
        two_sz: i32,
    },
    #[error("sector holds {size} determinants, above the cap of {cap}")]
    SectorTooLarge { size: usize, cap: usize },
    #[error("bad orbital subset: {0}")]
    BadSubset(String),
    #[error("invalid density matrix: {0}")]
    BadRdm(String),
    #[error("state not normalized: |1 - norm| = {0:.3e}")]
    NotNormalized(f64),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

pub type Result<T> = std::result::Result<T, FciError>;

/// A normalized sector vector.
#[derive(Debug, Clone)]
pub struct WaveVector {
    pub basis: SectorBasis,
    pub amplitudes: Vec<f64>,
}

impl WaveVector {
    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    pub fn check_normalized(&self) -> Result<()> {
        let dev = (self.norm() - 1.0).abs();
        if dev > 1e-12 {
            Err(FciError::NotNormalized(dev))
        } else {
            Ok(())
        }
    }
}

/// Solved eigenpair with its final residual norm.
#[derive(Debug, Clone)]
pub struct EigenState {
    pub energy: f64,
    pub state: WaveVector,
    pub residual: f64,
}

/// Computes the `k` lowest eigenpairs of `h` in the given sector.
///
/// Davidson with diagonal preconditioning; the start vector is the reference
/// determinant of the metadata when it lies in the sector, otherwise the unit
/// vector on the lowest diagonal entry. Deterministic, residual tolerance
/// 1e-9, iteration cap 2000. The global sign of each state is fixed by making
/// its largest-magnitude amplitude positive.
pub fn ground_state(h: &IntegralSet, basis: &SectorBasis, k: usize) -> Result<Vec<EigenState>> {
    let ham = FciHamiltonian::new(h, basis.clone());
    let mut guesses = Vec::new();
    if basis.n_electrons == h.meta.n_electrons() {
        if let Some((up, dn)) = basis.reference_det(&h.meta.hf_occupations) {
            let idx = basis.index_of(up, dn).expect("reference in sector");
            let mut v = vec![0.0; basis.len()];
            v[idx] = 1.0;
            guesses.push(v);
        }
    }
    let res = lowest_eigenpairs(&ham, k, &guesses, DavidsonOpts::default())?;
    let mut out = Vec::with_capacity(k);
    for ((&e, vec), &r) in res
        .values
        .iter()
        .zip(res.vectors.into_iter())
        .zip(res.residuals.iter())
    {
        let mut amps = vec;
        let norm: f64 = amps.iter().map(|a| a * a).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|a| *a /= norm);
        let mut best = 0usize;
        for (i, a) in amps.iter().enumerate() {
            if a.abs() > amps[best].abs() + 1e-15 {
                best = i;
            }
        }
        if amps[best] < 0.0 {
            amps.iter_mut().for_each(|a| *a = -*a);
        }
        out.push(EigenState {
            energy: e,
            state: WaveVector {
                basis: basis.clone(),
                amplitudes: amps,
            },
            residual: r,
        });
    }
    Ok(out)
}

/// <psi| S² |psi> with S² = Σ_ij S⁻_i S⁺_j + Σ_ij S^z_i S^z_j + Σ_i S^z_i,
/// evaluated as |S⁺ psi|² + Sz(Sz + 1).
pub fn expectation_s2(psi: &WaveVector) -> Result<f64> {
    psi.check_normalized()?;
    let basis = &psi.basis;
    let n = basis.n_orbitals;
    let mut raised: BTreeMap<(u64, u64), f64> = BTreeMap::new();
    for i in 0..basis.len() {
        let amp = psi.amplitudes[i];
        if amp == 0.0 {
            continue;
        }
        let (up, dn) = basis.det(i);
        for orb in 0..n {
            // S⁺_orb = c†_{orb,up} c_{orb,dn}
            let Some((u1, d1, s1)) = basis::apply_dn(up, dn, false, orb) else {
                continue;
            };
            let Some((u2, d2, s2)) = basis::apply_up(u1, d1, true, orb) else {
                continue;
            };
            *raised.entry((u2, d2)).or_insert(0.0) += s1 * s2 * amp;
        }
    }
    let sp_norm2: f64 = raised.values().map(|a| a * a).sum();
    let sz = basis.two_sz as f64 / 2.0;
    Ok(sp_norm2 + sz * sz + sz)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrals::build_hubbard;

    #[test]
    fn hubbard_dimer_energies() {
        // Analytic ground energy U/2 - sqrt((U/2)^2 + 4 t^2) at half filling.
        for (t, u) in [(1.0, 0.0), (1.0, 4.0), (0.7, 2.5)] {
            let h = build_hubbard(2, t, u).unwrap();
            let basis = SectorBasis::enumerate(2, 2, 0).unwrap();
            let got = ground_state(&h, &basis, 1).unwrap()[0].energy;
            let exact = u / 2.0 - ((u / 2.0).powi(2) + 4.0 * t * t).sqrt();
            assert!((got - exact).abs() < 1e-10, "t={t} u={u}: {got} vs {exact}");
        }
    }

    #[test]
    fn single_site_doubly_occupied() {
        let h = build_hubbard(1, 1.0, 4.0).unwrap();
        let basis = SectorBasis::enumerate(1, 2, 0).unwrap();
        let got = ground_state(&h, &basis, 1).unwrap()[0].energy;
        assert!((got - 4.0).abs() < 1e-12);
    }

    #[test]
    fn doubly_occupied_level() {
        use crate::integrals::{IntegralSet, OrbitalMeta};
        let mut h = IntegralSet::new(OrbitalMeta::new(vec![1], vec![2], 0).unwrap());
        h.set_t(0, 0, -0.625);
        let basis = SectorBasis::enumerate(1, 2, 0).unwrap();
        let got = ground_state(&h, &basis, 1).unwrap()[0].energy;
        assert!((got + 1.25).abs() < 1e-12);
    }

    #[test]
    fn s2_values() {
        // Half-filled Hubbard dimer: singlet ground state, triplet above it.
        let h = build_hubbard(2, 1.0, 4.0).unwrap();
        let basis = SectorBasis::enumerate(2, 2, 0).unwrap();
        let states = ground_state(&h, &basis, 2).unwrap();
        let s2_ground = expectation_s2(&states[0].state).unwrap();
        let s2_first = expectation_s2(&states[1].state).unwrap();
        assert!(s2_ground.abs() < 1e-10, "singlet: {s2_ground}");
        assert!((s2_first - 2.0).abs() < 1e-9, "triplet: {s2_first}");
        // A single up electron carries S(S+1) = 3/4.
        let basis1 = SectorBasis::enumerate(1, 1, 1).unwrap();
        let psi = WaveVector {
            basis: basis1,
            amplitudes: vec![1.0],
        };
        assert!((expectation_s2(&psi).unwrap() - 0.75).abs() < 1e-14);
    }

    #[test]
    fn dimer_u0_orbital_rdm_is_maximally_mixed() {
        let h = build_hubbard(2, 1.0, 0.0).unwrap();
        let basis = SectorBasis::enumerate(2, 2, 0).unwrap();
        let state = &ground_state(&h, &basis, 1).unwrap()[0].state;
        let rho = subset_rdm(state, &[0]).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 0.25 } else { 0.0 };
                assert!((rho.matrix[(i, j)] - expect).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn residuals_meet_tolerance() {
        let h = build_hubbard(4, 1.0, 4.0).unwrap();
        let basis = SectorBasis::enumerate(4, 4, 0).unwrap();
        for st in ground_state(&h, &basis, 2).unwrap() {
            assert!(st.residual <= 1e-9);
        }
    }
}

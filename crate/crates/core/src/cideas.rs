//! CI-based dynamically extended active space warm-up.
//!
//! During the first half-sweep the environment block has no renormalized
//! history, so its states are built directly from determinants: the most
//! entangled environment orbitals (by CAS-vector rank) stay active, the rest
//! are pinned to their reference occupation, and the active space is expanded
//! by excitations up to a CI level cap. The resulting determinant blocks plug
//! into the superblock like any renormalized block, and partial summation
//! over the pinned doubly-filled orbitals is carried exactly inside the block
//! operators.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::dmrg::ops::{from_determinants, OpSet};
use crate::integrals::DenseInts;

#[derive(Debug, Error)]
pub enum CideasError {
    #[error("negative single-orbital entropy at orbital {0}")]
    NegativeEntropy(usize),
    #[error("entropy vector length {got} does not match orbital count {expected}")]
    LengthMismatch { got: usize, expected: usize },
    #[error("active environment space over {orbitals} orbitals cannot host the reference restriction")]
    InfeasibleActiveSpace { orbitals: usize },
    #[error("invalid warm-up configuration: {0}")]
    BadConfig(String),
}

pub type Result<T> = std::result::Result<T, CideasError>;

/// All orbitals listed by non-increasing single-orbital entropy (ties broken
/// by index). Without entropies the self-consistent bootstrap lists orbitals
/// in descending index order so the initialization correlates the system
/// block with the far end of the chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CasVector {
    pub orbitals: Vec<usize>,
}

pub fn build_cas_vector(s1: Option<&[f64]>, n_orbitals: usize) -> Result<CasVector> {
    match s1 {
        None => Ok(CasVector {
            orbitals: (0..n_orbitals).rev().collect(),
        }),
        Some(values) => {
            if values.len() != n_orbitals {
                return Err(CideasError::LengthMismatch {
                    got: values.len(),
                    expected: n_orbitals,
                });
            }
            if let Some(bad) = values.iter().position(|&v| v < 0.0 || !v.is_finite()) {
                return Err(CideasError::NegativeEntropy(bad));
            }
            let mut order: Vec<usize> = (0..n_orbitals).collect();
            order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
            Ok(CasVector { orbitals: order })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvClass {
    DoublyFilled,
    Empty,
    Active,
}

#[derive(Debug, Clone)]
pub struct EnvClassification {
    /// Class per environment orbital.
    pub classes: BTreeMap<usize, EnvClass>,
}

/// Marks the first `budget` environment orbitals in CAS-vector order as
/// active; the remainder keep their reference occupation (doubly filled or
/// empty).
pub fn classify_environment(
    hf_occ: &[u8],
    casv: &CasVector,
    env: &[usize],
    budget: usize,
) -> EnvClassification {
    let mut classes: BTreeMap<usize, EnvClass> = env
        .iter()
        .map(|&o| {
            let class = if hf_occ[o] == 2 {
                EnvClass::DoublyFilled
            } else {
                EnvClass::Empty
            };
            (o, class)
        })
        .collect();
    let mut active = 0;
    for &o in &casv.orbitals {
        if active >= budget {
            break;
        }
        if let Some(c) = classes.get_mut(&o) {
            *c = EnvClass::Active;
            active += 1;
        }
    }
    EnvClassification { classes }
}

/// Warm-up knobs: CI excitation cap relative to the reference determinant,
/// the starting environment dimension (0 defers to the sweep configuration),
/// and the cap on simultaneously active environment orbitals.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct WarmupConfig {
    pub ci_level_cap: usize,
    pub m_start: usize,
    pub active_budget: usize,
}

impl Default for WarmupConfig {
    fn default() -> Self {
        Self {
            ci_level_cap: 3,
            m_start: 0,
            active_budget: 6,
        }
    }
}

/// Determinants of a CI-restricted environment basis, as interleaved masks
/// over `env` slots (bit 2k spin-up, 2k+1 spin-down at `env[k]`).
///
/// Selection order: the reference restriction first, then by excitation
/// level (max of holes and particles against the reference), then by the
/// summed entanglement score of the excited-into orbitals (descending), then
/// by mask. The list is truncated to `m_r`.
pub fn environment_determinants(
    hf_occ: &[u8],
    scores: &[f64],
    env: &[usize],
    classification: &EnvClassification,
    ci_level_cap: usize,
    m_r: usize,
) -> Result<Vec<u64>> {
    let k = env.len();
    if k == 0 || k > 31 {
        return Err(CideasError::BadConfig(format!("environment of {k} orbitals")));
    }
    let mut base = 0u64;
    let mut active_slots = Vec::new();
    for (slot, &orb) in env.iter().enumerate() {
        let class = classification.classes[&orb];
        let occ = hf_occ[orb];
        match class {
            EnvClass::DoublyFilled => base |= 0b11 << (2 * slot),
            EnvClass::Empty => {}
            EnvClass::Active => {
                active_slots.push(slot);
                match occ {
                    0 => {}
                    1 => base |= 0b01 << (2 * slot), // unpaired electrons spin-up
                    _ => base |= 0b11 << (2 * slot),
                }
            }
        }
    }
    // Enumerate configurations of the active slots around the reference.
    let n_active = active_slots.len();
    let mut scored: Vec<(usize, f64, u64)> = Vec::new();
    for combo in 0..4u64.pow(n_active as u32) {
        let mut mask = base;
        let mut holes = 0usize;
        let mut particles = 0usize;
        let mut score = 0.0;
        for (ai, &slot) in active_slots.iter().enumerate() {
            let cfg = (combo >> (2 * ai)) & 0b11;
            let old = (base >> (2 * slot)) & 0b11;
            mask = (mask & !(0b11 << (2 * slot))) | (cfg << (2 * slot));
            for bit in 0..2 {
                let was = (old >> bit) & 1 != 0;
                let is = (cfg >> bit) & 1 != 0;
                if was && !is {
                    holes += 1;
                }
                if !was && is {
                    particles += 1;
                    score += scores[env[slot]];
                }
            }
        }
        let level = holes.max(particles);
        if level <= ci_level_cap {
            scored.push((level, score, mask));
        }
    }
    if scored.is_empty() {
        return Err(CideasError::InfeasibleActiveSpace { orbitals: k });
    }
    scored.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then(b.1.total_cmp(&a.1))
            .then(a.2.cmp(&b.2))
    });
    scored.truncate(m_r.max(1));
    Ok(scored.into_iter().map(|(_, _, m)| m).collect())
}

/// Environment-block factory used by the DMRG warm-up pass. All index data is
/// in chain coordinates (the engine permutes the Hamiltonian up front).
#[derive(Debug, Clone)]
pub struct CiDeasWarmup {
    pub hf_occ: Vec<u8>,
    pub casv: CasVector,
    /// Entanglement score per chain position (single-orbital entropies when
    /// known, CAS-vector rank weights during the bootstrap).
    pub scores: Vec<f64>,
    pub ci_level_cap: usize,
    pub m_start: usize,
    pub active_budget: usize,
}

impl CiDeasWarmup {
    pub fn new(
        hf_occ: Vec<u8>,
        casv: CasVector,
        s1: Option<&[f64]>,
        config: &WarmupConfig,
        default_m_start: usize,
    ) -> Result<Self> {
        if config.active_budget == 0 {
            return Err(CideasError::BadConfig("active budget must be >= 1".into()));
        }
        let n = hf_occ.len();
        let scores = match s1 {
            Some(v) => {
                if v.len() != n {
                    return Err(CideasError::LengthMismatch {
                        got: v.len(),
                        expected: n,
                    });
                }
                v.to_vec()
            }
            None => {
                let mut w = vec![0.0; n];
                for (rank, &orb) in casv.orbitals.iter().enumerate() {
                    w[orb] = (n - rank) as f64;
                }
                w
            }
        };
        let m_start = if config.m_start == 0 {
            default_m_start
        } else {
            config.m_start
        };
        Ok(Self {
            hf_occ,
            casv,
            scores,
            ci_level_cap: config.ci_level_cap,
            m_start,
            active_budget: config.active_budget,
        })
    }

    /// Builds the environment block over `env` (ascending chain positions),
    /// carrying complementary operators for `outside`. The dimension follows
    /// the Schmidt constraint `M_r = max(M_l, M_start)`.
    pub fn build_env(
        &self,
        h: &DenseInts,
        env: &[usize],
        outside: &[usize],
        m_l: usize,
    ) -> Result<OpSet> {
        let classification =
            classify_environment(&self.hf_occ, &self.casv, env, self.active_budget);
        let m_r = m_l.max(self.m_start);
        let dets = environment_determinants(
            &self.hf_occ,
            &self.scores,
            env,
            &classification,
            self.ci_level_cap,
            m_r,
        )?;
        Ok(from_determinants(h, env, &dets, outside))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cas_vector_sorting() {
        let v = build_cas_vector(Some(&[0.1, 0.9, 0.5]), 3).unwrap();
        assert_eq!(v.orbitals, vec![1, 2, 0]);
        let t = build_cas_vector(Some(&[0.5, 0.5, 0.5]), 3).unwrap();
        assert_eq!(t.orbitals, vec![0, 1, 2]);
        let b = build_cas_vector(None, 4).unwrap();
        assert_eq!(b.orbitals, vec![3, 2, 1, 0]);
        assert!(build_cas_vector(Some(&[-0.1, 0.0]), 2).is_err());
    }

    #[test]
    fn classification_rules() {
        let hf = [2u8, 2, 0, 0];
        let casv = build_cas_vector(None, 4).unwrap();
        // Budget covers the whole environment: everything active.
        let c = classify_environment(&hf, &casv, &[2, 3], 2);
        assert!(c.classes.values().all(|&x| x == EnvClass::Active));
        // Budget 1 with CASV order (2,1,3,0): orbital 2 active, 1 doubly
        // filled, 3 empty.
        let casv = CasVector {
            orbitals: vec![2, 1, 3, 0],
        };
        let c = classify_environment(&hf, &casv, &[1, 2, 3], 1);
        assert_eq!(c.classes[&2], EnvClass::Active);
        assert_eq!(c.classes[&1], EnvClass::DoublyFilled);
        assert_eq!(c.classes[&3], EnvClass::Empty);
    }

    #[test]
    fn cap_zero_is_reference_only() {
        let hf = [2u8, 0];
        let casv = build_cas_vector(None, 2).unwrap();
        let cls = classify_environment(&hf, &casv, &[0, 1], 2);
        let dets = environment_determinants(&hf, &[1.0, 1.0], &[0, 1], &cls, 0, 100).unwrap();
        assert_eq!(dets, vec![0b0011]);
    }

    #[test]
    fn small_active_space_is_complete() {
        // Two active orbitals, two electrons: cap >= 2 reaches all four
        // Sz = 0 sector determinants (among others).
        let hf = [2u8, 0];
        let casv = build_cas_vector(None, 2).unwrap();
        let cls = classify_environment(&hf, &casv, &[0, 1], 2);
        let dets = environment_determinants(&hf, &[1.0, 1.0], &[0, 1], &cls, 2, 100).unwrap();
        let sz0: Vec<u64> = dets
            .iter()
            .copied()
            .filter(|d| {
                let n: u32 = d.count_ones();
                let up = (d & 0b0101).count_ones();
                let dn = (d & 0b1010).count_ones();
                n == 2 && up == dn
            })
            .collect();
        assert_eq!(sz0.len(), 4);
        // Reference restriction always comes first.
        assert_eq!(dets[0], 0b0011);
    }

    #[test]
    fn ranking_prefers_entangled_targets() {
        // Singles out of a doubly filled orbital: the higher-score target
        // orbital is listed before the lower-score one.
        let hf = [2u8, 0, 0];
        let casv = build_cas_vector(None, 3).unwrap();
        let cls = classify_environment(&hf, &casv, &[0, 1, 2], 3);
        let dets =
            environment_determinants(&hf, &[0.0, 0.2, 0.9], &[0, 1, 2], &cls, 1, 100).unwrap();
        let pos_into_2 = dets
            .iter()
            .position(|&d| d & (0b11 << 4) != 0)
            .unwrap();
        let pos_into_1 = dets
            .iter()
            .position(|&d| d & (0b11 << 2) != 0)
            .unwrap();
        assert!(pos_into_2 < pos_into_1);
    }
}

//! Turning-point measurement of one- and two-orbital reduced density
//! matrices from renormalized correlators.
//!
//! At the end of a converged rightward half-sweep the superblock is
//! `(B_{N-2} • s_{N-2})(s_{N-1} • vac)`. Local transition operators of
//! earlier orbitals are propagated into the final block basis through the
//! stored transformation matrices; products for orbital pairs are fused at
//! the second orbital's absorption step. The graded embedding reproduces the
//! Jordan–Wigner strings, so each expectation value is that of the true mode
//! operator product, and the shared pair-RDM assembly converts raw
//! correlators into partial-trace matrix elements.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::algebra::{BlockOp, ProductSpace};
use crate::fci::{assemble_pair_rdm, SubsetRdm};
use crate::integrals::Permutation;

use super::site;
use super::sweep::{Measurements, StoredBlock};
use super::{DmrgError, Result};

pub(crate) struct TurningPoint<'a> {
    pub psi: &'a crate::algebra::SuperVec,
    pub left_blocks: &'a [Option<StoredBlock>],
    /// (B_{N-2} ⊗ s_{N-2}).
    pub left_prod: &'a ProductSpace,
    /// (s_{N-1} ⊗ vacuum).
    pub right_prod: &'a ProductSpace,
    pub n: usize,
}

impl TurningPoint<'_> {
    fn history(&self, k: usize) -> Result<(&ProductSpace, &crate::algebra::Isometry)> {
        let b = self.left_blocks[k]
            .as_ref()
            .ok_or(DmrgError::MissingHistory)?;
        match (&b.prod, &b.iso) {
            (Some(p), Some(i)) => Ok((p, i)),
            _ => Err(DmrgError::MissingHistory),
        }
    }

    /// <psi| (block_op · site_a) ⊗ site_b |psi> with identities for `None`.
    fn expect(
        &self,
        block_op: Option<&BlockOp>,
        site_a: Option<&BlockOp>,
        site_b: Option<&BlockOp>,
    ) -> f64 {
        let ol = if block_op.is_none() && site_a.is_none() {
            None
        } else {
            Some(self.left_prod.embed(block_op, site_a))
        };
        let or = site_b.map(|t| self.right_prod.embed(Some(t), None));
        let mut out = self.psi.zeros_like();
        self.psi.apply_cross(
            &mut out,
            &self.left_prod.space,
            ol.as_ref(),
            or.as_ref(),
            1.0,
            false,
        );
        self.psi.dot(&out)
    }
}

type TransMap = BTreeMap<(u8, u8), Vec<BlockOp>>;

/// Propagates every local transition operator of chain position `p` through
/// the block chain; entry `k - p - 1` of each list is the operator on the
/// block of `k` sites.
fn propagate_site(tp: &TurningPoint, p: usize) -> Result<TransMap> {
    let n = tp.n;
    let mut map = TransMap::new();
    for a in 0..4u8 {
        for a2 in 0..4u8 {
            let t = site::transition(a, a2);
            let (prod, iso) = tp.history(p + 1)?;
            let mut levels = vec![iso.renorm(&prod.embed(None, Some(&t)))];
            for k in p + 2..=n - 2 {
                let (prod, iso) = tp.history(k)?;
                let prev = levels.last().unwrap();
                levels.push(iso.renorm(&prod.embed(Some(prev), None)));
            }
            map.insert((a, a2), levels);
        }
    }
    Ok(map)
}

fn at_block(map: &TransMap, p: usize, key: (u8, u8), block_size: usize) -> &BlockOp {
    &map[&key][block_size - p - 1]
}

/// Measures all one- and two-orbital RDMs (chain-position labels, pairs
/// ordered by position).
pub(crate) fn measure_turning_point(
    tp: &TurningPoint,
) -> Result<(Vec<SubsetRdm>, Vec<SubsetRdm>)> {
    let n = tp.n;
    let mut props: Vec<Option<TransMap>> = (0..n).map(|_| None).collect();
    for (p, slot) in props.iter_mut().enumerate() {
        if p + 3 <= n {
            *slot = Some(propagate_site(tp, p)?);
        }
    }
    let diag_site = |a: u8| site::transition(a, a);

    let mut ones = Vec::with_capacity(n);
    for p in 0..n {
        let mut m = DMatrix::zeros(4, 4);
        for a in 0..4u8 {
            m[(a as usize, a as usize)] = if p + 3 <= n {
                let map = props[p].as_ref().unwrap();
                tp.expect(Some(at_block(map, p, (a, a), n - 2)), None, None)
            } else if p == n - 2 {
                tp.expect(None, Some(&diag_site(a)), None)
            } else {
                tp.expect(None, None, Some(&diag_site(a)))
            };
        }
        ones.push(SubsetRdm {
            orbitals: vec![p],
            matrix: m,
        });
    }

    let mut twos = Vec::new();
    for p in 0..n {
        for q in p + 1..n {
            let matrix = assemble_pair_rdm(|a, a2, b, b2| {
                let tj = site::transition(b, b2);
                if q + 3 <= n {
                    // Fuse at q's absorption step, then propagate.
                    let map = props[p].as_ref().unwrap();
                    let m_at_q = at_block(map, p, (a, a2), q);
                    let (prod, iso) = tp.history(q + 1).expect("checked in propagate");
                    let mut w = iso.renorm(&prod.embed(Some(m_at_q), Some(&tj)));
                    for k in q + 2..=n - 2 {
                        let (prod, iso) = tp.history(k).expect("checked");
                        w = iso.renorm(&prod.embed(Some(&w), None));
                    }
                    tp.expect(Some(&w), None, None)
                } else if q == n - 2 {
                    let map = props[p].as_ref().unwrap();
                    tp.expect(Some(at_block(map, p, (a, a2), n - 2)), Some(&tj), None)
                } else if p + 3 <= n {
                    // q == n - 1
                    let map = props[p].as_ref().unwrap();
                    tp.expect(Some(at_block(map, p, (a, a2), n - 2)), None, Some(&tj))
                } else if p == n - 2 {
                    tp.expect(None, Some(&site::transition(a, a2)), Some(&tj))
                } else {
                    unreachable!("p < q over n >= 2 positions")
                }
            });
            twos.push(SubsetRdm {
                orbitals: vec![p, q],
                matrix,
            });
        }
    }
    Ok((ones, twos))
}

fn cfg_n(c: u8) -> u32 {
    ((c >> 1) + (c & 1)) as u32
}

/// Exchanges the two subsystems of a pair RDM. States reorder with the
/// fermionic swap sign (-1)^{n_a n_b}.
pub fn swap_pair_rdm(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(16, 16);
    for a in 0..4u8 {
        for b in 0..4u8 {
            for a2 in 0..4u8 {
                for b2 in 0..4u8 {
                    let sign = if (cfg_n(a) * cfg_n(b) + cfg_n(a2) * cfg_n(b2)) % 2 == 1 {
                        -1.0
                    } else {
                        1.0
                    };
                    out[((b * 4 + a) as usize, (b2 * 4 + a2) as usize)] =
                        sign * m[((a * 4 + b) as usize, (a2 * 4 + b2) as usize)];
                }
            }
        }
    }
    out
}

/// Maps chain-position RDMs to original orbital labels, reordering pair
/// subsystems where the chain inverted them.
pub(crate) fn relabel(
    ones: Vec<SubsetRdm>,
    twos: Vec<SubsetRdm>,
    ordering: &Permutation,
) -> Measurements {
    let mut one_out: Vec<SubsetRdm> = ones
        .into_iter()
        .map(|r| SubsetRdm {
            orbitals: vec![ordering.orbital_at(r.orbitals[0])],
            matrix: r.matrix,
        })
        .collect();
    one_out.sort_by_key(|r| r.orbitals[0]);
    let mut two_out: Vec<SubsetRdm> = twos
        .into_iter()
        .map(|r| {
            let (op, oq) = (
                ordering.orbital_at(r.orbitals[0]),
                ordering.orbital_at(r.orbitals[1]),
            );
            if op < oq {
                SubsetRdm {
                    orbitals: vec![op, oq],
                    matrix: r.matrix,
                }
            } else {
                SubsetRdm {
                    orbitals: vec![oq, op],
                    matrix: swap_pair_rdm(&r.matrix),
                }
            }
        })
        .collect();
    two_out.sort_by(|a, b| a.orbitals.cmp(&b.orbitals));
    Measurements {
        one: one_out,
        two: two_out,
    }
}

/// <S²> from measured one- and two-orbital RDMs:
/// Σ_i <S⁻S⁺ + Sz² + Sz>_i + Σ_{i≠j} <S⁻_i S⁺_j + Sz_i Sz_j>.
pub fn s2_from_rdms(ones: &[SubsetRdm], twos: &[SubsetRdm]) -> f64 {
    let mut sz = DMatrix::zeros(4, 4);
    sz[(1, 1)] = -0.5;
    sz[(2, 2)] = 0.5;
    let mut sp = DMatrix::zeros(4, 4); // S⁺ = |up><dn|
    sp[(2, 1)] = 1.0;
    let sm = sp.transpose();
    let smsp = &sm * &sp;
    let local = &smsp + &sz * &sz + &sz;

    let mut total = 0.0;
    for r in ones {
        total += (&r.matrix * &local).trace();
    }
    let pair_term = |rho: &DMatrix<f64>, x: &DMatrix<f64>, y: &DMatrix<f64>| -> f64 {
        let mut acc = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                for a2 in 0..4 {
                    for b2 in 0..4 {
                        let w = x[(a2, a)] * y[(b2, b)];
                        if w != 0.0 {
                            acc += rho[(a * 4 + b, a2 * 4 + b2)] * w;
                        }
                    }
                }
            }
        }
        acc
    };
    for r in twos {
        total += pair_term(&r.matrix, &sm, &sp);
        total += pair_term(&r.matrix, &sp, &sm);
        total += 2.0 * pair_term(&r.matrix, &sz, &sz);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fci::{expectation_s2, ground_state, subset_rdm, SectorBasis};
    use crate::integrals::build_hubbard;

    #[test]
    fn s2_from_oracle_rdms_matches_direct_route() {
        let h = build_hubbard(4, 1.0, 2.0).unwrap();
        let basis = SectorBasis::enumerate(4, 4, 0).unwrap();
        let states = ground_state(&h, &basis, 2).unwrap();
        for st in &states {
            let ones: Vec<SubsetRdm> = (0..4).map(|i| subset_rdm(&st.state, &[i]).unwrap()).collect();
            let mut twos = Vec::new();
            for i in 0..4 {
                for j in i + 1..4 {
                    twos.push(subset_rdm(&st.state, &[i, j]).unwrap());
                }
            }
            let via_rdm = s2_from_rdms(&ones, &twos);
            let direct = expectation_s2(&st.state).unwrap();
            assert!(
                (via_rdm - direct).abs() < 1e-9,
                "rdm route {via_rdm} vs direct {direct}"
            );
        }
    }

    #[test]
    fn swap_is_an_involution_preserving_spectrum() {
        let h = build_hubbard(3, 1.0, 3.0).unwrap();
        let basis = SectorBasis::enumerate(3, 3, 1).unwrap();
        let st = &ground_state(&h, &basis, 1).unwrap()[0].state;
        let rho = subset_rdm(st, &[0, 2]).unwrap();
        let swapped = swap_pair_rdm(&rho.matrix);
        let back = swap_pair_rdm(&swapped);
        assert!((&back - &rho.matrix).abs().max() < 1e-14);
        let mut a = rho.eigenvalues();
        let mut b = SubsetRdm {
            orbitals: vec![0, 2],
            matrix: swapped,
        }
        .eigenvalues();
        a.sort_by(|x, y| y.total_cmp(x));
        b.sort_by(|x, y| y.total_cmp(x));
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}

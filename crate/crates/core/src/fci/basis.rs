//! Determinant bases for fixed (N_el, Sz) sectors.
//!
//! A determinant is a pair of orbital bitmasks `(up, dn)`. The global
//! fermionic mode ordering is fixed once for the whole crate: all spin-up
//! modes first (orbital-major), then all spin-down modes. Every sign
//! convention in Hamiltonian application and reduced density matrices derives
//! from this ordering via the helpers below.

use super::{FciError, Result};

/// Hard cap on sector sizes the oracle will handle.
pub const MAX_DETERMINANTS: usize = 4_000_000;

#[inline]
pub(crate) fn below_mask(pos: usize) -> u64 {
    (1u64 << pos) - 1
}

#[inline]
fn parity_of(count: u32) -> f64 {
    if count % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Sign accumulated by `c†_{orb,up}` or `c_{orb,up}` crossing the occupied
/// modes below it.
#[inline]
pub(crate) fn sign_up(up: u64, orb: usize) -> f64 {
    parity_of((up & below_mask(orb)).count_ones())
}

/// Same for a spin-down operator: crosses every up electron plus the down
/// electrons below it.
#[inline]
pub(crate) fn sign_dn(up: u64, dn: u64, orb: usize) -> f64 {
    parity_of(up.count_ones() + (dn & below_mask(orb)).count_ones())
}

/// Applies a single creation (`dagger`) or annihilation operator for spin-up
/// `orb` to the mask pair; returns the new masks and the fermionic sign.
pub(crate) fn apply_up(up: u64, dn: u64, dagger: bool, orb: usize) -> Option<(u64, u64, f64)> {
    let bit = 1u64 << orb;
    if dagger == (up & bit != 0) {
        return None;
    }
    Some((up ^ bit, dn, sign_up(up, orb)))
}

pub(crate) fn apply_dn(up: u64, dn: u64, dagger: bool, orb: usize) -> Option<(u64, u64, f64)> {
    let bit = 1u64 << orb;
    if dagger == (dn & bit != 0) {
        return None;
    }
    Some((up, dn ^ bit, sign_dn(up, dn, orb)))
}

/// All `n`-bit masks with exactly `k` bits set, ascending.
pub fn enumerate_masks(n: usize, k: usize) -> Vec<u64> {
    assert!(n < 64);
    if k > n {
        return Vec::new();
    }
    if k == 0 {
        return vec![0];
    }
    let mut out = Vec::new();
    let mut v: u64 = (1 << k) - 1;
    let limit: u64 = 1 << n;
    while v < limit {
        out.push(v);
        // Gosper's hack: next mask with the same popcount.
        let c = v & v.wrapping_neg();
        let r = v + c;
        v = (((r ^ v) >> 2) / c) | r;
    }
    out
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// The complete determinant basis of a fixed (N_el, Sz) sector, stored as the
/// cartesian product of up- and down-string lists. Determinant `i` is
/// `(ups[i / dns.len()], dns[i % dns.len()])`; the list is sorted by
/// `(up, dn)` and duplicate-free by construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectorBasis {
    pub n_orbitals: usize,
    pub n_electrons: usize,
    pub two_sz: i32,
    ups: Vec<u64>,
    dns: Vec<u64>,
}

impl SectorBasis {
    pub fn enumerate(n_orbitals: usize, n_electrons: usize, two_sz: i32) -> Result<Self> {
        if n_orbitals == 0 || n_orbitals >= 64 {
            return Err(FciError::InfeasibleSector {
                n_orbitals,
                n_electrons,
                two_sz,
            });
        }
        let ne = n_electrons as i64;
        let ts = two_sz as i64;
        if ne > 2 * n_orbitals as i64 || ts.abs() > ne || (ne + ts) % 2 != 0 {
            return Err(FciError::InfeasibleSector {
                n_orbitals,
                n_electrons,
                two_sz,
            });
        }
        let n_up = ((ne + ts) / 2) as usize;
        let n_dn = ((ne - ts) / 2) as usize;
        if n_up > n_orbitals || n_dn > n_orbitals {
            return Err(FciError::InfeasibleSector {
                n_orbitals,
                n_electrons,
                two_sz,
            });
        }
        let size = binomial(n_orbitals, n_up) * binomial(n_orbitals, n_dn);
        if size == 0 {
            return Err(FciError::InfeasibleSector {
                n_orbitals,
                n_electrons,
                two_sz,
            });
        }
        if size > MAX_DETERMINANTS {
            return Err(FciError::SectorTooLarge {
                size,
                cap: MAX_DETERMINANTS,
            });
        }
        Ok(Self {
            n_orbitals,
            n_electrons,
            two_sz,
            ups: enumerate_masks(n_orbitals, n_up),
            dns: enumerate_masks(n_orbitals, n_dn),
        })
    }

    pub fn len(&self) -> usize {
        self.ups.len() * self.dns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n_up(&self) -> usize {
        self.ups.first().map_or(0, |m| m.count_ones() as usize)
    }

    pub fn n_dn(&self) -> usize {
        self.dns.first().map_or(0, |m| m.count_ones() as usize)
    }

    pub fn ups(&self) -> &[u64] {
        &self.ups
    }

    pub fn dns(&self) -> &[u64] {
        &self.dns
    }

    #[inline]
    pub fn det(&self, i: usize) -> (u64, u64) {
        (self.ups[i / self.dns.len()], self.dns[i % self.dns.len()])
    }

    /// Occupation bitstring with one bit per spin-orbital, spin-up modes in
    /// the low `n_orbitals` bits.
    pub fn determinant_bits(&self, i: usize) -> u128 {
        let (up, dn) = self.det(i);
        up as u128 | ((dn as u128) << self.n_orbitals)
    }

    pub fn index_of(&self, up: u64, dn: u64) -> Option<usize> {
        let iu = self.ups.binary_search(&up).ok()?;
        let id = self.dns.binary_search(&dn).ok()?;
        Some(iu * self.dns.len() + id)
    }

    /// The reference determinant implied by per-orbital occupations, if it
    /// lies in this sector. Singly occupied orbitals are filled spin-up first.
    pub fn reference_det(&self, occupations: &[u8]) -> Option<(u64, u64)> {
        if occupations.len() != self.n_orbitals {
            return None;
        }
        let mut up = 0u64;
        let mut dn = 0u64;
        let mut up_left = self.n_up() as i64 - occupations.iter().filter(|&&o| o == 2).count() as i64;
        for (i, &o) in occupations.iter().enumerate() {
            match o {
                0 => {}
                2 => {
                    up |= 1 << i;
                    dn |= 1 << i;
                }
                1 => {
                    if up_left > 0 {
                        up |= 1 << i;
                        up_left -= 1;
                    } else {
                        dn |= 1 << i;
                    }
                }
                _ => return None,
            }
        }
        if up.count_ones() as usize == self.n_up() && dn.count_ones() as usize == self.n_dn() {
            self.index_of(up, dn).map(|_| (up, dn))
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_orbital_doubly_occupied() {
        let b = SectorBasis::enumerate(1, 2, 0).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b.det(0), (1, 1));
    }

    #[test]
    fn dimer_half_filled() {
        let b = SectorBasis::enumerate(2, 2, 0).unwrap();
        assert_eq!(b.len(), 4);
    }

    #[test]
    fn six_site_half_filled_size() {
        let b = SectorBasis::enumerate(6, 6, 0).unwrap();
        assert_eq!(b.len(), 400);
    }

    #[test]
    fn infeasible_sectors_rejected() {
        assert!(SectorBasis::enumerate(2, 5, 1).is_err());
        assert!(SectorBasis::enumerate(2, 2, 1).is_err()); // parity mismatch
        assert!(SectorBasis::enumerate(2, 2, 4).is_err());
    }

    #[test]
    fn masks_sorted_and_complete() {
        let m = enumerate_masks(5, 2);
        assert_eq!(m.len(), binomial(5, 2));
        assert!(m.windows(2).all(|w| w[0] < w[1]));
        assert!(m.iter().all(|x| x.count_ones() == 2));
    }

    #[test]
    fn sign_helpers_anticommute() {
        // {c_0up, c†_1up} = 0 exercised through the mask helpers.
        let (u1, d1, s1) = apply_up(0b10, 0, false, 1).unwrap();
        let (_, _, s2) = apply_up(u1, d1, true, 0).unwrap();
        let (u3, d3, s3) = apply_up(0b10, 0, true, 0).unwrap();
        let (_, _, s4) = apply_up(u3, d3, false, 1).unwrap();
        assert_eq!(s1 * s2, -(s3 * s4));
    }
}

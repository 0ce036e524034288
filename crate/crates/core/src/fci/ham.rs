//! Matrix-free application of the second-quantized Hamiltonian to sector
//! vectors via the Slater–Condon rules, plus a deliberately slow term-by-term
//! reference implementation used as an independent check.

use crate::integrals::{DenseInts, IntegralSet};
use crate::solver::SymOp;

use super::basis::{apply_dn, apply_up, below_mask, SectorBasis};

/// The Hamiltonian restricted to one (N_el, Sz) sector.
pub struct FciHamiltonian {
    pub basis: SectorBasis,
    ints: DenseInts,
}

#[inline]
fn bits(mask: u64, n: usize) -> impl Iterator<Item = usize> + Clone {
    (0..n).filter(move |&i| mask & (1 << i) != 0)
}

#[inline]
fn sign_between(mask: u64, a: usize, b: usize) -> f64 {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    let between = mask & below_mask(hi) & !below_mask(lo + 1);
    if between.count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl FciHamiltonian {
    pub fn new(h: &IntegralSet, basis: SectorBasis) -> Self {
        assert_eq!(h.n_orbitals(), basis.n_orbitals);
        Self {
            basis,
            ints: h.dense(),
        }
    }

    pub fn diagonal_element(&self, up: u64, dn: u64) -> f64 {
        let n = self.ints.n;
        let ints = &self.ints;
        let mut e = ints.core;
        let occ: Vec<(usize, bool)> = bits(up, n)
            .map(|p| (p, true))
            .chain(bits(dn, n).map(|p| (p, false)))
            .collect();
        for &(p, _) in &occ {
            e += ints.t(p, p);
        }
        for &(i, si) in &occ {
            for &(j, sj) in &occ {
                let mut x = ints.v(i, i, j, j);
                if si == sj {
                    x -= ints.v(i, j, j, i);
                }
                e += 0.5 * x;
            }
        }
        e
    }

    /// y += H x, computed determinant by determinant.
    pub fn accumulate(&self, x: &[f64], y: &mut [f64]) {
        let n = self.ints.n;
        let ints = &self.ints;
        let basis = &self.basis;
        let n_dns = basis.dns().len();
        for (iu, &up) in basis.ups().iter().enumerate() {
            let occ_up: Vec<usize> = bits(up, n).collect();
            let virt_up: Vec<usize> = (0..n).filter(|&i| up & (1 << i) == 0).collect();
            for (id, &dn) in basis.dns().iter().enumerate() {
                let ket = iu * n_dns + id;
                let amp = x[ket];
                if amp == 0.0 {
                    continue;
                }
                let occ_dn: Vec<usize> = bits(dn, n).collect();
                let virt_dn: Vec<usize> = (0..n).filter(|&i| dn & (1 << i) == 0).collect();

                y[ket] += self.diagonal_element(up, dn) * amp;

                // Same-spin singles, including the mean-field two-body part.
                for &p in &occ_up {
                    for &q in &virt_up {
                        let mut val = ints.t(q, p);
                        for &j in &occ_up {
                            val += ints.v(q, p, j, j) - ints.v(q, j, j, p);
                        }
                        for &j in &occ_dn {
                            val += ints.v(q, p, j, j);
                        }
                        if val != 0.0 {
                            let up2 = up ^ (1 << p) ^ (1 << q);
                            let iu2 = basis.ups().binary_search(&up2).expect("sector closed");
                            y[iu2 * n_dns + id] += sign_between(up, p, q) * val * amp;
                        }
                    }
                }
                for &p in &occ_dn {
                    for &q in &virt_dn {
                        let mut val = ints.t(q, p);
                        for &j in &occ_dn {
                            val += ints.v(q, p, j, j) - ints.v(q, j, j, p);
                        }
                        for &j in &occ_up {
                            val += ints.v(q, p, j, j);
                        }
                        if val != 0.0 {
                            let dn2 = dn ^ (1 << p) ^ (1 << q);
                            let id2 = basis.dns().binary_search(&dn2).expect("sector closed");
                            y[iu * n_dns + id2] += sign_between(dn, p, q) * val * amp;
                        }
                    }
                }

                // Same-spin doubles: holes h1<h2 -> particles e1<e2, element
                // [(e1 h1|e2 h2) - (e1 h2|e2 h1)] with the sequential sign of
                // c†_{e1} c†_{e2} c_{h2} c_{h1}.
                same_spin_doubles(ints, &occ_up, &virt_up, up, |up2, val| {
                    let iu2 = basis.ups().binary_search(&up2).expect("sector closed");
                    y[iu2 * n_dns + id] += val * amp;
                });
                same_spin_doubles(ints, &occ_dn, &virt_dn, dn, |dn2, val| {
                    let id2 = basis.dns().binary_search(&dn2).expect("sector closed");
                    y[iu * n_dns + id2] += val * amp;
                });

                // Opposite-spin doubles: element (e_u h_u | e_d h_d), signs
                // factorize per spin species.
                for &pu in &occ_up {
                    for &qu in &virt_up {
                        let su = sign_between(up, pu, qu);
                        let up2 = up ^ (1 << pu) ^ (1 << qu);
                        let iu2 = basis.ups().binary_search(&up2).expect("sector closed");
                        for &pd in &occ_dn {
                            for &qd in &virt_dn {
                                let val = ints.v(qu, pu, qd, pd);
                                if val != 0.0 {
                                    let sd = sign_between(dn, pd, qd);
                                    let dn2 = dn ^ (1 << pd) ^ (1 << qd);
                                    let id2 =
                                        basis.dns().binary_search(&dn2).expect("sector closed");
                                    y[iu2 * n_dns + id2] += su * sd * val * amp;
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    /// Reference implementation: applies every Hamiltonian term as an explicit
    /// operator string. Exponentially slower; exists to pin the Slater–Condon
    /// path independently.
    pub fn accumulate_reference(&self, x: &[f64], y: &mut [f64]) {
        let n = self.ints.n;
        let ints = &self.ints;
        let basis = &self.basis;
        for ket in 0..basis.len() {
            let amp = x[ket];
            if amp == 0.0 {
                continue;
            }
            let (up, dn) = basis.det(ket);
            y[ket] += ints.core * amp;
            // One-body.
            for p in 0..n {
                for q in 0..n {
                    let t = ints.t(p, q);
                    if t == 0.0 {
                        continue;
                    }
                    for spin_up in [true, false] {
                        let step = |u, d, dg, o| {
                            if spin_up {
                                apply_up(u, d, dg, o)
                            } else {
                                apply_dn(u, d, dg, o)
                            }
                        };
                        if let Some((u1, d1, s1)) = step(up, dn, false, q) {
                            if let Some((u2, d2, s2)) = step(u1, d1, true, p) {
                                if let Some(bra) = basis.index_of(u2, d2) {
                                    y[bra] += t * s1 * s2 * amp;
                                }
                            }
                        }
                    }
                }
            }
            // Two-body: 1/2 v_pqrs c†_ps c†_rt c_st c_qs.
            for p in 0..n {
                for q in 0..n {
                    for r in 0..n {
                        for s in 0..n {
                            let v = ints.v(p, q, r, s);
                            if v == 0.0 {
                                continue;
                            }
                            for sig_up in [true, false] {
                                for tau_up in [true, false] {
                                    let step = |u, d, dg, o, up_spin: bool| {
                                        if up_spin {
                                            apply_up(u, d, dg, o)
                                        } else {
                                            apply_dn(u, d, dg, o)
                                        }
                                    };
                                    let Some((u1, d1, s1)) = step(up, dn, false, q, sig_up) else {
                                        continue;
                                    };
                                    let Some((u2, d2, s2)) = step(u1, d1, false, s, tau_up) else {
                                        continue;
                                    };
                                    let Some((u3, d3, s3)) = step(u2, d2, true, r, tau_up) else {
                                        continue;
                                    };
                                    let Some((u4, d4, s4)) = step(u3, d3, true, p, sig_up) else {
                                        continue;
                                    };
                                    if let Some(bra) = basis.index_of(u4, d4) {
                                        y[bra] += 0.5 * v * s1 * s2 * s3 * s4 * amp;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}

fn same_spin_doubles(
    ints: &DenseInts,
    occ: &[usize],
    virt: &[usize],
    mask: u64,
    mut sink: impl FnMut(u64, f64),
) {
    for (i1, &h1) in occ.iter().enumerate() {
        for &h2 in &occ[i1 + 1..] {
            for (j1, &e1) in virt.iter().enumerate() {
                for &e2 in &virt[j1 + 1..] {
                    let val = ints.v(e1, h1, e2, h2) - ints.v(e1, h2, e2, h1);
                    if val == 0.0 {
                        continue;
                    }
                    // c†_{e1} c†_{e2} c_{h2} c_{h1} applied right to left.
                    let m1 = mask ^ (1 << h1);
                    let s1 = (m1 & below_mask(h1)).count_ones();
                    let m2 = m1 ^ (1 << h2);
                    let s2 = (m2 & below_mask(h2)).count_ones();
                    let m3 = m2 | (1 << e2);
                    let s3 = (m2 & below_mask(e2)).count_ones();
                    let m4 = m3 | (1 << e1);
                    let s4 = (m3 & below_mask(e1)).count_ones();
                    let sign = if (s1 + s2 + s3 + s4) % 2 == 0 { 1.0 } else { -1.0 };
                    sink(m4, sign * val);
                }
            }
        }
    }
}

impl SymOp for FciHamiltonian {
    fn dim(&self) -> usize {
        self.basis.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        self.accumulate(x, y);
    }

    fn diagonal(&self) -> Vec<f64> {
        (0..self.basis.len())
            .map(|i| {
                let (up, dn) = self.basis.det(i);
                self.diagonal_element(up, dn)
            })
            .collect()
    }
}

//! Renormalized operator sets and their growth.
//!
//! A block stores everything needed to assemble any superblock Hamiltonian it
//! can appear in: its creation operators, all pair products (c†c† and c†c),
//! the complementary three-index sums S_x for every orbital x outside the
//! block, and the block Hamiltonian. Growth by one site forms each operator
//! in the enlarged product space from a stored block operator times an exact
//! site operator — never from products of two stored (already truncated)
//! operators — so every block operator remains the exact projection of its
//! definition onto the kept space.
//!
//! The complementary operator for orbital x outside a block X collects the
//! one-index-outside interaction terms:
//!
//! ```text
//! S_xσ = 1/2 Σ_{q∈X} t_xq c_qσ
//!      + 1/2 Σ_{qrs∈X,τ} v_xqrs c†_rτ c_sτ c_qσ
//!      + 1/2 Σ_{qrs∈X,τ} v_rqxs c†_rτ c_qτ c_sσ
//! ```
//!
//! so that the full cross Hamiltonian between parts A (lower positions) and
//! B is `Σ_{p∈A} (c†_p S_p^B + h.c.) - Σ_{p∈B} (S_p^A c†_p + h.c.)` plus the
//! two-index-per-side terms, which are generated generically by splitting
//! every two-body term across the bipartition with fermionic inversion signs.

use std::collections::BTreeMap;

use crate::algebra::{BlockOp, Isometry, ProductSpace, QNum, SectorSpace, Spin};
use crate::integrals::DenseInts;

use super::site;

/// One elementary operator: (dagger, chain position, spin).
pub type TermOp = (bool, usize, Spin);

type Mode = (usize, Spin);

#[derive(Clone, Debug)]
pub struct OpSet {
    pub space: SectorSpace,
    /// Chain positions covered by this block, ascending.
    pub sites: Vec<usize>,
    cre: BTreeMap<Mode, BlockOp>,
    /// c†_a c†_b for modes a < b in (position, spin) order.
    pair_cc: BTreeMap<(Mode, Mode), BlockOp>,
    /// c†_a c_b for modes a <= b.
    pair_cb: BTreeMap<(Mode, Mode), BlockOp>,
    /// Complementary S_x,σ for chain positions x outside the block.
    comp: BTreeMap<Mode, BlockOp>,
    pub ham: BlockOp,
}

fn comp_delta(spin: Spin) -> QNum {
    QNum::new(-1, -spin.tsz())
}

impl OpSet {
    /// The empty block. `core` is folded into the Hamiltonian so exactly one
    /// block of a superblock should carry it.
    pub fn vacuum(h: &DenseInts, outside: &[usize], core: bool) -> Self {
        let space = SectorSpace::vacuum();
        let mut ham = BlockOp::identity(&space);
        ham.scale(if core { h.core } else { 0.0 });
        let mut comp = BTreeMap::new();
        for &x in outside {
            for s in Spin::BOTH {
                comp.insert((x, s), BlockOp::zero(comp_delta(s), true));
            }
        }
        Self {
            space,
            sites: Vec::new(),
            cre: BTreeMap::new(),
            pair_cc: BTreeMap::new(),
            pair_cb: BTreeMap::new(),
            comp,
            ham,
        }
    }

    pub fn dim(&self) -> usize {
        self.space.total_dim()
    }

    pub fn cre_op(&self, m: Mode) -> &BlockOp {
        self.cre.get(&m).expect("creation operator present")
    }

    pub fn comp_op(&self, m: Mode) -> &BlockOp {
        self.comp.get(&m).expect("complementary operator present")
    }

    /// Product of one or two elementary operators on this block, in the given
    /// operator order (rightmost applied first).
    pub fn op_product(&self, ops: &[TermOp]) -> BlockOp {
        match ops {
            [(dg, p, s)] => {
                let c = self.cre_op((*p, *s));
                if *dg {
                    c.clone()
                } else {
                    c.transpose()
                }
            }
            [(d1, p1, s1), (d2, p2, s2)] => {
                let a: Mode = (*p1, *s1);
                let b: Mode = (*p2, *s2);
                match (d1, d2) {
                    (true, true) => self.lookup_cc(a, b),
                    (true, false) => self.lookup_cb(a, b),
                    (false, false) => self.lookup_cc(b, a).transpose(),
                    (false, true) => {
                        unreachable!("annihilator-creator pairs never arise from normal-ordered terms")
                    }
                }
            }
            _ => panic!("block operator products limited to one or two factors"),
        }
    }

    /// c†_a c†_b via the canonical store.
    fn lookup_cc(&self, a: Mode, b: Mode) -> BlockOp {
        use std::cmp::Ordering::*;
        match a.cmp(&b) {
            Equal => BlockOp::zero(
                QNum::new(2, a.1.tsz() + b.1.tsz()),
                false,
            ),
            Less => self.pair_cc[&(a, b)].clone(),
            Greater => {
                let mut op = self.pair_cc[&(b, a)].clone();
                op.scale(-1.0);
                op
            }
        }
    }

    /// c†_a c_b via the canonical store.
    fn lookup_cb(&self, a: Mode, b: Mode) -> BlockOp {
        if a <= b {
            self.pair_cb[&(a, b)].clone()
        } else {
            self.pair_cb[&(b, a)].transpose()
        }
    }
}

/// A factor of a product space: an existing block or a bare site. Factors are
/// always ordered by chain position (every site of the lower factor precedes
/// every site of the higher one).
#[derive(Clone, Copy)]
pub enum Factor<'a> {
    Block(&'a OpSet),
    Site(usize),
}

impl<'a> Factor<'a> {
    pub fn sites(&self) -> Vec<usize> {
        match self {
            Factor::Block(b) => b.sites.clone(),
            Factor::Site(p) => vec![*p],
        }
    }

    pub fn space(&self) -> SectorSpace {
        match self {
            Factor::Block(b) => b.space.clone(),
            Factor::Site(_) => SectorSpace::site(),
        }
    }

    fn contains(&self, pos: usize) -> bool {
        match self {
            Factor::Block(b) => b.sites.binary_search(&pos).is_ok(),
            Factor::Site(p) => *p == pos,
        }
    }

    pub fn op_product(&self, ops: &[TermOp]) -> BlockOp {
        match self {
            Factor::Block(b) => b.op_product(ops),
            Factor::Site(p) => {
                let local: Vec<(bool, Spin)> = ops
                    .iter()
                    .map(|&(dg, pos, sp)| {
                        debug_assert_eq!(pos, *p);
                        (dg, sp)
                    })
                    .collect();
                site::product(&local)
            }
        }
    }

    pub fn comp(&self, h: &DenseInts, m: Mode) -> BlockOp {
        match self {
            Factor::Block(b) => b.comp_op(m).clone(),
            Factor::Site(_) => {
                let mut acc = BlockOp::zero(comp_delta(m.1), true);
                for (coeff, ops) in comp_terms(h, m, &self.sites()) {
                    acc.add_scaled(&self.op_product(&ops), coeff);
                }
                acc
            }
        }
    }

    pub fn ham(&self, h: &DenseInts) -> BlockOp {
        match self {
            Factor::Block(b) => b.ham.clone(),
            Factor::Site(p) => {
                let w = *p;
                let space = SectorSpace::site();
                let mut acc = BlockOp::zero(QNum::ZERO, false);
                acc.add_scaled(&BlockOp::identity(&space), 0.0);
                let t = h.t(w, w);
                if t != 0.0 {
                    for s in Spin::BOTH {
                        acc.add_scaled(&site::product(&[(true, s), (false, s)]), t);
                    }
                }
                let v = h.v(w, w, w, w);
                if v != 0.0 {
                    for s1 in Spin::BOTH {
                        for s2 in Spin::BOTH {
                            acc.add_scaled(
                                &site::product(&[(true, s1), (true, s2), (false, s2), (false, s1)]),
                                0.5 * v,
                            );
                        }
                    }
                }
                acc
            }
        }
    }
}

/// The three term families of a complementary operator S_x,σ over `sites`.
fn comp_terms(h: &DenseInts, m: Mode, sites: &[usize]) -> Vec<(f64, Vec<TermOp>)> {
    let (x, sigma) = m;
    let mut out = Vec::new();
    for &q in sites {
        let t = h.t(x, q);
        if t != 0.0 {
            out.push((0.5 * t, vec![(false, q, sigma)]));
        }
    }
    for &q in sites {
        for &r in sites {
            for &s in sites {
                for tau in Spin::BOTH {
                    let v1 = h.v(x, q, r, s);
                    if v1 != 0.0 {
                        out.push((0.5 * v1, vec![(true, r, tau), (false, s, tau), (false, q, sigma)]));
                    }
                    let v2 = h.v(r, q, x, s);
                    if v2 != 0.0 {
                        out.push((0.5 * v2, vec![(true, r, tau), (false, q, tau), (false, s, sigma)]));
                    }
                }
            }
        }
    }
    out
}

/// Stable-partitions a term across the bipartition, counting fermionic
/// inversions: every (higher-op before lower-op) pair contributes a sign.
fn split_term(ops: &[TermOp], lower: &Factor) -> (f64, Vec<TermOp>, Vec<TermOp>) {
    let mut lo = Vec::with_capacity(ops.len());
    let mut hi = Vec::with_capacity(ops.len());
    let mut inversions = 0usize;
    for &op in ops {
        if lower.contains(op.1) {
            inversions += hi.len();
            lo.push(op);
        } else {
            hi.push(op);
        }
    }
    let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
    (sign, lo, hi)
}

/// One `coeff * (O_lower ⊗ O_higher)` contribution to a cross Hamiltonian;
/// `with_transpose` marks terms whose Hermitian partner must be added too.
pub struct CrossTerm {
    pub coeff: f64,
    pub l: Option<BlockOp>,
    pub r: Option<BlockOp>,
    pub with_transpose: bool,
}

/// All Hamiltonian terms coupling the two factors. One-index-per-side and
/// three-index-per-side families flow through the complementary operators;
/// two-index-per-side terms are generated by splitting the two-body sum.
pub fn cross_ham_terms(h: &DenseInts, lower: &Factor, higher: &Factor) -> Vec<CrossTerm> {
    let mut out = Vec::new();
    for &p in &lower.sites() {
        for s in Spin::BOTH {
            let c = lower.op_product(&[(true, p, s)]);
            let comp = higher.comp(h, (p, s));
            out.push(CrossTerm {
                coeff: 1.0,
                l: Some(c),
                r: Some(comp),
                with_transpose: true,
            });
        }
    }
    for &p in &higher.sites() {
        for s in Spin::BOTH {
            let comp = lower.comp(h, (p, s));
            let c = higher.op_product(&[(true, p, s)]);
            out.push(CrossTerm {
                coeff: -1.0,
                l: Some(comp),
                r: Some(c),
                with_transpose: true,
            });
        }
    }

    // Two-body terms with exactly two indices on each side.
    let all: Vec<usize> = lower.sites().into_iter().chain(higher.sites()).collect();
    let mut grouped: BTreeMap<(Vec<TermOp>, Vec<TermOp>), f64> = BTreeMap::new();
    for &p in &all {
        for &q in &all {
            for &r in &all {
                for &s in &all {
                    let v = h.v(p, q, r, s);
                    if v == 0.0 {
                        continue;
                    }
                    let n_low = [p, q, r, s]
                        .iter()
                        .filter(|&&i| lower.contains(i))
                        .count();
                    if n_low != 2 {
                        continue;
                    }
                    for sigma in Spin::BOTH {
                        for tau in Spin::BOTH {
                            let ops = [
                                (true, p, sigma),
                                (true, r, tau),
                                (false, s, tau),
                                (false, q, sigma),
                            ];
                            let (sign, lo, hi) = split_term(&ops, lower);
                            *grouped.entry((lo, hi)).or_insert(0.0) += 0.5 * sign * v;
                        }
                    }
                }
            }
        }
    }
    for ((lo, hi), coeff) in grouped {
        if coeff == 0.0 {
            continue;
        }
        out.push(CrossTerm {
            coeff,
            l: Some(lower.op_product(&lo)),
            r: Some(higher.op_product(&hi)),
            with_transpose: false,
        });
    }
    out
}

/// Grows a block: forms the product space of the two factors and every
/// operator of the enlarged set. `outside` lists the chain positions not in
/// the merged block (complementary operators are maintained for those).
pub fn grow(
    h: &DenseInts,
    lower: Factor,
    higher: Factor,
    outside: &[usize],
) -> (ProductSpace, OpSet) {
    let lo_sites = lower.sites();
    let hi_sites = higher.sites();
    debug_assert!(lo_sites.iter().all(|a| hi_sites.iter().all(|b| a < b)));
    let prod = ProductSpace::new(lower.space(), higher.space());

    let sites: Vec<usize> = lo_sites.iter().chain(hi_sites.iter()).copied().collect();
    let modes: Vec<Mode> = sites
        .iter()
        .flat_map(|&p| Spin::BOTH.map(|s| (p, s)))
        .collect();
    let in_lower = |p: usize| lower.contains(p);

    // Creation operators.
    let mut cre = BTreeMap::new();
    for &(p, s) in &modes {
        let op = if in_lower(p) {
            prod.embed(Some(&lower.op_product(&[(true, p, s)])), None)
        } else {
            prod.embed(None, Some(&higher.op_product(&[(true, p, s)])))
        };
        cre.insert((p, s), op);
    }

    // Pair products; mode pairs are ordered so the lower-factor mode comes
    // first whenever the pair is mixed.
    let mut pair_cc = BTreeMap::new();
    let mut pair_cb = BTreeMap::new();
    for (ia, &a) in modes.iter().enumerate() {
        for &b in &modes[ia..] {
            let build = |d1: bool, d2: bool| -> BlockOp {
                let t1 = (d1, a.0, a.1);
                let t2 = (d2, b.0, b.1);
                match (in_lower(a.0), in_lower(b.0)) {
                    (true, true) => prod.embed(Some(&lower.op_product(&[t1, t2])), None),
                    (false, false) => prod.embed(None, Some(&higher.op_product(&[t1, t2]))),
                    (true, false) => prod.embed(
                        Some(&lower.op_product(&[t1])),
                        Some(&higher.op_product(&[t2])),
                    ),
                    (false, true) => unreachable!("modes are position-ordered"),
                }
            };
            if a < b {
                pair_cc.insert((a, b), build(true, true));
            }
            pair_cb.insert((a, b), build(true, false));
        }
    }

    // Complementary operators for the remaining chain.
    let mut comp = BTreeMap::new();
    for &x in outside {
        for sigma in Spin::BOTH {
            let mut acc = prod.embed(Some(&lower.comp(h, (x, sigma))), None);
            acc.add_scaled(&prod.embed(None, Some(&higher.comp(h, (x, sigma)))), 1.0);
            // Terms of S_x spanning both factors.
            let mut grouped: BTreeMap<(Vec<TermOp>, Vec<TermOp>), f64> = BTreeMap::new();
            for (coeff, ops) in comp_terms(h, (x, sigma), &sites) {
                let (sign, lo, hi) = split_term(&ops, &lower);
                if lo.is_empty() || hi.is_empty() {
                    continue; // already covered by the embedded factor parts
                }
                *grouped.entry((lo, hi)).or_insert(0.0) += sign * coeff;
            }
            for ((lo, hi), coeff) in grouped {
                if coeff == 0.0 {
                    continue;
                }
                acc.add_scaled(
                    &prod.embed(Some(&lower.op_product(&lo)), Some(&higher.op_product(&hi))),
                    coeff,
                );
            }
            comp.insert((x, sigma), acc);
        }
    }

    // Block Hamiltonian.
    let mut ham = prod.embed(Some(&lower.ham(h)), None);
    ham.add_scaled(&prod.embed(None, Some(&higher.ham(h))), 1.0);
    for term in cross_ham_terms(h, &lower, &higher) {
        let embedded = prod.embed(term.l.as_ref(), term.r.as_ref());
        ham.add_scaled(&embedded, term.coeff);
        if term.with_transpose {
            ham.add_scaled(&embedded.transpose(), term.coeff);
        }
    }

    let ops = OpSet {
        space: prod.space.clone(),
        sites,
        cre,
        pair_cc,
        pair_cb,
        comp,
        ham,
    };
    (prod, ops)
}

/// Builds a block whose basis is an explicit list of determinants over
/// `positions`.
///
/// Determinants are interleaved-mode masks local to the block: bit `2k` is
/// spin-up and bit `2k+1` spin-down at `positions[k]`, matching the mode
/// order of grown blocks (position-major, up before down). Operators are the
/// projections of the exact operators onto the spanned subspace, so such a
/// block slots into superblock assembly like any renormalized one.
pub fn from_determinants(
    h: &DenseInts,
    positions: &[usize],
    dets: &[u64],
    outside: &[usize],
) -> OpSet {
    assert!(!positions.is_empty() && !dets.is_empty());
    let k = positions.len();
    let qn_of = |mask: u64| -> QNum {
        let mut n = 0;
        let mut tsz = 0;
        for slot in 0..k {
            if mask & (1 << (2 * slot)) != 0 {
                n += 1;
                tsz += 1;
            }
            if mask & (1 << (2 * slot + 1)) != 0 {
                n += 1;
                tsz -= 1;
            }
        }
        QNum::new(n, tsz)
    };
    // Sector layout: group determinants by quantum numbers; within a sector
    // order by mask for determinism.
    let mut by_qn: BTreeMap<QNum, Vec<u64>> = BTreeMap::new();
    for &d in dets {
        by_qn.entry(qn_of(d)).or_default().push(d);
    }
    for list in by_qn.values_mut() {
        list.sort_unstable();
        list.dedup();
    }
    let space = SectorSpace::new(
        by_qn
            .iter()
            .map(|(&qn, l)| crate::algebra::Sector { qn, dim: l.len() })
            .collect(),
    );
    let mut index: BTreeMap<u64, (usize, usize)> = BTreeMap::new();
    for (qn, list) in &by_qn {
        let sec = space.find(*qn).expect("sector registered");
        for (i, &d) in list.iter().enumerate() {
            index.insert(d, (sec, i));
        }
    }
    let slot_of = |pos: usize| -> usize {
        positions
            .binary_search(&pos)
            .expect("operator position inside block")
    };

    // Applies an operator string (rightmost first) to a determinant.
    let apply = |mask: u64, ops: &[TermOp]| -> Option<(u64, f64)> {
        let mut m = mask;
        let mut sign = 1.0;
        for &(dagger, pos, spin) in ops.iter().rev() {
            let bit = 2 * slot_of(pos) + (spin == Spin::Down) as usize;
            let b = 1u64 << bit;
            if dagger == (m & b != 0) {
                return None;
            }
            if (m & ((1 << bit) - 1)).count_ones() % 2 == 1 {
                sign = -sign;
            }
            m ^= b;
        }
        Some((m, sign))
    };

    let op_from_terms = |terms: &[(f64, Vec<TermOp>)], delta: QNum, odd: bool| -> BlockOp {
        let mut acc = BlockOp::zero(delta, odd);
        for (src_sec, (qn, list)) in by_qn.iter().enumerate() {
            let Some(dst_sec) = space.find(*qn + delta) else {
                continue;
            };
            let dim_src = list.len();
            let dim_dst = space.dim(dst_sec);
            let mut mat = nalgebra::DMatrix::zeros(dim_dst, dim_src);
            let mut any = false;
            for (col, &d) in list.iter().enumerate() {
                for (coeff, ops) in terms {
                    if let Some((d2, sign)) = apply(d, ops) {
                        if let Some(&(s2, row)) = index.get(&d2) {
                            debug_assert_eq!(s2, dst_sec);
                            mat[(row, col)] += coeff * sign;
                            any = true;
                        }
                    }
                }
            }
            if any {
                acc.add_scaled(
                    &BlockOp {
                        delta,
                        odd,
                        blocks: vec![crate::algebra::OpBlock {
                            src: src_sec,
                            dst: dst_sec,
                            mat,
                        }],
                    },
                    1.0,
                );
            }
        }
        acc
    };

    let mut cre = BTreeMap::new();
    let mut pair_cc = BTreeMap::new();
    let mut pair_cb = BTreeMap::new();
    let modes: Vec<Mode> = positions
        .iter()
        .flat_map(|&p| Spin::BOTH.map(|s| (p, s)))
        .collect();
    for &(p, s) in &modes {
        cre.insert(
            (p, s),
            op_from_terms(&[(1.0, vec![(true, p, s)])], QNum::new(1, s.tsz()), true),
        );
    }
    for (ia, &a) in modes.iter().enumerate() {
        for &b in &modes[ia..] {
            if a < b {
                pair_cc.insert(
                    (a, b),
                    op_from_terms(
                        &[(1.0, vec![(true, a.0, a.1), (true, b.0, b.1)])],
                        QNum::new(2, a.1.tsz() + b.1.tsz()),
                        false,
                    ),
                );
            }
            pair_cb.insert(
                (a, b),
                op_from_terms(
                    &[(1.0, vec![(true, a.0, a.1), (false, b.0, b.1)])],
                    QNum::new(0, a.1.tsz() - b.1.tsz()),
                    false,
                ),
            );
        }
    }
    let mut comp = BTreeMap::new();
    for &x in outside {
        for sigma in Spin::BOTH {
            let terms = comp_terms(h, (x, sigma), positions);
            comp.insert((x, sigma), op_from_terms(&terms, comp_delta(sigma), true));
        }
    }
    // Block Hamiltonian over the covered positions.
    let mut ham_terms_list: Vec<(f64, Vec<TermOp>)> = Vec::new();
    for &p in positions {
        for &q in positions {
            let t = h.t(p, q);
            if t != 0.0 {
                for s in Spin::BOTH {
                    ham_terms_list.push((t, vec![(true, p, s), (false, q, s)]));
                }
            }
            for &r in positions {
                for &s in positions {
                    let v = h.v(p, q, r, s);
                    if v == 0.0 {
                        continue;
                    }
                    for sigma in Spin::BOTH {
                        for tau in Spin::BOTH {
                            ham_terms_list.push((
                                0.5 * v,
                                vec![
                                    (true, p, sigma),
                                    (true, r, tau),
                                    (false, s, tau),
                                    (false, q, sigma),
                                ],
                            ));
                        }
                    }
                }
            }
        }
    }
    let ham = op_from_terms(&ham_terms_list, QNum::ZERO, false);

    OpSet {
        space,
        sites: positions.to_vec(),
        cre,
        pair_cc,
        pair_cb,
        comp,
        ham,
    }
}

/// Projects every operator of the set onto a kept subspace.
pub fn truncate(iso: &Isometry, ops: &OpSet) -> OpSet {
    OpSet {
        space: iso.to.clone(),
        sites: ops.sites.clone(),
        cre: ops
            .cre
            .iter()
            .map(|(k, v)| (*k, iso.renorm(v)))
            .collect(),
        pair_cc: ops
            .pair_cc
            .iter()
            .map(|(k, v)| (*k, iso.renorm(v)))
            .collect(),
        pair_cb: ops
            .pair_cb
            .iter()
            .map(|(k, v)| (*k, iso.renorm(v)))
            .collect(),
        comp: ops
            .comp
            .iter()
            .map(|(k, v)| (*k, iso.renorm(v)))
            .collect(),
        ham: iso.renorm(&ops.ham),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fci::{ground_state, SectorBasis};
    use crate::integrals::{build_hubbard, IntegralSet, OrbitalMeta};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_h(n: usize, seed: u64) -> IntegralSet {
        let mut rng = StdRng::seed_from_u64(seed);
        let occ: Vec<u8> = (0..n).map(|i| if 2 * (i + 1) <= n { 2 } else { 0 }).collect();
        let mut h = IntegralSet::new(OrbitalMeta::new(vec![1; n], occ, 0).unwrap());
        for p in 0..n {
            for q in 0..=p {
                h.set_t(p, q, rng.random_range(-1.0..1.0));
            }
        }
        for p in 0..n {
            for q in 0..=p {
                for r in 0..n {
                    for s in 0..=r {
                        h.set_v(p, q, r, s, 0.2 * rng.random_range(-1.0..1.0));
                    }
                }
            }
        }
        h
    }

    /// Grows the full chain into one untruncated block; its Hamiltonian must
    /// reproduce the oracle spectrum sector by sector.
    fn full_block(h: &IntegralSet, leftward: bool) -> OpSet {
        let n = h.n_orbitals();
        let d = h.dense();
        if !leftward {
            let mut block = OpSet::vacuum(&d, &(0..n).collect::<Vec<_>>(), true);
            for p in 0..n {
                let outside: Vec<usize> = (p + 1..n).collect();
                let (_, grown) = grow(&d, Factor::Block(&block), Factor::Site(p), &outside);
                block = grown;
            }
            block
        } else {
            let mut block = OpSet::vacuum(&d, &(0..n).collect::<Vec<_>>(), true);
            for p in (0..n).rev() {
                let outside: Vec<usize> = (0..p).collect();
                let (_, grown) = grow(&d, Factor::Site(p), Factor::Block(&block), &outside);
                block = grown;
            }
            block
        }
    }

    fn sector_eigs(block: &OpSet, qn: QNum) -> Vec<f64> {
        let sec = block.space.find(qn).expect("sector present");
        let b = block.ham.block_for_src(sec).expect("diagonal block");
        let mut vals: Vec<f64> = b.mat.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        vals.sort_by(|a, b| a.total_cmp(b));
        vals
    }

    #[test]
    fn grown_chain_matches_oracle_spectrum() {
        for (h, label) in [
            (build_hubbard(3, 1.0, 4.0).unwrap(), "hubbard"),
            (random_h(3, 5), "random"),
        ] {
            let block = full_block(&h, false);
            for (ne, tsz) in [(2usize, 0i32), (3, 1), (4, 0), (1, -1)] {
                let basis = SectorBasis::enumerate(3, ne, tsz).unwrap();
                let ham = crate::fci::FciHamiltonian::new(&h, basis.clone());
                let dim = basis.len();
                let mut full = nalgebra::DMatrix::zeros(dim, dim);
                let mut col = vec![0.0; dim];
                for j in 0..dim {
                    let mut unit = vec![0.0; dim];
                    unit[j] = 1.0;
                    col.iter_mut().for_each(|x| *x = 0.0);
                    ham.accumulate(&unit, &mut col);
                    for i in 0..dim {
                        full[(i, j)] = col[i];
                    }
                }
                let mut oracle: Vec<f64> =
                    full.symmetric_eigen().eigenvalues.iter().copied().collect();
                oracle.sort_by(|a, b| a.total_cmp(b));
                let got = sector_eigs(&block, QNum::new(ne as i32, tsz));
                assert_eq!(got.len(), oracle.len(), "{label} sector dim");
                for (a, b) in got.iter().zip(&oracle) {
                    assert!((a - b).abs() < 1e-9, "{label}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn rightward_and_leftward_growth_agree() {
        let h = random_h(3, 11);
        let a = full_block(&h, false);
        let b = full_block(&h, true);
        for qn in [QNum::new(2, 0), QNum::new(3, -1), QNum::new(4, 0)] {
            let ea = sector_eigs(&a, qn);
            let eb = sector_eigs(&b, qn);
            for (x, y) in ea.iter().zip(&eb) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn determinant_block_matches_grown_block_spectra() {
        let h = random_h(3, 23);
        let d = h.dense();
        // Full determinant basis over positions {1, 2}.
        let dets: Vec<u64> = (0..16).collect();
        let det_block = from_determinants(&d, &[1, 2], &dets, &[0]);
        // Same block grown from the right.
        let mut grown = OpSet::vacuum(&d, &(0..3).collect::<Vec<_>>(), false);
        for p in (1..3).rev() {
            let outside: Vec<usize> = (0..p).collect();
            grown = grow(&d, Factor::Site(p), Factor::Block(&grown), &outside).1;
        }
        for qn in [QNum::new(1, 1), QNum::new(2, 0), QNum::new(3, -1)] {
            let a = {
                let sec = det_block.space.find(qn).unwrap();
                let b = det_block.ham.block_for_src(sec).unwrap();
                let mut v: Vec<f64> =
                    b.mat.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
                v.sort_by(|x, y| x.total_cmp(y));
                v
            };
            let b = sector_eigs(&grown, qn);
            assert_eq!(a.len(), b.len());
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-10, "{qn:?}: {x} vs {y}");
            }
        }
        // Complementary operators agree too (projected onto the same basis,
        // compared through a superblock energy downstream); here check norms.
        for s in Spin::BOTH {
            let a = det_block.comp_op((0, s)).frobenius_norm();
            let b = grown.comp_op((0, s)).frobenius_norm();
            assert!((a - b).abs() < 1e-10, "comp norm {a} vs {b}");
        }
    }

    #[test]
    fn ground_energy_through_block_growth() {
        let h = build_hubbard(4, 1.0, 4.0).unwrap();
        let block = full_block(&h, false);
        let eigs = sector_eigs(&block, QNum::new(4, 0));
        let basis = SectorBasis::enumerate(4, 4, 0).unwrap();
        let e0 = ground_state(&h, &basis, 1).unwrap()[0].energy;
        assert!((eigs[0] - e0).abs() < 1e-9, "{} vs {}", eigs[0], e0);
    }
}

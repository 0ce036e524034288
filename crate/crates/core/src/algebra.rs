//! Quantum-number-resolved block-sparse linear algebra.
//!
//! States carry abelian labels `(n, 2sz)`. A [`SectorSpace`] is an ordered
//! list of sectors; a [`BlockOp`] shifts every sector by one fixed [`QNum`]
//! delta and stores one dense matrix per source sector. Graded (fermionic)
//! tensor products over a [`ProductSpace`] follow a single sign rule: an
//! odd operator acting on the *right* factor picks up the parity of the left
//! factor's ket sector. With modes ordered left-factor-first this reproduces
//! the Jordan–Wigner strings exactly, so every operator built through
//! [`ProductSpace::embed`] is the true matrix of the corresponding mode
//! operator.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::ops::{Add, Sub};

/// Abelian quantum numbers: particle count and twice the Sz projection.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct QNum {
    pub n: i32,
    pub tsz: i32,
}

impl QNum {
    pub const ZERO: QNum = QNum { n: 0, tsz: 0 };

    pub fn new(n: i32, tsz: i32) -> Self {
        Self { n, tsz }
    }

    /// Fermion parity of a state with these quantum numbers.
    pub fn odd(self) -> bool {
        self.n % 2 != 0
    }
}

impl Add for QNum {
    type Output = QNum;
    fn add(self, rhs: QNum) -> QNum {
        QNum::new(self.n + rhs.n, self.tsz + rhs.tsz)
    }
}

impl Sub for QNum {
    type Output = QNum;
    fn sub(self, rhs: QNum) -> QNum {
        QNum::new(self.n - rhs.n, self.tsz - rhs.tsz)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub const BOTH: [Spin; 2] = [Spin::Up, Spin::Down];

    pub fn tsz(self) -> i32 {
        match self {
            Spin::Up => 1,
            Spin::Down => -1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sector {
    pub qn: QNum,
    pub dim: usize,
}

/// An ordered, duplicate-free list of quantum-number sectors.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct SectorSpace {
    pub sectors: Vec<Sector>,
}

impl SectorSpace {
    pub fn new(mut sectors: Vec<Sector>) -> Self {
        sectors.retain(|s| s.dim > 0);
        sectors.sort_by_key(|s| s.qn);
        debug_assert!(sectors.windows(2).all(|w| w[0].qn < w[1].qn));
        Self { sectors }
    }

    /// The trivial one-state space with quantum numbers (0, 0).
    pub fn vacuum() -> Self {
        Self::new(vec![Sector {
            qn: QNum::ZERO,
            dim: 1,
        }])
    }

    /// The q = 4 orbital space: |0>, |dn>, |up>, |updn> with quantum numbers
    /// (0,0), (1,-1), (1,+1), (2,0).
    pub fn site() -> Self {
        Self::new(
            [(0, 0), (1, -1), (1, 1), (2, 0)]
                .into_iter()
                .map(|(n, tsz)| Sector {
                    qn: QNum::new(n, tsz),
                    dim: 1,
                })
                .collect(),
        )
    }

    pub fn total_dim(&self) -> usize {
        self.sectors.iter().map(|s| s.dim).sum()
    }

    pub fn find(&self, qn: QNum) -> Option<usize> {
        self.sectors.binary_search_by_key(&qn, |s| s.qn).ok()
    }

    pub fn dim(&self, sector: usize) -> usize {
        self.sectors[sector].dim
    }

    pub fn qn(&self, sector: usize) -> QNum {
        self.sectors[sector].qn
    }
}

/// One dense block of a [`BlockOp`]: maps states of sector `src` into sector
/// `dst`; `mat` has shape `dim(dst) x dim(src)`.
#[derive(Clone, Debug, PartialEq)]
pub struct OpBlock {
    pub src: usize,
    pub dst: usize,
    pub mat: DMatrix<f64>,
}

/// A quantum-number-conserving (up to a fixed shift) block-sparse operator.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockOp {
    pub delta: QNum,
    pub odd: bool,
    /// Sorted by `src`; at most one block per source sector.
    pub blocks: Vec<OpBlock>,
}

impl BlockOp {
    pub fn zero(delta: QNum, odd: bool) -> Self {
        Self {
            delta,
            odd,
            blocks: Vec::new(),
        }
    }

    pub fn identity(space: &SectorSpace) -> Self {
        Self {
            delta: QNum::ZERO,
            odd: false,
            blocks: space
                .sectors
                .iter()
                .enumerate()
                .map(|(i, s)| OpBlock {
                    src: i,
                    dst: i,
                    mat: DMatrix::identity(s.dim, s.dim),
                })
                .collect(),
        }
    }

    pub fn block_for_src(&self, src: usize) -> Option<&OpBlock> {
        self.blocks
            .binary_search_by_key(&src, |b| b.src)
            .ok()
            .map(|i| &self.blocks[i])
    }

    pub fn scale(&mut self, f: f64) {
        for b in &mut self.blocks {
            b.mat *= f;
        }
    }

    /// `self += f * other`. Both operands must carry the same delta and
    /// parity.
    pub fn add_scaled(&mut self, other: &BlockOp, f: f64) {
        assert_eq!(self.delta, other.delta, "block-op delta mismatch");
        assert_eq!(self.odd, other.odd, "block-op parity mismatch");
        for ob in &other.blocks {
            match self.blocks.binary_search_by_key(&ob.src, |b| b.src) {
                Ok(i) => {
                    debug_assert_eq!(self.blocks[i].dst, ob.dst);
                    self.blocks[i].mat.axpy_assign(f, &ob.mat);
                }
                Err(i) => {
                    let mut mat = ob.mat.clone();
                    mat *= f;
                    self.blocks.insert(
                        i,
                        OpBlock {
                            src: ob.src,
                            dst: ob.dst,
                            mat,
                        },
                    );
                }
            }
        }
    }

    /// Operator composition `self ∘ rhs` (apply `rhs` first).
    pub fn matmul(&self, rhs: &BlockOp) -> BlockOp {
        let mut blocks = Vec::new();
        for rb in &rhs.blocks {
            if let Some(lb) = self.block_for_src(rb.dst) {
                blocks.push(OpBlock {
                    src: rb.src,
                    dst: lb.dst,
                    mat: &lb.mat * &rb.mat,
                });
            }
        }
        BlockOp {
            delta: self.delta + rhs.delta,
            odd: self.odd ^ rhs.odd,
            blocks,
        }
    }

    pub fn transpose(&self) -> BlockOp {
        let mut blocks: Vec<OpBlock> = self
            .blocks
            .iter()
            .map(|b| OpBlock {
                src: b.dst,
                dst: b.src,
                mat: b.mat.transpose(),
            })
            .collect();
        blocks.sort_by_key(|b| b.src);
        BlockOp {
            delta: QNum::ZERO - self.delta,
            odd: self.odd,
            blocks,
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.mat.iter().map(|x| x * x).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }

    /// Drops blocks that are exactly zero.
    pub fn prune(&mut self) {
        self.blocks.retain(|b| b.mat.iter().any(|&x| x != 0.0));
    }
}

trait AxpyExt {
    fn axpy_assign(&mut self, f: f64, other: &DMatrix<f64>);
}

impl AxpyExt for DMatrix<f64> {
    fn axpy_assign(&mut self, f: f64, other: &DMatrix<f64>) {
        debug_assert_eq!(self.shape(), other.shape());
        for (a, b) in self.iter_mut().zip(other.iter()) {
            *a += f * b;
        }
    }
}

/// One contiguous slice of a fused sector: the product of `left_sec` and
/// `right_sec` states, laid out left-major (`index = offset + li * rdim + ri`).
#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub left_sec: usize,
    pub right_sec: usize,
    pub offset: usize,
}

/// The graded tensor product of two sector spaces.
#[derive(Clone, Debug)]
pub struct ProductSpace {
    pub left: SectorSpace,
    pub right: SectorSpace,
    pub space: SectorSpace,
    /// Per fused sector, sorted by (left_sec, right_sec).
    pub segments: Vec<Vec<Segment>>,
}

impl ProductSpace {
    pub fn new(left: SectorSpace, right: SectorSpace) -> Self {
        let mut fused: Vec<(QNum, Vec<(usize, usize)>)> = Vec::new();
        for (li, ls) in left.sectors.iter().enumerate() {
            for (ri, rs) in right.sectors.iter().enumerate() {
                let qn = ls.qn + rs.qn;
                match fused.binary_search_by_key(&qn, |f| f.0) {
                    Ok(i) => fused[i].1.push((li, ri)),
                    Err(i) => fused.insert(i, (qn, vec![(li, ri)])),
                }
            }
        }
        let mut sectors = Vec::with_capacity(fused.len());
        let mut segments = Vec::with_capacity(fused.len());
        for (qn, mut pairs) in fused {
            pairs.sort_unstable();
            let mut segs = Vec::with_capacity(pairs.len());
            let mut offset = 0;
            for (li, ri) in pairs {
                segs.push(Segment {
                    left_sec: li,
                    right_sec: ri,
                    offset,
                });
                offset += left.sectors[li].dim * right.sectors[ri].dim;
            }
            sectors.push(Sector { qn, dim: offset });
            segments.push(segs);
        }
        Self {
            left,
            right,
            space: SectorSpace { sectors },
            segments,
        }
    }

    pub fn segment(&self, fused_sec: usize, left_sec: usize, right_sec: usize) -> Option<&Segment> {
        self.segments[fused_sec]
            .binary_search_by_key(&(left_sec, right_sec), |s| (s.left_sec, s.right_sec))
            .ok()
            .map(|i| &self.segments[fused_sec][i])
    }

    /// Partial trace over the right factor of a sector-diagonal density
    /// operator on the fused space. Sign-free for quantum-number-conserving
    /// states (matched traced indices cross in pairs).
    pub fn trace_right(&self, rho: &[(usize, DMatrix<f64>)]) -> Vec<(usize, DMatrix<f64>)> {
        let mut out: Vec<(usize, DMatrix<f64>)> = Vec::new();
        for (sec, mat) in rho {
            for sa in &self.segments[*sec] {
                for sb in &self.segments[*sec] {
                    if sa.right_sec != sb.right_sec {
                        continue;
                    }
                    let (la, lb) = (sa.left_sec, sb.left_sec);
                    // Off-diagonal left sectors cannot appear: identical right
                    // quantum numbers force identical left ones.
                    debug_assert_eq!(la, lb);
                    let dl = self.left.dim(la);
                    let dr = self.right.dim(sa.right_sec);
                    let entry = match out.binary_search_by_key(&la, |e| e.0) {
                        Ok(i) => i,
                        Err(i) => {
                            out.insert(i, (la, DMatrix::zeros(dl, dl)));
                            i
                        }
                    };
                    for i in 0..dl {
                        for j in 0..dl {
                            let mut acc = 0.0;
                            for r in 0..dr {
                                acc += mat[(sa.offset + i * dr + r, sb.offset + j * dr + r)];
                            }
                            out[entry].1[(i, j)] += acc;
                        }
                    }
                }
            }
        }
        out
    }

    /// Partial trace over the left factor (see [`Self::trace_right`]).
    pub fn trace_left(&self, rho: &[(usize, DMatrix<f64>)]) -> Vec<(usize, DMatrix<f64>)> {
        let mut out: Vec<(usize, DMatrix<f64>)> = Vec::new();
        for (sec, mat) in rho {
            for sa in &self.segments[*sec] {
                for sb in &self.segments[*sec] {
                    if sa.left_sec != sb.left_sec {
                        continue;
                    }
                    let (ra, rb) = (sa.right_sec, sb.right_sec);
                    debug_assert_eq!(ra, rb);
                    let dl = self.left.dim(sa.left_sec);
                    let dr = self.right.dim(ra);
                    let entry = match out.binary_search_by_key(&ra, |e| e.0) {
                        Ok(i) => i,
                        Err(i) => {
                            out.insert(i, (ra, DMatrix::zeros(dr, dr)));
                            i
                        }
                    };
                    for i in 0..dr {
                        for j in 0..dr {
                            let mut acc = 0.0;
                            for l in 0..dl {
                                acc += mat[(sa.offset + l * dr + i, sb.offset + l * dr + j)];
                            }
                            out[entry].1[(i, j)] += acc;
                        }
                    }
                }
            }
        }
        out
    }

    /// Graded tensor product of two factor operators (`None` = identity).
    ///
    /// The matrix realizes `L ∘ R` as mode operators, i.e. the right-factor
    /// operator is applied first; an odd right factor is dressed by the
    /// parity of the left ket sector.
    pub fn embed(&self, l_op: Option<&BlockOp>, r_op: Option<&BlockOp>) -> BlockOp {
        let l_delta = l_op.map_or(QNum::ZERO, |o| o.delta);
        let r_delta = r_op.map_or(QNum::ZERO, |o| o.delta);
        let l_odd = l_op.is_some_and(|o| o.odd);
        let r_odd = r_op.is_some_and(|o| o.odd);
        let delta = l_delta + r_delta;
        let mut blocks = Vec::new();
        for (src_sec, segs) in self.segments.iter().enumerate() {
            let dst_qn = self.space.qn(src_sec) + delta;
            let Some(dst_sec) = self.space.find(dst_qn) else {
                continue;
            };
            let mut mat: Option<DMatrix<f64>> = None;
            for seg in segs {
                let (ld, lmat) = match l_op {
                    None => (seg.left_sec, None),
                    Some(op) => match op.block_for_src(seg.left_sec) {
                        None => continue,
                        Some(b) => (b.dst, Some(&b.mat)),
                    },
                };
                let (rd, rmat) = match r_op {
                    None => (seg.right_sec, None),
                    Some(op) => match op.block_for_src(seg.right_sec) {
                        None => continue,
                        Some(b) => (b.dst, Some(&b.mat)),
                    },
                };
                let Some(dst_seg) = self.segment(dst_sec, ld, rd) else {
                    continue;
                };
                let sign = if r_odd && self.left.qn(seg.left_sec).odd() {
                    -1.0
                } else {
                    1.0
                };
                let ldim_src = self.left.dim(seg.left_sec);
                let rdim_src = self.right.dim(seg.right_sec);
                let ldim_dst = self.left.dim(ld);
                let rdim_dst = self.right.dim(rd);
                let mat = mat.get_or_insert_with(|| {
                    DMatrix::zeros(self.space.dim(dst_sec), self.space.dim(src_sec))
                });
                for li_d in 0..ldim_dst {
                    for li_s in 0..ldim_src {
                        let lv = lmat.map_or_else(
                            || if li_d == li_s { 1.0 } else { 0.0 },
                            |m| m[(li_d, li_s)],
                        );
                        if lv == 0.0 {
                            continue;
                        }
                        for ri_d in 0..rdim_dst {
                            for ri_s in 0..rdim_src {
                                let rv = rmat.map_or_else(
                                    || if ri_d == ri_s { 1.0 } else { 0.0 },
                                    |m| m[(ri_d, ri_s)],
                                );
                                if rv == 0.0 {
                                    continue;
                                }
                                let row = dst_seg.offset + li_d * rdim_dst + ri_d;
                                let col = seg.offset + li_s * rdim_src + ri_s;
                                mat[(row, col)] += sign * lv * rv;
                            }
                        }
                    }
                }
            }
            if let Some(mat) = mat {
                blocks.push(OpBlock {
                    src: src_sec,
                    dst: dst_sec,
                    mat,
                });
            }
        }
        BlockOp {
            delta,
            odd: l_odd ^ r_odd,
            blocks,
        }
    }
}

/// A sector-wise isometry from a (usually fused) space onto a kept subspace.
#[derive(Clone, Debug)]
pub struct Isometry {
    pub from: SectorSpace,
    pub to: SectorSpace,
    /// Indexed by `to` sector: source sector and the `dim(from) x dim(to)`
    /// matrix whose columns are the kept orthonormal states.
    pub blocks: Vec<(usize, DMatrix<f64>)>,
}

impl Isometry {
    pub fn identity(space: &SectorSpace) -> Self {
        Self {
            from: space.clone(),
            to: space.clone(),
            blocks: space
                .sectors
                .iter()
                .enumerate()
                .map(|(i, s)| (i, DMatrix::identity(s.dim, s.dim)))
                .collect(),
        }
    }

    pub fn to_sector_of(&self, from_sector: usize) -> Option<usize> {
        self.blocks.iter().position(|(f, _)| *f == from_sector)
    }

    /// Projects `op` (defined on `from`) onto the kept space: `Vᵀ op V`.
    pub fn renorm(&self, op: &BlockOp) -> BlockOp {
        let mut blocks = Vec::new();
        for (to_src, (from_src, v_src)) in self.blocks.iter().enumerate() {
            let Some(ob) = op.block_for_src(*from_src) else {
                continue;
            };
            let Some(to_dst) = self.to_sector_of(ob.dst) else {
                continue;
            };
            let v_dst = &self.blocks[to_dst].1;
            blocks.push(OpBlock {
                src: to_src,
                dst: to_dst,
                mat: v_dst.transpose() * &ob.mat * v_src,
            });
        }
        blocks.sort_by_key(|b| b.src);
        BlockOp {
            delta: op.delta,
            odd: op.odd,
            blocks,
        }
    }
}

/// A quantum-number-resolved vector on a tensor product of two sector spaces,
/// restricted to one total sector. Stored as one dense `dim_l x dim_r` matrix
/// per admissible sector pair.
#[derive(Clone, Debug)]
pub struct SuperVec {
    pub target: QNum,
    pub pairs: Vec<(usize, usize)>,
    pub mats: Vec<DMatrix<f64>>,
}

impl SuperVec {
    pub fn zeros(left: &SectorSpace, right: &SectorSpace, target: QNum) -> Self {
        let mut pairs = Vec::new();
        let mut mats = Vec::new();
        for (li, ls) in left.sectors.iter().enumerate() {
            if let Some(ri) = right.find(target - ls.qn) {
                pairs.push((li, ri));
                mats.push(DMatrix::zeros(ls.dim, right.dim(ri)));
            }
        }
        Self {
            target,
            pairs,
            mats,
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            target: self.target,
            pairs: self.pairs.clone(),
            mats: self.mats.iter().map(|m| DMatrix::zeros(m.nrows(), m.ncols())).collect(),
        }
    }

    pub fn total_dim(&self) -> usize {
        self.mats.iter().map(|m| m.len()).sum()
    }

    pub fn pair_index(&self, li: usize, ri: usize) -> Option<usize> {
        self.pairs.binary_search(&(li, ri)).ok()
    }

    pub fn dot(&self, other: &SuperVec) -> f64 {
        self.mats
            .iter()
            .zip(&other.mats)
            .map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| x * y).sum::<f64>())
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(&mut self, f: f64) {
        for m in &mut self.mats {
            *m *= f;
        }
    }

    pub fn axpy(&mut self, f: f64, other: &SuperVec) {
        for (a, b) in self.mats.iter_mut().zip(&other.mats) {
            a.axpy_assign(f, b);
        }
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.total_dim());
        for m in &self.mats {
            out.extend(m.iter());
        }
        out
    }

    pub fn from_flat(&self, flat: &[f64]) -> SuperVec {
        let mut out = self.zeros_like();
        let mut pos = 0;
        for m in &mut out.mats {
            for x in m.iter_mut() {
                *x = flat[pos];
                pos += 1;
            }
        }
        debug_assert_eq!(pos, flat.len());
        out
    }

    /// Accumulates `coeff * (L ⊗ R) |self>` into `out` (identity for `None`),
    /// with the graded sign rule: an odd right-factor operator is dressed by
    /// the left ket sector parity. With `adjoint` the transpose of that
    /// dressed operator is applied instead.
    #[allow(clippy::too_many_arguments)]
    pub fn apply_cross(
        &self,
        out: &mut SuperVec,
        left_space: &SectorSpace,
        l_op: Option<&BlockOp>,
        r_op: Option<&BlockOp>,
        coeff: f64,
        adjoint: bool,
    ) {
        let r_odd = r_op.is_some_and(|o| o.odd);
        for (pi, &(li, ri)) in self.pairs.iter().enumerate() {
            if !adjoint {
                let (ld, lmat) = match l_op {
                    None => (li, None),
                    Some(op) => match op.block_for_src(li) {
                        None => continue,
                        Some(b) => (b.dst, Some(&b.mat)),
                    },
                };
                let (rd, rmat) = match r_op {
                    None => (ri, None),
                    Some(op) => match op.block_for_src(ri) {
                        None => continue,
                        Some(b) => (b.dst, Some(&b.mat)),
                    },
                };
                let Some(po) = out.pair_index(ld, rd) else {
                    continue;
                };
                let sign = if r_odd && left_space.qn(li).odd() {
                    -coeff
                } else {
                    coeff
                };
                accumulate_sandwich(&mut out.mats[po], lmat, &self.mats[pi], rmat, sign, false);
            } else {
                // Transposed blocks: source pair (li, ri) here is the
                // *destination* of the forward map.
                let (ld, lmat) = match l_op {
                    None => (li, None),
                    Some(op) => {
                        match op.blocks.iter().find(|b| b.dst == li) {
                            None => continue,
                            Some(b) => (b.src, Some(&b.mat)),
                        }
                    }
                };
                let (rd, rmat) = match r_op {
                    None => (ri, None),
                    Some(op) => {
                        match op.blocks.iter().find(|b| b.dst == ri) {
                            None => continue,
                            Some(b) => (b.src, Some(&b.mat)),
                        }
                    }
                };
                let Some(po) = out.pair_index(ld, rd) else {
                    continue;
                };
                // Forward sign was taken on the forward source pair, which is
                // the output pair here.
                let sign = if r_odd && left_space.qn(ld).odd() {
                    -coeff
                } else {
                    coeff
                };
                accumulate_sandwich(&mut out.mats[po], lmat, &self.mats[pi], rmat, sign, true);
            }
        }
    }

    /// Reduced density matrix of the left factor: one symmetric block per
    /// left sector appearing in `pairs`.
    pub fn rho_left(&self) -> Vec<(usize, DMatrix<f64>)> {
        let mut out: Vec<(usize, DMatrix<f64>)> = Vec::new();
        for (pi, &(li, _)) in self.pairs.iter().enumerate() {
            let m = &self.mats[pi];
            let contrib = m * m.transpose();
            match out.binary_search_by_key(&li, |e| e.0) {
                Ok(i) => out[i].1 += contrib,
                Err(i) => out.insert(i, (li, contrib)),
            }
        }
        out
    }

    pub fn rho_right(&self) -> Vec<(usize, DMatrix<f64>)> {
        let mut out: Vec<(usize, DMatrix<f64>)> = Vec::new();
        for (pi, &(_, ri)) in self.pairs.iter().enumerate() {
            let m = &self.mats[pi];
            let contrib = m.transpose() * m;
            match out.binary_search_by_key(&ri, |e| e.0) {
                Ok(i) => out[i].1 += contrib,
                Err(i) => out.insert(i, (ri, contrib)),
            }
        }
        out
    }
}

/// `out += sign * L ψ Rᵀ` (or the transposed variant `Lᵀ ψ R`).
fn accumulate_sandwich(
    out: &mut DMatrix<f64>,
    lmat: Option<&DMatrix<f64>>,
    psi: &DMatrix<f64>,
    rmat: Option<&DMatrix<f64>>,
    sign: f64,
    transposed: bool,
) {
    let tmp: DMatrix<f64> = match (lmat, transposed) {
        (None, _) => psi.clone(),
        (Some(l), false) => l * psi,
        (Some(l), true) => l.transpose() * psi,
    };
    match (rmat, transposed) {
        (None, _) => out.axpy_assign(sign, &tmp),
        (Some(r), false) => out.axpy_assign(sign, &(&tmp * r.transpose())),
        (Some(r), true) => out.axpy_assign(sign, &(&tmp * r)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn site_cre_up() -> BlockOp {
        // c†_up in the (0, dn, up, updn) basis with |updn> = c†_up c†_dn |0>.
        let mut blocks = vec![
            OpBlock {
                src: 0,
                dst: 2,
                mat: DMatrix::from_element(1, 1, 1.0),
            },
            OpBlock {
                src: 1,
                dst: 3,
                mat: DMatrix::from_element(1, 1, 1.0),
            },
        ];
        blocks.sort_by_key(|b| b.src);
        BlockOp {
            delta: QNum::new(1, 1),
            odd: true,
            blocks,
        }
    }

    #[test]
    fn site_space_order() {
        let s = SectorSpace::site();
        assert_eq!(s.total_dim(), 4);
        assert_eq!(s.qn(0), QNum::new(0, 0));
        assert_eq!(s.qn(1), QNum::new(1, -1));
        assert_eq!(s.qn(2), QNum::new(1, 1));
        assert_eq!(s.qn(3), QNum::new(2, 0));
    }

    #[test]
    fn product_space_dims() {
        let p = ProductSpace::new(SectorSpace::site(), SectorSpace::site());
        assert_eq!(p.space.total_dim(), 16);
        // (2,0) fused sector: 0⊗updn, dn⊗up, up⊗dn, updn⊗0.
        let sec = p.space.find(QNum::new(2, 0)).unwrap();
        assert_eq!(p.space.dim(sec), 4);
    }

    #[test]
    fn embed_anticommutation() {
        // c†_1up and c†_2up on a two-site product space must anticommute.
        let p = ProductSpace::new(SectorSpace::site(), SectorSpace::site());
        let c1 = p.embed(Some(&site_cre_up()), None);
        let c2 = p.embed(None, Some(&site_cre_up()));
        let ab = c1.matmul(&c2);
        let mut ba = c2.matmul(&c1);
        ba.scale(-1.0);
        ba.prune();
        let mut diff = ab.clone();
        diff.add_scaled(&ba, -1.0);
        assert!(diff.frobenius_norm() < 1e-14);
        assert!(ab.frobenius_norm() > 0.5);
    }

    #[test]
    fn transpose_round_trip() {
        let op = site_cre_up();
        let tt = op.transpose().transpose();
        assert_eq!(op, tt);
    }
}

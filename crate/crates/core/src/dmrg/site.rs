//! Local operators of one orbital site in the (|0>, |dn>, |up>, |updn>)
//! basis with |updn> = c†_up c†_dn |0>. Sector indices coincide with the
//! basis order, so every operator is a set of 1x1 blocks.

use crate::algebra::{BlockOp, OpBlock, QNum, SectorSpace, Spin};
use nalgebra::DMatrix;

fn one_by_one(entries: &[(usize, usize, f64)], delta: QNum, odd: bool) -> BlockOp {
    let mut blocks: Vec<OpBlock> = entries
        .iter()
        .map(|&(src, dst, v)| OpBlock {
            src,
            dst,
            mat: DMatrix::from_element(1, 1, v),
        })
        .collect();
    blocks.sort_by_key(|b| b.src);
    BlockOp { delta, odd, blocks }
}

/// c†_spin on one site.
pub fn cre(spin: Spin) -> BlockOp {
    match spin {
        // |0> -> |up>, |dn> -> |updn>
        Spin::Up => one_by_one(&[(0, 2, 1.0), (1, 3, 1.0)], QNum::new(1, 1), true),
        // |0> -> |dn>, |up> -> -|updn> (crosses the up mode)
        Spin::Down => one_by_one(&[(0, 1, 1.0), (2, 3, -1.0)], QNum::new(1, -1), true),
    }
}

pub fn ann(spin: Spin) -> BlockOp {
    cre(spin).transpose()
}

/// Matrix unit |to><from| (local transition operator).
pub fn transition(from: u8, to: u8) -> BlockOp {
    let f = QNum::new(((from >> 1) + (from & 1)) as i32, ((from >> 1) as i32) - ((from & 1) as i32));
    let t = QNum::new(((to >> 1) + (to & 1)) as i32, ((to >> 1) as i32) - ((to & 1) as i32));
    one_by_one(
        &[(from as usize, to as usize, 1.0)],
        t - f,
        (f.n + t.n) % 2 != 0,
    )
}

/// Product of elementary operators, rightmost applied first.
pub fn product(ops: &[(bool, Spin)]) -> BlockOp {
    let space = SectorSpace::site();
    let mut acc = BlockOp::identity(&space);
    for &(dagger, spin) in ops {
        let next = if dagger { cre(spin) } else { ann(spin) };
        acc = acc.matmul(&next);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(op: &BlockOp) -> DMatrix<f64> {
        // Sector dims are all 1; sector index == basis index.
        let mut m = DMatrix::zeros(4, 4);
        for b in &op.blocks {
            m[(b.dst, b.src)] = b.mat[(0, 0)];
        }
        m
    }

    #[test]
    fn anticommutators() {
        let cu = dense(&cre(Spin::Up));
        let cd = dense(&cre(Spin::Down));
        let au = cu.transpose();
        // {c_up, c†_up} = 1
        let acomm = &cu * &au + &au * &cu;
        assert_eq!(acomm, DMatrix::identity(4, 4));
        // {c†_up, c†_dn} = 0
        let z = &cu * &cd + &cd * &cu;
        assert_eq!(z, DMatrix::zeros(4, 4));
    }

    #[test]
    fn doubly_occupied_sign() {
        // c†_dn |up> = -|updn>
        let cd = dense(&cre(Spin::Down));
        assert_eq!(cd[(3, 2)], -1.0);
        // n_up n_dn = c†_up c_up c†_dn c_dn picks out |updn>.
        let prod = product(&[
            (true, Spin::Up),
            (false, Spin::Up),
            (true, Spin::Down),
            (false, Spin::Down),
        ]);
        let d = dense(&prod);
        let mut expect = DMatrix::zeros(4, 4);
        expect[(3, 3)] = 1.0;
        assert_eq!(d, expect);
    }

    #[test]
    fn transition_units() {
        for from in 0..4u8 {
            for to in 0..4u8 {
                let d = dense(&transition(from, to));
                for i in 0..4 {
                    for j in 0..4 {
                        let expect = if (i, j) == (to as usize, from as usize) { 1.0 } else { 0.0 };
                        assert_eq!(d[(i, j)], expect);
                    }
                }
            }
        }
    }
}

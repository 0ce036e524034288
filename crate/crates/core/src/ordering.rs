//! Orbital-ordering optimization over the mutual-information graph.
//!
//! The cost is the entanglement distance: pair mutual information weighted by
//! chain distance to the power eta, summed over unordered pairs. Three
//! optimizers are provided: constrained simulated annealing (orbitals of one
//! irrep stay contiguous), a Fiedler-vector spectral ordering, and exhaustive
//! search for small orbital counts.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::entanglement::MutualInfoMatrix;
use crate::integrals::Permutation;

#[derive(Debug, Error)]
pub enum OrderingError {
    #[error("size mismatch: matrix is {matrix}, permutation is {perm}")]
    SizeMismatch { matrix: usize, perm: usize },
    #[error("brute-force search capped at {cap} orbitals, got {n}")]
    BruteForceCap { n: usize, cap: usize },
    #[error("irrep constraint enabled but labels cover {labels} of {n} orbitals")]
    BadConstraint { labels: usize, n: usize },
    #[error("invalid cost parameter: {0}")]
    BadParams(String),
}

pub type Result<T> = std::result::Result<T, OrderingError>;

/// Hard cap for exhaustive permutation search (9! = 362880).
pub const BRUTE_FORCE_CAP: usize = 9;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CostParams {
    /// Distance exponent; 1 and 2 are the supported study points, 2 is the
    /// default (it connects the cost to spectral seriation).
    pub eta: f64,
}

impl Default for CostParams {
    fn default() -> Self {
        Self { eta: 2.0 }
    }
}

impl CostParams {
    pub fn validate(&self) -> Result<()> {
        if self.eta < 1.0 || !self.eta.is_finite() {
            Err(OrderingError::BadParams(format!("eta = {}", self.eta)))
        } else {
            Ok(())
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct IrrepConstraint {
    pub enabled: bool,
    pub labels: Vec<u8>,
}

impl IrrepConstraint {
    pub fn disabled() -> Self {
        Self::default()
    }

    pub fn from_labels(labels: &[u8]) -> Self {
        Self {
            enabled: true,
            labels: labels.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderingMethod {
    Anneal,
    Fiedler,
    Brute,
    Input,
}

#[derive(Debug, Clone)]
pub struct OrderingResult {
    pub permutation: Permutation,
    pub cost: f64,
    pub method: OrderingMethod,
    pub seed: u64,
    /// Set when the mutual-information graph splits into several components;
    /// holds the component sizes in concatenation order.
    pub components: Option<Vec<usize>>,
    /// Fiedler diagnostics (single-component spectral runs only).
    pub fiedler: Option<FiedlerDiagnostics>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FiedlerDiagnostics {
    pub vector: Vec<f64>,
    pub lambda2: f64,
    /// ‖L x − λ₂ x‖.
    pub residual: f64,
}

/// Entanglement-distance cost of an ordering: Σ over unordered pairs of
/// `I_ab * |pos(a) - pos(b)|^eta` (half of the symmetric double sum).
pub fn entanglement_distance(
    i_mat: &MutualInfoMatrix,
    p: &Permutation,
    params: &CostParams,
) -> Result<f64> {
    params.validate()?;
    if p.len() != i_mat.n {
        return Err(OrderingError::SizeMismatch {
            matrix: i_mat.n,
            perm: p.len(),
        });
    }
    let mut cost = 0.0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            let w = i_mat.values[(p.orbital_at(i), p.orbital_at(j))];
            if w != 0.0 {
                cost += w * dist_pow((j - i) as f64, params.eta);
            }
        }
    }
    Ok(cost)
}

#[inline]
fn dist_pow(d: f64, eta: f64) -> f64 {
    if eta == 2.0 {
        d * d
    } else if eta == 1.0 {
        d
    } else {
        d.powf(eta)
    }
}

/// Canonical representative under the reversal symmetry of the cost.
fn canonicalize(image: Vec<usize>) -> Vec<usize> {
    let mut rev = image.clone();
    rev.reverse();
    if rev < image {
        rev
    } else {
        image
    }
}

/// Annealing schedule; geometric cooling over a fixed move budget.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AnnealSchedule {
    /// Total move budget; 0 means the default 10^4 * N.
    pub iterations: usize,
    /// Cooling ratio per move, derived from start/end temperatures when 0.
    pub t_start: f64,
    pub t_end: f64,
    pub seed: u64,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        Self {
            iterations: 0,
            t_start: 0.0, // auto-calibrated from sampled move deltas
            t_end: 1e-7,
            seed: 0xD14C,
        }
    }
}

struct Blocks {
    /// Orbital members per irrep block, in current within-block order.
    members: Vec<Vec<usize>>,
}

impl Blocks {
    fn image(&self, order: &[usize]) -> Vec<usize> {
        let mut out = Vec::new();
        for &b in order {
            out.extend(&self.members[b]);
        }
        out
    }
}

/// Simulated annealing over orderings. With the constraint enabled the move
/// set is {swap two orbitals within one irrep, transpose adjacent irrep
/// blocks}; unconstrained it is plain position swaps. Deterministic for a
/// fixed seed; the reported incumbent cost never increases.
pub fn optimize_ordering(
    i_mat: &MutualInfoMatrix,
    constraint: &IrrepConstraint,
    params: &CostParams,
    schedule: &AnnealSchedule,
) -> Result<OrderingResult> {
    params.validate()?;
    let n = i_mat.n;
    if constraint.enabled && constraint.labels.len() != n {
        return Err(OrderingError::BadConstraint {
            labels: constraint.labels.len(),
            n,
        });
    }
    let iterations = if schedule.iterations == 0 {
        10_000 * n
    } else {
        schedule.iterations
    };
    let mut rng = ChaCha8Rng::seed_from_u64(schedule.seed);
    let cost_of = |image: &[usize]| -> f64 {
        let p = Permutation::from_image(image.to_vec()).expect("valid image");
        entanglement_distance(i_mat, &p, params).expect("validated inputs")
    };

    // State representation. Constrained: per-irrep member lists plus a block
    // order (grouping is stable, so an already-grouped input is preserved).
    let mut blocks = if constraint.enabled {
        let mut labels: Vec<u8> = constraint.labels.clone();
        labels.sort_unstable();
        labels.dedup();
        let members = labels
            .iter()
            .map(|&l| {
                (0..n)
                    .filter(|&o| constraint.labels[o] == l)
                    .collect::<Vec<_>>()
            })
            .collect();
        Blocks { members }
    } else {
        Blocks {
            members: (0..n).map(|o| vec![o]).collect(),
        }
    };
    let mut block_order: Vec<usize> = (0..blocks.members.len()).collect();
    let mut image = blocks.image(&block_order);
    let mut cost = cost_of(&image);
    let mut best_image = image.clone();
    let mut best_cost = cost;

    if n >= 2 {
        // Calibrate the start temperature from sampled move deltas.
        let t_start = if schedule.t_start > 0.0 {
            schedule.t_start
        } else {
            let mut max_delta: f64 = 0.0;
            for _ in 0..(4 * n).max(32) {
                let i = rng.random_range(0..n);
                let j = rng.random_range(0..n);
                if i == j {
                    continue;
                }
                let mut trial = image.clone();
                trial.swap(i, j);
                max_delta = max_delta.max((cost_of(&trial) - cost).abs());
            }
            (max_delta).max(1e-6)
        };
        let cool = (schedule.t_end / t_start).powf(1.0 / iterations.max(1) as f64);
        let mut temp = t_start;

        enum Move {
            /// Transpose adjacent irrep blocks (or any two positions when
            /// every block is a singleton).
            BlockSwap(usize, usize),
            /// Swap two members within one irrep block.
            MemberSwap(usize, usize, usize),
        }

        let swappable: Vec<usize> = (0..blocks.members.len())
            .filter(|&b| blocks.members[b].len() >= 2)
            .collect();
        for _ in 0..iterations {
            let n_blocks = block_order.len();
            let mv = if constraint.enabled {
                let block_move = n_blocks >= 2 && (swappable.is_empty() || rng.random_bool(0.3));
                if block_move {
                    let k = rng.random_range(0..n_blocks - 1);
                    Move::BlockSwap(k, k + 1)
                } else if !swappable.is_empty() {
                    let b = swappable[rng.random_range(0..swappable.len())];
                    let len = blocks.members[b].len();
                    let i = rng.random_range(0..len);
                    let mut j = rng.random_range(0..len - 1);
                    if j >= i {
                        j += 1;
                    }
                    Move::MemberSwap(b, i, j)
                } else {
                    break; // single block of one orbital: nothing to move
                }
            } else {
                let i = rng.random_range(0..n);
                let mut j = rng.random_range(0..n - 1);
                if j >= i {
                    j += 1;
                }
                Move::BlockSwap(i, j)
            };

            match mv {
                Move::BlockSwap(a, b) => block_order.swap(a, b),
                Move::MemberSwap(blk, i, j) => blocks.members[blk].swap(i, j),
            }
            let trial_image = blocks.image(&block_order);
            let trial_cost = cost_of(&trial_image);
            let delta = trial_cost - cost;
            if delta <= 0.0 || rng.random::<f64>() < (-delta / temp).exp() {
                image = trial_image;
                cost = trial_cost;
            } else {
                match mv {
                    Move::BlockSwap(a, b) => block_order.swap(a, b),
                    Move::MemberSwap(blk, i, j) => blocks.members[blk].swap(i, j),
                }
            }
            if cost < best_cost {
                best_cost = cost;
                best_image = image.clone();
            }
            temp *= cool;
        }
    }

    let image = canonicalize(best_image);
    let permutation = Permutation::from_image(image).expect("valid incumbent");
    let cost = entanglement_distance(i_mat, &permutation, params)?;
    Ok(OrderingResult {
        permutation,
        cost,
        method: OrderingMethod::Anneal,
        seed: schedule.seed,
        components: None,
        fiedler: None,
    })
}

fn connected_components(i_mat: &MutualInfoMatrix) -> Vec<Vec<usize>> {
    let n = i_mat.n;
    let mut comp = vec![usize::MAX; n];
    let mut count = 0;
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        comp[start] = count;
        while let Some(v) = stack.pop() {
            for w in 0..n {
                if comp[w] == usize::MAX && i_mat.values[(v, w)] > 0.0 {
                    comp[w] = count;
                    stack.push(w);
                }
            }
        }
        count += 1;
    }
    let mut groups = vec![Vec::new(); count];
    for (orb, &c) in comp.iter().enumerate() {
        groups[c].push(orb);
    }
    groups
}

fn sorted_eigh(mat: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let se = mat.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..se.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let vals = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let vecs = DMatrix::from_columns(
        &order
            .iter()
            .map(|&i| se.eigenvectors.column(i).clone_owned())
            .collect::<Vec<_>>(),
    );
    (vals, vecs)
}

/// Fiedler vector of a connected weighted graph given by the sub-matrix on
/// `orbs`, canonicalized against sign and eigenvalue degeneracy.
fn component_fiedler(i_mat: &MutualInfoMatrix, orbs: &[usize]) -> (Vec<f64>, f64, f64) {
    let m = orbs.len();
    let mut l = DMatrix::zeros(m, m);
    for (a, &i) in orbs.iter().enumerate() {
        let mut deg = 0.0;
        for (b, &j) in orbs.iter().enumerate() {
            if a != b {
                let w = i_mat.values[(i, j)];
                l[(a, b)] = -w;
                deg += w;
            }
        }
        l[(a, a)] = deg;
    }
    let (vals, vecs) = sorted_eigh(&l);
    let lambda2 = vals[1];
    let scale = vals[m - 1].abs().max(1.0);
    // Collect the (near-)degenerate eigenspace of lambda2.
    let mut members = vec![1];
    for (k, &v) in vals.iter().enumerate().skip(2) {
        if (v - lambda2).abs() <= 1e-8 * scale {
            members.push(k);
        } else {
            break;
        }
    }
    let x = if members.len() == 1 {
        let mut x: Vec<f64> = vecs.column(1).iter().copied().collect();
        // Deterministic sign: first component of significant magnitude
        // positive.
        let pivot = x
            .iter()
            .find(|v| v.abs() > 1e-10)
            .copied()
            .unwrap_or(1.0);
        if pivot < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
        x
    } else {
        // Degenerate eigenspace: project the centered index ramp onto it for
        // a deterministic representative (ties are then broken by index).
        let mean = (m as f64 - 1.0) / 2.0;
        let ramp = DVector::from_iterator(m, (0..m).map(|i| i as f64 - mean));
        let mut proj = DVector::zeros(m);
        for &k in &members {
            let col = vecs.column(k);
            proj += col * col.dot(&ramp);
        }
        let norm = proj.norm();
        if norm > 1e-10 {
            (proj / norm).iter().copied().collect()
        } else {
            ramp.normalize().iter().copied().collect()
        }
    };
    // Enforce the spectral constraints explicitly: zero mean, unit norm.
    let mut x = x;
    let mean: f64 = x.iter().sum::<f64>() / m as f64;
    x.iter_mut().for_each(|v| *v -= mean);
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 1e-12 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
    let xv = DVector::from_column_slice(&x);
    let residual = (&l * &xv - &xv * lambda2).norm();
    (x, lambda2, residual)
}

/// Spectral ordering: sorts orbitals by their Fiedler-vector components; both
/// sort directions are costed and the cheaper one returned. Disconnected
/// graphs are ordered per component, components concatenated largest first
/// and flagged in the result.
pub fn fiedler_ordering(i_mat: &MutualInfoMatrix, params: &CostParams) -> Result<OrderingResult> {
    params.validate()?;
    let n = i_mat.n;
    let mut comps = connected_components(i_mat);
    comps.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    let disconnected = comps.len() > 1;
    let mut image = Vec::with_capacity(n);
    let mut diagnostics = None;
    for orbs in &comps {
        if orbs.len() == 1 {
            image.push(orbs[0]);
            continue;
        }
        let (x, lambda2, residual) = component_fiedler(i_mat, orbs);
        let mut order: Vec<usize> = (0..orbs.len()).collect();
        order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(orbs[a].cmp(&orbs[b])));
        let asc: Vec<usize> = order.iter().map(|&k| orbs[k]).collect();
        let mut desc = asc.clone();
        desc.reverse();
        // Cost within the component decides the direction; the component is
        // placed contiguously so outside pairs are unaffected.
        let cost_dir = |img: &[usize]| -> f64 {
            let mut c = 0.0;
            for i in 0..img.len() {
                for j in i + 1..img.len() {
                    c += i_mat.values[(img[i], img[j])] * dist_pow((j - i) as f64, params.eta);
                }
            }
            c
        };
        let chosen = if cost_dir(&desc) < cost_dir(&asc) { desc } else { asc };
        if !disconnected {
            diagnostics = Some(FiedlerDiagnostics {
                vector: x,
                lambda2,
                residual,
            });
        }
        image.extend(chosen);
    }
    let permutation = Permutation::from_image(image).expect("component cover");
    let cost = entanglement_distance(i_mat, &permutation, params)?;
    Ok(OrderingResult {
        permutation,
        cost,
        method: OrderingMethod::Fiedler,
        seed: 0,
        components: disconnected.then(|| comps.iter().map(|c| c.len()).collect()),
        fiedler: diagnostics,
    })
}

/// Exhaustive search over all permutations modulo reversal; global optimum
/// with a lexicographic tie-break. Capped at [`BRUTE_FORCE_CAP`] orbitals.
pub fn brute_force_ordering(
    i_mat: &MutualInfoMatrix,
    params: &CostParams,
) -> Result<OrderingResult> {
    params.validate()?;
    let n = i_mat.n;
    if n > BRUTE_FORCE_CAP {
        return Err(OrderingError::BruteForceCap {
            n,
            cap: BRUTE_FORCE_CAP,
        });
    }
    let mut image: Vec<usize> = (0..n).collect();
    let mut best_image = image.clone();
    let mut best_cost = f64::INFINITY;
    let consider = |img: &[usize], cost: f64, best_cost: &mut f64, best_image: &mut Vec<usize>| {
        let canon = canonicalize(img.to_vec());
        if cost < *best_cost - 1e-15
            || (cost < *best_cost + 1e-15 && canon < *best_image)
        {
            *best_cost = cost;
            *best_image = canon;
        }
    };
    // Heap's algorithm.
    let mut c = vec![0usize; n];
    let p0 = Permutation::from_image(image.clone()).unwrap();
    let cost0 = entanglement_distance(i_mat, &p0, params)?;
    consider(&image, cost0, &mut best_cost, &mut best_image);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                image.swap(0, i);
            } else {
                image.swap(c[i], i);
            }
            let p = Permutation::from_image(image.clone()).unwrap();
            let cost = entanglement_distance(i_mat, &p, params)?;
            consider(&image, cost, &mut best_cost, &mut best_image);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    let permutation = Permutation::from_image(best_image).unwrap();
    let cost = entanglement_distance(i_mat, &permutation, params)?;
    Ok(OrderingResult {
        permutation,
        cost,
        method: OrderingMethod::Brute,
        seed: 0,
        components: None,
        fiedler: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn mat_from_entries(n: usize, entries: &[(usize, usize, f64)]) -> MutualInfoMatrix {
        let mut values = DMatrix::zeros(n, n);
        for &(i, j, v) in entries {
            values[(i, j)] = v;
            values[(j, i)] = v;
        }
        MutualInfoMatrix {
            n,
            values,
            s1: vec![0.0; n],
            s2: DMatrix::zeros(n, n),
        }
    }

    #[test]
    fn single_pair_cost() {
        let m = mat_from_entries(3, &[(0, 1, 0.5)]);
        let id = Permutation::identity(3);
        let params = CostParams::default();
        assert_eq!(entanglement_distance(&m, &id, &params).unwrap(), 0.5);
        let p = Permutation::from_image(vec![0, 2, 1]).unwrap();
        assert_eq!(entanglement_distance(&m, &p, &params).unwrap(), 2.0);
    }

    #[test]
    fn zero_matrix_costs_nothing() {
        let m = mat_from_entries(4, &[]);
        let params = CostParams::default();
        for img in [vec![0, 1, 2, 3], vec![3, 1, 0, 2]] {
            let p = Permutation::from_image(img).unwrap();
            assert_eq!(entanglement_distance(&m, &p, &params).unwrap(), 0.0);
        }
        let r = brute_force_ordering(&m, &params).unwrap();
        assert_eq!(r.cost, 0.0);
        assert_eq!(r.permutation.image(), &[0, 1, 2, 3]);
    }

    #[test]
    fn reversal_invariance() {
        let m = mat_from_entries(5, &[(0, 3, 1.0), (1, 2, 0.4), (2, 4, 0.9)]);
        let params = CostParams { eta: 1.0 };
        let p = Permutation::from_image(vec![2, 0, 4, 1, 3]).unwrap();
        let a = entanglement_distance(&m, &p, &params).unwrap();
        let b = entanglement_distance(&m, &p.reversed(), &params).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn brute_force_pairs_adjacent() {
        let m = mat_from_entries(3, &[(0, 2, 1.0)]);
        let r = brute_force_ordering(&m, &CostParams::default()).unwrap();
        assert_eq!(r.cost, 1.0);
        // orbitals 0 and 2 adjacent in the optimum
        let inv = r.permutation.inverse();
        assert_eq!(inv[0].abs_diff(inv[2]), 1);
    }

    #[test]
    fn brute_force_cap_enforced() {
        let m = mat_from_entries(10, &[]);
        assert!(matches!(
            brute_force_ordering(&m, &CostParams::default()),
            Err(OrderingError::BruteForceCap { .. })
        ));
    }

    #[test]
    fn fiedler_path_graph_is_identity_or_reversal() {
        let m = mat_from_entries(6, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0), (4, 5, 1.0)]);
        let r = fiedler_ordering(&m, &CostParams::default()).unwrap();
        let img = r.permutation.image();
        assert!(img == [0, 1, 2, 3, 4, 5] || img == [5, 4, 3, 2, 1, 0]);
        let d = r.fiedler.unwrap();
        assert!(d.residual < 1e-8);
        let sum: f64 = d.vector.iter().sum();
        assert!(sum.abs() < 1e-8);
        let norm: f64 = d.vector.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-8);
    }

    #[test]
    fn fiedler_uniform_complete_graph_returns_identity() {
        let mut entries = Vec::new();
        for i in 0..5 {
            for j in i + 1..5 {
                entries.push((i, j, 0.7));
            }
        }
        let m = mat_from_entries(5, &entries);
        let r = fiedler_ordering(&m, &CostParams::default()).unwrap();
        assert_eq!(r.permutation.image(), &[0, 1, 2, 3, 4]);
    }

    #[test]
    fn fiedler_decoupled_pairs_stay_contiguous() {
        let m = mat_from_entries(4, &[(0, 1, 1.0), (2, 3, 1.0)]);
        let r = fiedler_ordering(&m, &CostParams::default()).unwrap();
        assert!(r.components.is_some());
        let inv = r.permutation.inverse();
        assert_eq!(inv[0].abs_diff(inv[1]), 1);
        assert_eq!(inv[2].abs_diff(inv[3]), 1);
        assert_eq!(r.cost, 2.0);
    }

    #[test]
    fn anneal_zero_matrix_returns_input() {
        let m = mat_from_entries(4, &[]);
        let r = optimize_ordering(
            &m,
            &IrrepConstraint::disabled(),
            &CostParams::default(),
            &AnnealSchedule::default(),
        )
        .unwrap();
        assert_eq!(r.cost, 0.0);
    }

    #[test]
    fn anneal_respects_irrep_contiguity() {
        let m = mat_from_entries(
            6,
            &[(0, 3, 1.0), (1, 4, 0.8), (2, 5, 0.6), (0, 1, 0.1)],
        );
        let labels = vec![1, 1, 2, 2, 3, 3];
        let r = optimize_ordering(
            &m,
            &IrrepConstraint::from_labels(&labels),
            &CostParams::default(),
            &AnnealSchedule::default(),
        )
        .unwrap();
        let img = r.permutation.image();
        // Same-irrep orbitals occupy contiguous positions.
        for lab in [1u8, 2, 3] {
            let pos: Vec<usize> = img
                .iter()
                .enumerate()
                .filter(|(_, &o)| labels[o] == lab)
                .map(|(p, _)| p)
                .collect();
            assert_eq!(pos[1] - pos[0], 1, "irrep {lab} split in {img:?}");
        }
    }

    #[test]
    fn anneal_matches_brute_force_on_small_instances() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut hits = 0;
        let runs = 10;
        for run in 0..runs {
            let n = 6;
            let mut entries = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    entries.push((i, j, rng.random_range(0.0..1.0)));
                }
            }
            let m = mat_from_entries(n, &entries);
            let params = CostParams::default();
            let brute = brute_force_ordering(&m, &params).unwrap();
            let anneal = optimize_ordering(
                &m,
                &IrrepConstraint::disabled(),
                &params,
                &AnnealSchedule {
                    seed: 1000 + run,
                    ..Default::default()
                },
            )
            .unwrap();
            assert!(anneal.cost >= brute.cost - 1e-12, "anneal beat brute force");
            if anneal.cost <= brute.cost + 1e-9 {
                hits += 1;
            }
        }
        assert!(hits >= 8, "only {hits}/{runs} runs reached the optimum");
    }
}

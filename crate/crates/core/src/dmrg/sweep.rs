//! The two-site sweep driver: warm-up, alternating half-sweeps with DBSS
//! truncation, wave-function prediction, convergence control and sweep
//! diagnostics.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::algebra::{Isometry, ProductSpace, QNum, SectorSpace, SuperVec};
use crate::cideas::{build_cas_vector, CiDeasWarmup, WarmupConfig};
use crate::entanglement::{entropy_of_spectrum, EntropyProfile};
use crate::fci::SubsetRdm;
use crate::integrals::{apply_permutation, DenseInts, IntegralSet, Permutation};

use super::dbss::{dbss_truncate, SchmidtSpectrum, TruncationRecord};
use super::measure;
use super::ops::{grow, truncate, Factor, OpSet};
use super::superblock::SuperBlock;
use super::{DmrgError, Result};

/// Sweep-control parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Quantum-information-loss bound per truncation (nats).
    pub chi: f64,
    /// Minimum retained block states (floors the DBSS decision).
    pub m_min: usize,
    /// Warm-up environment dimension.
    pub m_start: usize,
    /// Hard ceiling on retained states.
    pub m_cap: usize,
    /// Full sweeps after the warm-up half-sweep.
    pub max_sweeps: usize,
    /// Energy and entropy-profile stationarity threshold.
    pub convergence_tol: f64,
    /// (electron count, 2Sz); metadata reference sector when absent.
    pub target: Option<(usize, i32)>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            chi: 1e-4,
            m_min: 64,
            m_start: 256,
            m_cap: 100_000,
            max_sweeps: 10,
            convergence_tol: 1e-8,
            target: None,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m_min < 1 {
            return Err(DmrgError::BadConfig("m_min must be >= 1".into()));
        }
        if !(self.chi > 0.0) {
            return Err(DmrgError::BadConfig("chi must be positive".into()));
        }
        if self.m_cap < self.m_min {
            return Err(DmrgError::BadConfig("m_cap must be >= m_min".into()));
        }
        Ok(())
    }
}

/// Warm-up strategy handle: CI-DEAS environment construction, optionally
/// seeded with single-orbital entropies from an earlier run (original orbital
/// labels; the bootstrap CAS vector [N, N-1, .., 1] is used without them).
#[derive(Debug, Clone, Default)]
pub struct WarmupSpec {
    pub config: WarmupConfig,
    pub s1: Option<Vec<f64>>,
}

/// One block-growth bookkeeping entry (pre-truncation entropies, nats): the
/// block-site mutual information `s(l) + s(1) - s(l+1)` is non-negative, so
/// the signed ledger value stored here is `<= 0`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrowthLedger {
    pub half_sweep: usize,
    /// Size of the grown block (cut position l+1).
    pub cut: usize,
    pub s_block: f64,
    pub s_site: f64,
    pub s_grown: f64,
    /// s_grown - s_block - s_site.
    pub mutual_info: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MTraceEntry {
    pub iteration: usize,
    pub cut: usize,
    pub kept: usize,
}

/// Turning-point measurement set, in original orbital labels.
#[derive(Debug, Clone)]
pub struct Measurements {
    pub one: Vec<SubsetRdm>,
    pub two: Vec<SubsetRdm>,
}

/// Serializable form of one block transformation (kept-state matrices by
/// quantum-number sector, column-major).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SerializedTransform {
    pub block_size: usize,
    pub sectors: Vec<TransformBlock>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransformBlock {
    pub n: i32,
    pub tsz: i32,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct DmrgResult {
    /// Ordering the chain was run with.
    pub ordering: Permutation,
    /// Best superblock energy of each half-sweep (warm-up first).
    pub energies: Vec<f64>,
    pub final_energy: f64,
    /// Entropy profiles per completed rightward pass, chain coordinates.
    pub profiles: Vec<EntropyProfile>,
    pub truncations: Vec<TruncationRecord>,
    pub m_trace: Vec<MTraceEntry>,
    /// Largest kept-state count over all truncations.
    pub m_max: usize,
    /// <S²> of the converged state, from turning-point correlators.
    pub s2: f64,
    pub converged: bool,
    pub half_sweeps: usize,
    /// Full sweeps after warm-up.
    pub sweeps: usize,
    pub ledger: Vec<GrowthLedger>,
    /// max |s_left(cut) - s_right(cut)| observed in the final pass.
    pub cut_entropy_asymmetry: f64,
    /// Turning-point RDMs in original orbital labels.
    pub measurements: Measurements,
    /// Final rightward-pass block transformations, for checkpointing.
    pub transforms: Vec<SerializedTransform>,
}

pub(crate) struct StoredBlock {
    pub ops: OpSet,
    /// Product space the block was renormalized from (absent for determinant
    /// warm-up blocks and the vacuum).
    pub prod: Option<ProductSpace>,
    pub iso: Option<Isometry>,
}

struct Driver<'a> {
    d: &'a DenseInts,
    n: usize,
    target: QNum,
    n_electrons: usize,
    two_sz: i32,
    cfg: &'a SweepConfig,
    warmup: CiDeasWarmup,
    left: Vec<Option<StoredBlock>>,
    right: Vec<Option<StoredBlock>>,
    // carried wave function between configurations
    psi_carry: Option<SuperVec>,
    // diagnostics
    iteration: usize,
    half_sweep: usize,
    truncations: Vec<TruncationRecord>,
    m_trace: Vec<MTraceEntry>,
    ledger: Vec<GrowthLedger>,
    s1_chain: Vec<f64>,
    block_profile: Vec<f64>,
    asymmetry: f64,
    final_state: Option<(SuperVec, ProductSpace, ProductSpace)>,
}

enum Direction {
    Rightward,
    Leftward,
}

fn spectrum_of(blocks: &[(usize, DMatrix<f64>)]) -> Vec<f64> {
    let mut all = Vec::new();
    for (_, m) in blocks {
        if m.nrows() == 1 {
            all.push(m[(0, 0)].max(0.0));
        } else {
            all.extend(
                m.clone()
                    .symmetric_eigen()
                    .eigenvalues
                    .iter()
                    .map(|&w| w.max(0.0)),
            );
        }
    }
    all
}

impl<'a> Driver<'a> {
    /// Solves one superblock configuration and renormalizes toward the sweep
    /// direction. Returns the superblock energy.
    fn step(&mut self, lsize: usize, dir: Direction, warmup_pass: bool) -> Result<f64> {
        let n = self.n;
        let rsize = n - lsize - 2;
        self.iteration += 1;

        // Enlarged left block.
        let left_stored = self.left[lsize].as_ref().expect("left block present");
        let l_outside: Vec<usize> = (lsize + 1..n).collect();
        let (prod_l, ops_l) = grow(
            self.d,
            Factor::Block(&left_stored.ops),
            Factor::Site(lsize),
            &l_outside,
        );

        // Environment block: CI-DEAS determinants during warm-up, stored
        // renormalized blocks afterwards.
        if warmup_pass && rsize > 0 {
            let env: Vec<usize> = (lsize + 2..n).collect();
            let env_outside: Vec<usize> = (0..lsize + 2).collect();
            let m_l = self.left[lsize].as_ref().unwrap().ops.dim();
            let ops = self
                .warmup
                .build_env(self.d, &env, &env_outside, m_l)
                .map_err(|_| DmrgError::InfeasibleEnvironment(rsize))?;
            self.right[rsize] = Some(StoredBlock {
                ops,
                prod: None,
                iso: None,
            });
        }
        let right_stored = self.right[rsize].as_ref().expect("right block present");
        let r_outside: Vec<usize> = (0..=lsize).collect();
        let (prod_r, ops_r) = grow(
            self.d,
            Factor::Site(lsize + 1),
            Factor::Block(&right_stored.ops),
            &r_outside,
        );

        let sb = SuperBlock::new(
            self.d,
            &ops_l,
            &ops_r,
            self.target,
            lsize,
            self.n_electrons,
            self.two_sz,
        )?;
        let guess = self.psi_carry.take().filter(|g| {
            g.pairs == sb.template().pairs
                && g.mats
                    .iter()
                    .zip(&sb.template().mats)
                    .all(|(a, b)| a.shape() == b.shape())
        });
        let (energy, psi, _residual) = sb.solve(guess.as_ref(), 1e-9)?;

        // Pre-truncation entropy bookkeeping.
        let rho_l = psi.rho_left();
        let rho_r = psi.rho_right();
        let left_weights = spectrum_of(&rho_l);
        let right_weights = spectrum_of(&rho_r);
        let s_grown = entropy_of_spectrum(&left_weights);
        let s_right = entropy_of_spectrum(&right_weights);
        self.asymmetry = self.asymmetry.max((s_grown - s_right).abs());
        self.block_profile[lsize + 1] = s_grown;

        let s_block = entropy_of_spectrum(&spectrum_of(&prod_l.trace_right(&rho_l)));
        let site_a = prod_l.trace_left(&rho_l);
        let s_site_a = entropy_of_spectrum(&spectrum_of(&site_a));
        self.ledger.push(GrowthLedger {
            half_sweep: self.half_sweep,
            cut: lsize + 1,
            s_block,
            s_site: s_site_a,
            s_grown,
            mutual_info: s_grown - s_block - s_site_a,
        });
        self.s1_chain[lsize] = s_site_a;
        let site_b = prod_r.trace_right(&rho_r);
        self.s1_chain[lsize + 1] = entropy_of_spectrum(&spectrum_of(&site_b));

        // Renormalize toward the sweep direction.
        match dir {
            Direction::Rightward => {
                let (iso, record) = build_isometry(&prod_l, &rho_l, lsize + 1, self.cfg);
                let new_ops = truncate(&iso, &ops_l);
                self.note_truncation(record);
                if lsize == n - 2 {
                    self.psi_carry = Some(psi.clone());
                    self.final_state = Some((psi, prod_l.clone(), prod_r));
                } else {
                    // Predict the start vector for the next configuration; the
                    // expansion isometry exists once a leftward pass has built
                    // the stored right blocks.
                    let expand = self.right[rsize].as_ref().unwrap();
                    self.psi_carry = match (&expand.prod, &expand.iso) {
                        (Some(eprod), Some(eiso)) => predict_right(
                            &psi,
                            &prod_r,
                            &iso,
                            eprod,
                            eiso,
                            &new_ops.space,
                            self.target,
                        ),
                        _ => None,
                    };
                }
                self.left[lsize + 1] = Some(StoredBlock {
                    ops: new_ops,
                    prod: Some(prod_l),
                    iso: Some(iso),
                });
            }
            Direction::Leftward => {
                let (iso, record) = build_isometry(&prod_r, &rho_r, lsize + 1, self.cfg);
                let new_ops = truncate(&iso, &ops_r);
                self.note_truncation(record);
                if lsize == 0 {
                    self.psi_carry = Some(psi);
                } else {
                    let left_here = self.left[lsize].as_ref().unwrap();
                    self.psi_carry = match (&left_here.prod, &left_here.iso) {
                        (Some(eprod), Some(eiso)) => predict_left(
                            &psi,
                            &prod_l,
                            eprod,
                            eiso,
                            &iso,
                            &new_ops.space,
                            self.target,
                        ),
                        _ => None,
                    };
                }
                self.right[rsize + 1] = Some(StoredBlock {
                    ops: new_ops,
                    prod: Some(prod_r),
                    iso: Some(iso),
                });
            }
        }
        Ok(energy)
    }

    fn note_truncation(&mut self, record: TruncationRecord) {
        self.m_trace.push(MTraceEntry {
            iteration: self.iteration,
            cut: record.cut_position,
            kept: record.kept,
        });
        self.truncations.push(record);
    }

    fn half_sweep(&mut self, dir: Direction, warmup_pass: bool) -> Result<f64> {
        self.half_sweep += 1;
        let n = self.n;
        let mut best = f64::INFINITY;
        match dir {
            Direction::Rightward => {
                for lsize in 0..=n - 2 {
                    best = best.min(self.step(lsize, Direction::Rightward, warmup_pass)?);
                }
            }
            Direction::Leftward => {
                for lsize in (0..=n - 2).rev() {
                    best = best.min(self.step(lsize, Direction::Leftward, false)?);
                }
            }
        }
        Ok(best)
    }

    fn profile(&self) -> EntropyProfile {
        EntropyProfile {
            sweep_index: self.half_sweep,
            s1: self.s1_chain.clone(),
            block: self.block_profile.clone(),
        }
    }
}

/// Ranks the density-matrix eigenpairs across sectors, applies the DBSS rule
/// and assembles the kept-state isometry.
fn build_isometry(
    prod: &ProductSpace,
    rho: &[(usize, DMatrix<f64>)],
    cut: usize,
    cfg: &SweepConfig,
) -> (Isometry, TruncationRecord) {
    struct SectorEig {
        sector: usize,
        vectors: DMatrix<f64>,
        order: Vec<usize>, // eigen column indices sorted by descending value
        values: Vec<f64>,
    }
    let mut eigs = Vec::new();
    let mut ranked: Vec<(f64, usize, usize)> = Vec::new(); // (weight, eig idx, rank within sector)
    for (ei, (sec, mat)) in rho.iter().enumerate() {
        let se = mat.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..se.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| se.eigenvalues[b].total_cmp(&se.eigenvalues[a]).then(a.cmp(&b)));
        let values: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i].max(0.0)).collect();
        for (rank, &w) in values.iter().enumerate() {
            ranked.push((w, ei, rank));
        }
        eigs.push(SectorEig {
            sector: *sec,
            vectors: se.eigenvectors,
            order,
            values,
        });
    }
    // Deterministic global ranking: weight desc, then sector, then rank.
    ranked.sort_by(|a, b| {
        b.0.total_cmp(&a.0)
            .then(eigs[a.1].sector.cmp(&eigs[b.1].sector))
            .then(a.2.cmp(&b.2))
    });
    let spectrum = SchmidtSpectrum::new(ranked.iter().map(|r| r.0).collect(), cut);
    let record = dbss_truncate(&spectrum, cfg);

    let mut kept_per_sector: Vec<Vec<usize>> = vec![Vec::new(); eigs.len()];
    for &(_, ei, rank) in ranked.iter().take(record.kept) {
        kept_per_sector[ei].push(rank);
    }
    let mut sectors = Vec::new();
    let mut blocks = Vec::new();
    for (ei, kept) in kept_per_sector.iter().enumerate() {
        if kept.is_empty() {
            continue;
        }
        let e = &eigs[ei];
        let cols: Vec<_> = kept
            .iter()
            .map(|&rank| e.vectors.column(e.order[rank]).clone_owned())
            .collect();
        let mat = DMatrix::from_columns(&cols);
        sectors.push((prod.space.qn(e.sector), kept.len()));
        blocks.push((e.sector, mat));
        let _ = &e.values;
    }
    // SectorSpace::new sorts by quantum number; sectors arrive sorted because
    // rho entries are sector-sorted already.
    let to = SectorSpace::new(
        sectors
            .iter()
            .map(|&(qn, dim)| crate::algebra::Sector { qn, dim })
            .collect(),
    );
    debug_assert_eq!(to.sectors.len(), blocks.len());
    let iso = Isometry {
        from: prod.space.clone(),
        to,
        blocks,
    };
    (iso, record)
}

/// Transforms the solved wave function one configuration to the right:
/// `(B_l • s_a)(s_b • B_r)` → `(B_{l+1} • s_b)(s_c • B_r')`.
///
/// `left_iso` maps the enlarged left space onto the fresh B_{l+1};
/// `right_expand_*` describe how B_r was renormalized from (s_c ⊗ B_r')
/// during the previous leftward pass. Pure coefficient algebra: the mode
/// basis never changes, so no fermionic signs enter.
fn predict_right(
    psi: &SuperVec,
    old_right_prod: &ProductSpace,
    left_iso: &Isometry,
    right_expand_prod: &ProductSpace,
    right_expand_iso: &Isometry,
    new_left_space: &SectorSpace,
    target: QNum,
) -> Option<SuperVec> {
    let new_left_prod = ProductSpace::new(new_left_space.clone(), SectorSpace::site());
    let mut out = SuperVec::zeros(&new_left_prod.space, &right_expand_prod.space, target);
    for (pi, &(lsec, rsec)) in psi.pairs.iter().enumerate() {
        let Some(tb) = left_iso.to_sector_of(lsec) else {
            continue;
        };
        let v_l = &left_iso.blocks[tb].1;
        let phi = v_l.transpose() * &psi.mats[pi]; // dim(tb) x dim(rsec)
        for seg in &old_right_prod.segments[rsec] {
            // Site factor has unit sector dimension: the segment is a
            // contiguous column range of width dim(B_r sector).
            let rb = seg.right_sec;
            let dim_rb = old_right_prod.right.dim(rb);
            let (from_sec, v_r) = &right_expand_iso.blocks[rb];
            let chunk = phi.columns(seg.offset, dim_rb);
            let expanded = chunk * v_r.transpose(); // dim(tb) x dim(from)
            let nl_qn = left_iso.to.qn(tb) + old_right_prod.left.qn(seg.left_sec);
            let Some(nlsec) = new_left_prod.space.find(nl_qn) else {
                continue;
            };
            let Some(nseg) = new_left_prod.segment(nlsec, tb, seg.left_sec) else {
                continue;
            };
            let Some(po) = out.pair_index(nlsec, *from_sec) else {
                continue;
            };
            let dim_tb = expanded.nrows();
            out.mats[po]
                .view_mut((nseg.offset, 0), (dim_tb, expanded.ncols()))
                .iter_mut()
                .zip(expanded.iter())
                .for_each(|(o, e)| *o += e);
        }
    }
    let norm = out.norm();
    if norm < 1e-12 {
        return None;
    }
    out.scale(1.0 / norm);
    Some(out)
}

/// Transforms the solved wave function one configuration to the left:
/// `(B_l • s_a)(s_b • B_r)` → `(B_{l-1} • s_z)(s_a • B_r⁺)` where B_r⁺ is the
/// freshly truncated right block and (B_{l-1} • s_z) is the stored product
/// B_l was built from.
fn predict_left(
    psi: &SuperVec,
    old_left_prod: &ProductSpace,
    left_expand_prod: &ProductSpace,
    left_expand_iso: &Isometry,
    right_iso: &Isometry,
    new_right_space: &SectorSpace,
    target: QNum,
) -> Option<SuperVec> {
    let new_right_prod = ProductSpace::new(SectorSpace::site(), new_right_space.clone());
    let mut out = SuperVec::zeros(&left_expand_prod.space, &new_right_prod.space, target);
    for (pi, &(lsec, rsec)) in psi.pairs.iter().enumerate() {
        let Some(tr) = right_iso.to_sector_of(rsec) else {
            continue;
        };
        let v_r = &right_iso.blocks[tr].1;
        let phi = &psi.mats[pi] * v_r; // dim(lsec) x dim(tr)
        for seg in &old_left_prod.segments[lsec] {
            // Trailing site factor of unit dimension: contiguous row range.
            let bl = seg.left_sec;
            let dim_bl = old_left_prod.left.dim(bl);
            let (from_sec, v_l) = &left_expand_iso.blocks[bl];
            let chunk = phi.rows(seg.offset, dim_bl);
            let expanded = v_l * chunk; // dim(from) x dim(tr)
            let nr_qn = old_left_prod.right.qn(seg.right_sec) + right_iso.to.qn(tr);
            let Some(nrsec) = new_right_prod.space.find(nr_qn) else {
                continue;
            };
            let Some(nseg) = new_right_prod.segment(nrsec, seg.right_sec, tr) else {
                continue;
            };
            let Some(po) = out.pair_index(*from_sec, nrsec) else {
                continue;
            };
            let dim_tr = expanded.ncols();
            out.mats[po]
                .view_mut((0, nseg.offset), (expanded.nrows(), dim_tr))
                .iter_mut()
                .zip(expanded.iter())
                .for_each(|(o, e)| *o += e);
        }
    }
    let norm = out.norm();
    if norm < 1e-12 {
        return None;
    }
    out.scale(1.0 / norm);
    Some(out)
}

/// Runs the full DMRG pipeline on a Hamiltonian under the given orbital
/// ordering. See the module docs for the sweep schedule.
pub fn run_dmrg(
    h: &IntegralSet,
    ordering: &Permutation,
    cfg: &SweepConfig,
    warmup: &WarmupSpec,
) -> Result<DmrgResult> {
    cfg.validate()?;
    let n = h.n_orbitals();
    if n < 2 {
        return Err(DmrgError::ChainTooShort(n));
    }
    let hp = apply_permutation(h, ordering)?;
    let d = hp.dense();
    let (n_electrons, two_sz) = cfg
        .target
        .unwrap_or((hp.meta.n_electrons(), hp.meta.reference_two_sz));
    let target = QNum::new(n_electrons as i32, two_sz);

    // Warm-up machinery in chain coordinates.
    let s1_chain: Option<Vec<f64>> = warmup
        .s1
        .as_ref()
        .map(|v| (0..n).map(|pos| v[ordering.orbital_at(pos)]).collect());
    let casv = build_cas_vector(s1_chain.as_deref(), n)
        .map_err(|e| DmrgError::BadConfig(e.to_string()))?;
    let warm = CiDeasWarmup::new(
        hp.meta.hf_occupations.clone(),
        casv,
        s1_chain.as_deref(),
        &warmup.config,
        cfg.m_start,
    )
    .map_err(|e| DmrgError::BadConfig(e.to_string()))?;

    let all: Vec<usize> = (0..n).collect();
    let mut left: Vec<Option<StoredBlock>> = (0..n).map(|_| None).collect();
    let mut right: Vec<Option<StoredBlock>> = (0..n).map(|_| None).collect();
    left[0] = Some(StoredBlock {
        ops: OpSet::vacuum(&d, &all, true),
        prod: None,
        iso: None,
    });
    right[0] = Some(StoredBlock {
        ops: OpSet::vacuum(&d, &all, false),
        prod: None,
        iso: None,
    });

    let mut driver = Driver {
        d: &d,
        n,
        target,
        n_electrons,
        two_sz,
        cfg,
        warmup: warm,
        left,
        right,
        psi_carry: None,
        iteration: 0,
        half_sweep: 0,
        truncations: Vec::new(),
        m_trace: Vec::new(),
        ledger: Vec::new(),
        s1_chain: vec![0.0; n],
        block_profile: vec![0.0; n + 1],
        asymmetry: 0.0,
        final_state: None,
    };

    let mut energies = Vec::new();
    let mut profiles = Vec::new();

    // Warm-up rightward pass.
    energies.push(driver.half_sweep(Direction::Rightward, true)?);
    profiles.push(driver.profile());
    let mut prev_energy = energies[0];
    let mut prev_profile = profiles[0].clone();
    let mut converged = false;
    let mut sweeps = 0;

    while sweeps < cfg.max_sweeps && !converged {
        energies.push(driver.half_sweep(Direction::Leftward, false)?);
        driver.asymmetry = 0.0; // report the final pass only
        let e = driver.half_sweep(Direction::Rightward, false)?;
        energies.push(e);
        profiles.push(driver.profile());
        sweeps += 1;
        let profile_delta = profiles.last().unwrap().max_delta(&prev_profile);
        if (e - prev_energy).abs() <= cfg.convergence_tol && profile_delta <= cfg.convergence_tol {
            converged = true;
        }
        prev_energy = e;
        prev_profile = profiles.last().unwrap().clone();
    }

    let final_energy = *energies.last().unwrap();
    let (psi, prod_l, prod_r) = driver.final_state.take().expect("final state recorded");
    let tp = measure::TurningPoint {
        psi: &psi,
        left_blocks: &driver.left,
        left_prod: &prod_l,
        right_prod: &prod_r,
        n,
    };
    let (ones_chain, twos_chain) = measure::measure_turning_point(&tp)?;
    let s2 = measure::s2_from_rdms(&ones_chain, &twos_chain);
    let measurements = measure::relabel(ones_chain, twos_chain, ordering);

    let transforms = (1..=n - 2)
        .filter_map(|k| {
            let b = driver.left[k].as_ref()?;
            let iso = b.iso.as_ref()?;
            Some(SerializedTransform {
                block_size: k,
                sectors: iso
                    .blocks
                    .iter()
                    .map(|(from_sec, mat)| {
                        let qn = iso.from.qn(*from_sec);
                        TransformBlock {
                            n: qn.n,
                            tsz: qn.tsz,
                            rows: mat.nrows(),
                            cols: mat.ncols(),
                            data: mat.iter().copied().collect(),
                        }
                    })
                    .collect(),
            })
        })
        .collect();

    let m_max = driver.truncations.iter().map(|t| t.kept).max().unwrap_or(0);
    Ok(DmrgResult {
        ordering: ordering.clone(),
        final_energy,
        energies,
        profiles,
        truncations: driver.truncations,
        m_trace: driver.m_trace,
        m_max,
        s2,
        converged,
        half_sweeps: driver.half_sweep,
        sweeps,
        ledger: driver.ledger,
        cut_entropy_asymmetry: driver.asymmetry,
        measurements,
        transforms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fci::{ground_state, subset_rdm, SectorBasis};
    use crate::integrals::build_hubbard;

    fn cfg(chi: f64, m_min: usize) -> SweepConfig {
        SweepConfig {
            chi,
            m_min,
            m_start: 64,
            m_cap: 100_000,
            max_sweeps: 8,
            convergence_tol: 1e-9,
            target: None,
        }
    }

    #[test]
    fn two_orbital_exact() {
        let h = build_hubbard(2, 1.0, 4.0).unwrap();
        let id = Permutation::identity(2);
        let res = run_dmrg(&h, &id, &cfg(1e-6, 4), &WarmupSpec::default()).unwrap();
        let basis = SectorBasis::enumerate(2, 2, 0).unwrap();
        let exact = ground_state(&h, &basis, 1).unwrap()[0].energy;
        assert!(
            (res.final_energy - exact).abs() < 1e-10,
            "{} vs {exact}",
            res.final_energy
        );
        assert!(res.converged);
        assert!(res.s2.abs() < 1e-9, "s2 = {}", res.s2);
    }

    #[test]
    fn hubbard_l4_converges_to_oracle() {
        let h = build_hubbard(4, 1.0, 4.0).unwrap();
        let id = Permutation::identity(4);
        let res = run_dmrg(&h, &id, &cfg(1e-6, 16), &WarmupSpec::default()).unwrap();
        let basis = SectorBasis::enumerate(4, 4, 0).unwrap();
        let exact = ground_state(&h, &basis, 1).unwrap()[0].energy;
        assert!(
            (res.final_energy - exact).abs() < 1e-7,
            "{} vs {exact}",
            res.final_energy
        );
        // Block-entropy endpoints vanish identically.
        for p in &res.profiles {
            assert_eq!(p.block[0], 0.0);
            assert_eq!(p.block[4], 0.0);
        }
        // Energy per half-sweep never increases beyond solver tolerance.
        for w in res.energies.windows(2) {
            assert!(w[1] <= w[0] + 1e-9, "energies {:?}", res.energies);
        }
        // Ledger mutual information is non-positive.
        for l in &res.ledger {
            assert!(l.mutual_info <= 1e-8, "ledger {l:?}");
        }
        // DBSS contract.
        for t in &res.truncations {
            assert!(t.clamped || t.info_loss < 1e-6);
        }
    }

    #[test]
    fn measured_rdms_match_oracle() {
        let h = build_hubbard(4, 1.0, 4.0).unwrap();
        let id = Permutation::identity(4);
        let res = run_dmrg(&h, &id, &cfg(1e-8, 16), &WarmupSpec::default()).unwrap();
        let basis = SectorBasis::enumerate(4, 4, 0).unwrap();
        let gs = &ground_state(&h, &basis, 1).unwrap()[0].state;
        for r in &res.measurements.one {
            let exact = subset_rdm(gs, &r.orbitals).unwrap();
            let diff = (&r.matrix - &exact.matrix).abs().max();
            assert!(diff < 1e-6, "orbital {:?}: diff {diff}", r.orbitals);
        }
        for r in &res.measurements.two {
            let exact = subset_rdm(gs, &r.orbitals).unwrap();
            let diff = (&r.matrix - &exact.matrix).abs().max();
            assert!(diff < 1e-6, "pair {:?}: diff {diff}", r.orbitals);
        }
    }

    #[test]
    fn permuted_ordering_same_energy_and_labels() {
        let h = build_hubbard(4, 1.0, 4.0).unwrap();
        let perm = Permutation::from_image(vec![2, 0, 3, 1]).unwrap();
        let res = run_dmrg(&h, &perm, &cfg(1e-8, 24), &WarmupSpec::default()).unwrap();
        let basis = SectorBasis::enumerate(4, 4, 0).unwrap();
        let gs = &ground_state(&h, &basis, 1).unwrap()[0].state;
        let exact = ground_state(&h, &basis, 1).unwrap()[0].energy;
        assert!((res.final_energy - exact).abs() < 1e-7);
        // Measurements come back in original orbital labels regardless of the
        // chain ordering.
        for r in &res.measurements.two {
            let exact = subset_rdm(gs, &r.orbitals).unwrap();
            let diff = (&r.matrix - &exact.matrix).abs().max();
            assert!(diff < 1e-6, "pair {:?}: diff {diff}", r.orbitals);
        }
    }
}

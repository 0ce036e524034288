//! Second-quantized Hamiltonian data: one- and two-electron integral tables
//! with orbital metadata.
//!
//! The Hamiltonian acted on by the solvers is
//!
//! ```text
//! H = E_core + sum_{pq,s} T_pq c†_ps c_qs
//!            + 1/2 sum_{pqrs,st} V_pqrs c†_ps c†_rt c_st c_qs
//! ```
//!
//! with `V` stored in the chemist (FCIDUMP) index convention `(pq|rs)` and its
//! eight-fold real-orbital permutational symmetry. The mapping from the stored
//! tables to the operator above happens in exactly one place per solver (the
//! Slater–Condon rules in [`crate::fci`] and the term generator in
//! [`crate::dmrg`]); the normalization is pinned by closed-form Hubbard-dimer
//! energies in the test suite.

mod fcidump;
mod json;

pub use fcidump::{parse_fcidump, write_fcidump};
pub use json::{integral_set_from_json, integral_set_to_json};

use std::collections::BTreeMap;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum IntegralsError {
    #[error("line {line}: malformed FCIDUMP header: {msg}")]
    MalformedHeader { line: usize, msg: String },
    #[error("line {line}: orbital index {index} out of range 1..={norb}")]
    IndexOutOfRange {
        line: usize,
        index: i64,
        norb: usize,
    },
    #[error("line {line}: malformed record: {msg}")]
    MalformedRecord { line: usize, msg: String },
    #[error(
        "line {line}: conflicting duplicate entry for ({i} {j} {k} {l}): {old} vs {new} (|Δ| > 1e-12)"
    )]
    DuplicateEntry {
        line: usize,
        i: usize,
        j: usize,
        k: usize,
        l: usize,
        old: f64,
        new: f64,
    },
    #[error("metadata inconsistent: {0}")]
    BadMeta(String),
    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("invalid permutation: image is not a bijection on 0..{0}")]
    BadPermutation(usize),
    #[error("invalid argument: {0}")]
    BadArgument(String),
    #[error("json: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, IntegralsError>;

/// Tolerance below which two values for the same canonical integral entry are
/// considered identical rather than conflicting.
pub const DUPLICATE_TOL: f64 = 1e-12;

/// Per-orbital metadata carried alongside the integral tables.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitalMeta {
    pub n_orbitals: usize,
    /// Abelian point-group irrep label per orbital (small integers, e.g. 1..=8
    /// for D2h). All-equal labels mean "no symmetry".
    pub irrep_labels: Vec<u8>,
    /// Occupation of each orbital in the reference determinant (0, 1 or 2).
    pub hf_occupations: Vec<u8>,
    /// Rank of each orbital in the canonical ("energetical") ordering.
    pub energy_order: Vec<usize>,
    /// Twice the Sz projection of the reference determinant. Singly occupied
    /// orbitals are assigned spin-up first when reconstructing it.
    pub reference_two_sz: i32,
}

impl OrbitalMeta {
    pub fn new(
        irrep_labels: Vec<u8>,
        hf_occupations: Vec<u8>,
        reference_two_sz: i32,
    ) -> Result<Self> {
        let n = irrep_labels.len();
        if hf_occupations.len() != n {
            return Err(IntegralsError::BadMeta(format!(
                "hf_occupations length {} != n_orbitals {}",
                hf_occupations.len(),
                n
            )));
        }
        if hf_occupations.iter().any(|&o| o > 2) {
            return Err(IntegralsError::BadMeta(
                "hf occupation outside 0..=2".into(),
            ));
        }
        let nelec: i32 = hf_occupations.iter().map(|&o| o as i32).sum();
        let n_single = hf_occupations.iter().filter(|&&o| o == 1).count() as i32;
        if reference_two_sz.abs() > n_single || (reference_two_sz - n_single) % 2 != 0 {
            return Err(IntegralsError::BadMeta(format!(
                "reference 2Sz = {reference_two_sz} incompatible with {n_single} singly occupied orbitals"
            )));
        }
        let _ = nelec;
        Ok(Self {
            n_orbitals: n,
            irrep_labels,
            hf_occupations,
            energy_order: (0..n).collect(),
            reference_two_sz,
        })
    }

    /// Electron count of the reference determinant.
    pub fn n_electrons(&self) -> usize {
        self.hf_occupations.iter().map(|&o| o as usize).sum()
    }
}

/// Declared index convention of the stored two-electron table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IndexConvention {
    /// Chemist `(pq|rs)` as stored in FCIDUMP files.
    #[default]
    Chemist,
}

/// Reference determinant occupations implied by NELEC/MS2: doubly fill from
/// the bottom, unpaired electrons spin-up.
pub(crate) fn fcidump_reference_occ(norb: usize, nelec: usize, ms2: i32) -> Result<Vec<u8>> {
    let bad = |msg: String| IntegralsError::MalformedHeader { line: 1, msg };
    let nel = nelec as i64;
    let ms = ms2 as i64;
    if (nel + ms) % 2 != 0 || ms.abs() > nel {
        return Err(bad(format!("MS2={ms2} incompatible with NELEC={nelec}")));
    }
    let n_up = ((nel + ms) / 2) as usize;
    let n_dn = ((nel - ms) / 2) as usize;
    if n_up > norb || n_dn > norb {
        return Err(bad(format!(
            "NELEC={nelec}, MS2={ms2} does not fit in NORB={norb}"
        )));
    }
    let mut occ = vec![0u8; norb];
    for (i, o) in occ.iter_mut().enumerate() {
        *o = (i < n_up) as u8 + (i < n_dn) as u8;
    }
    Ok(occ)
}

/// Canonical key for a chemist-notation two-electron entry under the eight-fold
/// symmetry (pq|rs) = (qp|rs) = (pq|sr) = (rs|pq) = ...
fn canonical_key(p: usize, q: usize, r: usize, s: usize) -> [u16; 4] {
    let (a, b) = if p >= q { (p, q) } else { (q, p) };
    let (c, d) = if r >= s { (r, s) } else { (s, r) };
    if (a, b) >= (c, d) {
        [a as u16, b as u16, c as u16, d as u16]
    } else {
        [c as u16, d as u16, a as u16, b as u16]
    }
}

/// A second-quantized Hamiltonian: integral tables plus orbital metadata.
///
/// Immutable after construction; cheap to clone only when small, so shared
/// references are preferred.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralSet {
    pub meta: OrbitalMeta,
    /// Symmetric one-body table, row-major `n x n` (Hartree).
    one_body: Vec<f64>,
    /// Two-body table in canonical chemist keys (Hartree).
    two_body: BTreeMap<[u16; 4], f64>,
    pub core_energy: f64,
    pub convention: IndexConvention,
}

impl IntegralSet {
    pub fn new(meta: OrbitalMeta) -> Self {
        let n = meta.n_orbitals;
        Self {
            meta,
            one_body: vec![0.0; n * n],
            two_body: BTreeMap::new(),
            core_energy: 0.0,
            convention: IndexConvention::Chemist,
        }
    }

    pub fn n_orbitals(&self) -> usize {
        self.meta.n_orbitals
    }

    pub fn t(&self, p: usize, q: usize) -> f64 {
        self.one_body[p * self.meta.n_orbitals + q]
    }

    /// Sets `T_pq = T_qp = value`.
    pub fn set_t(&mut self, p: usize, q: usize, value: f64) {
        let n = self.meta.n_orbitals;
        self.one_body[p * n + q] = value;
        self.one_body[q * n + p] = value;
    }

    /// Chemist-notation `(pq|rs)`; symmetry-equivalent entries are expanded
    /// from the stored canonical representative.
    pub fn v(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.two_body
            .get(&canonical_key(p, q, r, s))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn set_v(&mut self, p: usize, q: usize, r: usize, s: usize, value: f64) {
        if value == 0.0 {
            self.two_body.remove(&canonical_key(p, q, r, s));
        } else {
            self.two_body.insert(canonical_key(p, q, r, s), value);
        }
    }

    /// Canonical nonzero two-body entries, deterministic order.
    pub fn two_body_entries(&self) -> impl Iterator<Item = ([u16; 4], f64)> + '_ {
        self.two_body.iter().map(|(&k, &v)| (k, v))
    }

    /// Dense copies of both tables for inner loops.
    pub fn dense(&self) -> DenseInts {
        let n = self.meta.n_orbitals;
        let mut v = vec![0.0; n * n * n * n];
        for (k, val) in self.two_body.iter() {
            let [a, b, c, d] = [k[0] as usize, k[1] as usize, k[2] as usize, k[3] as usize];
            for (p, q, r, s) in [
                (a, b, c, d),
                (b, a, c, d),
                (a, b, d, c),
                (b, a, d, c),
                (c, d, a, b),
                (d, c, a, b),
                (c, d, b, a),
                (d, c, b, a),
            ] {
                v[((p * n + q) * n + r) * n + s] = *val;
            }
        }
        DenseInts {
            n,
            t: self.one_body.clone(),
            v,
            core: self.core_energy,
        }
    }
}

/// Flat dense integral tables (chemist convention for `v`).
#[derive(Debug, Clone)]
pub struct DenseInts {
    pub n: usize,
    pub t: Vec<f64>,
    pub v: Vec<f64>,
    pub core: f64,
}

impl DenseInts {
    #[inline]
    pub fn t(&self, p: usize, q: usize) -> f64 {
        self.t[p * self.n + q]
    }

    #[inline]
    pub fn v(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.v[((p * self.n + q) * self.n + r) * self.n + s]
    }
}

/// A relabeling of the orbital chain: `image[new_position] = original orbital`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self {
            image: (0..n).collect(),
        }
    }

    pub fn from_image(image: Vec<usize>) -> Result<Self> {
        let n = image.len();
        let mut seen = vec![false; n];
        for &i in &image {
            if i >= n || seen[i] {
                return Err(IntegralsError::BadPermutation(n));
            }
            seen[i] = true;
        }
        Ok(Self { image })
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    /// Original orbital sitting at chain position `pos`.
    pub fn orbital_at(&self, pos: usize) -> usize {
        self.image[pos]
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    /// `inverse()[orbital] = chain position`.
    pub fn inverse(&self) -> Vec<usize> {
        let mut inv = vec![0; self.image.len()];
        for (pos, &orb) in self.image.iter().enumerate() {
            inv[orb] = pos;
        }
        inv
    }

    /// Composition such that
    /// `apply_permutation(h, p.compose(&q)) == apply_permutation(apply_permutation(h, q), p)`.
    pub fn compose(&self, q: &Permutation) -> Permutation {
        Permutation {
            image: self.image.iter().map(|&i| q.image[i]).collect(),
        }
    }

    pub fn reversed(&self) -> Permutation {
        let mut image = self.image.clone();
        image.reverse();
        Permutation { image }
    }
}

/// Builds an open-chain Hubbard Hamiltonian: nearest-neighbour hopping `-t`
/// and on-site repulsion `U n_up n_dn`, expressed through the chemist-table
/// convention (`V_iiii = U`).
pub fn build_hubbard(sites: usize, t: f64, u: f64) -> Result<IntegralSet> {
    if sites == 0 {
        return Err(IntegralsError::BadArgument("sites must be >= 1".into()));
    }
    // Half-filled reference determinant: doubly occupy the first floor(n/2)
    // orbitals, one unpaired up electron if the count is odd.
    let mut occ = vec![0u8; sites];
    let nelec = sites;
    for (i, o) in occ.iter_mut().enumerate() {
        if 2 * (i + 1) <= nelec {
            *o = 2;
        } else if 2 * i < nelec {
            *o = 1;
        }
    }
    let two_sz = (nelec % 2) as i32;
    let meta = OrbitalMeta::new(vec![1; sites], occ, two_sz)?;
    let mut h = IntegralSet::new(meta);
    for i in 0..sites.saturating_sub(1) {
        h.set_t(i, i + 1, -t);
    }
    if u != 0.0 {
        for i in 0..sites {
            h.set_v(i, i, i, i, u);
        }
    }
    Ok(h)
}

/// Reindexes the integral tables so that chain position `a` of the result
/// holds original orbital `p.orbital_at(a)`. Core energy is unchanged.
pub fn apply_permutation(h: &IntegralSet, p: &Permutation) -> Result<IntegralSet> {
    let n = h.n_orbitals();
    if p.len() != n {
        return Err(IntegralsError::SizeMismatch {
            expected: n,
            got: p.len(),
        });
    }
    let meta = OrbitalMeta {
        n_orbitals: n,
        irrep_labels: p.image.iter().map(|&i| h.meta.irrep_labels[i]).collect(),
        hf_occupations: p.image.iter().map(|&i| h.meta.hf_occupations[i]).collect(),
        energy_order: p.image.iter().map(|&i| h.meta.energy_order[i]).collect(),
        reference_two_sz: h.meta.reference_two_sz,
    };
    let mut out = IntegralSet::new(meta);
    out.core_energy = h.core_energy;
    out.convention = h.convention;
    let inv = p.inverse();
    for a in 0..n {
        for b in a..n {
            out.set_t(a, b, h.t(p.image[a], p.image[b]));
        }
    }
    for (k, val) in h.two_body.iter() {
        out.set_v(
            inv[k[0] as usize],
            inv[k[1] as usize],
            inv[k[2] as usize],
            inv[k[3] as usize],
            *val,
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hubbard_dimer_tables() {
        let h = build_hubbard(2, 1.0, 0.0).unwrap();
        assert_eq!(h.t(0, 0), 0.0);
        assert_eq!(h.t(0, 1), -1.0);
        assert_eq!(h.t(1, 0), -1.0);
        assert_eq!(h.two_body_entries().count(), 0);
        assert_eq!(h.meta.n_electrons(), 2);
    }

    #[test]
    fn hubbard_onsite_term() {
        let h = build_hubbard(3, 0.5, 4.0).unwrap();
        assert_eq!(h.v(1, 1, 1, 1), 4.0);
        assert_eq!(h.v(0, 1, 1, 1), 0.0);
    }

    #[test]
    fn two_body_symmetry_expansion() {
        let mut h = IntegralSet::new(OrbitalMeta::new(vec![1; 3], vec![2, 0, 0], 0).unwrap());
        h.set_v(0, 1, 2, 2, 0.25);
        for (p, q, r, s) in [
            (0, 1, 2, 2),
            (1, 0, 2, 2),
            (2, 2, 0, 1),
            (2, 2, 1, 0),
        ] {
            assert_eq!(h.v(p, q, r, s), 0.25, "({p}{q}|{r}{s})");
        }
        assert_eq!(h.v(0, 2, 1, 2), 0.0);
    }

    #[test]
    fn permutation_composition_identity() {
        let p = Permutation::from_image(vec![2, 0, 1]).unwrap();
        let q = Permutation::from_image(vec![1, 2, 0]).unwrap();
        let h = build_hubbard(3, 1.0, 2.0).unwrap();
        let lhs = apply_permutation(&h, &p.compose(&q)).unwrap();
        let rhs = apply_permutation(&apply_permutation(&h, &q).unwrap(), &p).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn permutation_involution() {
        let h = build_hubbard(2, 1.0, 4.0).unwrap();
        let swap = Permutation::from_image(vec![1, 0]).unwrap();
        let twice = apply_permutation(&apply_permutation(&h, &swap).unwrap(), &swap).unwrap();
        assert_eq!(h, twice);
        let id = Permutation::identity(2);
        assert_eq!(apply_permutation(&h, &id).unwrap(), h);
    }

    #[test]
    fn bad_permutation_rejected() {
        assert!(Permutation::from_image(vec![0, 0]).is_err());
        assert!(Permutation::from_image(vec![0, 2]).is_err());
    }
}

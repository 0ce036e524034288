//! Two-site DMRG over an ordered orbital chain with quantum-number-resolved
//! blocks, Davidson superblock solves and dynamic block state selection.

pub mod dbss;
pub mod measure;
pub mod ops;
pub mod site;
pub mod superblock;
pub mod sweep;

pub use dbss::{dbss_truncate, SchmidtSpectrum, TruncationRecord};
pub use measure::{s2_from_rdms, swap_pair_rdm};
pub use ops::{Factor, OpSet};
pub use sweep::{
    run_dmrg, DmrgResult, GrowthLedger, MTraceEntry, Measurements, SerializedTransform,
    SweepConfig, TransformBlock, WarmupSpec,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DmrgError {
    #[error("chain needs at least 2 orbitals, got {0}")]
    ChainTooShort(usize),
    #[error("target sector ({n_electrons}, {two_sz}) unreachable at configuration {config}")]
    EmptySuperblock {
        n_electrons: usize,
        two_sz: i32,
        config: usize,
    },
    #[error("environment for {0} orbitals cannot host the requested sector")]
    InfeasibleEnvironment(usize),
    #[error("no transformation history recorded; run a sweep first")]
    MissingHistory,
    #[error("superblock eigensolver failed: {0}")]
    Solver(#[from] crate::solver::SolverError),
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Integrals(#[from] crate::integrals::IntegralsError),
}

pub type Result<T> = std::result::Result<T, DmrgError>;

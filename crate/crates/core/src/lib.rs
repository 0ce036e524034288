//! Quantum-information-guided DMRG workbench for second-quantized electronic
//! Hamiltonians.
//!
//! The crate computes ground states of small ab-initio style Hamiltonians two
//! ways: a matrix-free full-CI solver ([`fci`]) that serves as the exact
//! reference, and a two-site DMRG engine ([`dmrg`]) with dynamic block state
//! selection driven by an a-priori quantum-information-loss bound. Orbital
//! entanglement measures ([`entanglement`]) extracted from either solver feed
//! orbital-ordering optimization ([`ordering`]) and the CI-based warm-up that
//! seeds the DMRG environment blocks ([`cideas`]).

pub mod algebra;
pub mod cideas;
pub mod dmrg;
pub mod entanglement;
pub mod fci;
pub mod integrals;
pub mod ordering;
pub mod report;
pub mod solver;

pub use integrals::{IntegralSet, OrbitalMeta, Permutation};

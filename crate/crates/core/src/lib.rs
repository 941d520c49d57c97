//! Exact arithmetic with Mukai vectors on K3 surfaces.
//!
//! The crate is organized bottom-up:
//!
//! - [`lattice`]: even lattices, Mukai vectors and the Mukai pairing
//! - [`isometry`]: translations, `(-2)`-reflections, lattice automorphisms
//! - [`moduli`]: existence, dimension, case A/B and Euler-characteristic
//!   invariants of moduli spaces of sheaves
//! - [`qseries`]: exact truncated q-series and the Göttsche series
//! - [`partition`]: PSU(r) partition functions, computed directly, through
//!   the closed Hecke form and through the literal Hecke sum
//! - [`theta`]: Siegel–Narain theta sums and the U(r) partition function
//! - [`constructions`]: the auxiliary rank-one-Picard construction and the
//!   lattice-point lemmas it relies on

pub mod constructions;
pub mod error;
pub mod isometry;
pub mod lattice;
pub mod moduli;
pub mod partition;
pub mod qseries;
pub mod theta;

pub use constructions::{
    build_auxiliary, farey_gap_holds, farey_sweep, pick_interior, reflected_target, triangle_interior_count,
    triangle_sweep, AuxConstruction, FareyOutcome, SweepReport,
};
pub use error::{Error, Result};
pub use isometry::{apply_reflect, apply_translate, apply_word, reflection_target, IsometryElem, IsometryWord};
pub use lattice::{mukai_pairing, square, EvenLattice, MukaiVector};
pub use moduli::{Case, CaseClass, NonLocallyFree, NonLocallyFreeKind};
pub use partition::{chi_virtual, z_psu_direct, z_psu_hecke, z_psu_hecke_literal, FloatSeries};
pub use qseries::{gottsche_series, hilbert_euler, z1_zero, Evaluation, QSeries};
pub use theta::{theta_siegel_narain, z_full_direct, z_full_factorized, Splitting, ThetaValue, Truncation};

pub use num_bigint::BigInt;
pub use num_complex::Complex64;
pub use num_rational::{BigRational, Rational64};

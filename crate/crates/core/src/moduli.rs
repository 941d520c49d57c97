//! Decidable invariants of the moduli space `M_H(v)` of stable sheaves with
//! Mukai vector `v`, for a general polarization `H`.
//!
//! Every function here assumes `rk v > 0`; rank-zero vectors are rejected.
//! Write `v = l(r + ξ) + aω` with `l = ℓ(v)` and `r + ξ` primitive. The
//! vector falls in case B when `r + ξ + bω` is a `(-2)`-vector for some
//! integer `b`, i.e. when `2r` divides `(ξ²) + 2`, and in case A otherwise.
//!
//! Hodge numbers of `M_H(v)` agree with those of `Hilb^{<v²>/2+1}`; only
//! the Euler characteristic is computed.

use num_bigint::BigInt;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{square, EvenLattice, MukaiVector};
use crate::qseries::hilbert_euler;

fn require_positive_rank(v: &MukaiVector) -> Result<()> {
    if v.r <= 0 {
        return Err(Error::Precondition(format!(
            "rank must be positive, got {}",
            v.r
        )));
    }
    Ok(())
}

fn require_primitive(v: &MukaiVector) -> Result<()> {
    if !v.is_primitive() {
        return Err(Error::Precondition(format!(
            "vector must be primitive (content {})",
            v.content()
        )));
    }
    Ok(())
}

/// Checks shared by the invariants that need a nonempty moduli space.
fn require_nonempty(v: &MukaiVector, lattice: &EvenLattice) -> Result<i64> {
    require_positive_rank(v)?;
    require_primitive(v)?;
    let sq = square(v, lattice)?;
    if sq < -2 {
        return Err(Error::Precondition(format!(
            "moduli space is empty: <v^2> = {sq} < -2"
        )));
    }
    Ok(sq)
}

/// Nonemptiness of `M_H(v)` for primitive `v`: `<v²> ≥ -2`.
pub fn exists_stable_primitive(v: &MukaiVector, lattice: &EvenLattice) -> Result<bool> {
    require_positive_rank(v)?;
    require_primitive(v)?;
    Ok(square(v, lattice)? >= -2)
}

/// A semistable sheaf exists iff `v = n·w` with `<w²> ≥ -2`.
/// Decided by scanning the divisors of the content.
pub fn exists_semistable(v: &MukaiVector, lattice: &EvenLattice) -> Result<bool> {
    require_positive_rank(v)?;
    let g = v.content();
    for n in 1..=g {
        if g % n != 0 {
            continue;
        }
        let w = v.div_exact(n).expect("n divides the content");
        if square(&w, lattice)? >= -2 {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Closed form of [`exists_semistable`]: `<v²> ≥ 0`, or the primitive
/// part is a `(-2)`-vector.
pub fn exists_semistable_closed_form(v: &MukaiVector, lattice: &EvenLattice) -> Result<bool> {
    require_positive_rank(v)?;
    if square(v, lattice)? >= 0 {
        return Ok(true);
    }
    let w0 = v.div_exact(v.content()).expect("content divides v");
    Ok(square(&w0, lattice)? == -2)
}

/// `dim M_H(v) = <v²> + 2`.
pub fn moduli_dim(v: &MukaiVector, lattice: &EvenLattice) -> Result<i64> {
    Ok(require_nonempty(v, lattice)? + 2)
}

/// `n` such that `M_H(v)` is deformation-birational to `Hilb^n`: `<v²>/2 + 1`.
pub fn hilb_index(v: &MukaiVector, lattice: &EvenLattice) -> Result<i64> {
    Ok(require_nonempty(v, lattice)? / 2 + 1)
}

/// `χ(M_H(v)) = χ(Hilb^{<v²>/2+1})`.
pub fn euler_characteristic(v: &MukaiVector, lattice: &EvenLattice) -> Result<BigInt> {
    Ok(hilbert_euler(hilb_index(v, lattice)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Case {
    A,
    B,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CaseClass {
    pub case: Case,
    /// `ℓ(v)`.
    pub l: i64,
    /// Rank of the primitive part `r + ξ`.
    pub r: i64,
    pub xi: Vec<i64>,
    /// The `(-2)`-vector `r + ξ + bω` in case B.
    pub v0: Option<MukaiVector>,
}

pub fn classify_case(v: &MukaiVector, lattice: &EvenLattice) -> Result<CaseClass> {
    require_positive_rank(v)?;
    lattice.check_len(&v.c1)?;
    let l = v.ell();
    let r = v.r / l;
    let xi: Vec<i64> = v.c1.iter().map(|c| c / l).collect();
    let numer = lattice.form(&xi, &xi)? + 2;
    let v0 = if numer % (2 * r) == 0 {
        Some(MukaiVector::new(r, xi.clone(), numer / (2 * r)))
    } else {
        None
    };
    Ok(CaseClass {
        case: if v0.is_some() { Case::B } else { Case::A },
        l,
        r,
        xi,
        v0,
    })
}

/// Existence of μ-stable sheaves: `<v²> ≥ 0` in case A, `<v²> ≥ 2ℓ(v)²`
/// in case B.
///
/// The case-B bound is applied as stated even at `ℓ = 1, <v²> = -2`, where
/// it answers `false` although rigid μ-stable bundles such as `O_X` exist;
/// [`mu_stable_boundary_corner`] flags that situation.
pub fn exists_mu_stable(v: &MukaiVector, lattice: &EvenLattice) -> Result<bool> {
    if !exists_stable_primitive(v, lattice)? {
        return Err(Error::Precondition(
            "moduli space is empty (<v^2> < -2)".into(),
        ));
    }
    let sq = square(v, lattice)?;
    let class = classify_case(v, lattice)?;
    Ok(match class.case {
        Case::A => sq >= 0,
        Case::B => sq >= 2 * class.l * class.l,
    })
}

/// True at the `ℓ = 1, <v²> = -2` corner of case B.
pub fn mu_stable_boundary_corner(v: &MukaiVector, lattice: &EvenLattice) -> Result<bool> {
    let class = classify_case(v, lattice)?;
    Ok(class.case == Case::B && class.l == 1 && square(v, lattice)? == -2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NonLocallyFreeKind {
    /// `rk v = 1`: ideal sheaves twisted by a line bundle.
    RankOne,
    /// `v = (rk v0)·v0 - ω`: kernels of `E0^{⊕ rk v0} → C_x`, `M ≅ X`.
    ReflPoint,
    /// `rk v0 = 1`, `v = l·v0 - (l+1)ω`: `M ≅ Hilb^{l+1}`.
    UnivExt,
    /// `M_H(v)` contains locally free sheaves.
    HasLocallyFree,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NonLocallyFree {
    pub kind: NonLocallyFreeKind,
    pub model: String,
}

/// Decide whether `M_H(v)` consists only of non-locally-free sheaves.
pub fn classify_non_locally_free(v: &MukaiVector, lattice: &EvenLattice) -> Result<NonLocallyFree> {
    let n = hilb_index(v, lattice)?;
    let found = |kind, model: String| Ok(NonLocallyFree { kind, model });
    if v.r == 1 {
        return found(NonLocallyFreeKind::RankOne, format!("Hilb^{n}"));
    }
    let class = classify_case(v, lattice)?;
    if let Some(v0) = &class.v0 {
        let omega = MukaiVector::omega(lattice.rank());
        if *v == v0.scale(v0.r).sub(&omega) {
            return found(NonLocallyFreeKind::ReflPoint, "X".into());
        }
        let l = class.l;
        if v0.r == 1 && *v == v0.scale(l).sub(&omega.scale(l + 1)) {
            return found(NonLocallyFreeKind::UnivExt, format!("Hilb^{}", l + 1));
        }
    }
    found(NonLocallyFreeKind::HasLocallyFree, format!("deformation of Hilb^{n}"))
}

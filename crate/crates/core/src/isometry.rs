//! Generators of the Mukai-lattice isometry group and words in them.
//!
//! Isometries are kept as generator words rather than matrices. A word
//! applies right to left: `[g1, g2, g3]` acts as `g1 ∘ g2 ∘ g3`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{mukai_pairing, narrow, pairing_wide, EvenLattice, MukaiVector};

/// One generator. Build through [`IsometryElem::reflect`] and
/// [`IsometryElem::ns_auto`] (or [`IsometryWord::new`]) so that the
/// `(-2)` and `MᵀGM = G` conditions are checked.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum IsometryElem {
    /// Multiplication by `ch(N) = 1 + N + (N²)/2·ω`.
    Translate {
        #[serde(rename = "N")]
        n: Vec<i64>,
    },
    /// `x ↦ x + <x, u> u` for a `(-2)`-vector `u`.
    Reflect { u: MukaiVector },
    /// Isometry `M` of the degree-2 lattice acting on the middle component.
    NsAuto {
        #[serde(rename = "M")]
        m: Vec<Vec<i64>>,
    },
    Negate,
    Dual,
}

impl IsometryElem {
    pub fn translate(n: Vec<i64>, lattice: &EvenLattice) -> Result<Self> {
        lattice.check_len(&n)?;
        Ok(IsometryElem::Translate { n })
    }

    pub fn reflect(u: MukaiVector, lattice: &EvenLattice) -> Result<Self> {
        let sq = mukai_pairing(&u, &u, lattice)?;
        if sq != -2 {
            return Err(Error::Precondition(format!(
                "reflection vector must satisfy <u,u> = -2, got {sq}"
            )));
        }
        Ok(IsometryElem::Reflect { u })
    }

    pub fn ns_auto(m: Vec<Vec<i64>>, lattice: &EvenLattice) -> Result<Self> {
        let rho = lattice.rank();
        if m.len() != rho || m.iter().any(|row| row.len() != rho) {
            return Err(Error::DimensionMismatch {
                expected: rho,
                found: m.len(),
            });
        }
        // columns of M are the images of the basis vectors
        let column = |j: usize| -> Vec<i64> { m.iter().map(|row| row[j]).collect() };
        for i in 0..rho {
            for j in 0..rho {
                if lattice.form(&column(i), &column(j))? != lattice.gram()[i][j] {
                    return Err(Error::Precondition(format!(
                        "matrix does not preserve the intersection form at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(IsometryElem::NsAuto { m })
    }

    /// Re-run the construction checks on an element obtained elsewhere
    /// (for instance from JSON).
    pub fn validated(self, lattice: &EvenLattice) -> Result<Self> {
        match self {
            IsometryElem::Translate { n } => Self::translate(n, lattice),
            IsometryElem::Reflect { u } => Self::reflect(u, lattice),
            IsometryElem::NsAuto { m } => Self::ns_auto(m, lattice),
            other => Ok(other),
        }
    }

    pub fn apply(&self, v: &MukaiVector, lattice: &EvenLattice) -> Result<MukaiVector> {
        lattice.check_len(&v.c1)?;
        match self {
            IsometryElem::Translate { n } => apply_translate(n, v, lattice),
            IsometryElem::Reflect { u } => apply_reflect(u, v, lattice),
            IsometryElem::NsAuto { m } => {
                let c1 = m
                    .iter()
                    .map(|row| {
                        let s: i128 = row.iter().zip(&v.c1).map(|(&x, &y)| x as i128 * y as i128).sum();
                        narrow(s, "ns automorphism")
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(MukaiVector::new(v.r, c1, v.a))
            }
            IsometryElem::Negate => Ok(v.neg()),
            IsometryElem::Dual => Ok(v.dual()),
        }
    }
}

/// `ch(N)·v = (r, ξ + rN, a + (N·ξ) + r (N²)/2)`.
pub fn apply_translate(n: &[i64], v: &MukaiVector, lattice: &EvenLattice) -> Result<MukaiVector> {
    lattice.check_len(n)?;
    lattice.check_len(&v.c1)?;
    let r = v.r as i128;
    let c1 = v
        .c1
        .iter()
        .zip(n)
        .map(|(&x, &y)| narrow(x as i128 + r * y as i128, "translation"))
        .collect::<Result<Vec<_>>>()?;
    let n_xi = lattice.form_wide(n, &v.c1)?;
    let n_sq = lattice.form_wide(n, n)?;
    let a = narrow(v.a as i128 + n_xi + r * (n_sq / 2), "translation")?;
    Ok(MukaiVector::new(v.r, c1, a))
}

/// `R_u(v) = v + <v, u> u`.
pub fn apply_reflect(u: &MukaiVector, v: &MukaiVector, lattice: &EvenLattice) -> Result<MukaiVector> {
    let sq = pairing_wide(u, u, lattice)?;
    if sq != -2 {
        return Err(Error::Precondition(format!(
            "reflection vector must satisfy <u,u> = -2, got {sq}"
        )));
    }
    let k = pairing_wide(v, u, lattice)?;
    let comb = |x: i64, y: i64| narrow(x as i128 + k * y as i128, "reflection");
    let c1 = v
        .c1
        .iter()
        .zip(&u.c1)
        .map(|(&x, &y)| comb(x, y))
        .collect::<Result<Vec<_>>>()?;
    Ok(MukaiVector::new(comb(v.r, u.r)?, c1, comb(v.a, u.a)?))
}

/// Ordered list of validated generators.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct IsometryWord(Vec<IsometryElem>);

impl IsometryWord {
    pub fn identity() -> Self {
        IsometryWord(Vec::new())
    }

    pub fn new(elems: Vec<IsometryElem>, lattice: &EvenLattice) -> Result<Self> {
        elems
            .into_iter()
            .map(|e| e.validated(lattice))
            .collect::<Result<Vec<_>>>()
            .map(IsometryWord)
    }

    pub fn elems(&self) -> &[IsometryElem] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &IsometryWord) -> IsometryWord {
        let mut elems = self.0.clone();
        elems.extend(other.0.iter().cloned());
        IsometryWord(elems)
    }

    pub fn apply(&self, v: &MukaiVector, lattice: &EvenLattice) -> Result<MukaiVector> {
        apply_word(self, v, lattice)
    }
}

pub fn apply_word(word: &IsometryWord, v: &MukaiVector, lattice: &EvenLattice) -> Result<MukaiVector> {
    let mut out = v.clone();
    for g in word.0.iter().rev() {
        out = g.apply(&out, lattice)?;
    }
    Ok(out)
}

/// Targets of the reflection realization: `w = -(v + <v, v1> v1)` and its dual.
pub fn reflection_target(
    v: &MukaiVector,
    v1: &MukaiVector,
    lattice: &EvenLattice,
) -> Result<(MukaiVector, MukaiVector)> {
    let w_plain = apply_reflect(v1, v, lattice)?.neg();
    let w_dual = w_plain.dual();
    Ok((w_plain, w_dual))
}

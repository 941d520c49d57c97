//! Even lattices and Mukai vectors.
//!
//! An [`EvenLattice`] stores the intersection form `G` on the degree-2 part
//! of the cohomology (in practice a Néron–Severi lattice or a toy stand-in).
//! The lattice used by the partition-function code is `Q = -G`; every place
//! that needs `Q` negates `G` explicitly, so `G` is the only stored form.
//!
//! A [`MukaiVector`] `(r, c1, a)` stands for `r + c1 + a·ω` in
//! `H^0 ⊕ H^2 ⊕ H^4`. The Mukai pairing is
//! `<x, y> = c1(x)ᵀ G c1(y) - r(x) a(y) - a(x) r(y)`.

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integral symmetric bilinear form with even diagonal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "LatticeRepr", into = "LatticeRepr")]
pub struct EvenLattice {
    gram: Vec<Vec<i64>>,
}

#[derive(Serialize, Deserialize)]
struct LatticeRepr {
    rank: usize,
    gram: Vec<Vec<i64>>,
}

impl TryFrom<LatticeRepr> for EvenLattice {
    type Error = Error;

    fn try_from(repr: LatticeRepr) -> Result<Self> {
        if repr.rank != repr.gram.len() {
            return Err(Error::DimensionMismatch {
                expected: repr.rank,
                found: repr.gram.len(),
            });
        }
        EvenLattice::new(repr.gram)
    }
}

impl From<EvenLattice> for LatticeRepr {
    fn from(lattice: EvenLattice) -> Self {
        LatticeRepr {
            rank: lattice.rank(),
            gram: lattice.gram,
        }
    }
}

impl EvenLattice {
    pub fn new(gram: Vec<Vec<i64>>) -> Result<Self> {
        let rank = gram.len();
        if rank == 0 {
            return Err(Error::InvalidLattice("rank must be positive".into()));
        }
        for (i, row) in gram.iter().enumerate() {
            if row.len() != rank {
                return Err(Error::InvalidLattice(format!(
                    "row {i} has length {}, expected {rank}",
                    row.len()
                )));
            }
            if row[i] % 2 != 0 {
                return Err(Error::InvalidLattice(format!(
                    "diagonal entry {i} is odd ({})",
                    row[i]
                )));
            }
            for (j, &entry) in row.iter().enumerate() {
                if entry != gram[j][i] {
                    return Err(Error::InvalidLattice(format!(
                        "gram matrix not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(EvenLattice { gram })
    }

    /// Rank-one lattice `ZH` with `(H^2) = h2`.
    pub fn rank_one(h2: i64) -> Result<Self> {
        Self::new(vec![vec![h2]])
    }

    pub fn rank(&self) -> usize {
        self.gram.len()
    }

    pub fn gram(&self) -> &[Vec<i64>] {
        &self.gram
    }

    pub(crate) fn check_len(&self, v: &[i64]) -> Result<()> {
        if v.len() != self.rank() {
            return Err(Error::DimensionMismatch {
                expected: self.rank(),
                found: v.len(),
            });
        }
        Ok(())
    }

    /// `xᵀ G y` in wide arithmetic.
    pub(crate) fn form_wide(&self, x: &[i64], y: &[i64]) -> Result<i128> {
        self.check_len(x)?;
        self.check_len(y)?;
        let mut acc: i128 = 0;
        for (i, row) in self.gram.iter().enumerate() {
            if x[i] == 0 {
                continue;
            }
            let mut inner: i128 = 0;
            for (j, &g) in row.iter().enumerate() {
                inner += g as i128 * y[j] as i128;
            }
            acc = acc
                .checked_add(x[i] as i128 * inner)
                .ok_or(Error::Overflow("intersection form"))?;
        }
        Ok(acc)
    }

    /// Intersection number `(x · y) = xᵀ G y`.
    pub fn form(&self, x: &[i64], y: &[i64]) -> Result<i64> {
        narrow(self.form_wide(x, y)?, "intersection form")
    }

    /// `G · x`.
    pub fn apply(&self, x: &[i64]) -> Result<Vec<i64>> {
        self.check_len(x)?;
        self.gram
            .iter()
            .map(|row| {
                let s: i128 = row.iter().zip(x).map(|(&g, &c)| g as i128 * c as i128).sum();
                narrow(s, "gram product")
            })
            .collect()
    }
}

pub(crate) fn narrow(x: i128, what: &'static str) -> Result<i64> {
    i64::try_from(x).map_err(|_| Error::Overflow(what))
}

/// Mukai vector `r + c1 + a·ω`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MukaiVector {
    pub r: i64,
    pub c1: Vec<i64>,
    pub a: i64,
}

impl MukaiVector {
    pub fn new(r: i64, c1: Vec<i64>, a: i64) -> Self {
        MukaiVector { r, c1, a }
    }

    /// The point class `ω = (0, 0, 1)` over a lattice of rank `rho`.
    pub fn omega(rho: usize) -> Self {
        MukaiVector::new(0, vec![0; rho], 1)
    }

    /// Mukai vector of a sheaf with rank `r`, first Chern class `c1` and
    /// second Chern character `ch2`: `(r, c1, r + ch2)`.
    pub fn from_chern(r: i64, c1: Vec<i64>, ch2: i64, lattice: &EvenLattice) -> Result<Self> {
        lattice.check_len(&c1)?;
        let a = r.checked_add(ch2).ok_or(Error::Overflow("mukai_from_chern"))?;
        Ok(MukaiVector { r, c1, a })
    }

    /// `(r, c1, ch2)` read back from the vector.
    pub fn chern_data(&self) -> (i64, &[i64], i64) {
        (self.r, &self.c1, self.a - self.r)
    }

    /// `x∨ = x0 - x1 + x2`.
    pub fn dual(&self) -> Self {
        MukaiVector {
            r: self.r,
            c1: self.c1.iter().map(|c| -c).collect(),
            a: self.a,
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(-1)
    }

    pub fn scale(&self, k: i64) -> Self {
        MukaiVector {
            r: self.r * k,
            c1: self.c1.iter().map(|c| c * k).collect(),
            a: self.a * k,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        MukaiVector {
            r: self.r + other.r,
            c1: self.c1.iter().zip(&other.c1).map(|(x, y)| x + y).collect(),
            a: self.a + other.a,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Divide every component by `k`; `None` unless `k` divides all of them.
    pub fn div_exact(&self, k: i64) -> Option<Self> {
        if k == 0 {
            return None;
        }
        let divides = |x: i64| x % k == 0;
        if divides(self.r) && divides(self.a) && self.c1.iter().all(|&c| divides(c)) {
            Some(MukaiVector {
                r: self.r / k,
                c1: self.c1.iter().map(|c| c / k).collect(),
                a: self.a / k,
            })
        } else {
            None
        }
    }

    /// gcd of every component (0 for the zero vector).
    pub fn content(&self) -> i64 {
        self.c1
            .iter()
            .fold(self.r.gcd(&self.a), |g, c| g.gcd(c))
    }

    /// `ℓ(v) = gcd(rk v, c1(v))` with `c1` taken by basis content.
    pub fn ell(&self) -> i64 {
        self.c1.iter().fold(self.r.abs(), |g, c| g.gcd(c))
    }

    pub fn is_primitive(&self) -> bool {
        self.content() == 1
    }
}

/// `<x, y> = c1(x)ᵀ G c1(y) - r(x) a(y) - a(x) r(y)`.
pub fn mukai_pairing(x: &MukaiVector, y: &MukaiVector, lattice: &EvenLattice) -> Result<i64> {
    narrow(pairing_wide(x, y, lattice)?, "mukai pairing")
}

pub(crate) fn pairing_wide(x: &MukaiVector, y: &MukaiVector, lattice: &EvenLattice) -> Result<i128> {
    let middle = lattice.form_wide(&x.c1, &y.c1)?;
    Ok(middle - x.r as i128 * y.a as i128 - x.a as i128 * y.r as i128)
}

/// `<v, v>`.
pub fn square(v: &MukaiVector, lattice: &EvenLattice) -> Result<i64> {
    mukai_pairing(v, v, lattice)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h2() -> EvenLattice {
        EvenLattice::rank_one(2).unwrap()
    }

    #[test]
    fn structure_sheaf_squares_to_minus_two() {
        let l = h2();
        let o = MukaiVector::new(1, vec![0], 1);
        assert_eq!(mukai_pairing(&o, &o, &l).unwrap(), -2);
    }

    #[test]
    fn pairing_examples() {
        let l = h2();
        let w = MukaiVector::new(0, vec![0], 1);
        let one = MukaiVector::new(1, vec![0], 0);
        assert_eq!(mukai_pairing(&w, &one, &l).unwrap(), -1);
        let x = MukaiVector::new(2, vec![1], 1);
        let y = MukaiVector::new(1, vec![0], 1);
        assert_eq!(mukai_pairing(&x, &y, &l).unwrap(), -3);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let l = h2();
        let x = MukaiVector::new(1, vec![0, 0], 1);
        assert_eq!(
            mukai_pairing(&x, &x, &l),
            Err(Error::DimensionMismatch { expected: 1, found: 2 })
        );
    }

    #[test]
    fn from_chern_examples() {
        let l = h2();
        assert_eq!(
            MukaiVector::from_chern(1, vec![0], 0, &l).unwrap(),
            MukaiVector::new(1, vec![0], 1)
        );
        for n in 0..6 {
            let v = MukaiVector::from_chern(1, vec![0], -n, &l).unwrap();
            assert_eq!(v, MukaiVector::new(1, vec![0], 1 - n));
            assert_eq!(square(&v, &l).unwrap(), 2 * n - 2);
        }
        assert_eq!(
            MukaiVector::from_chern(0, vec![0], 0, &l).unwrap(),
            MukaiVector::new(0, vec![0], 0)
        );
    }

    #[test]
    fn dual_examples() {
        let o = MukaiVector::new(1, vec![0], 1);
        assert_eq!(o.dual(), o);
        let v = MukaiVector::new(2, vec![3], -1);
        assert_eq!(v.dual(), MukaiVector::new(2, vec![-3], -1));
        assert_eq!(v.dual().dual(), v);
    }

    #[test]
    fn ell_and_primitivity() {
        let v = MukaiVector::new(2, vec![2], 3);
        assert_eq!(v.ell(), 2);
        assert!(v.is_primitive());
        assert!(!MukaiVector::new(2, vec![2], 4).is_primitive());
        assert_eq!(MukaiVector::new(0, vec![0], 5).ell(), 0);
        assert_eq!(MukaiVector::new(-4, vec![6], 1).ell(), 2);
    }

    #[test]
    fn lattice_validation() {
        assert!(EvenLattice::new(vec![vec![1]]).is_err());
        assert!(EvenLattice::new(vec![vec![2, 1], vec![0, 2]]).is_err());
        assert!(EvenLattice::new(vec![vec![2, 1]]).is_err());
        assert!(EvenLattice::new(vec![]).is_err());
        assert!(EvenLattice::new(vec![vec![0, 1], vec![1, 0]]).is_ok());
    }

    #[test]
    fn lattice_json_schema() {
        let l: EvenLattice = serde_json::from_str(r#"{"rank": 2, "gram": [[2, 1], [1, -2]]}"#).unwrap();
        assert_eq!(l.rank(), 2);
        let back = serde_json::to_string(&l).unwrap();
        assert_eq!(back, r#"{"rank":2,"gram":[[2,1],[1,-2]]}"#);
        assert!(serde_json::from_str::<EvenLattice>(r#"{"rank": 2, "gram": [[2]]}"#).is_err());
        assert!(serde_json::from_str::<EvenLattice>(r#"{"rank": 1, "gram": [[3]]}"#).is_err());
    }
}

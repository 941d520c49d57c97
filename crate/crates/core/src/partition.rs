//! PSU(r) partition functions `Z_r^α(τ) = Σ_{rk v = r, c1(v) = α} "χ(M(v))" q^{<v²>/2r}`.
//!
//! Three evaluation routes are provided and are expected to agree:
//!
//! 1. [`z_psu_direct`] sums over the Mukai vectors `v = (r, α, a)` with the
//!    divisor-sum weight [`chi_virtual`].
//! 2. [`z_psu_hecke`] is the Hecke transform of `Z_1^0 = 1/η^24` with the sum
//!    over `b` carried out in closed form:
//!    `Σ_{0≤b<d} e^{2πi b (n - 1 - (ξ²)/2)/d} = d·[d | n - 1 - (ξ²)/2]`.
//!    This gives
//!    `Z_r^α = r^{-2} Σ_{ad=r, aξ=α} d² Σ_{n ≡ 1 + (ξ²)/2 (d)} χ(X^[n]) q^{a(n-1)/d}`.
//! 3. [`z_psu_hecke_literal`] evaluates the Hecke sum over `(a, b, d)` with
//!    its complex phases in floating point, as a check on the closed form.
//!
//! Here `(ξ²) = ξᵀGξ` is the intersection form.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::{BigRational, Rational64};
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::lattice::{narrow, square, EvenLattice, MukaiVector};
use crate::qseries::{hilbert_euler, to_f64, ComplexSum, QSeries};

/// Largest rank accepted by the literal Hecke route.
pub const LITERAL_MAX_RANK: i64 = 12;

/// Relative tolerance for the literal route's imaginary parts.
pub const LITERAL_TOLERANCE: f64 = 1e-9;

fn require_rank(r: i64) -> Result<()> {
    if r < 1 {
        return Err(Error::Precondition(format!("rank must be positive, got {r}")));
    }
    Ok(())
}

fn divisors(n: i64) -> impl Iterator<Item = i64> {
    (1..=n).filter(move |d| n % d == 0)
}

/// `"χ(M(v))" = Σ_{v = a w} χ(X^[<w²>/2 + 1]) / a²`, the sum running over
/// positive integers `a` dividing every component of `v`.
pub fn chi_virtual(v: &MukaiVector, lattice: &EvenLattice) -> Result<BigRational> {
    if v.r <= 0 {
        return Err(Error::Precondition(format!(
            "rank must be positive, got {}",
            v.r
        )));
    }
    let mut total = BigRational::zero();
    for a in divisors(v.content()) {
        let w = v.div_exact(a).expect("a divides the content");
        let index = square(&w, lattice)? / 2 + 1;
        let chi = hilbert_euler(index);
        if !chi.is_zero() {
            total += BigRational::new(chi, BigInt::from(a * a));
        }
    }
    Ok(total)
}

fn alpha_square(alpha: &[i64], lattice: &EvenLattice) -> Result<i64> {
    lattice.form(alpha, alpha)
}

/// Sum over `v = (r, α, a)` of `chi_virtual(v) q^{<v²>/2r}`, complete below
/// `q^order`. Exponents never drop below `-r`, since a nonzero weight needs
/// `<v²> ≥ -2·content(v)² ≥ -2r²`.
pub fn z_psu_direct(r: i64, alpha: &[i64], order: Rational64, lattice: &EvenLattice) -> Result<QSeries> {
    require_rank(r)?;
    lattice.check_len(alpha)?;
    let alpha_sq = alpha_square(alpha, lattice)?;
    // exponent(a) = alpha_sq/2r - a, kept inside [-r, order)
    let offset = Rational64::new(alpha_sq, 2 * r);
    let a_max = (offset + r).floor().to_integer();
    let a_min = (offset - order).floor().to_integer() + 1;
    let mut terms = Vec::new();
    for a in a_min..=a_max {
        let v = MukaiVector::new(r, alpha.to_vec(), a);
        let chi = chi_virtual(&v, lattice)?;
        if chi.is_zero() {
            continue;
        }
        let sq = narrow(alpha_sq as i128 - 2 * r as i128 * a as i128, "exponent")?;
        terms.push((Rational64::new(sq, 2 * r), chi));
    }
    Ok(QSeries::from_terms(
        terms,
        Rational64::from_integer(-r),
        Some(order),
    ))
}

/// Factorizations `r = a·d` with `a | α`, as `(a, d, ξ = α/a)`.
fn hecke_factorizations(r: i64, alpha: &[i64]) -> Vec<(i64, i64, Vec<i64>)> {
    divisors(r)
        .filter(|a| alpha.iter().all(|c| c % a == 0))
        .map(|a| (a, r / a, alpha.iter().map(|c| c / a).collect()))
        .collect()
}

/// Indices `n ≥ 0` with `a(n-1)/d < order`, paired with their exponent.
fn hecke_indices(a: i64, d: i64, order: Rational64) -> impl Iterator<Item = (i64, Rational64)> {
    (0i64..)
        .map(move |n| (n, Rational64::new(a * (n - 1), d)))
        .take_while(move |(_, e)| *e < order)
}

/// Closed-form Hecke transform, complete below `q^order`.
pub fn z_psu_hecke(r: i64, alpha: &[i64], order: Rational64, lattice: &EvenLattice) -> Result<QSeries> {
    require_rank(r)?;
    lattice.check_len(alpha)?;
    let mut terms = Vec::new();
    for (a, d, xi) in hecke_factorizations(r, alpha) {
        let half_sq = lattice.form(&xi, &xi)? / 2;
        let weight = BigRational::new(BigInt::from(d * d), BigInt::from(r * r));
        for (n, e) in hecke_indices(a, d, order) {
            if (n - 1 - half_sq).rem_euclid(d) != 0 {
                continue;
            }
            let chi = hilbert_euler(n);
            terms.push((e, BigRational::from_integer(chi) * &weight));
        }
    }
    Ok(QSeries::from_terms(
        terms,
        Rational64::from_integer(-r),
        Some(order),
    ))
}

/// Series with floating-point complex coefficients keyed by exact exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatSeries {
    pub coeffs: BTreeMap<Rational64, Complex64>,
    /// Sum of the absolute values of the contributions at each exponent;
    /// the natural scale for rounding error.
    pub magnitudes: BTreeMap<Rational64, f64>,
    pub trunc: Rational64,
}

impl FloatSeries {
    /// Largest `|self_e - exact_e| / max(1, magnitude_e)` over all exponents
    /// present in either series.
    pub fn deviation_from(&self, exact: &QSeries) -> f64 {
        let mut worst: f64 = 0.0;
        for (e, c) in exact.terms() {
            let scale = self.magnitudes.get(&e).copied().unwrap_or(0.0).max(1.0);
            let got = self.coeffs.get(&e).copied().unwrap_or_default();
            worst = worst.max((got - Complex64::new(to_f64(c), 0.0)).norm() / scale);
        }
        for (e, got) in &self.coeffs {
            if exact.coefficient(*e).map(|c| c.is_zero()).unwrap_or(true) {
                let scale = self.magnitudes[e].max(1.0);
                worst = worst.max(got.norm() / scale);
            }
        }
        worst
    }

    /// Largest `|Im c_e| / max(1, magnitude_e)`.
    pub fn max_relative_imaginary(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|(e, c)| c.im.abs() / self.magnitudes[e].max(1.0))
            .fold(0.0, f64::max)
    }
}

/// The Hecke sum `r^{-2} Σ_{ad=r, 0≤b<d, aξ=α} d·Z_1^0((aτ+b)/d)·e(-b(ξ²)/2d)`
/// expanded term by term with explicit roots of unity.
///
/// Phases are reduced exactly modulo 1 before the exponential is taken.
/// Fails with [`Error::Tolerance`] if an imaginary part does not cancel to
/// within [`LITERAL_TOLERANCE`] relative to its magnitude.
pub fn z_psu_hecke_literal(
    r: i64,
    alpha: &[i64],
    order: Rational64,
    lattice: &EvenLattice,
) -> Result<FloatSeries> {
    require_rank(r)?;
    if r > LITERAL_MAX_RANK {
        return Err(Error::ScaleGuard(format!(
            "literal Hecke sum limited to r <= {LITERAL_MAX_RANK}, got {r}"
        )));
    }
    lattice.check_len(alpha)?;
    let mut sums: BTreeMap<Rational64, (ComplexSum, f64)> = BTreeMap::new();
    let r_sq = (r * r) as f64;
    for (a, d, xi) in hecke_factorizations(r, alpha) {
        let xi_sq = lattice.form(&xi, &xi)?;
        for (n, e) in hecke_indices(a, d, order) {
            let chi = hilbert_euler(n).to_f64().unwrap_or(f64::NAN);
            let entry = sums.entry(e).or_default();
            for b in 0..d {
                // e^{2πi b(n-1)/d} · e^{-πi b (ξ²)/d} = e^{2πi k / 2d}
                let k = (2 * b * (n - 1) - b * xi_sq).rem_euclid(2 * d);
                let phase = Complex64::from_polar(1.0, PI * k as f64 / d as f64);
                let term = phase * (d as f64 * chi / r_sq);
                entry.0.add(term);
                entry.1 += term.norm();
            }
        }
    }
    let mut coeffs = BTreeMap::new();
    let mut magnitudes = BTreeMap::new();
    for (e, (sum, mag)) in sums {
        let value = sum.value();
        if value.im.abs() > LITERAL_TOLERANCE * mag.max(1.0) {
            return Err(Error::Tolerance(format!(
                "imaginary part {} at exponent {e} does not cancel (magnitude {mag})",
                value.im
            )));
        }
        coeffs.insert(e, value);
        magnitudes.insert(e, mag);
    }
    Ok(FloatSeries {
        coeffs,
        magnitudes,
        trunc: order,
    })
}

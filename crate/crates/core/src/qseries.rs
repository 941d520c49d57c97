//! Exact truncated q-series with rational exponents, and the generating
//! function of Euler characteristics of Hilbert schemes of points on a K3
//! surface, `Σ χ(X^[n]) q^n = Π_{m≥1} (1 - q^m)^{-24}`.
//!
//! A [`QSeries`] is `Σ c_k q^{k/D}` with one common exponent denominator
//! `D`, a declared lower bound on exponents and an optional truncation
//! order `T`: every coefficient with exponent `< T` is known exactly, and
//! nothing is claimed at or beyond `T`. `T = None` marks a series known
//! completely (a Laurent polynomial).

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::{BigRational, Rational64};
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct QSeries {
    denom: i64,
    coeffs: BTreeMap<i64, BigRational>,
    low: Rational64,
    trunc: Option<Rational64>,
}

/// Numeric value of a series at a point of the upper half plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub value: Complex64,
    /// Heuristic size of the omitted tail: the magnitude of the last unit
    /// exponent window, continued geometrically in `|q|`. Not a certified
    /// bound; see [`gottsche_tail_bound`] for one.
    pub tail_estimate: f64,
}

fn min_opt(a: Option<Rational64>, b: Option<Rational64>) -> Option<Rational64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

impl QSeries {
    /// Build from `(exponent, coefficient)` pairs. Terms at or beyond the
    /// truncation order are discarded, zero coefficients dropped and equal
    /// exponents summed.
    pub fn from_terms<I>(terms: I, low: Rational64, trunc: Option<Rational64>) -> Self
    where
        I: IntoIterator<Item = (Rational64, BigRational)>,
    {
        let mut collected: BTreeMap<Rational64, BigRational> = BTreeMap::new();
        for (e, c) in terms {
            if trunc.is_some_and(|t| e >= t) {
                continue;
            }
            *collected.entry(e).or_insert_with(BigRational::zero) += c;
        }
        collected.retain(|_, c| !c.is_zero());
        let denom = collected
            .keys()
            .fold(1i64, |d, e| d.lcm(e.denom()));
        let low = collected.keys().next().map_or(low, |&e| low.min(e));
        let coeffs = collected
            .into_iter()
            .map(|(e, c)| (e.numer() * (denom / e.denom()), c))
            .collect();
        QSeries {
            denom,
            coeffs,
            low,
            trunc,
        }
    }

    /// Exactly known Laurent polynomial.
    pub fn polynomial<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (Rational64, BigRational)>,
    {
        Self::from_terms(terms, Rational64::zero(), None).with_tight_low()
    }

    /// Polynomial with integer exponents and integer coefficients.
    pub fn from_ints(terms: &[(i64, i64)]) -> Self {
        Self::polynomial(
            terms
                .iter()
                .map(|&(e, c)| (Rational64::from_integer(e), BigRational::from_integer(c.into()))),
        )
    }

    pub fn zero(trunc: Option<Rational64>) -> Self {
        Self::from_terms(std::iter::empty(), trunc.unwrap_or_else(Rational64::zero), trunc)
    }

    pub fn one() -> Self {
        Self::from_ints(&[(0, 1)])
    }

    fn with_tight_low(mut self) -> Self {
        if let Some(e) = self.min_exponent() {
            self.low = e;
        }
        self
    }

    pub fn denom(&self) -> i64 {
        self.denom
    }

    pub fn trunc(&self) -> Option<Rational64> {
        self.trunc
    }

    /// Declared lower bound on exponents.
    pub fn low(&self) -> Rational64 {
        self.low
    }

    pub fn min_exponent(&self) -> Option<Rational64> {
        self.coeffs
            .keys()
            .next()
            .map(|&k| Rational64::new(k, self.denom))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Nonzero terms in increasing exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (Rational64, &BigRational)> + '_ {
        self.coeffs
            .iter()
            .map(move |(&k, c)| (Rational64::new(k, self.denom), c))
    }

    /// Coefficient of `q^e`. Asking at or beyond the truncation order is an
    /// error, never a silent zero.
    pub fn coefficient(&self, e: Rational64) -> Result<BigRational> {
        if let Some(t) = self.trunc {
            if e >= t {
                return Err(Error::BeyondTruncation {
                    exponent: e.to_string(),
                    trunc: t.to_string(),
                });
            }
        }
        let scaled = e * self.denom;
        if !scaled.is_integer() {
            return Ok(BigRational::zero());
        }
        Ok(self
            .coeffs
            .get(&scaled.to_integer())
            .cloned()
            .unwrap_or_else(BigRational::zero))
    }

    pub fn coefficient_at(&self, e: i64) -> Result<BigRational> {
        self.coefficient(Rational64::from_integer(e))
    }

    fn owned_terms(&self) -> impl Iterator<Item = (Rational64, BigRational)> + '_ {
        self.terms().map(|(e, c)| (e, c.clone()))
    }

    pub fn add(&self, other: &QSeries) -> QSeries {
        let trunc = min_opt(self.trunc, other.trunc);
        QSeries::from_terms(
            self.owned_terms().chain(other.owned_terms()),
            self.low.min(other.low),
            trunc,
        )
    }

    pub fn sub(&self, other: &QSeries) -> QSeries {
        self.add(&other.scale(&-BigRational::one()))
    }

    pub fn scale(&self, c: &BigRational) -> QSeries {
        QSeries::from_terms(
            self.terms().map(|(e, x)| (e, x * c)),
            self.low,
            self.trunc,
        )
    }

    /// Product. The result is complete below
    /// `min(a.trunc + b.low, b.trunc + a.low)`.
    pub fn mul(&self, other: &QSeries) -> QSeries {
        let trunc = min_opt(
            self.trunc.map(|t| t + other.low),
            other.trunc.map(|t| t + self.low),
        );
        let mut out: Vec<(Rational64, BigRational)> = Vec::new();
        for (e1, c1) in self.terms() {
            for (e2, c2) in other.terms() {
                let e = e1 + e2;
                if trunc.is_some_and(|t| e >= t) {
                    continue;
                }
                out.push((e, c1 * c2));
            }
        }
        QSeries::from_terms(out, self.low + other.low, trunc)
    }

    /// Multiply by `q^e`.
    pub fn shift(&self, e: Rational64) -> QSeries {
        QSeries::from_terms(
            self.owned_terms().map(|(x, c)| (x + e, c)),
            self.low + e,
            self.trunc.map(|t| t + e),
        )
    }

    /// `q ↦ q^m`.
    pub fn substitute_power(&self, m: i64) -> Result<QSeries> {
        if m < 1 {
            return Err(Error::Precondition(format!(
                "substitution power must be positive, got {m}"
            )));
        }
        Ok(QSeries::from_terms(
            self.owned_terms().map(|(e, c)| (e * m, c)),
            self.low * m,
            self.trunc.map(|t| t * m),
        ))
    }

    /// Restrict to exponents `< order` (only ever lowers the truncation).
    pub fn truncate(&self, order: Rational64) -> QSeries {
        let trunc = min_opt(self.trunc, Some(order));
        QSeries::from_terms(self.owned_terms(), self.low, trunc)
    }

    /// `Σ c_k e^{2πiτ k/D}`.
    pub fn evaluate(&self, tau: Complex64) -> Result<Evaluation> {
        if tau.im <= 0.0 {
            return Err(Error::Precondition(format!(
                "evaluation point must lie in the upper half plane, got Im τ = {}",
                tau.im
            )));
        }
        let mut acc = ComplexSum::default();
        for (e, c) in self.terms() {
            acc.add(to_f64(c) * q_power(tau, ratio_f64(e)));
        }
        let tail_estimate = match self.trunc {
            None => 0.0,
            Some(t) => {
                let abs_q = (-2.0 * PI * tau.im).exp();
                let window_start = t - 1;
                let window: f64 = self
                    .terms()
                    .filter(|(e, _)| *e >= window_start)
                    .map(|(e, c)| to_f64(c).abs() * abs_q.powf(ratio_f64(e)))
                    .sum();
                if abs_q < 1.0 {
                    window * abs_q / (1.0 - abs_q)
                } else {
                    f64::INFINITY
                }
            }
        };
        Ok(Evaluation {
            value: acc.value(),
            tail_estimate,
        })
    }

    /// `Σ |c_k| x^{k/D}` for `x > 0`.
    pub fn abs_evaluate(&self, x: f64) -> f64 {
        self.terms()
            .map(|(e, c)| to_f64(c).abs() * x.powf(ratio_f64(e)))
            .sum()
    }
}

impl PartialEq for QSeries {
    /// Equal coefficients and equal truncation order; the declared lower
    /// bound is bookkeeping and does not take part.
    fn eq(&self, other: &Self) -> bool {
        self.denom == other.denom && self.coeffs == other.coeffs && self.trunc == other.trunc
    }
}

pub(crate) fn q_power(tau: Complex64, e: f64) -> Complex64 {
    (Complex64::new(0.0, 2.0 * PI) * tau * e).exp()
}

pub(crate) fn ratio_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

pub(crate) fn to_f64(c: &BigRational) -> f64 {
    c.to_f64().unwrap_or(f64::NAN)
}

/// Neumaier-compensated complex accumulator.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct ComplexSum {
    re: KahanSum,
    im: KahanSum,
}

impl ComplexSum {
    pub(crate) fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub(crate) fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

static GOTTSCHE: OnceLock<RwLock<Vec<BigInt>>> = OnceLock::new();

/// `χ(X^[n]) ` for `0 ≤ n < count`, via `n c_n = 24 Σ_{k=1}^{n} σ(k) c_{n-k}`.
/// Results are memoized process-wide.
pub fn gottsche_coefficients(count: usize) -> Vec<BigInt> {
    let table = GOTTSCHE.get_or_init(|| RwLock::new(vec![BigInt::one()]));
    {
        let known = table.read().expect("gottsche table poisoned");
        if known.len() >= count {
            return known[..count].to_vec();
        }
    }
    let mut known = table.write().expect("gottsche table poisoned");
    if known.len() < count {
        let sigma = divisor_sums(count);
        for n in known.len()..count {
            let mut acc = BigInt::zero();
            for k in 1..=n {
                acc += &known[n - k] * sigma[k];
            }
            acc *= 24;
            known.push(acc / n as i64);
        }
    }
    known[..count].to_vec()
}

fn divisor_sums(limit: usize) -> Vec<i64> {
    let mut sigma = vec![0i64; limit.max(1)];
    for d in 1..limit {
        for m in (d..limit).step_by(d) {
            sigma[m] += d as i64;
        }
    }
    sigma
}

/// `χ(X^[n])`, with the convention `χ(X^[n]) = 0` for `n < 0`.
pub fn hilbert_euler(n: i64) -> BigInt {
    if n < 0 {
        return BigInt::zero();
    }
    let n = n as usize;
    if let Some(table) = GOTTSCHE.get() {
        if let Some(c) = table.read().expect("gottsche table poisoned").get(n) {
            return c.clone();
        }
    }
    gottsche_coefficients(n + 1).swap_remove(n)
}

/// `Σ_{n=0}^{order-1} χ(X^[n]) q^n`, complete below `q^order`.
pub fn gottsche_series(order: i64) -> Result<QSeries> {
    if order < 1 {
        return Err(Error::Precondition(format!(
            "gottsche order must be at least 1, got {order}"
        )));
    }
    let coeffs = gottsche_coefficients(order as usize);
    Ok(QSeries::from_terms(
        coeffs
            .into_iter()
            .enumerate()
            .map(|(n, c)| (Rational64::from_integer(n as i64), BigRational::from_integer(c))),
        Rational64::zero(),
        Some(Rational64::from_integer(order)),
    ))
}

/// `1/η(τ)^24 = Σ_{n≥0} χ(X^[n]) q^{n-1}`, complete below `q^order`.
pub fn z1_zero(order: i64) -> Result<QSeries> {
    if order < 0 {
        return Err(Error::Precondition(format!(
            "order must be nonnegative, got {order}"
        )));
    }
    Ok(gottsche_series(order + 1)?.shift(Rational64::from_integer(-1)))
}

/// Certified upper bound for `Σ_{n ≥ start} χ(X^[n]) x^n`, `0 ≤ x < 1`.
///
/// Uses `χ(X^[n]) ≤ P(y) / y^n` for any `x < y < 1`, where
/// `P(y) = Π (1 - y^m)^{-24}`, and minimizes over a grid of `y`. The
/// infinite product is bounded through
/// `-log(1 - t) ≤ t / (1 - t)` on the neglected factors.
pub fn gottsche_tail_bound(x: f64, start: usize) -> f64 {
    if x <= 0.0 {
        return if start == 0 { 1.0 } else { 0.0 };
    }
    if x >= 1.0 {
        return f64::INFINITY;
    }
    let mut best = f64::INFINITY;
    for step in 1..20 {
        // y runs geometrically between x and 1
        let y = x.powf(step as f64 / 20.0);
        if y >= 1.0 {
            continue;
        }
        let log_p = log_gottsche_product_upper(y);
        let ratio = x / y;
        let bound = (log_p + start as f64 * ratio.ln()).exp() / (1.0 - ratio);
        best = best.min(bound);
    }
    // floating-point slack
    best * (1.0 + 1e-9)
}

/// Upper bound for `log Π_{m≥1} (1 - y^m)^{-24}`.
fn log_gottsche_product_upper(y: f64) -> f64 {
    let mut log_p = 0.0;
    let mut ym = y;
    let mut m = 1u32;
    while ym > 1e-18 && m < 1_000_000 {
        log_p -= 24.0 * (-ym).ln_1p();
        ym *= y;
        m += 1;
    }
    // Σ_{j≥m} y^j/(1-y^j) ≤ y^m / ((1-y)(1-y^m))
    log_p + 24.0 * ym / ((1.0 - y) * (1.0 - ym))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    /// 24-colored partitions by repeated coin-change passes.
    fn colored_partition_oracle(count: usize) -> Vec<BigInt> {
        let mut dp = vec![BigInt::zero(); count];
        dp[0] = BigInt::one();
        for m in 1..count {
            for _ in 0..24 {
                for n in m..count {
                    let prev = dp[n - m].clone();
                    dp[n] += prev;
                }
            }
        }
        dp
    }

    #[test]
    fn gottsche_matches_partition_oracle() {
        let oracle = colored_partition_oracle(25);
        assert_eq!(gottsche_coefficients(25), oracle);
        let first: Vec<i64> = oracle[..4].iter().map(|c| c.to_i64().unwrap()).collect();
        assert_eq!(first, vec![1, 24, 324, 3200]);
    }

    #[test]
    fn hilbert_euler_negative_is_zero() {
        assert!(hilbert_euler(-1).is_zero());
        assert_eq!(hilbert_euler(1), BigInt::from(24));
        assert_eq!(hilbert_euler(3), BigInt::from(3200));
    }

    #[test]
    fn arithmetic_examples() {
        let a = QSeries::from_ints(&[(0, 1), (1, 1)]);
        let b = QSeries::from_ints(&[(0, 1), (1, -1)]);
        assert_eq!(a.mul(&b), QSeries::from_ints(&[(0, 1), (2, -1)]));
        assert!(a.scale(&BigRational::zero()).is_zero());
        let c = QSeries::from_ints(&[(-1, 1), (0, 24)]);
        let q = QSeries::from_ints(&[(1, 1)]);
        assert_eq!(c.mul(&q), QSeries::from_ints(&[(0, 1), (1, 24)]));
        assert_eq!(a.sub(&a), QSeries::zero(None));
    }

    #[test]
    fn mul_truncation_rule() {
        let g = gottsche_series(5).unwrap();
        let q_inv = QSeries::from_ints(&[(-1, 1)]);
        let prod = g.mul(&q_inv);
        assert_eq!(prod.trunc(), Some(r(4, 1)));
        assert_eq!(prod, z1_zero(4).unwrap());
        let sq = g.mul(&g);
        assert_eq!(sq.trunc(), Some(r(5, 1)));
        assert_eq!(sq.coefficient_at(1).unwrap(), BigRational::from_integer(48.into()));
        assert!(sq.coefficient_at(5).is_err());
    }

    #[test]
    fn rational_exponents_use_common_denominator() {
        let s = QSeries::polynomial(vec![
            (r(1, 2), BigRational::one()),
            (r(-1, 3), BigRational::one()),
        ]);
        assert_eq!(s.denom(), 6);
        let t = QSeries::polynomial(vec![(r(1, 2), BigRational::one())]);
        assert_eq!(t.denom(), 2);
        let sum = s.sub(&QSeries::polynomial(vec![(r(-1, 3), BigRational::one())]));
        assert_eq!(sum, t);
    }

    #[test]
    fn coefficient_beyond_truncation_is_error() {
        let g = gottsche_series(3).unwrap();
        assert!(matches!(
            g.coefficient_at(3),
            Err(Error::BeyondTruncation { .. })
        ));
        assert_eq!(g.coefficient(r(1, 2)).unwrap(), BigRational::zero());
        assert_eq!(g.coefficient_at(-5).unwrap(), BigRational::zero());
    }

    #[test]
    fn gottsche_order_checked() {
        assert!(gottsche_series(0).is_err());
        assert!(z1_zero(-1).is_err());
        let z = z1_zero(0).unwrap();
        assert_eq!(z.len(), 1);
        assert_eq!(z.coefficient_at(-1).unwrap(), BigRational::one());
    }

    #[test]
    fn z1_zero_leading_terms() {
        let z = z1_zero(3).unwrap();
        assert_eq!(z.min_exponent(), Some(r(-1, 1)));
        assert_eq!(z.coefficient_at(-1).unwrap(), BigRational::one());
        assert_eq!(z.coefficient_at(0).unwrap(), BigRational::from_integer(24.into()));
    }

    #[test]
    fn substitution_examples() {
        let s = QSeries::from_ints(&[(-1, 1), (0, 24)]);
        assert_eq!(
            s.substitute_power(2).unwrap(),
            QSeries::from_ints(&[(-2, 1), (0, 24)])
        );
        assert_eq!(s.substitute_power(1).unwrap(), s);
        let z = z1_zero(6).unwrap();
        assert_eq!(
            z.substitute_power(2).unwrap().substitute_power(3).unwrap(),
            z.substitute_power(6).unwrap()
        );
        assert_eq!(z.substitute_power(2).unwrap().trunc(), Some(r(12, 1)));
        assert!(s.substitute_power(0).is_err());
    }

    #[test]
    fn evaluate_examples() {
        let one = QSeries::one();
        let v = one.evaluate(Complex64::new(0.3, 0.7)).unwrap();
        assert!((v.value - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let q = QSeries::from_ints(&[(1, 1)]);
        let v = q.evaluate(Complex64::new(0.0, 1.0)).unwrap();
        assert!((v.value.re - (-2.0 * PI).exp()).abs() < 1e-16);
        assert!(v.value.im.abs() < 1e-16);
        assert!(q.evaluate(Complex64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn z1_zero_modular_at_fixed_pair() {
        let z = z1_zero(40).unwrap();
        let a = z.evaluate(Complex64::new(0.0, 2.0)).unwrap().value;
        let b = z.evaluate(Complex64::new(0.0, 0.5)).unwrap().value;
        let expected = b * 2f64.powi(12);
        assert!((a - expected).norm() / a.norm() < 1e-6);
    }

    #[test]
    fn tail_bound_dominates_actual_tail() {
        let coeffs = gottsche_coefficients(120);
        for &x in &[0.001f64, 0.04, 0.2] {
            for start in [5usize, 10, 20] {
                let actual: f64 = coeffs[start..]
                    .iter()
                    .enumerate()
                    .map(|(i, c)| c.to_f64().unwrap() * x.powi((start + i) as i32))
                    .sum();
                let bound = gottsche_tail_bound(x, start);
                assert!(bound >= actual, "x={x} start={start}: {bound} < {actual}");
            }
        }
        assert!(gottsche_tail_bound(0.001867, 12) < 1e-20);
    }
}

//! Siegel–Narain theta sums and the U(r) partition function.
//!
//! Throughout this module the lattice carries `Q = -G`. A [`Splitting`]
//! decomposes `Λ ⊗ R` into a `Q`-positive part (projection `P_L`) and a
//! `Q`-negative part (`P_R`); for a K3 surface this is `R^{19,0} ⊕ R^{0,3}`,
//! but any signature works here. Sums are truncated to the ball
//! `Q(c_L, c_L) - Q(c_R, c_R) ≤ R²` of the (positive-definite) majorant.
//!
//! With `e(z) = exp(2πiz)`:
//!
//! `Θ_{α,r}(τ, P, x) = Σ_{c ∈ α + rΛ} q^{Q(c_L²)/2r} q̄^{-Q(c_R²)/2r} e(Q(c, x))`
//!
//! `Z_r(τ, x) = Σ_{rk v = r} "χ(M(v))" q^{<v²>/2r} q^{Q(ξ_L²)/2r} q̄^{-Q(ξ_R²)/2r} e(Q(ξ, x))`
//! with `ξ = c1(v)`, which factorizes as `Σ_{α ∈ Λ/rΛ} Z_r^α(τ) Θ_{α,r}(τ, P, x)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::lattice::{EvenLattice, MukaiVector};
use crate::partition::{chi_virtual, z_psu_direct, z_psu_hecke};
use crate::qseries::{gottsche_tail_bound, q_power, ratio_f64, to_f64, ComplexSum};

const IDENTITY_TOL: f64 = 1e-12;
const ORTHOGONALITY_TOL: f64 = 1e-10;

/// Largest lattice rank accepted by the U(r) sums.
pub const FULL_MAX_RANK: usize = 2;
/// Largest sheaf rank accepted by the U(r) sums.
pub const FULL_MAX_R: i64 = 3;

type Matrix = Vec<Vec<f64>>;

fn q_form(lattice: &EvenLattice) -> Matrix {
    lattice
        .gram()
        .iter()
        .map(|row| row.iter().map(|&g| -(g as f64)).collect())
        .collect()
}

fn mat_vec(m: &Matrix, x: &[f64]) -> Vec<f64> {
    m.iter()
        .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

fn bilinear(m: &Matrix, x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(mat_vec(m, y)).map(|(a, b)| a * b).sum()
}

/// `Aᵀ B A`.
fn congruence(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let ba: Matrix = (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| b[i][k] * a[k][j]).sum()).collect())
        .collect();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| a[k][i] * ba[k][j]).sum()).collect())
        .collect()
}

/// Upper-triangular `U` with `M = UᵀU`, or `None` if `M` is not positive definite.
fn cholesky(m: &Matrix) -> Option<Matrix> {
    let n = m.len();
    let mut u = vec![vec![0.0; n]; n];
    for i in 0..n {
        let diag = m[i][i] - (0..i).map(|k| u[k][i] * u[k][i]).sum::<f64>();
        if diag <= 0.0 || !diag.is_finite() {
            return None;
        }
        u[i][i] = diag.sqrt();
        for j in i + 1..n {
            u[i][j] = (m[i][j] - (0..i).map(|k| u[k][i] * u[k][j]).sum::<f64>()) / u[i][i];
        }
    }
    Some(u)
}

/// `trace(M^{-1})` from the Cholesky factor.
fn inverse_trace(u: &Matrix) -> f64 {
    let n = u.len();
    let mut total = 0.0;
    for col in 0..n {
        // solve Uᵀ y = e_col, then U x = y; accumulate x[col]
        let mut y = vec![0.0; n];
        for i in 0..n {
            let rhs = if i == col { 1.0 } else { 0.0 };
            y[i] = (rhs - (0..i).map(|k| u[k][i] * y[k]).sum::<f64>()) / u[i][i];
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            x[i] = (y[i] - (i + 1..n).map(|k| u[i][k] * x[k]).sum::<f64>()) / u[i][i];
        }
        total += x[col];
    }
    total
}

/// Orthogonal decomposition of `Λ ⊗ R` into `Q`-definite pieces.
#[derive(Debug, Clone, PartialEq)]
pub struct Splitting {
    pl: Matrix,
    pr: Matrix,
    // cached forms in basis coordinates
    q: Matrix,
    ql: Matrix,
    qr: Matrix,
    majorant: Matrix,
    chol: Matrix,
}

impl Splitting {
    pub fn new(pl: Matrix, pr: Matrix, lattice: &EvenLattice) -> Result<Self> {
        let n = lattice.rank();
        let invalid = |msg: String| Error::Precondition(format!("invalid splitting: {msg}"));
        for m in [&pl, &pr] {
            if m.len() != n || m.iter().any(|row| row.len() != n) {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: m.len(),
                });
            }
        }
        for i in 0..n {
            for j in 0..n {
                let id = if i == j { 1.0 } else { 0.0 };
                if (pl[i][j] + pr[i][j] - id).abs() > IDENTITY_TOL {
                    return Err(invalid("P_L + P_R is not the identity".into()));
                }
            }
        }
        let q = q_form(lattice);
        let col = |m: &Matrix, j: usize| -> Vec<f64> { m.iter().map(|row| row[j]).collect() };
        for i in 0..n {
            let li = col(&pl, i);
            let ri = col(&pr, i);
            for j in 0..n {
                if bilinear(&q, &li, &col(&pr, j)).abs() > ORTHOGONALITY_TOL {
                    return Err(invalid(format!("Q(P_L e_{i}, P_R e_{j}) != 0")));
                }
            }
            if li.iter().any(|x| x.abs() > IDENTITY_TOL) && bilinear(&q, &li, &li) <= 0.0 {
                return Err(invalid(format!("Q not positive on P_L e_{i}")));
            }
            if ri.iter().any(|x| x.abs() > IDENTITY_TOL) && bilinear(&q, &ri, &ri) >= 0.0 {
                return Err(invalid(format!("Q not negative on P_R e_{i}")));
            }
        }
        let ql = congruence(&pl, &q);
        let qr = congruence(&pr, &q);
        let majorant: Matrix = (0..n)
            .map(|i| (0..n).map(|j| ql[i][j] - qr[i][j]).collect())
            .collect();
        let chol = cholesky(&majorant).ok_or_else(|| invalid("majorant is not positive definite".into()))?;
        Ok(Splitting {
            pl,
            pr,
            q,
            ql,
            qr,
            majorant,
            chol,
        })
    }

    /// The trivial splitting of a `Q`-definite lattice.
    pub fn definite(lattice: &EvenLattice) -> Result<Self> {
        let n = lattice.rank();
        let q = q_form(lattice);
        let identity: Matrix = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        let zero = vec![vec![0.0; n]; n];
        if cholesky(&q).is_some() {
            Self::new(identity, zero, lattice)
        } else {
            let neg: Matrix = q.iter().map(|row| row.iter().map(|x| -x).collect()).collect();
            if cholesky(&neg).is_some() {
                Self::new(zero, identity, lattice)
            } else {
                Err(Error::Precondition(
                    "Q is indefinite; an explicit splitting is required".into(),
                ))
            }
        }
    }

    pub fn pl(&self) -> &Matrix {
        &self.pl
    }

    pub fn pr(&self) -> &Matrix {
        &self.pr
    }

    /// `Q(c_L, c_L) - Q(c_R, c_R)`.
    pub fn majorant(&self, c: &[f64]) -> f64 {
        bilinear(&self.majorant, c, c)
    }

    /// Lower bound for the smallest eigenvalue of the majorant.
    fn min_eigenvalue_bound(&self) -> f64 {
        1.0 / inverse_trace(&self.chol)
    }

    /// Points `c ∈ α + rΛ` (basis coordinates) with majorant `≤ radius²`,
    /// in lexicographic order of the last coordinate first.
    fn enumerate(&self, alpha: &[i64], r: i64, radius: f64) -> Vec<Vec<i64>> {
        let n = alpha.len();
        let u = &self.chol;
        let budget = radius * radius * (1.0 + 1e-12) + 1e-12;
        let mut out = Vec::new();
        let mut current = vec![0i64; n];
        self.enumerate_level(n, alpha, r, u, budget, &mut current, &mut out);
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn enumerate_level(
        &self,
        level: usize,
        alpha: &[i64],
        r: i64,
        u: &Matrix,
        budget: f64,
        current: &mut Vec<i64>,
        out: &mut Vec<Vec<i64>>,
    ) {
        if level == 0 {
            out.push(current.clone());
            return;
        }
        let i = level - 1;
        let n = current.len();
        // (Uc)_i = u_ii c_i + Σ_{j>i} u_ij c_j
        let partial: f64 = (i + 1..n).map(|j| u[i][j] * current[j] as f64).sum();
        let center = -partial / u[i][i];
        let half_width = budget.max(0.0).sqrt() / u[i][i];
        let lo = (center - half_width).ceil() as i64;
        let hi = (center + half_width).floor() as i64;
        // first value ≥ lo congruent to alpha_i mod r
        let mut c = lo + (alpha[i] - lo).rem_euclid(r);
        while c <= hi {
            let row = u[i][i] * c as f64 + partial;
            let rest = budget - row * row;
            if rest >= 0.0 {
                current[i] = c;
                self.enumerate_level(i, alpha, r, u, rest, current, out);
            }
            c += r;
        }
        current[i] = 0;
    }
}

/// A truncated lattice sum with its bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaValue {
    pub value: Complex64,
    /// Number of lattice points (or Mukai vectors) summed.
    pub points: usize,
    /// Certified bound on the omitted terms; `None` when `x` has a nonzero
    /// imaginary part, where no bound is computed.
    pub tail_bound: Option<f64>,
}

/// Cutoffs for the U(r) sums: Mukai vectors with `<v²>/2r ≥ exponent_cutoff`
/// or with majorant of `c1` above `radius²` are omitted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    pub exponent_cutoff: Rational64,
    pub radius: f64,
}

fn check_tau(tau: Complex64) -> Result<()> {
    if tau.im <= 0.0 || !tau.im.is_finite() {
        return Err(Error::Precondition(format!(
            "τ must lie in the upper half plane, got {tau}"
        )));
    }
    Ok(())
}

fn is_real(x: &[Complex64]) -> bool {
    x.iter().all(|z| z.im == 0.0)
}

/// `q^{Q(c_L²)/2r} q̄^{-Q(c_R²)/2r} e(Q(c, x))`.
fn theta_weight(split: &Splitting, c: &[f64], r: i64, tau: Complex64, x: &[Complex64]) -> Complex64 {
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);
    let left = bilinear(&split.ql, c, c) / (2 * r) as f64;
    let right = bilinear(&split.qr, c, c) / (2 * r) as f64;
    let qc = mat_vec(&split.q, c);
    let pairing: Complex64 = qc.iter().zip(x).map(|(a, z)| z * *a).sum();
    (two_pi_i * (tau * left + tau.conj() * right + pairing)).exp()
}

/// Bound on `Σ_{c ∈ α+rΛ, maj(c) > R²} |q|^{maj(c)/2r}` for real `x`.
fn theta_tail(split: &Splitting, r: i64, tau: Complex64, radius: f64) -> f64 {
    let rho = split.pl.len() as i32;
    // |term| = t^{maj}, t = |q|^{1/2r}
    let log_t = -2.0 * PI * tau.im / (2 * r) as f64;
    let beta = -log_t / 2.0 * split.min_eigenvalue_bound();
    let per_axis = 1.0 + (PI / beta).sqrt() / r as f64;
    (log_t * radius * radius / 2.0).exp() * per_axis.powi(rho)
}

fn validate_theta_inputs(
    lattice: &EvenLattice,
    alpha: &[i64],
    r: i64,
    tau: Complex64,
    split: &Splitting,
    x: &[Complex64],
    radius: f64,
) -> Result<()> {
    check_tau(tau)?;
    lattice.check_len(alpha)?;
    if x.len() != lattice.rank() {
        return Err(Error::DimensionMismatch {
            expected: lattice.rank(),
            found: x.len(),
        });
    }
    if split.pl.len() != lattice.rank() {
        return Err(Error::DimensionMismatch {
            expected: lattice.rank(),
            found: split.pl.len(),
        });
    }
    if r < 1 {
        return Err(Error::Precondition(format!("r must be positive, got {r}")));
    }
    if radius.is_nan() || radius < 0.0 {
        return Err(Error::Precondition(format!("radius must be nonnegative, got {radius}")));
    }
    Ok(())
}

/// Truncated Siegel–Narain theta function `Θ_{α,r}(τ, P, x)`.
pub fn theta_siegel_narain(
    lattice: &EvenLattice,
    alpha: &[i64],
    r: i64,
    tau: Complex64,
    split: &Splitting,
    x: &[Complex64],
    radius: f64,
) -> Result<ThetaValue> {
    validate_theta_inputs(lattice, alpha, r, tau, split, x, radius)?;
    let points = split.enumerate(alpha, r, radius);
    let mut acc = ComplexSum::default();
    for c in &points {
        let cf: Vec<f64> = c.iter().map(|&v| v as f64).collect();
        acc.add(theta_weight(split, &cf, r, tau, x));
    }
    Ok(ThetaValue {
        value: acc.value(),
        points: points.len(),
        tail_bound: is_real(x).then(|| theta_tail(split, r, tau, radius)),
    })
}

fn check_scale(lattice: &EvenLattice, r: i64) -> Result<()> {
    if lattice.rank() > FULL_MAX_RANK || !(1..=FULL_MAX_R).contains(&r) {
        return Err(Error::ScaleGuard(format!(
            "U(r) sums limited to lattice rank <= {FULL_MAX_RANK} and 1 <= r <= {FULL_MAX_R}; got rank {}, r = {r}",
            lattice.rank()
        )));
    }
    Ok(())
}

/// Representatives of `Λ/rΛ` with coordinates in `[0, r)`.
fn coset_representatives(rho: usize, r: i64) -> Vec<Vec<i64>> {
    let mut reps = vec![Vec::new()];
    for _ in 0..rho {
        reps = reps
            .into_iter()
            .flat_map(|p: Vec<i64>| {
                (0..r).map(move |k| {
                    let mut q = p.clone();
                    q.push(k);
                    q
                })
            })
            .collect();
    }
    reps
}

/// Certified bound on `Σ |"χ"| |q|^{<v²>/2r}` over the Mukai vectors with
/// `c1 = α` and `<v²>/2r ≥ cutoff`, read off the Hecke form:
/// each `(a, d)` block is a tail of the Göttsche series in `|q|^{a/d}`.
fn z_tail(r: i64, alpha: &[i64], cutoff: Rational64, abs_q: f64) -> f64 {
    let mut total = 0.0;
    for a in (1..=r).filter(|a| r % a == 0) {
        if alpha.iter().any(|c| c % a != 0) {
            continue;
        }
        let d = r / a;
        // smallest n ≥ 0 with a(n-1)/d ≥ cutoff
        let start = (cutoff * d / a + 1).ceil().to_integer().max(0) as usize;
        let x = abs_q.powf(a as f64 / d as f64);
        total += (d * d) as f64 / (r * r) as f64 * gottsche_tail_bound(x, start) / x;
    }
    total
}

/// Shared tail bound for both U(r) routes: per coset,
/// `tailΘ·(|Z|_in + tailZ) + |Θ|_in·tailZ`.
fn full_tail(
    lattice: &EvenLattice,
    r: i64,
    tau: Complex64,
    split: &Splitting,
    trunc: &Truncation,
) -> Result<f64> {
    let abs_q = (-2.0 * PI * tau.im).exp();
    let zero_x = vec![Complex64::default(); lattice.rank()];
    let mut total = 0.0;
    for alpha in coset_representatives(lattice.rank(), r) {
        let z_in = z_psu_hecke(r, &alpha, trunc.exponent_cutoff, lattice)?.abs_evaluate(abs_q);
        let z_out = z_tail(r, &alpha, trunc.exponent_cutoff, abs_q);
        let theta_abs = theta_siegel_narain(
            lattice,
            &alpha,
            r,
            Complex64::new(0.0, tau.im),
            split,
            &zero_x,
            trunc.radius,
        )?;
        let theta_out = theta_tail(split, r, tau, trunc.radius);
        total += theta_out * (z_in + z_out) + theta_abs.value.norm() * z_out;
    }
    Ok(total)
}

/// `Z_r(τ, x)` summed directly over Mukai vectors `v = (r, ξ, a)`.
pub fn z_full_direct(
    lattice: &EvenLattice,
    r: i64,
    tau: Complex64,
    split: &Splitting,
    x: &[Complex64],
    trunc: &Truncation,
) -> Result<ThetaValue> {
    check_scale(lattice, r)?;
    let zero = vec![0; lattice.rank()];
    validate_theta_inputs(lattice, &zero, r, tau, split, x, trunc.radius)?;
    let mut acc = ComplexSum::default();
    let mut count = 0;
    for xi in split.enumerate(&zero, 1, trunc.radius) {
        let xi_f: Vec<f64> = xi.iter().map(|&v| v as f64).collect();
        let weight = theta_weight(split, &xi_f, r, tau, x);
        let xi_sq = lattice.form(&xi, &xi)?;
        let offset = Rational64::new(xi_sq, 2 * r);
        let a_max = (offset + r).floor().to_integer();
        let a_min = (offset - trunc.exponent_cutoff).floor().to_integer() + 1;
        for a in a_min..=a_max {
            let v = MukaiVector::new(r, xi.clone(), a);
            let chi = chi_virtual(&v, lattice)?;
            if chi.is_zero() {
                continue;
            }
            let exponent = Rational64::new(xi_sq - 2 * r * a, 2 * r);
            acc.add(weight * q_power(tau, ratio_f64(exponent)) * to_f64(&chi));
            count += 1;
        }
    }
    Ok(ThetaValue {
        value: acc.value(),
        points: count,
        tail_bound: if is_real(x) {
            Some(full_tail(lattice, r, tau, split, trunc)?)
        } else {
            None
        },
    })
}

/// `Z_r(τ, x) = Σ_{α ∈ Λ/rΛ} Z_r^α(τ) Θ_{α,r}(τ, P, x)`.
pub fn z_full_factorized(
    lattice: &EvenLattice,
    r: i64,
    tau: Complex64,
    split: &Splitting,
    x: &[Complex64],
    trunc: &Truncation,
) -> Result<ThetaValue> {
    check_scale(lattice, r)?;
    let mut acc = ComplexSum::default();
    let mut count = 0;
    for alpha in coset_representatives(lattice.rank(), r) {
        let z = z_psu_direct(r, &alpha, trunc.exponent_cutoff, lattice)?;
        let z_value = z.evaluate(tau)?.value;
        let theta = theta_siegel_narain(lattice, &alpha, r, tau, split, x, trunc.radius)?;
        acc.add(z_value * theta.value);
        count += z.len() * theta.points;
    }
    Ok(ThetaValue {
        value: acc.value(),
        points: count,
        tail_bound: if is_real(x) {
            Some(full_tail(lattice, r, tau, split, trunc)?)
        } else {
            None
        },
    })
}

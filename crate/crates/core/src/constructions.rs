//! The auxiliary construction that moves a primitive Mukai vector
//! `v = l(r + ξ) + aω` to a K3 surface with Picard lattice `ZH'`, together
//! with the two lattice-point facts it depends on.
//!
//! Given `(l, r, s, a)` with `s = (ξ²)/2`, the construction picks integers
//! `r1, d1, d', q` with
//!
//! - `a·r1 ≡ 1 (mod l)`, `gcd(r1, r) = 1`, `r1 - l·r ≥ 2`,
//! - `d'·r1 - d1·r = 1`, `a·r1 + q·l = 1`,
//!
//! sets `k = r1(q·r + r1·s) - r²` and `(H'²) = 2k`, and writes down
//!
//! ```text
//! v'  = l·r + l·d'·H' + {l((1 + d'r1)d1·s + d'²q·r1 - r·d'²) + a} ω'
//! v1  = r1 + d1·H' + {r1(-d'² + d1²·s) + d1²·r·q + 2d'} ω'
//! ```
//!
//! so that `<v1²> = -2`, `<v'²> = <v²>` and `<v1, v'> = -1`. The reflected
//! vector `w = -R_{v1}(v')∨` has `ℓ(w) = 1`.

use num_integer::Integer;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::isometry::apply_reflect;
use crate::lattice::{mukai_pairing, narrow, square, EvenLattice, MukaiVector};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuxConstruction {
    pub l: i64,
    pub r: i64,
    pub s: i64,
    pub a: i64,
    pub r1: i64,
    pub d1: i64,
    pub d_prime: i64,
    pub q: i64,
    pub k: i64,
    /// `v'` over `NS = ZH'` with `(H'²) = 2k`.
    pub v_prime: MukaiVector,
    /// The exceptional vector `v1`.
    pub v1: MukaiVector,
    /// `w = -R_{v1}(v')∨`.
    pub w: MukaiVector,
}

fn wide(x: i64) -> i128 {
    x as i128
}

impl AuxConstruction {
    /// `ZH'` with `(H'²) = 2k`.
    pub fn lattice(&self) -> Result<EvenLattice> {
        EvenLattice::rank_one(2 * self.k)
    }

    /// Re-check every defining condition exactly.
    pub fn verify(&self) -> Result<()> {
        let fail = |what: &str| Err(Error::Consistency(format!("auxiliary construction: {what}")));
        let (l, r, s, a) = (self.l, self.r, self.s, self.a);
        if (wide(a) * wide(self.r1) - 1).rem_euclid(wide(l)) != 0 {
            return fail("a·r1 ≢ 1 mod l");
        }
        if self.r1.gcd(&r) != 1 {
            return fail("gcd(r1, r) != 1");
        }
        if self.r1 - l * r < 2 {
            return fail("r1 - l·r < 2");
        }
        if wide(self.d_prime) * wide(self.r1) - wide(self.d1) * wide(r) != 1 {
            return fail("d'·r1 - d1·r != 1");
        }
        if wide(a) * wide(self.r1) + wide(self.q) * wide(l) != 1 {
            return fail("a·r1 + q·l != 1");
        }
        let k = wide(self.r1) * (wide(self.q) * wide(r) + wide(self.r1) * wide(s)) - wide(r) * wide(r);
        if k != wide(self.k) || self.k <= 0 {
            return fail("k(s) mismatch or nonpositive");
        }
        if r.gcd(&self.d_prime) != 1 {
            return fail("r + d'H' not primitive");
        }
        let lattice = self.lattice()?;
        if square(&self.v1, &lattice)? != -2 {
            return fail("<v1^2> != -2");
        }
        let target = 2 * wide(l) * (wide(l) * wide(s) - wide(r) * wide(a));
        if wide(square(&self.v_prime, &lattice)?) != target {
            return fail("<v'^2> != 2l(ls - ra)");
        }
        if mukai_pairing(&self.v1, &self.v_prime, &lattice)? != -1 {
            return fail("<v1, v'> != -1");
        }
        if self.v_prime.r != l * r || self.v_prime.c1 != vec![l * self.d_prime] {
            return fail("v' is not l(r + d'H') + a'ω'");
        }
        if (self.v_prime.a - a).rem_euclid(l) != 0 {
            return fail("a' ≢ a mod l");
        }
        if self.v1.r != self.r1 || self.v1.c1 != vec![self.d1] {
            return fail("v1 is not r1 + d1·H' + a1·ω'");
        }
        Ok(())
    }
}

/// Minimal `d' ∈ [1, r]` with `d'·r1 ≡ 1 (mod r)`, and the matching `d1`.
fn euclid_pair(r1: i64, r: i64) -> (i64, i64) {
    let eg = r1.extended_gcd(&r);
    debug_assert_eq!(eg.gcd, 1);
    let mut d_prime = eg.x.rem_euclid(r);
    if d_prime == 0 {
        d_prime = r;
    }
    let d1 = (wide(d_prime) * wide(r1) - 1) / wide(r);
    (d_prime, d1 as i64)
}

/// Build the construction with the smallest admissible `r1 ≤ search_bound`.
pub fn build_auxiliary(l: i64, r: i64, s: i64, a: i64, search_bound: i64) -> Result<AuxConstruction> {
    if l < 1 || r < 1 {
        return Err(Error::Precondition(format!(
            "need l >= 1 and r >= 1, got l = {l}, r = {r}"
        )));
    }
    if l.gcd(&a) != 1 {
        return Err(Error::Precondition(format!(
            "gcd(l, a) = {} (v would not be primitive)",
            l.gcd(&a)
        )));
    }
    let sq = 2 * wide(l) * (wide(l) * wide(s) - wide(r) * wide(a));
    if sq < 0 {
        return Err(Error::Precondition(format!("<v^2> = {sq} is negative")));
    }
    let r1 = (l * r + 2..=search_bound)
        .find(|&r1| (wide(a) * wide(r1) - 1).rem_euclid(wide(l)) == 0 && r1.gcd(&r) == 1)
        .ok_or(Error::SearchExhausted {
            bound: search_bound,
        })?;
    let (d_prime, d1) = euclid_pair(r1, r);
    let q = narrow((1 - wide(a) * wide(r1)) / wide(l), "q")?;
    let k = narrow(
        wide(r1) * (wide(q) * wide(r) + wide(r1) * wide(s)) - wide(r) * wide(r),
        "k",
    )?;
    let (lw, rw, sw, dw, d1w, r1w, qw) = (
        wide(l),
        wide(r),
        wide(s),
        wide(d_prime),
        wide(d1),
        wide(r1),
        wide(q),
    );
    let a_prime = lw * ((1 + dw * r1w) * d1w * sw + dw * dw * qw * r1w - rw * dw * dw) + wide(a);
    let a1 = r1w * (-dw * dw + d1w * d1w * sw) + d1w * d1w * rw * qw + 2 * dw;
    let v_prime = MukaiVector::new(l * r, vec![l * d_prime], narrow(a_prime, "a'")?);
    let v1 = MukaiVector::new(r1, vec![d1], narrow(a1, "a1")?);
    let mut aux = AuxConstruction {
        l,
        r,
        s,
        a,
        r1,
        d1,
        d_prime,
        q,
        k,
        v_prime,
        v1,
        w: MukaiVector::new(0, vec![0], 0),
    };
    if k <= 0 {
        return Err(Error::Consistency(format!("k(s) = {k} is not positive")));
    }
    aux.verify()?;
    aux.w = reflected_target(&aux)?;
    Ok(aux)
}

/// `w = -R_{v1}(v')∨ = (r1 - l·r) - (d1 - l·d')H' + (a1 - a')ω'`, checked to
/// have `ℓ(w) = 1`.
pub fn reflected_target(aux: &AuxConstruction) -> Result<MukaiVector> {
    let lattice = aux.lattice()?;
    let w = apply_reflect(&aux.v1, &aux.v_prime, &lattice)?.dual().neg();
    let expected = MukaiVector::new(
        aux.r1 - aux.l * aux.r,
        vec![-(aux.d1 - aux.l * aux.d_prime)],
        aux.v1.a - aux.v_prime.a,
    );
    if w != expected {
        return Err(Error::Consistency(format!(
            "reflected vector {w:?} differs from closed form {expected:?}"
        )));
    }
    if w.ell() != 1 {
        return Err(Error::Consistency(format!("ℓ(w) = {} != 1", w.ell())));
    }
    if square(&w, &lattice)? != square(&aux.v_prime, &lattice)? {
        return Err(Error::Consistency("reflection changed <v'^2>".into()));
    }
    Ok(w)
}

fn cross(o: (i64, i64), a: (i64, i64), b: (i64, i64)) -> i128 {
    wide(a.0 - o.0) * wide(b.1 - o.1) - wide(a.1 - o.1) * wide(b.0 - o.0)
}

/// Number of integer points strictly inside the triangle with vertices
/// `(0,0)`, `(r1 - l·r, d1 - l·d)`, `(r1, d1)`, by bounding-box scan.
pub fn triangle_interior_count(r1: i64, d1: i64, r: i64, d: i64, l: i64) -> Result<u64> {
    if r1 <= 0 || r <= 0 || l < 1 {
        return Err(Error::Precondition(format!(
            "need r1 > 0, r > 0, l >= 1; got r1 = {r1}, r = {r}, l = {l}"
        )));
    }
    if l * r >= r1 {
        return Err(Error::Precondition(format!("need l·r < r1, got {} >= {r1}", l * r)));
    }
    let det = wide(d) * wide(r1) - wide(r) * wide(d1);
    if det != 1 {
        return Err(Error::Precondition(format!("need d·r1 - r·d1 = 1, got {det}")));
    }
    let p0 = (0, 0);
    let p1 = (r1 - l * r, d1 - l * d);
    let p2 = (r1, d1);
    let orientation = cross(p0, p1, p2).signum();
    let (xmin, xmax) = (p0.0.min(p1.0).min(p2.0), p0.0.max(p1.0).max(p2.0));
    let (ymin, ymax) = (p0.1.min(p1.1).min(p2.1), p0.1.max(p1.1).max(p2.1));
    let mut count = 0;
    for x in xmin..=xmax {
        for y in ymin..=ymax {
            let p = (x, y);
            let inside = [cross(p0, p1, p), cross(p1, p2, p), cross(p2, p0, p)]
                .iter()
                .all(|c| c.signum() == orientation);
            if inside {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// Interior point count of a lattice triangle from Pick's theorem,
/// `I = A - B/2 + 1`.
pub fn pick_interior(vertices: [(i64, i64); 3]) -> i64 {
    let [a, b, c] = vertices;
    let twice_area = cross(a, b, c).abs() as i64;
    let edge = |p: (i64, i64), q: (i64, i64)| (p.0 - q.0).gcd(&(p.1 - q.1));
    let boundary = edge(a, b) + edge(b, c) + edge(c, a);
    (twice_area - boundary + 2) / 2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FareyOutcome {
    /// Preconditions hold and `x2 ≥ x1 + x3`.
    Holds,
    /// Preconditions hold and `x2 < x1 + x3`.
    Fails,
    /// Preconditions do not hold; the statement is vacuously true.
    Vacuous,
}

impl FareyOutcome {
    pub fn holds(self) -> bool {
        self != FareyOutcome::Fails
    }
}

/// If `y1·x3 - x1·y3 = 1` and `y1/x1 > y2/x2 > y3/x3` with positive `x_i`,
/// then `x2 ≥ x1 + x3`.
pub fn farey_gap_holds(x1: i64, y1: i64, x2: i64, y2: i64, x3: i64, y3: i64) -> FareyOutcome {
    let valid = x1 > 0
        && x2 > 0
        && x3 > 0
        && wide(y1) * wide(x3) - wide(x1) * wide(y3) == 1
        && wide(y1) * wide(x2) > wide(y2) * wide(x1)
        && wide(y2) * wide(x3) > wide(y3) * wide(x2);
    if !valid {
        FareyOutcome::Vacuous
    } else if x2 >= x1 + x3 {
        FareyOutcome::Holds
    } else {
        FareyOutcome::Fails
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SweepReport {
    pub checked: u64,
    pub counterexamples: u64,
}

impl std::ops::Add for SweepReport {
    type Output = SweepReport;

    fn add(self, other: SweepReport) -> SweepReport {
        SweepReport {
            checked: self.checked + other.checked,
            counterexamples: self.counterexamples + other.counterexamples,
        }
    }
}

/// Every `(r1, d1, r, d, l)` with `r1 ≤ bound`, `|d1| ≤ bound`, `l·r < r1`
/// and `d·r1 - r·d1 = 1`; counterexamples are triangles with interior points.
pub fn triangle_sweep(bound: i64) -> SweepReport {
    (1..=bound)
        .into_par_iter()
        .map(|r1| {
            let mut report = SweepReport::default();
            for d1 in -bound..=bound {
                for r in 1..r1 {
                    let numer = 1 + r * d1;
                    if numer.rem_euclid(r1) != 0 {
                        continue;
                    }
                    let d = numer.div_euclid(r1);
                    let mut l = 1;
                    while l * r < r1 {
                        report.checked += 1;
                        match triangle_interior_count(r1, d1, r, d, l) {
                            Ok(0) => {}
                            _ => report.counterexamples += 1,
                        }
                        l += 1;
                    }
                }
            }
            report
        })
        .reduce(SweepReport::default, |a, b| a + b)
}

/// Every admissible tuple with `x_i ≤ bound`. The statement is unchanged
/// under `y_i ↦ y_i + t·x_i`, so `y3` is normalized to `[0, x3)`; `y1` is
/// then forced and `y2` ranges over the open interval between the slopes.
pub fn farey_sweep(bound: i64) -> SweepReport {
    (1..=bound)
        .into_par_iter()
        .map(|x1| {
            let mut report = SweepReport::default();
            for x3 in 1..=bound {
                for y3 in 0..x3 {
                    let numer = 1 + x1 * y3;
                    if numer % x3 != 0 {
                        continue;
                    }
                    let y1 = numer / x3;
                    for x2 in 1..=bound {
                        // y3/x3 < y2/x2 < y1/x1
                        let lo = (y3 * x2).div_euclid(x3) + 1;
                        let hi = (y1 * x2 - 1).div_euclid(x1);
                        for y2 in lo..=hi {
                            match farey_gap_holds(x1, y1, x2, y2, x3, y3) {
                                FareyOutcome::Holds => report.checked += 1,
                                FareyOutcome::Fails => {
                                    report.checked += 1;
                                    report.counterexamples += 1;
                                }
                                FareyOutcome::Vacuous => {}
                            }
                        }
                    }
                }
            }
            report
        })
        .reduce(SweepReport::default, |a, b| a + b)
}

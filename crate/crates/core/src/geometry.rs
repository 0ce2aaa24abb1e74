//! Planar geometry of the base domain.
//!
//! A point `a = a1 + i a2` of the base domain encodes the position of the
//! top lattice vector `v = (a1, a2, 1)` relative to the side vector
//! `u = (1, 0, b)` on the unit cylinder. Everything here is plain `f64`
//! arithmetic on that complex coordinate.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// `e^{i pi/3}`, the sixth root of unity in the first quadrant.
pub const SIXTH_ROOT: ParamPoint = ParamPoint {
    a1: 0.5,
    a2: 0.866_025_403_784_438_6,
};

/// A point of the complex plane, used as the base parameter `a = (a1, a2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamPoint {
    pub a1: f64,
    pub a2: f64,
}

impl ParamPoint {
    pub const fn new(a1: f64, a2: f64) -> Self {
        Self { a1, a2 }
    }

    pub fn norm(self) -> f64 {
        self.a1.hypot(self.a2)
    }

    pub fn norm_sqr(self) -> f64 {
        self.a1 * self.a1 + self.a2 * self.a2
    }

    /// Complex conjugate `ā`.
    pub fn conj(self) -> Self {
        Self::new(self.a1, -self.a2)
    }

    /// Adds a real number to the complex coordinate.
    pub fn shift(self, re: f64) -> Self {
        Self::new(self.a1 + re, self.a2)
    }

    pub fn dist(self, other: Self) -> f64 {
        (self.a1 - other.a1).hypot(self.a2 - other.a2)
    }

    /// `|a| < 1` and `|a - 1| >= 1`.
    pub fn in_omega2(self) -> bool {
        self.norm_sqr() < 1.0 && self.shift(-1.0).norm_sqr() >= 1.0
    }

    /// The upper half `a2 >= 0` of the base domain.
    pub fn in_omega2_plus(self) -> bool {
        self.in_omega2() && self.a2 >= 0.0
    }
}

impl fmt::Display for ParamPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.a1, self.a2)
    }
}

impl std::ops::Neg for ParamPoint {
    type Output = Self;

    fn neg(self) -> Self {
        Self::new(-self.a1, -self.a2)
    }
}

/// Which of the three integrand cases a base point falls into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RegionLabel {
    I,
    II,
    III,
}

impl RegionLabel {
    pub const ALL: [RegionLabel; 3] = [RegionLabel::I, RegionLabel::II, RegionLabel::III];

    pub fn as_str(self) -> &'static str {
        match self {
            RegionLabel::I => "I",
            RegionLabel::II => "II",
            RegionLabel::III => "III",
        }
    }
}

impl fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for RegionLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "I" | "i" | "1" => Ok(RegionLabel::I),
            "II" | "ii" | "2" => Ok(RegionLabel::II),
            "III" | "iii" | "3" => Ok(RegionLabel::III),
            other => Err(format!("unknown region label `{other}` (expected I, II or III)")),
        }
    }
}

/// Selects one of the two intersection points of `|z| = 1` and `|z - a| = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

fn check_circle_pair(op: &'static str, a: ParamPoint) -> Result<f64> {
    let r = a.norm();
    if !(r > 0.0 && r < 2.0) {
        return Err(domain(op, format!("|a| = {r} outside (0, 2)")));
    }
    Ok(r)
}

/// Intersection points `a/2 ± (i a/|a|) sqrt(1 - |a|^2/4)` of the unit
/// circles centred at `0` and `a`.
pub fn chi(a: ParamPoint, branch: Branch) -> Result<ParamPoint> {
    let r = check_circle_pair("chi", a)?;
    let h = (1.0 - 0.25 * r * r).sqrt() / r;
    let s = match branch {
        Branch::Plus => 1.0,
        Branch::Minus => -1.0,
    };
    // i a = (-a2, a1)
    Ok(ParamPoint::new(
        0.5 * a.a1 - s * a.a2 * h,
        0.5 * a.a2 + s * a.a1 * h,
    ))
}

/// `Re chi_+(a)`. Supplies every vertical-edge abscissa of the fundamental
/// domain.
pub fn kappa(a: ParamPoint) -> Result<f64> {
    let r = check_circle_pair("kappa", a)?;
    Ok(0.5 * a.a1 - a.a2 / r * (1.0 - 0.25 * r * r).sqrt())
}

/// Inverse of `c1 = 2 tau / (1 + tau^2)` on `[-1, 1]`.
///
/// Written as `c1 / (1 + sqrt(1 - c1^2))`, which is the same function as
/// `(1 - sqrt(1 - c1^2)) / c1` with the removable singularity at zero
/// gone and no cancellation near it.
pub fn tau_of_c1(c1: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&c1) {
        return Err(domain("tau_of_c1", format!("|c1| = {} > 1", c1.abs())));
    }
    Ok(c1 / (1.0 + (1.0 - c1 * c1).sqrt()))
}

/// Closed form of `tau_of_c1(kappa(a))` directly in terms of `a`.
///
/// Uses `sgn(0) = +1`.
pub fn tau_of_a(a: ParamPoint) -> Result<f64> {
    let r = check_circle_pair("tau_of_a", a)?;
    let sgn = if a.a1 >= 0.0 { 1.0 } else { -1.0 };
    let r2 = r * r;
    let den = r2 + sgn * 2.0 * a.a2;
    if den == 0.0 {
        return Err(domain("tau_of_a", format!("vanishing denominator at a = {a}")));
    }
    Ok((2.0 * a.a1 - sgn * r * (4.0 - r2).sqrt()) / den)
}

/// Region I: `|a - xi| < 1`; III: `|a + xi| < 1`; II: the closed remainder.
pub fn classify_region(a: ParamPoint) -> Result<RegionLabel> {
    if !a.in_omega2_plus() {
        return Err(domain("classify_region", format!("a = {a} is not in the base domain")));
    }
    Ok(classify_unchecked(a))
}

pub(crate) fn classify_unchecked(a: ParamPoint) -> RegionLabel {
    if a.dist(SIXTH_ROOT) < 1.0 {
        RegionLabel::I
    } else if a.dist(-SIXTH_ROOT) < 1.0 {
        RegionLabel::III
    } else {
        RegionLabel::II
    }
}

/// All nonzero `(m, n)` with `|m|, |n| <= bound` such that the translate of
/// the unit cylinder by `m u + n v` overlaps the unit cylinder with nonempty
/// interior, i.e. `|m + n a| < 2` and `|m b + n| < 2`.
///
/// Sorted lexicographically.
pub fn enumerate_overlapping_translates(a: ParamPoint, b: f64, bound: i64) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    for m in -bound..=bound {
        for n in -bound..=bound {
            if m == 0 && n == 0 {
                continue;
            }
            let (mf, nf) = (m as f64, n as f64);
            let horizontal = (mf + nf * a.a1).hypot(nf * a.a2);
            let vertical = (mf * b + nf).abs();
            if horizontal < 2.0 && vertical < 2.0 {
                out.push((m, n));
            }
        }
    }
    out
}

/// The overlapping-translate set as listed in the cylinder-pair overlap statement:
/// `±u, ±v, ±(u+v), ±(v-u)`, plus `±(2v-u)` when `|2a-1| < 2`.
///
/// Brute force shows this misses `±(2u+v)` and `±(2u-v)` on a large part
/// of the parameter space; compare with [`enumerate_overlapping_translates`].
pub fn listed_translate_set(a: ParamPoint, b: f64) -> Vec<(i64, i64)> {
    let mut out = vec![(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1), (-1, 1), (1, -1)];
    let two_a_minus_one = ParamPoint::new(2.0 * a.a1 - 1.0, 2.0 * a.a2);
    // b > 0 is implicit in the listed statement: at b = 0 the vertical offset of 2v - u is exactly 2.
    if two_a_minus_one.norm() < 2.0 && b > 0.0 {
        out.push((-1, 2));
        out.push((1, -2));
    }
    out.sort_unstable();
    out
}

//! The rectilinear fundamental domain `F(a, b)` in the `(c1, c3)` plane.
//!
//! `F(a, b)` is a bounding rectangle with corner rectangles removed. Its
//! vertical edges sit at `±1/2` and at `kappa` of various complex shifts of
//! `a`; its horizontal edges at `c3 in {-1, -b, 0, b, 1-b, 1}`.
//!
//! Two brute-force oracles live here as well: a tiling test under the
//! projected lattice `Z(1, b) + Z(±a1, 1)` and a direct check that the lattice
//! spanned by `u, v, w` has no short vectors in the unit cylinder besides
//! `±u, ±v`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, LevyError, Result};
use crate::geometry::{classify_region, kappa, tau_of_c1, ParamPoint, RegionLabel, SIXTH_ROOT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quadrant {
    NW,
    NE,
    SW,
    SE,
}

/// A corner rectangle cut out of the bounding box. `(x, y)` is the corner of
/// the cut that lies inside the box.
///
/// Bracket conventions (with `[x_min, x_max] x [y_min, y_max]` the box):
/// `NW = [x_min, x) x (y, y_max]`, `NE = (x, x_max] x (y, y_max]`,
/// `SW = [x_min, x) x [y_min, y)`, `SE = (x, x_max] x [y_min, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CornerCut {
    pub quadrant: Quadrant,
    pub x: f64,
    pub y: f64,
}

impl CornerCut {
    pub fn new(quadrant: Quadrant, x: f64, y: f64) -> Self {
        Self { quadrant, x, y }
    }

    fn covers(&self, c1: f64, c3: f64) -> bool {
        match self.quadrant {
            Quadrant::NW => c1 < self.x && c3 > self.y,
            Quadrant::NE => c1 > self.x && c3 > self.y,
            Quadrant::SW => c1 < self.x && c3 < self.y,
            Quadrant::SE => c1 > self.x && c3 < self.y,
        }
    }

    fn area_in(&self, d: &RectilinearDomain) -> f64 {
        let w = match self.quadrant {
            Quadrant::NW | Quadrant::SW => self.x - d.x_min,
            Quadrant::NE | Quadrant::SE => d.x_max - self.x,
        };
        let h = match self.quadrant {
            Quadrant::NW | Quadrant::NE => d.y_max - self.y,
            Quadrant::SW | Quadrant::SE => self.y - d.y_min,
        };
        w * h
    }
}

/// Bounding rectangle minus corner cuts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RectilinearDomain {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub cuts: Vec<CornerCut>,
}

impl RectilinearDomain {
    pub fn contains(&self, c1: f64, c3: f64) -> bool {
        c1 >= self.x_min
            && c1 <= self.x_max
            && c3 >= self.y_min
            && c3 <= self.y_max
            && !self.cuts.iter().any(|cut| cut.covers(c1, c3))
    }

    pub fn area(&self) -> f64 {
        let rect = (self.x_max - self.x_min) * (self.y_max - self.y_min);
        rect - self.cuts.iter().map(|c| c.area_in(self)).sum::<f64>()
    }

    /// Sorted, deduplicated x breakpoints (box sides and cut abscissas).
    pub fn x_breaks(&self) -> Vec<f64> {
        breaks(self.x_min, self.x_max, self.cuts.iter().map(|c| c.x))
    }

    pub fn y_breaks(&self) -> Vec<f64> {
        breaks(self.y_min, self.y_max, self.cuts.iter().map(|c| c.y))
    }

    /// Decomposes the domain into the grid cells spanned by its breakpoints
    /// that lie inside it. Each cell is `(x0, x1, y0, y1)`.
    pub fn cells(&self) -> Vec<(f64, f64, f64, f64)> {
        let xs = self.x_breaks();
        let ys = self.y_breaks();
        let mut out = Vec::new();
        for xw in xs.windows(2) {
            for yw in ys.windows(2) {
                let (mx, my) = (0.5 * (xw[0] + xw[1]), 0.5 * (yw[0] + yw[1]));
                if self.contains(mx, my) {
                    out.push((xw[0], xw[1], yw[0], yw[1]));
                }
            }
        }
        out
    }

    /// Boundary vertices in counter-clockwise order, starting at the
    /// south-west corner.
    pub fn vertices(&self) -> Vec<(f64, f64)> {
        let cut = |q: Quadrant| self.cuts.iter().find(|c| c.quadrant == q);
        let mut v = Vec::with_capacity(12);
        match cut(Quadrant::SW) {
            Some(c) => v.extend([(self.x_min, c.y), (c.x, c.y), (c.x, self.y_min)]),
            None => v.push((self.x_min, self.y_min)),
        }
        match cut(Quadrant::SE) {
            Some(c) => v.extend([(c.x, self.y_min), (c.x, c.y), (self.x_max, c.y)]),
            None => v.push((self.x_max, self.y_min)),
        }
        match cut(Quadrant::NE) {
            Some(c) => v.extend([(self.x_max, c.y), (c.x, c.y), (c.x, self.y_max)]),
            None => v.push((self.x_max, self.y_max)),
        }
        match cut(Quadrant::NW) {
            Some(c) => v.extend([(c.x, self.y_max), (c.x, c.y), (self.x_min, c.y)]),
            None => v.push((self.x_min, self.y_max)),
        }
        v.dedup();
        if v.len() > 1 && v.first() == v.last() {
            v.pop();
        }
        v
    }

    /// Euclidean distance from a point to the boundary polygon.
    pub fn boundary_distance(&self, c1: f64, c3: f64) -> f64 {
        let v = self.vertices();
        let mut best = f64::INFINITY;
        for i in 0..v.len() {
            let (p, q) = (v[i], v[(i + 1) % v.len()]);
            best = best.min(segment_distance((c1, c3), p, q));
        }
        best
    }

    /// x-coordinates of the vertical boundary edges.
    pub fn vertical_edge_abscissas(&self) -> Vec<f64> {
        let v = self.vertices();
        (0..v.len())
            .filter(|&i| v[i].0 == v[(i + 1) % v.len()].0)
            .map(|i| v[i].0)
            .collect()
    }
}

fn breaks(lo: f64, hi: f64, inner: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut out: Vec<f64> = std::iter::once(lo)
        .chain(inner.filter(|&x| x > lo && x < hi))
        .chain(std::iter::once(hi))
        .collect();
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

fn segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (p.0 - a.0 - t * dx).hypot(p.1 - a.1 - t * dy)
}

/// One horizontal edge of `F(a, b)` carrying a nonzero boundary term:
/// height `c3`, orientation sign, and its endpoint abscissas ordered so that
/// `tau(c1_minus) < tau(c1_plus)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeRow {
    pub c3: f64,
    pub sign: f64,
    pub c1_minus: f64,
    pub c1_plus: f64,
}

impl EdgeRow {
    pub fn new(c3: f64, sign: f64, c1_minus: f64, c1_plus: f64) -> Self {
        Self {
            c3,
            sign,
            c1_minus,
            c1_plus,
        }
    }

    pub fn tau_minus(&self) -> f64 {
        tau_of_c1(self.c1_minus).expect("edge abscissa in [-1, 1]")
    }

    pub fn tau_plus(&self) -> f64 {
        tau_of_c1(self.c1_plus).expect("edge abscissa in [-1, 1]")
    }
}

/// The `kappa` values that appear as edge abscissas of `F(a, b)`; they
/// depend on `a` only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeAbscissas {
    /// `kappa(a)`
    pub k_a: f64,
    /// `kappa(a - 1)`
    pub k_a_minus_1: f64,
    /// `kappa(1 - ā)`
    pub k_1_minus_conj: f64,
    /// `kappa(-ā)`
    pub k_neg_conj: f64,
    /// `kappa(ā + 1)`
    pub k_conj_plus_1: f64,
    /// `kappa(-a - 1)`
    pub k_neg_a_minus_1: f64,
}

impl EdgeAbscissas {
    pub fn new(a: ParamPoint) -> Result<Self> {
        Ok(Self {
            k_a: kappa(a)?,
            k_a_minus_1: kappa(a.shift(-1.0))?,
            k_1_minus_conj: kappa((-a.conj()).shift(1.0))?,
            k_neg_conj: kappa(-a.conj())?,
            k_conj_plus_1: kappa(a.conj().shift(1.0))?,
            k_neg_a_minus_1: kappa((-a).shift(-1.0))?,
        })
    }

    /// Applies `f` to every abscissa, e.g. to move to `tau` coordinates.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            k_a: f(self.k_a),
            k_a_minus_1: f(self.k_a_minus_1),
            k_1_minus_conj: f(self.k_1_minus_conj),
            k_neg_conj: f(self.k_neg_conj),
            k_conj_plus_1: f(self.k_conj_plus_1),
            k_neg_a_minus_1: f(self.k_neg_a_minus_1),
        }
    }
}

/// Up to four edge rows, stored inline.
#[derive(Debug, Clone, Copy)]
pub struct RowSet {
    rows: [EdgeRow; 4],
    len: usize,
}

impl RowSet {
    pub fn as_slice(&self) -> &[EdgeRow] {
        &self.rows[..self.len]
    }
}

/// The edge table for one region. `half` is the abscissa of the box sides
/// `c1 = ±1/2` in whatever coordinate `k` is expressed in (`0.5` for `c1`,
/// `tau(0.5)` for `tau`), which works because `tau` is odd.
pub fn edge_table(label: RegionLabel, k: &EdgeAbscissas, half: f64, b: f64) -> RowSet {
    let pad = EdgeRow::new(0.0, 0.0, 0.0, 0.0);
    match label {
        RegionLabel::I => RowSet {
            rows: [
                EdgeRow::new(1.0, -1.0, k.k_a_minus_1, half),
                EdgeRow::new(1.0 - b, 1.0, k.k_a_minus_1, -half),
                EdgeRow::new(b, 1.0, k.k_1_minus_conj, half),
                pad,
            ],
            len: 3,
        },
        RegionLabel::II => RowSet {
            rows: [
                EdgeRow::new(1.0, -1.0, k.k_a, half),
                EdgeRow::new(1.0 - b, 1.0, k.k_a, -half),
                EdgeRow::new(-b, 1.0, -half, k.k_neg_conj),
                pad,
            ],
            len: 3,
        },
        RegionLabel::III => RowSet {
            rows: [
                EdgeRow::new(1.0, -1.0, k.k_a, k.k_conj_plus_1),
                EdgeRow::new(b, -1.0, k.k_conj_plus_1, half),
                EdgeRow::new(-b, 1.0, -half, k.k_neg_a_minus_1),
                EdgeRow::new(-1.0, 1.0, k.k_neg_a_minus_1, k.k_neg_conj),
            ],
            len: 4,
        },
    }
}

pub(crate) fn check_inputs(a: ParamPoint, b: f64) -> Result<RegionLabel> {
    check_b(b)?;
    check_base(a)
}

pub(crate) fn check_b(b: f64) -> Result<()> {
    if !(b > 0.0 && b < 1.0) {
        return Err(LevyError::Degenerate(format!("b = {b} must lie in (0, 1)")));
    }
    Ok(())
}

pub(crate) fn check_base(a: ParamPoint) -> Result<RegionLabel> {
    let label = classify_region(a)?;
    if a.dist(SIXTH_ROOT) == 1.0 || a.dist(-SIXTH_ROOT) == 1.0 {
        return Err(LevyError::Degenerate(format!("a = {a} lies on a region boundary")));
    }
    Ok(label)
}

/// Builds `F(a, b)` for `a` in the upper base domain and `0 < b < 1`.
pub fn build_f(a: ParamPoint, b: f64) -> Result<RectilinearDomain> {
    let label = check_inputs(a, b)?;
    let k = EdgeAbscissas::new(a)?;
    let d = match label {
        RegionLabel::I => RectilinearDomain {
            x_min: k.k_a_minus_1,
            x_max: 0.5,
            y_min: 0.0,
            y_max: 1.0,
            cuts: vec![
                CornerCut::new(Quadrant::SW, -0.5, 1.0 - b),
                CornerCut::new(Quadrant::SE, k.k_1_minus_conj, b),
            ],
        },
        RegionLabel::II => RectilinearDomain {
            x_min: k.k_a,
            x_max: 0.5,
            y_min: -b,
            y_max: 1.0,
            cuts: vec![
                CornerCut::new(Quadrant::SW, -0.5, 1.0 - b),
                CornerCut::new(Quadrant::SE, k.k_neg_conj, 0.0),
            ],
        },
        RegionLabel::III => RectilinearDomain {
            x_min: -0.5,
            x_max: 0.5,
            y_min: -1.0,
            y_max: 1.0,
            cuts: vec![
                CornerCut::new(Quadrant::NW, k.k_a, 0.0),
                CornerCut::new(Quadrant::NE, k.k_conj_plus_1, b),
                CornerCut::new(Quadrant::SW, k.k_neg_a_minus_1, -b),
                CornerCut::new(Quadrant::SE, k.k_neg_conj, 0.0),
            ],
        },
    };
    Ok(d)
}

/// The horizontal edges of `F(a, b)` with `c3 != 0`, with the orientation
/// signs of the boundary integral.
pub fn edge_rows(a: ParamPoint, b: f64) -> Result<Vec<EdgeRow>> {
    let label = check_inputs(a, b)?;
    let k = EdgeAbscissas::new(a)?;
    Ok(edge_table(label, &k, 0.5, b).as_slice().to_vec())
}

/// Sign of the `a1` component of the second generator of the projected
/// lattice `Z(1, b) + Z(±a1, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TilingLattice {
    /// `Z(1, b) + Z(a1, 1)`: the projection of `Z u + Z v`. Tiles.
    PlusA1,
    /// `Z(1, b) + Z(-a1, 1)`. Fails away from `a1 = 0`.
    MinusA1,
}

const TILING_BAND: f64 = 1e-9;

/// Samples `trials` points in `[-2, 2]^2` and checks that exactly one of
/// their lattice translates lands in `F(a, b)`.
pub fn tiling_check(a: ParamPoint, b: f64, trials: usize, seed: u64) -> Result<bool> {
    tiling_check_with(&build_f(a, b)?, a, b, TilingLattice::PlusA1, trials, seed)
}

/// Every `(m, n)` with `p + m (1, b) + n (g, 1)` inside the bounding box of
/// `f`, padded by `pad`.
fn translates_into_box(f: &RectilinearDomain, p: (f64, f64), b: f64, g: f64, pad: f64) -> Vec<(f64, f64)> {
    let (x0, x1) = (f.x_min - pad - p.0, f.x_max + pad - p.0);
    let (y0, y1) = (f.y_min - pad - p.1, f.y_max + pad - p.1);
    // with X = m + n g and Y = m b + n, n = (Y - b X) / (1 - g b)
    let det = 1.0 - g * b;
    let (lo, hi) = ((y0 - b * x1) / det, (y1 - b * x0) / det);
    let (n_lo, n_hi) = (lo.min(hi).floor() as i64, lo.max(hi).ceil() as i64);
    let mut out = Vec::new();
    for n in n_lo..=n_hi {
        let n = n as f64;
        let mut m_lo = x0 - n * g;
        let mut m_hi = x1 - n * g;
        if b > 0.0 {
            m_lo = m_lo.max((y0 - n) / b);
            m_hi = m_hi.min((y1 - n) / b);
        } else if !(y0..=y1).contains(&n) {
            continue;
        }
        for m in (m_lo.ceil() as i64)..=(m_hi.floor() as i64) {
            out.push((m as f64, n));
        }
    }
    out
}

/// Tiling test of an arbitrary domain under a chosen lattice convention.
pub fn tiling_check_with(
    f: &RectilinearDomain,
    a: ParamPoint,
    b: f64,
    lattice: TilingLattice,
    trials: usize,
    seed: u64,
) -> Result<bool> {
    let g2x = match lattice {
        TilingLattice::PlusA1 => a.a1,
        TilingLattice::MinusA1 => -a.a1,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut done = 0;
    let mut attempts = 0usize;
    while done < trials {
        attempts += 1;
        if attempts > 100 * trials.max(1) {
            return Err(LevyError::Config(
                "tiling check kept sampling boundary points".into(),
            ));
        }
        let p = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let mut hits = 0;
        let mut ambiguous = false;
        for (m, n) in translates_into_box(f, p, b, g2x, 2.0 * TILING_BAND) {
            let q = (p.0 + m + n * g2x, p.1 + m * b + n);
            if f.boundary_distance(q.0, q.1) < TILING_BAND {
                ambiguous = true;
            }
            if f.contains(q.0, q.1) {
                hits += 1;
            }
        }
        if ambiguous {
            continue;
        }
        if hits != 1 {
            return Ok(false);
        }
        done += 1;
    }
    Ok(true)
}

/// Returns true iff the only nonzero vectors of the lattice spanned by
/// `u = (1, 0, b)`, `v = (a1, a2, 1)`, `w = (c1, c2, c3)` inside the closed
/// unit cylinder `max(sqrt(x1^2 + x2^2), |x3|) <= 1` are `±u` and `±v`.
///
/// Coefficients are enumerated over `[-bound, bound]^3`.
pub fn lattice_membership_oracle(
    a: ParamPoint,
    b: f64,
    c1: f64,
    c2: f64,
    c3: f64,
    bound: i32,
) -> Result<bool> {
    if !(-c2 > (1.0 - c1 * c1).max(0.0).sqrt()) {
        return Err(domain(
            "lattice_membership_oracle",
            format!("w = ({c1}, {c2}, {c3}) must satisfy -c2 > sqrt(1 - c1^2)"),
        ));
    }
    let u = [1.0, 0.0, b];
    let v = [a.a1, a.a2, 1.0];
    let w = [c1, c2, c3];
    for m in -bound..=bound {
        for n in -bound..=bound {
            for k in -bound..=bound {
                let trivial = k == 0 && ((m.abs() == 1 && n == 0) || (m == 0 && n.abs() == 1));
                if (m == 0 && n == 0 && k == 0) || trivial {
                    continue;
                }
                let (m, n, k) = (m as f64, n as f64, k as f64);
                let x: [f64; 3] = std::array::from_fn(|i| m * u[i] + n * v[i] + k * w[i]);
                if x[0].hypot(x[1]) <= 1.0 && x[2].abs() <= 1.0 {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

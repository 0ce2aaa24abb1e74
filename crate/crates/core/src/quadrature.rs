//! Outer integration of the inner integrand over `Omega_2^+ x (0, 1)` and
//! assembly of the Lévy constant.
//!
//! The base domain is split into six curvilinear pieces along the circles
//! `|a - xi| = 1`, `|a + xi| = 1` and the rays where the boundary formulas
//! change. In polar coordinates `a = r e^{i phi}` every piece is
//! `phi in [phi0, phi1]`, `r in [lo(phi), hi(phi)]`, and the map
//! `r = lo + s (hi - lo)` turns it into a rectangle in `(phi, s)`. The
//! integral is then a nested adaptive Gauss-Kronrod product: `phi`
//! outermost, `s` in the middle, `b` innermost.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cubature::{AdaptiveRule, Estimate, REL_TOL_FLOOR};
use crate::error::{domain, LevyError, Result};
use crate::geometry::{ParamPoint, RegionLabel};
use crate::integrand::{BasePoint, XDenominator};

/// `3 mu_S(Omega_7)` as published.
pub const PUBLISHED_MU_S3: f64 = 3.492_779_838_657_03;
/// `L_{2,1}` as published.
pub const PUBLISHED_LEVY: f64 = 1.135_256_974_167_19;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZetaConstants {
    pub zeta2: f64,
    pub zeta3: f64,
}

impl ZetaConstants {
    /// `zeta(2) = pi^2/6`, `zeta(3)` (Apéry's constant).
    pub const STANDARD: ZetaConstants = ZetaConstants {
        zeta2: 1.644_934_066_848_226_4,
        zeta3: 1.202_056_903_159_594_3,
    };

    /// The numerals printed alongside the published constant: swapped, and
    /// with a digit of `zeta(2)` dropped.
    pub const PRINTED: ZetaConstants = ZetaConstants {
        zeta2: 1.202_056_903_1,
        zeta3: 1.649_340_668,
    };
}

impl Default for ZetaConstants {
    fn default() -> Self {
        Self::STANDARD
    }
}

/// `2 zeta(2) zeta(3) / (3 mu_S(Omega_7))`; the argument is `3 mu_S`.
pub fn levy_constant(mu_s3: f64, zetas: ZetaConstants) -> Result<f64> {
    if !(mu_s3 > 0.0) || !mu_s3.is_finite() {
        return Err(domain("levy_constant", format!("3 mu_S = {mu_s3} must be positive")));
    }
    Ok(2.0 * zetas.zeta2 * zetas.zeta3 / mu_s3)
}

/// One polar piece of the base domain.
#[derive(Debug, Clone, Copy)]
pub struct Piece {
    pub label: RegionLabel,
    pub phi: (f64, f64),
    lo: Radius,
    hi: Radius,
}

/// Radial bound as a function of the polar angle.
#[derive(Debug, Clone, Copy)]
enum Radius {
    Zero,
    One,
    /// `2 cos(phi - shift)`: the circle of radius 1 through the origin
    /// centred at `e^{i shift}`.
    Circle(f64),
}

impl Radius {
    fn at(self, phi: f64) -> f64 {
        match self {
            Radius::Zero => 0.0,
            Radius::One => 1.0,
            Radius::Circle(shift) => 2.0 * (phi - shift).cos(),
        }
    }
}

const FIVE_PI_6: f64 = 5.0 * PI / 6.0;
const TWO_PI_3: f64 = 2.0 * PI / 3.0;
const FOUR_PI_3: f64 = 4.0 * PI / 3.0;

/// Exact area of one region of the upper base domain.
pub fn region_area(label: RegionLabel) -> f64 {
    pieces().iter().filter(|p| p.label == label).map(Piece::area).sum()
}

/// The six pieces, in the fixed order used for reductions.
pub fn pieces() -> [Piece; 6] {
    use Radius::*;
    use RegionLabel::*;
    [
        // |a - 1| >= 1 is r >= 2 cos(phi)
        Piece { label: I, phi: (FRAC_PI_3, FRAC_PI_2), lo: Circle(0.0), hi: One },
        Piece { label: I, phi: (FRAC_PI_2, TWO_PI_3), lo: Zero, hi: One },
        // |a - xi| < 1 is r < 2 cos(phi - pi/3)
        Piece { label: I, phi: (TWO_PI_3, FIVE_PI_6), lo: Zero, hi: Circle(FRAC_PI_3) },
        Piece { label: II, phi: (TWO_PI_3, FIVE_PI_6), lo: Circle(FRAC_PI_3), hi: One },
        // |a + xi| < 1 is r < 2 cos(phi - 4 pi/3)
        Piece { label: II, phi: (FIVE_PI_6, PI), lo: Circle(FOUR_PI_3), hi: One },
        Piece { label: III, phi: (FIVE_PI_6, PI), lo: Zero, hi: Circle(FOUR_PI_3) },
    ]
}

impl Radius {
    /// Antiderivative of `r(phi)^2 / 2`.
    fn half_square_primitive(self, phi: f64) -> f64 {
        match self {
            Radius::Zero => 0.0,
            Radius::One => 0.5 * phi,
            // 2 cos^2(t) = t + sin(2t)/2 integrated
            Radius::Circle(shift) => {
                let t = phi - shift;
                t + 0.5 * (2.0 * t).sin()
            }
        }
    }
}

impl Piece {
    /// Exact area of the piece.
    pub fn area(&self) -> f64 {
        let (p0, p1) = self.phi;
        let prim = |r: Radius| r.half_square_primitive(p1) - r.half_square_primitive(p0);
        prim(self.hi) - prim(self.lo)
    }

    /// Maps `(phi, s)` to the base point and the area Jacobian.
    pub fn map(&self, phi: f64, s: f64) -> (ParamPoint, f64) {
        let (lo, hi) = (self.lo.at(phi), self.hi.at(phi));
        let r = lo + s * (hi - lo);
        (ParamPoint::new(r * phi.cos(), r * phi.sin()), r * (hi - lo))
    }
}

/// A function of `(a, b)` integrated over the base domain. `prepare` runs
/// once per base point; `eval` once per `b`.
pub trait BaseIntegrand: Sync {
    type Prepared;
    fn prepare(&self, a: ParamPoint, label: RegionLabel) -> Result<Self::Prepared>;
    fn eval(&self, p: &Self::Prepared, b: f64) -> Result<f64>;
}

/// The inner integrand of `3 mu_S(Omega_7)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct MuIntegrand {
    pub form: XDenominator,
    /// Points with `a2 <= min_a2` contribute zero. Only for convergence
    /// studies near the real axis; zero in production.
    pub min_a2: f64,
}

impl BaseIntegrand for MuIntegrand {
    type Prepared = Option<BasePoint>;

    fn prepare(&self, a: ParamPoint, label: RegionLabel) -> Result<Self::Prepared> {
        if a.a2 <= self.min_a2 {
            return Ok(None);
        }
        Ok(Some(BasePoint::with_label(a, label)?))
    }

    fn eval(&self, p: &Self::Prepared, b: f64) -> Result<f64> {
        match p {
            Some(base) => base.integrand(b, self.form),
            None => Ok(0.0),
        }
    }
}

/// Integrates a function that ignores `(a, b)` apart from a constant value;
/// used to validate the domain map and error estimator.
#[derive(Debug, Clone, Copy)]
pub struct ConstantIntegrand(pub f64);

impl BaseIntegrand for ConstantIntegrand {
    type Prepared = ();

    fn prepare(&self, _: ParamPoint, _: RegionLabel) -> Result<()> {
        Ok(())
    }

    fn eval(&self, _: &(), _: f64) -> Result<f64> {
        Ok(self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OuterConfig {
    /// Target absolute error of the whole integral.
    pub tol: f64,
    /// Integrand evaluation budget.
    pub budget: u64,
    /// Restrict to one region.
    pub region: Option<RegionLabel>,
}

impl OuterConfig {
    pub fn new(tol: f64, budget: u64) -> Self {
        Self {
            tol,
            budget,
            region: None,
        }
    }
}

/// Result of the outer integration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: f64,
    /// Estimated absolute error.
    pub error_estimate: f64,
    pub evaluations: u64,
    pub max_depth: u32,
    /// Partial values per region, summed in piece order.
    pub region_breakdown: BTreeMap<RegionLabel, f64>,
    pub converged: bool,
}

/// `3 mu_S(Omega_7) = \int_{Omega_2^+} da \int_0^1 db inner_integrand(a, b)`.
pub fn integrate_outer(tol: f64, budget: u64) -> Result<QuadratureResult> {
    integrate_base(&OuterConfig::new(tol, budget), &MuIntegrand::default())
}

/// Integrates `f` over `Omega_2^+ x (0, 1)` (or one region of it).
///
/// Returns `BudgetExceeded` carrying the best estimate when the tolerance is
/// not reached within `cfg.budget` evaluations.
pub fn integrate_base<F: BaseIntegrand>(cfg: &OuterConfig, f: &F) -> Result<QuadratureResult> {
    if !(cfg.tol > 0.0) {
        return Err(LevyError::Config(format!("tolerance {} must be positive", cfg.tol)));
    }
    let out = run_pieces(cfg, f)?;
    if !out.converged || out.evaluations > cfg.budget || out.error_estimate > cfg.tol {
        return Err(LevyError::BudgetExceeded {
            value: out.value,
            error_estimate: out.error_estimate,
            evaluations: out.evaluations,
        });
    }
    Ok(out)
}

/// Runs the selected pieces in parallel and reduces them in piece order,
/// without checking the tolerance.
pub fn run_pieces<F: BaseIntegrand>(cfg: &OuterConfig, f: &F) -> Result<QuadratureResult> {
    let selected: Vec<Piece> = pieces()
        .into_iter()
        .filter(|p| cfg.region.is_none_or(|r| r == p.label))
        .collect();
    let n = selected.len() as f64;
    let per_piece_budget = (cfg.budget as f64 / n) as u64;
    let results: Vec<Result<Estimate>> = selected
        .par_iter()
        .map(|piece| integrate_piece(piece, f, cfg.tol / (2.0 * n), per_piece_budget))
        .collect();

    let mut out = QuadratureResult {
        value: 0.0,
        error_estimate: 0.0,
        evaluations: 0,
        max_depth: 0,
        region_breakdown: BTreeMap::new(),
        converged: true,
    };
    for (piece, r) in selected.iter().zip(results) {
        let e = r?;
        out.value += e.value;
        out.error_estimate += e.error;
        out.evaluations += e.evals;
        out.max_depth = out.max_depth.max(e.max_depth);
        out.converged &= e.converged;
        *out.region_breakdown.entry(piece.label).or_insert(0.0) += e.value;
    }
    Ok(out)
}

fn integrate_piece<F: BaseIntegrand>(piece: &Piece, f: &F, tol: f64, budget: u64) -> Result<Estimate> {
    // Inner levels run at much tighter relative tolerance so that their
    // propagated error stays a small fraction of `tol`.
    let outer = AdaptiveRule::new(tol, 0.0).with_max_evals(budget).with_max_panels(4000);
    let middle = AdaptiveRule::new(0.0, (0.02 * tol).max(REL_TOL_FLOOR)).with_max_panels(4000);
    let inner = AdaptiveRule::new(0.0, (0.002 * tol).max(REL_TOL_FLOOR)).with_max_panels(4000);
    let mut failure: Option<LevyError> = None;
    let est = outer.integrate_nested(
        |phi| {
            middle.integrate_nested(
                |s| {
                    let (a, jac) = piece.map(phi, s);
                    let prepared = match f.prepare(a, piece.label) {
                        Ok(p) => p,
                        Err(e) => {
                            failure.get_or_insert(e);
                            return Estimate::exact(0.0);
                        }
                    };
                    let mut e = inner.integrate(
                        |b| match f.eval(&prepared, b) {
                            Ok(v) => v,
                            Err(e) => {
                                failure.get_or_insert(e);
                                0.0
                            }
                        },
                        0.0,
                        1.0,
                    );
                    e.value *= jac;
                    e.error *= jac;
                    e
                },
                0.0,
                1.0,
            )
        },
        piece.phi.0,
        piece.phi.1,
    );
    match failure {
        Some(e) => Err(e),
        None => Ok(est),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn levy_constant_examples() {
        let z = ZetaConstants::STANDARD;
        assert!((levy_constant(2.0 * z.zeta2 * z.zeta3, z).unwrap() - 1.0).abs() < 1e-15);
        let printed = levy_constant(PUBLISHED_MU_S3, ZetaConstants::PRINTED).unwrap();
        assert!(((printed - PUBLISHED_LEVY) / PUBLISHED_LEVY).abs() < 1e-11);
        let corrected = levy_constant(PUBLISHED_MU_S3, z).unwrap();
        assert!((corrected - 1.132_223_868_457_490_6).abs() < 1e-14);
        assert!(levy_constant(0.0, z).is_err());
        assert!(levy_constant(-1.0, z).is_err());
    }

    #[test]
    fn zeta_constants_from_series() {
        // Apéry: zeta(3) = 5/2 sum (-1)^{n+1} / (n^3 C(2n, n))
        let mut sum = 0.0;
        let mut central = 1.0;
        for n in 1..40u32 {
            let nf = n as f64;
            central *= (2.0 * nf - 1.0) * 2.0 / nf;
            let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
            sum += sign / (nf * nf * nf * central);
        }
        assert!((2.5 * sum - ZetaConstants::STANDARD.zeta3).abs() < 1e-15);
        assert!((PI * PI / 6.0 - ZetaConstants::STANDARD.zeta2).abs() < 1e-15);
    }

    #[test]
    fn pieces_tile_the_base_domain() {
        // every mapped point is in the base domain with the piece's label
        for piece in pieces() {
            for i in 1..20 {
                for j in 1..20 {
                    let phi = piece.phi.0 + (piece.phi.1 - piece.phi.0) * i as f64 / 20.0;
                    let (a, jac) = piece.map(phi, j as f64 / 20.0);
                    assert!(jac > 0.0);
                    assert!(a.in_omega2_plus(), "{a}");
                    assert_eq!(crate::geometry::classify_region(a).unwrap(), piece.label);
                }
            }
        }
    }

    #[test]
    fn constant_integrand_gives_base_area() {
        let exact = PI / 6.0 + 3f64.sqrt() / 4.0;
        let r = integrate_base(&OuterConfig::new(1e-10, 10_000_000), &ConstantIntegrand(1.0)).unwrap();
        assert!((r.value - exact).abs() < 1e-10, "{r:?}");
        assert!(r.error_estimate <= 1e-10);
    }

    #[test]
    fn piece_areas_sum_to_base_area() {
        let exact = PI / 6.0 + 3f64.sqrt() / 4.0;
        let total: f64 = RegionLabel::ALL.iter().map(|&l| region_area(l)).sum();
        assert!((total - exact).abs() < 1e-15);
        for label in RegionLabel::ALL {
            let mut cfg = OuterConfig::new(1e-12, 10_000_000);
            cfg.region = Some(label);
            let q = integrate_base(&cfg, &ConstantIntegrand(1.0)).unwrap();
            assert!((q.value - region_area(label)).abs() < 1e-12, "{label}");
        }
    }

    #[test]
    fn tolerance_must_be_positive() {
        assert!(integrate_outer(0.0, 1000).is_err());
    }

    #[test]
    fn tiny_budget_is_reported() {
        match integrate_outer(1e-12, 1000) {
            Err(LevyError::BudgetExceeded { value, .. }) => assert!(value > 3.0 && value < 4.0),
            other => panic!("expected budget failure, got {other:?}"),
        }
    }
}

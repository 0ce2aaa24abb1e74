//! Closed-form inner integrand of `3 mu_S(Omega_7)` and its 2D quadrature
//! oracle over `F(a, b)`.
//!
//! For a base point `a` and `b in (0, 1)` the inner integral
//! `2 pi / (1 - a1 b) * \iint_F dc1 dc3 / Xi^2` reduces, after Green's
//! theorem and the substitution `c1 = 2 tau / (1 + tau^2)`, to a sum over
//! the horizontal edges of `F(a, b)` of
//!
//! ```text
//! sign * 2 pi c3 (tau+ - tau-) / (N * den) * (1/x) ln((1 - x)/(1 + x))
//! N   = (1 - a1 b)^2 + a2^2 b^2
//! den = phi+ - tau+ tau- phi- - a2 b (tau+ + tau-)
//! x   = (tau+ - tau-) sqrt(D) / den
//! ```
//!
//! with `phi± = 1 - a1 b ± a2 c3` and `D = (1 - a1 b)^2 + a2^2 (b^2 - c3^2)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::cubature::{AdaptiveRule, Estimate, REL_TOL_FLOOR};
use crate::error::{domain, LevyError, Result};
use crate::fundamental_domain::{build_f, check_b, check_base, edge_table, EdgeAbscissas, EdgeRow};
use crate::geometry::{tau_of_c1, ParamPoint, RegionLabel};

/// Which denominator to use in `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum XDenominator {
    /// `phi+ - tau+ tau- phi- - a2 b (tau+ + tau-)`, the same expression as
    /// the prefactor denominator.
    Corrected,
    /// `phi+ tau+ tau- phi- - a2 b (tau+ + tau-)`: the printed form, with a
    /// product where the difference belongs. Kept as a negative control.
    Literal,
}

impl Default for XDenominator {
    fn default() -> Self {
        if cfg!(feature = "literal-x-denominator") {
            XDenominator::Literal
        } else {
            XDenominator::Corrected
        }
    }
}

impl std::str::FromStr for XDenominator {
    type Err = LevyError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "corrected" => Ok(XDenominator::Corrected),
            "literal" => Ok(XDenominator::Literal),
            _ => Err(LevyError::Config(format!("unknown x-denominator form {s:?}"))),
        }
    }
}

const SERIES_SWITCH: f64 = 1e-4;

/// `(1/x) ln((1 - x)/(1 + x))` on `(-1, 1)`, with the value `-2` at zero.
pub fn log_kernel(x: f64) -> Result<f64> {
    if !(x.abs() < 1.0) {
        return Err(domain("log_kernel", format!("|x| = {} >= 1", x.abs())));
    }
    if x.abs() < SERIES_SWITCH {
        // -2 (1 + x^2/3 + x^4/5 + x^6/7 + x^8/9); the next term is below 1e-36
        let x2 = x * x;
        Ok(-2.0 * (1.0 + x2 * (1.0 / 3.0 + x2 * (1.0 / 5.0 + x2 * (1.0 / 7.0 + x2 / 9.0)))))
    } else {
        Ok(((-x).ln_1p() - x.ln_1p()) / x)
    }
}

/// `Xi = (1 - a1 b) sqrt(1 - c1^2) - a2 (b c1 - c3)`.
pub fn xi(a: ParamPoint, b: f64, c1: f64, c3: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&c1) {
        return Err(domain("xi", format!("|c1| = {} > 1", c1.abs())));
    }
    Ok((1.0 - a.a1 * b) * (1.0 - c1 * c1).sqrt() - a.a2 * (b * c1 - c3))
}

/// Per-edge quantities of the closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnerTerm {
    pub phi_plus: f64,
    pub phi_minus: f64,
    pub d: f64,
    pub tau_minus: f64,
    pub tau_plus: f64,
    pub x: f64,
}

impl InnerTerm {
    /// Builds the term for an edge at height `c3` whose endpoints are given
    /// in `tau` coordinates.
    pub fn new(a: ParamPoint, b: f64, c3: f64, tau_minus: f64, tau_plus: f64, form: XDenominator) -> Result<Self> {
        let s = 1.0 - a.a1 * b;
        let mut t = InnerTerm {
            phi_plus: s + a.a2 * c3,
            phi_minus: s - a.a2 * c3,
            d: s * s + a.a2 * a.a2 * (b * b - c3 * c3),
            tau_minus,
            tau_plus,
            x: 0.0,
        };
        t.x = x_value_with(&t, a.a2 * b, form)?;
        Ok(t)
    }

    /// `phi+ - tau+ tau- phi- - a2 b (tau+ + tau-)`.
    pub fn denominator(&self, a2b: f64) -> f64 {
        self.phi_plus - self.tau_plus * self.tau_minus * self.phi_minus - a2b * (self.tau_plus + self.tau_minus)
    }
}

/// `x = (tau+ - tau-) sqrt(D) / (phi+ - tau+ tau- phi- - a2 b (tau+ + tau-))`.
pub fn x_value(t: &InnerTerm, a2b: f64) -> Result<f64> {
    x_value_with(t, a2b, XDenominator::Corrected)
}

pub fn x_value_with(t: &InnerTerm, a2b: f64, form: XDenominator) -> Result<f64> {
    let den = match form {
        XDenominator::Corrected => t.denominator(a2b),
        XDenominator::Literal => {
            t.phi_plus * t.tau_plus * t.tau_minus * t.phi_minus - a2b * (t.tau_plus + t.tau_minus)
        }
    };
    let width = t.tau_plus - t.tau_minus;
    if width == 0.0 {
        return Ok(0.0);
    }
    if den == 0.0 {
        return Err(LevyError::Singular("x_value"));
    }
    if !(t.d > 0.0) {
        return Err(domain("x_value", format!("D = {} is not positive", t.d)));
    }
    Ok(width * t.d.sqrt() / den)
}

/// A base point with its region and edge abscissas (in `tau` coordinates)
/// precomputed, so that the inner integrand can be evaluated cheaply for
/// many values of `b`.
#[derive(Debug, Clone, Copy)]
pub struct BasePoint {
    pub a: ParamPoint,
    pub label: RegionLabel,
    taus: EdgeAbscissas,
    tau_half: f64,
}

impl BasePoint {
    pub fn new(a: ParamPoint) -> Result<Self> {
        Self::with_label(a, check_base(a)?)
    }

    /// Skips classification; for callers that already know the region
    /// (e.g. a quadrature node a few ulps from a splitting circle).
    pub fn with_label(a: ParamPoint, label: RegionLabel) -> Result<Self> {
        let k = EdgeAbscissas::new(a)?;
        for v in [k.k_a, k.k_a_minus_1, k.k_1_minus_conj, k.k_neg_conj, k.k_conj_plus_1, k.k_neg_a_minus_1] {
            tau_of_c1(v)?;
        }
        Ok(Self {
            a,
            label,
            taus: k.map(|c| tau_of_c1(c).expect("checked above")),
            tau_half: tau_of_c1(0.5)?,
        })
    }

    /// Edge rows with `c1_minus`/`c1_plus` replaced by their `tau` values.
    pub fn tau_rows(&self, b: f64) -> Vec<EdgeRow> {
        edge_table(self.label, &self.taus, self.tau_half, b).as_slice().to_vec()
    }

    pub fn integrand(&self, b: f64, form: XDenominator) -> Result<f64> {
        check_b(b)?;
        let a = self.a;
        let s = 1.0 - a.a1 * b;
        let norm = s * s + a.a2 * a.a2 * b * b;
        let a2b = a.a2 * b;
        let mut total = 0.0;
        for row in edge_table(self.label, &self.taus, self.tau_half, b).as_slice() {
            let t = InnerTerm::new(a, b, row.c3, row.c1_minus, row.c1_plus, form)?;
            let width = t.tau_plus - t.tau_minus;
            if width == 0.0 {
                continue;
            }
            let den = t.denominator(a2b);
            if den == 0.0 {
                return Err(LevyError::Singular("inner_integrand"));
            }
            total += row.sign * 2.0 * PI * row.c3 * width / (norm * den) * log_kernel(t.x)?;
        }
        if !total.is_finite() {
            return Err(domain("inner_integrand", format!("non-finite value at a = {a}, b = {b}")));
        }
        Ok(total)
    }
}

/// The integrand of `3 mu_S(Omega_7)` over the base `(a, b)`.
pub fn inner_integrand(a: ParamPoint, b: f64) -> Result<f64> {
    inner_integrand_with(a, b, XDenominator::default())
}

pub fn inner_integrand_with(a: ParamPoint, b: f64, form: XDenominator) -> Result<f64> {
    BasePoint::new(a)?.integrand(b, form)
}

/// `2 pi / (1 - a1 b) * \iint_{F(a,b)} dc1 dc3 / Xi^2` by nested adaptive
/// Gauss-Kronrod over the grid cells of `F(a, b)`, to relative tolerance
/// `tol`.
pub fn inner_oracle(a: ParamPoint, b: f64, tol: f64) -> Result<f64> {
    inner_oracle_estimate(a, b, tol).map(|e| e.value)
}

pub fn inner_oracle_estimate(a: ParamPoint, b: f64, tol: f64) -> Result<Estimate> {
    if !(tol > 0.0) {
        return Err(LevyError::Config(format!("tolerance {tol} must be positive")));
    }
    let f = build_f(a, b)?;
    let s = 1.0 - a.a1 * b;
    let outer = AdaptiveRule::new(0.0, tol.max(REL_TOL_FLOOR)).with_max_panels(4000);
    let inner = AdaptiveRule::new(0.0, (0.01 * tol).max(REL_TOL_FLOOR)).with_max_panels(4000);
    let mut total = Estimate {
        converged: true,
        ..Default::default()
    };
    for (x0, x1, y0, y1) in f.cells() {
        let cell = outer.integrate_nested(
            |c1| {
                let root = s * (1.0 - c1 * c1).max(0.0).sqrt() - a.a2 * b * c1;
                inner.integrate(
                    |c3| {
                        let x = root + a.a2 * c3;
                        1.0 / (x * x)
                    },
                    y0,
                    y1,
                )
            },
            x0,
            x1,
        );
        total.value += cell.value;
        total.error += cell.error;
        total.evals += cell.evals;
        total.max_depth = total.max_depth.max(cell.max_depth);
        total.converged &= cell.converged;
    }
    let scale = 2.0 * PI / s;
    total.value *= scale;
    total.error *= scale;
    if !total.converged {
        return Err(LevyError::BudgetExceeded {
            value: total.value,
            error_estimate: total.error,
            evaluations: total.evals,
        });
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIGS: [(f64, f64, f64); 3] = [(0.0, 0.3, 0.3), (-0.9, 0.3, 0.3), (-0.5, 0.05, 0.4)];

    fn rel(x: f64, y: f64) -> f64 {
        (x - y).abs() / y.abs()
    }

    #[test]
    fn log_kernel_values() {
        assert_eq!(log_kernel(0.0).unwrap(), -2.0);
        let v = log_kernel(0.5).unwrap();
        assert!((v - 2.0 * (1.0f64 / 3.0).ln()).abs() < 1e-15);
        assert!((v + 2.197_224_577_336_219_4).abs() < 1e-15);
        let small = log_kernel(1e-6).unwrap();
        assert!((small - (-2.0 - 2.0 / 3.0 * 1e-12)).abs() < 1e-15);
        assert!(log_kernel(1.0).is_err());
        assert!(log_kernel(-1.5).is_err());
    }

    #[test]
    fn log_kernel_continuous_at_switch() {
        let below = log_kernel(SERIES_SWITCH * (1.0 - 1e-12)).unwrap();
        let above = log_kernel(SERIES_SWITCH).unwrap();
        assert!((below - above).abs() < 1e-15);
        for x in [1e-3, 0.1, 0.7, -0.3, 0.999] {
            assert!(log_kernel(x).unwrap() <= -2.0);
        }
    }

    #[test]
    fn xi_values() {
        let a = ParamPoint::new(-0.9, 0.3);
        assert!((xi(a, 0.3, 0.0, 0.0).unwrap() - 1.27).abs() < 1e-15);
        assert_eq!(xi(ParamPoint::new(0.0, 0.0), 0.7, 0.0, 0.4).unwrap(), 1.0);
        assert!(xi(a, 0.3, 1.01, 0.0).is_err());
    }

    #[test]
    fn zero_width_edge_has_zero_x() {
        let a = ParamPoint::new(-0.9, 0.3);
        let t = InnerTerm::new(a, 0.3, 1.0, 0.2, 0.2, XDenominator::Corrected).unwrap();
        assert_eq!(t.x, 0.0);
    }

    #[test]
    fn figure_rows_have_subunit_x_and_match_log_ratio() {
        for (a1, a2, b) in FIGS {
            let a = ParamPoint::new(a1, a2);
            let base = BasePoint::new(a).unwrap();
            for row in base.tau_rows(b) {
                let t = InnerTerm::new(a, b, row.c3, row.c1_minus, row.c1_plus, XDenominator::Corrected).unwrap();
                assert!(t.x.abs() < 1.0);
                // pre-substitution form: ln{ q(tau+)/q(tau-) * (r(tau-)/r(tau+))^2 }
                let a2b = a2 * b;
                let q = |tau: f64| t.phi_plus - 2.0 * a2b * tau - t.phi_minus * tau * tau;
                let r = |tau: f64| t.d.sqrt() + a2b + t.phi_minus * tau;
                let log_form = (q(t.tau_plus) / q(t.tau_minus) * (r(t.tau_minus) / r(t.tau_plus)).powi(2)).ln();
                let kernel_form = ((1.0 - t.x) / (1.0 + t.x)).ln();
                assert!((log_form - kernel_form).abs() < 1e-10, "{log_form} vs {kernel_form}");
            }
        }
    }

    #[test]
    fn closed_form_matches_oracle_on_figures() {
        for (a1, a2, b) in FIGS {
            let a = ParamPoint::new(a1, a2);
            let closed = inner_integrand(a, b).unwrap();
            let oracle = inner_oracle(a, b, 1e-10).unwrap();
            assert!(oracle > 0.0);
            assert!(rel(closed, oracle) < 1e-6, "{a}: {closed} vs {oracle}");
        }
    }

    #[test]
    fn oracle_converges_with_tolerance() {
        let a = ParamPoint::new(-0.9, 0.3);
        let reference = inner_oracle(a, 0.3, 1e-12).unwrap();
        let coarse = (inner_oracle(a, 0.3, 1e-4).unwrap() - reference).abs();
        let fine = (inner_oracle(a, 0.3, 1e-5).unwrap() - reference).abs();
        assert!(fine <= coarse.max(1e-14) * 0.5 || fine < 1e-12, "{coarse} {fine}");
    }

    #[test]
    fn literal_denominator_breaks_the_integrand() {
        let mut broken = 0;
        for (a1, a2, b) in FIGS {
            let a = ParamPoint::new(a1, a2);
            let good = inner_integrand_with(a, b, XDenominator::Corrected).unwrap();
            match inner_integrand_with(a, b, XDenominator::Literal) {
                Err(_) => broken += 1,
                Ok(v) if rel(v, good) > 1e-6 => broken += 1,
                Ok(_) => {}
            }
        }
        assert_eq!(broken, 3);
    }

    #[test]
    fn degenerate_b_is_rejected() {
        let a = ParamPoint::new(-0.9, 0.3);
        assert!(inner_integrand(a, 0.0).is_err());
        assert!(inner_integrand(a, 1.0).is_err());
        assert!(inner_oracle(a, 0.3, 0.0).is_err());
    }
}

//! Named invariant checks shared by `verify` and the acceptance suite.
//! Each check samples its own inputs from a seed and returns a pass/fail
//! outcome with a one-line detail.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use levy2_core::fundamental_domain::{build_f, lattice_membership_oracle, tiling_check, RectilinearDomain};
use levy2_core::geometry::{
    chi, classify_region, enumerate_overlapping_translates, listed_translate_set, tau_of_c1, Branch, ParamPoint,
    RegionLabel,
};
use levy2_core::integrand::{inner_integrand_with, inner_oracle, xi, XDenominator};
use levy2_core::montecarlo::{audit_accepted, estimate_mu7};
use levy2_core::quadrature::{
    integrate_outer, levy_constant, ZetaConstants, PUBLISHED_LEVY, PUBLISHED_MU_S3,
};
use levy2_core::{LevyError, Result};

/// The three worked examples `(a1, a2, b)` with drawn fundamental domains.
pub const FIGURE_INSTANCES: [(f64, f64, f64); 3] = [(0.0, 0.3, 0.3), (-0.9, 0.3, 0.3), (-0.5, 0.05, 0.4)];

/// Vertical-edge tick labels printed on those drawings.
pub const FIGURE_TICKS: [&[f64]; 3] = [&[-0.745, 0.255], &[-0.728, 0.172], &[-0.346, 0.346, -0.154, 0.154]];

pub const AREA_TOL: f64 = 1e-12;
pub const CHI_TOL: f64 = 1e-12;
pub const TICK_TOL: f64 = 5e-4;
pub const XI_LOWER: f64 = 1.0 / 24.0;
pub const INNER_GAP: f64 = 1e-6;
pub const INNER_ORACLE_TOL: f64 = 1e-10;
pub const HEADLINE_REL: f64 = 1e-4;
pub const ASSEMBLY_REL: f64 = 1e-11;
/// Points this close to the boundary of `F` are not compared with the
/// lattice oracle.
pub const BOUNDARY_BAND: f64 = 1e-6;
/// Coefficient range of the lattice oracle.
pub const ORACLE_BOUND: i32 = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    /// Non-gating checks are reported but do not fail `verify`.
    pub gating: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CheckOutcome {
    pub fn line(&self) -> String {
        let tag = match (self.passed, self.gating) {
            (true, _) => "PASS",
            (false, true) => "FAIL",
            (false, false) => "WARN",
        };
        format!("{tag} {} ({:.2}s): {}", self.name, self.seconds, self.detail)
    }
}

fn timed(name: &str, f: impl FnOnce() -> Result<(bool, String)>) -> CheckOutcome {
    let start = Instant::now();
    let (passed, detail) = match f() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    CheckOutcome {
        name: name.to_string(),
        passed,
        gating: true,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Uniform point of the upper base domain.
pub fn sample_base(rng: &mut impl Rng) -> ParamPoint {
    loop {
        let a = ParamPoint::new(rng.random_range(-1.0..0.5), rng.random::<f64>());
        if a.in_omega2_plus() {
            return a;
        }
    }
}

/// Uniform `(a, b)` with its fundamental domain, skipping degenerate draws.
pub fn sample_instance(rng: &mut impl Rng) -> (ParamPoint, f64, RectilinearDomain) {
    loop {
        let a = sample_base(rng);
        let b = rng.random::<f64>();
        if let Ok(f) = build_f(a, b) {
            return (a, b, f);
        }
    }
}

/// Uniform `(a, b)` with `a` in the given region.
pub fn sample_in_region(rng: &mut impl Rng, label: RegionLabel) -> (ParamPoint, f64) {
    loop {
        let (a, b, _) = sample_instance(rng);
        if classify_region(a).is_ok_and(|l| l == label) {
            return (a, b);
        }
    }
}

/// Uniform point of `F` by rejection from its bounding box.
pub fn sample_in_f(rng: &mut impl Rng, f: &RectilinearDomain) -> (f64, f64) {
    loop {
        let c1 = rng.random_range(f.x_min..f.x_max);
        let c3 = rng.random_range(f.y_min..f.y_max);
        if f.contains(c1, c3) {
            return (c1, c3);
        }
    }
}

/// `area(F(a, b)) = 1 - a1 b`.
pub fn area_identity(samples: usize, seed: u64) -> CheckOutcome {
    timed("area(F) = 1 - a1 b", || {
        let mut r = rng(seed, 1);
        let mut worst = 0.0f64;
        for _ in 0..samples {
            let (a, b, f) = sample_instance(&mut r);
            worst = worst.max((f.area() - (1.0 - a.a1 * b)).abs());
        }
        Ok((worst < AREA_TOL, format!("{samples} instances, max |error| {worst:.3e} (limit {AREA_TOL:e})")))
    })
}

/// Lattice translates of `F` cover the plane exactly once.
pub fn tiling(instances: usize, trials: usize, seed: u64) -> CheckOutcome {
    timed("F tiles the plane", || {
        let mut r = rng(seed, 2);
        let mut failures = 0;
        for i in 0..instances {
            let (a, b, _) = sample_instance(&mut r);
            if !tiling_check(a, b, trials, seed.wrapping_add(i as u64))? {
                failures += 1;
            }
        }
        Ok((
            failures == 0,
            format!("{instances} instances x {trials} points, {failures} failures"),
        ))
    })
}

/// `contains` agrees with the lattice oracle. Points of `F` must be
/// admissible for any third vector height `delta` in (0, 1); points off `F`
/// must fail for `delta` just above the cylinder side.
pub fn lattice_consistency(instances: usize, points: usize, seed: u64) -> CheckOutcome {
    timed("F membership = lattice oracle", || {
        let mut r = rng(seed, 3);
        let (mut compared, mut mismatches, mut skipped) = (0, 0, 0);
        for _ in 0..instances {
            let (a, b, f) = sample_instance(&mut r);
            for _ in 0..points {
                let c1 = r.random_range(-1.0..1.0);
                let c3 = r.random_range(-1.0..1.0);
                if f.boundary_distance(c1, c3) < BOUNDARY_BAND {
                    skipped += 1;
                    continue;
                }
                let side = (1.0 - c1 * c1).sqrt();
                let inside = f.contains(c1, c3);
                let near: f64 = r.random_range(1e-9..1e-6);
                let far: f64 = r.random_range(1e-6..1.0);
                compared += 1;
                if lattice_membership_oracle(a, b, c1, -(side + near), c3, ORACLE_BOUND)? != inside
                    || (inside && !lattice_membership_oracle(a, b, c1, -(side + far), c3, ORACLE_BOUND)?)
                {
                    mismatches += 1;
                }
            }
        }
        Ok((
            mismatches == 0,
            format!("{compared} points compared, {mismatches} mismatches, {skipped} in boundary band"),
        ))
    })
}

/// Both circle intersections lie on both unit circles.
pub fn chi_on_circles(samples: usize, seed: u64) -> CheckOutcome {
    timed("chi on both circles", || {
        let mut r = rng(seed, 4);
        let mut worst = 0.0f64;
        for _ in 0..samples {
            let a = loop {
                let a = ParamPoint::new(r.random_range(-2.0..2.0), r.random_range(-2.0..2.0));
                if a.norm() > 1e-3 && a.norm() < 2.0 - 1e-3 {
                    break a;
                }
            };
            for branch in [Branch::Plus, Branch::Minus] {
                let z = chi(a, branch)?;
                worst = worst.max((z.norm() - 1.0).abs()).max((z.dist(a) - 1.0).abs());
            }
        }
        Ok((worst < CHI_TOL, format!("{samples} points, max deviation {worst:.3e}")))
    })
}

/// Vertical edges of the figure domains sit at the printed tick labels.
pub fn figure_ticks() -> CheckOutcome {
    timed("edge abscissas match figure ticks", || {
        let mut worst = 0.0f64;
        for ((a1, a2, b), ticks) in FIGURE_INSTANCES.iter().zip(FIGURE_TICKS) {
            let xs = build_f(ParamPoint::new(*a1, *a2), *b)?.vertical_edge_abscissas();
            for t in ticks {
                let d = xs.iter().map(|x| (x - t).abs()).fold(f64::INFINITY, f64::min);
                worst = worst.max(d);
            }
        }
        Ok((worst < TICK_TOL, format!("max distance to a tick {worst:.2e} (limit {TICK_TOL:e})")))
    })
}

/// The short list of overlapping translates equals the exhaustive one.
pub fn translate_list(instances: usize, seed: u64) -> CheckOutcome {
    timed("translate list = brute force", || {
        let mut r = rng(seed, 5);
        let mut differ = 0;
        let mut example = None;
        for _ in 0..instances {
            let (a, b, _) = sample_instance(&mut r);
            let brute = enumerate_overlapping_translates(a, b, 4);
            let short = listed_translate_set(a, b);
            if brute != short {
                differ += 1;
                if example.is_none() {
                    let extra: Vec<_> = brute.iter().filter(|p| !short.contains(p)).collect();
                    example = Some(format!("a = {a}, b = {b:.4}: brute force adds {extra:?}"));
                }
            }
        }
        let mut detail = format!("{instances} instances, {differ} differ");
        if let Some(e) = example {
            detail.push_str(&format!("; first: {e}"));
        }
        Ok((differ == 0, detail))
    })
}

/// `Xi > 1/24` on points of `F`.
pub fn xi_lower_bound(samples: usize, seed: u64) -> CheckOutcome {
    timed("Xi > 1/24 on F", || {
        let mut r = rng(seed, 6);
        let mut min = f64::INFINITY;
        for _ in 0..samples {
            let (a, b, f) = sample_instance(&mut r);
            let (c1, c3) = sample_in_f(&mut r, &f);
            min = min.min(xi(a, b, c1, c3)?);
        }
        Ok((min > XI_LOWER, format!("{samples} points, min Xi {min:.6}")))
    })
}

/// `sqrt(D) + a2 b + phi_- tau > 0` on points of `F`.
pub fn log_argument_positive(samples: usize, seed: u64) -> CheckOutcome {
    timed("sqrt(D) + a2 b + phi_- tau > 0", || {
        let mut r = rng(seed, 7);
        let mut min = f64::INFINITY;
        for _ in 0..samples {
            let (a, b, f) = sample_instance(&mut r);
            let (c1, c3) = sample_in_f(&mut r, &f);
            let s = 1.0 - a.a1 * b;
            let d = s * s + a.a2 * a.a2 * (b * b - c3 * c3);
            if !(d > 0.0) {
                return Ok((false, format!("D = {d} <= 0 at a = {a}, b = {b}, c3 = {c3}")));
            }
            let phi_minus = s - a.a2 * c3;
            min = min.min(d.sqrt() + a.a2 * b + phi_minus * tau_of_c1(c1)?);
        }
        Ok((min > 0.0, format!("{samples} points, min {min:.6}")))
    })
}

/// Closed-form inner integrand against direct quadrature over `F`.
pub fn inner_equivalence(per_region: usize, seed: u64, form: XDenominator) -> CheckOutcome {
    timed("inner integrand = quadrature over F", || {
        let mut r = rng(seed, 8);
        let mut points: Vec<(ParamPoint, f64)> =
            FIGURE_INSTANCES.iter().map(|&(a1, a2, b)| (ParamPoint::new(a1, a2), b)).collect();
        for label in RegionLabel::ALL {
            points.extend((0..per_region).map(|_| sample_in_region(&mut r, label)));
        }
        let mut worst = 0.0f64;
        let mut broken = 0;
        for &(a, b) in &points {
            let oracle = inner_oracle(a, b, INNER_ORACLE_TOL)?;
            match inner_integrand_with(a, b, form) {
                Ok(v) if v.is_finite() => worst = worst.max(((v - oracle) / oracle).abs()),
                _ => broken += 1,
            }
        }
        let n = points.len();
        Ok((
            broken == 0 && worst < INNER_GAP,
            format!("{n} points ({form:?} form), max relative gap {worst:.3e}, {broken} not evaluable"),
        ))
    })
}

/// The quadrature reproduces the published `3 mu_S`.
pub fn quadrature_headline(tol: f64) -> CheckOutcome {
    timed("quadrature reproduces published 3 mu_S", || {
        let q = integrate_outer(tol, 100_000_000)?;
        let rel = (q.value - PUBLISHED_MU_S3) / PUBLISHED_MU_S3;
        Ok((
            rel.abs() < HEADLINE_REL,
            format!("3 mu_S = {:.15} +/- {:.1e}, relative deviation {rel:.3e}", q.value, q.error_estimate),
        ))
    })
}

/// Printed zeta numerals reproduce the published constant.
pub fn constant_assembly() -> CheckOutcome {
    timed("published constant from printed numerals", || {
        let printed = levy_constant(PUBLISHED_MU_S3, ZetaConstants::PRINTED)?;
        let standard = levy_constant(PUBLISHED_MU_S3, ZetaConstants::STANDARD)?;
        let rel = (printed - PUBLISHED_LEVY) / PUBLISHED_LEVY;
        Ok((
            rel.abs() < ASSEMBLY_REL,
            format!("printed numerals {printed:.14} (rel {rel:.1e}); standard zeta values {standard:.14}"),
        ))
    })
}

/// `3 x` the Monte Carlo estimate is within 3 standard errors of the
/// quadrature, and audited accepted samples pass the lattice oracle.
pub fn mc_vs_quadrature(samples: u64, seed: u64) -> CheckOutcome {
    timed("Monte Carlo agrees with quadrature", || {
        let q = integrate_outer(1e-9, 100_000_000)?;
        let mc = estimate_mu7(samples, seed)?;
        if mc.degenerate {
            return Err(LevyError::Degenerate("no Monte Carlo sample accepted".into()));
        }
        let z = (3.0 * mc.mean - q.value) / (3.0 * mc.stderr);
        let audit = audit_accepted(samples.min(10_000_000), seed, 1e-3)?;
        Ok((
            z.abs() <= 3.0 && audit.failures == 0,
            format!(
                "3 x MC = {:.6} +/- {:.6} vs {:.9}, z = {z:.2}; audit {}/{} failures",
                3.0 * mc.mean,
                3.0 * mc.stderr,
                q.value,
                audit.failures,
                audit.checked
            ),
        ))
    })
}

/// Checks run by `verify`, cheap at `quick` and at full sample counts
/// otherwise.
pub fn suite(full: bool, seed: u64, form: XDenominator) -> Vec<CheckOutcome> {
    let scale = if full { 10 } else { 1 };
    let mut out = vec![
        chi_on_circles(1000 * scale, seed),
        figure_ticks(),
        area_identity(1000 * scale, seed),
        tiling(30 * scale, 50, seed),
        lattice_consistency(100 * scale, 4, seed),
        xi_lower_bound(10_000 * scale, seed),
        log_argument_positive(10_000 * scale, seed),
        inner_equivalence(if full { 100 } else { 5 }, seed, form),
        constant_assembly(),
        quadrature_headline(1e-5),
    ];
    if full {
        out.push(mc_vs_quadrature(100_000_000, seed));
    }
    let mut listed = translate_list(100 * scale, seed);
    listed.gating = false;
    out.push(listed);
    out
}

//! Acceptance criteria. Every test writes one `PASS`/`FAIL` line to stderr
//! (bypassing libtest's capture) and then asserts the same condition.

use std::io::Write;
use std::time::{Duration, Instant};

use levy2_cli::checks::{self, CheckOutcome};
use levy2_cli::commands::{self, ComputeArgs, McArgs, SimArgs};
use levy2_cli::report::Status;
use levy2_core::integrand::XDenominator;
use levy2_core::quadrature::{levy_constant, ZetaConstants, PUBLISHED_LEVY, PUBLISHED_MU_S3};

const SEED: u64 = 20_240_601;

fn line(label: &str, passed: bool, detail: &str) {
    let tag = if passed { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "{tag} [{label}] {detail}");
}

fn finish(label: &str, passed: bool, detail: String) {
    line(label, passed, &detail);
    assert!(passed, "{label}: {detail}");
}

fn check(label: &str, c: CheckOutcome, limit: Duration) {
    let in_time = c.seconds <= limit.as_secs_f64();
    finish(
        label,
        c.passed && in_time,
        format!("{}: {} ({:.1}s, limit {}s)", c.name, c.detail, c.seconds, limit.as_secs()),
    );
}

#[test]
fn criterion_1_quadrature_headline() {
    let start = Instant::now();
    let r = commands::compute(&ComputeArgs {
        tol: 1e-5,
        ..Default::default()
    })
    .unwrap();
    let value = r.value.unwrap();
    let rel = (value - PUBLISHED_MU_S3) / PUBLISHED_MU_S3;
    let secs = start.elapsed().as_secs_f64();
    finish(
        "1 quadrature",
        r.status == Status::Ok && rel.abs() <= 1e-4 && secs <= 1800.0,
        format!("3 mu_S = {value:.15} +/- {:.1e}, relative deviation {rel:.2e} (limit 1e-4), {secs:.2}s", r.error.unwrap()),
    );
}

#[test]
fn criterion_2_constant_assembly() {
    let printed = levy_constant(PUBLISHED_MU_S3, ZetaConstants::PRINTED).unwrap();
    let standard = levy_constant(PUBLISHED_MU_S3, ZetaConstants::STANDARD).unwrap();
    let rel = (printed - PUBLISHED_LEVY) / PUBLISHED_LEVY;
    finish(
        "2 constant assembly",
        rel.abs() <= 1e-11,
        format!("printed numerals give {printed:.14} (relative {rel:.1e}, limit 1e-11); standard zeta values give {standard:.14}"),
    );
}

#[test]
fn criterion_3_monte_carlo_vs_quadrature() {
    let start = Instant::now();
    let r = commands::oracle_mc(&McArgs {
        samples: 100_000_000,
        seed: SEED,
        ..Default::default()
    })
    .unwrap();
    let secs = start.elapsed().as_secs_f64();
    let (value, err) = (r.value.unwrap(), r.error.unwrap());
    let z = r.results["z_vs_quadrature"].as_f64().unwrap();
    let band = 3.0 * err / value;
    let audit = &r.results["audit"];
    finish(
        "3 monte carlo",
        r.status == Status::Ok && z.abs() <= 3.0 && band <= 0.01 && secs <= 900.0,
        format!(
            "3 x MC = {value:.6} +/- {err:.6} vs quadrature {:.9}: z = {z:.2}, 3-sigma band {:.3}%; audit {} failures of {}; {secs:.1}s",
            r.results["quadrature_mu_s3"].as_f64().unwrap(),
            100.0 * band,
            audit["failures"],
            audit["checked"]
        ),
    );
}

#[test]
fn criterion_4_inner_integrand_oracle() {
    check(
        "4 inner oracle",
        checks::inner_equivalence(100, SEED, XDenominator::default()),
        Duration::from_secs(300),
    );
}

const SUITE_LIMIT: Duration = Duration::from_secs(60);

#[test]
fn criterion_5a_area() {
    check("5a area", checks::area_identity(10_000, SEED), SUITE_LIMIT);
}

#[test]
fn criterion_5b_tiling() {
    check("5b tiling", checks::tiling(300, 100, SEED), SUITE_LIMIT);
}

#[test]
fn criterion_5c_lattice_oracle() {
    check("5c lattice oracle", checks::lattice_consistency(1000, 1, SEED), SUITE_LIMIT);
}

#[test]
fn criterion_5d_chi() {
    check("5d chi", checks::chi_on_circles(10_000, SEED), SUITE_LIMIT);
}

#[test]
fn criterion_5e_figure_ticks() {
    check("5e figure ticks", checks::figure_ticks(), SUITE_LIMIT);
}

#[test]
fn criterion_5f_translate_list() {
    check("5f translate list", checks::translate_list(1000, SEED), SUITE_LIMIT);
}

#[test]
fn criterion_5g_xi_bound() {
    check("5g Xi bound", checks::xi_lower_bound(100_000, SEED), SUITE_LIMIT);
}

#[test]
fn criterion_5h_log_argument() {
    check("5h log argument", checks::log_argument_positive(100_000, SEED), SUITE_LIMIT);
}

#[test]
fn criterion_6_calibration_one_dim() {
    let r = commands::simulate(&SimArgs::new(1, 10_000, 1_000_000, SEED)).unwrap();
    let rel = r.results["relative_deviation"].as_f64().unwrap();
    finish(
        "6 calibration d=1",
        rel.abs() <= 0.005 && r.wall_time_s <= 600.0,
        format!(
            "K = {:.6} +/- {:.6} vs pi^2/(12 ln 2) = {:.6}: relative deviation {:.3}% (limit 0.5%), {:.1}s",
            r.value.unwrap(),
            r.error.unwrap(),
            commands::LEVY_1D,
            100.0 * rel,
            r.wall_time_s
        ),
    );
}

#[test]
fn criterion_7_arbitration_two_dim() {
    // the command-line defaults: 2e5 vectors up to q = 1e6, window from q = 300
    let r = commands::simulate(&SimArgs::new(2, 200_000, 1_000_000, SEED)).unwrap();
    let rel_se = r.results["relative_stderr"].as_f64().unwrap();
    let within = r.results["within_3_sigma"].as_array().unwrap();
    let c = &r.results["candidates"];
    finish(
        "7 arbitration d=2",
        rel_se <= 0.0015 && !within.is_empty() && r.wall_time_s <= 3600.0,
        format!(
            "K = {:.6} +/- {:.3}%; z = {:.2} vs published {:.14}, z = {:.2} vs standard-zeta {:.14}; {}; {:.0}s",
            r.value.unwrap(),
            100.0 * rel_se,
            c["published"]["z"].as_f64().unwrap(),
            c["published"]["value"].as_f64().unwrap(),
            c["standard_zeta"]["z"].as_f64().unwrap(),
            c["standard_zeta"]["value"].as_f64().unwrap(),
            r.results["verdict"].as_str().unwrap(),
            r.wall_time_s
        ),
    );
}

#[test]
fn criterion_8_negative_control() {
    let c = checks::inner_equivalence(100, SEED, XDenominator::Literal);
    finish(
        "8 negative control",
        !c.passed,
        format!("criterion 4 with the printed x-denominator: {}", c.detail),
    );
}

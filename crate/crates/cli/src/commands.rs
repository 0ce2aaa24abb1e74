//! Subcommand arguments and their implementations. Every command returns a
//! [`RunReport`]; `main` prints it and maps its status to the exit code.

use std::f64::consts::{LN_2, PI};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use levy2_core::diophantine::{default_q_lo, records_of, sample_runs, summarize, Estimator, LevyConfig};
use levy2_core::fundamental_domain::build_f;
use levy2_core::geometry::{classify_region, ParamPoint, RegionLabel};
use levy2_core::integrand::{inner_integrand_with, inner_oracle_estimate, XDenominator};
use levy2_core::montecarlo::{audit_accepted, estimate_mu7, estimate_mu7_stratified};
use levy2_core::quadrature::{
    integrate_outer, levy_constant, run_pieces, MuIntegrand, OuterConfig, ZetaConstants, PUBLISHED_LEVY,
    PUBLISHED_MU_S3,
};

use crate::checks;
use crate::error::CliError;
use crate::report::{RunReport, Status};

#[derive(Debug, Parser)]
#[command(name = "levy2", version, about = "Numerical experiments for the two-dimensional Euclidean Lévy constant")]
pub struct Cli {
    /// Worker threads (default: $LEVY_THREADS, then all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate 3 mu_S(Omega_7) by adaptive quadrature and assemble the constant.
    Compute(ComputeArgs),
    /// Monte Carlo estimate of mu_S(Omega_7) from the seven-parameter density.
    OracleMc(McArgs),
    /// Compare the closed-form inner integrand with quadrature over F(a, b).
    OracleInner(InnerArgs),
    /// Estimate the Lévy constant from best approximations of random vectors.
    Simulate(SimArgs),
    /// Run the invariant suite.
    Verify(VerifyArgs),
    /// Describe the fundamental domain F(a, b).
    Domain(DomainArgs),
}

/// Accepts plain integers and integral scientific notation such as `1e7`.
pub fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    let x: f64 = s.parse().map_err(|_| format!("not a count: {s}"))?;
    if x.is_finite() && x >= 0.0 && x.fract() == 0.0 && x < 9.2e18 {
        Ok(x as u64)
    } else {
        Err(format!("not a nonnegative integer: {s}"))
    }
}

fn parse_form(s: &str) -> Result<XDenominator, String> {
    s.parse().map_err(|e: levy2_core::LevyError| e.to_string())
}

fn parse_estimator(s: &str) -> Result<Estimator, String> {
    s.parse().map_err(|e: levy2_core::LevyError| e.to_string())
}

#[derive(Debug, Clone, Args)]
pub struct ComputeArgs {
    /// Target absolute error of 3 mu_S.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Integrand evaluation budget.
    #[arg(long, default_value = "100000000", value_parser = parse_count)]
    pub budget: u64,
    /// Integrate one region only.
    #[arg(long)]
    pub region: Option<RegionLabel>,
}

impl Default for ComputeArgs {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            budget: 100_000_000,
            region: None,
        }
    }
}

pub fn compute(args: &ComputeArgs) -> Result<RunReport, CliError> {
    if !(args.tol > 0.0) {
        return Err(CliError::Usage(format!("--tol must be positive, got {}", args.tol)));
    }
    let start = Instant::now();
    let cfg = OuterConfig {
        tol: args.tol,
        budget: args.budget,
        region: args.region,
    };
    let q = run_pieces(&cfg, &MuIntegrand::default())?;
    let mut r = RunReport::new("compute");
    r.param("tol", args.tol)
        .param("budget", args.budget)
        .param("region", args.region.map(|l| l.to_string()));
    r.value = Some(q.value);
    r.error = Some(q.error_estimate);
    r.samples_or_evals = q.evaluations;
    r.result("region_breakdown", &q.region_breakdown)
        .result("max_depth", q.max_depth)
        .result("converged", q.converged);
    if args.region.is_none() {
        r.result("mu_s3", q.value)
            .result("levy_standard_zeta", levy_constant(q.value, ZetaConstants::STANDARD)?)
            .result("levy_printed_numerals", levy_constant(q.value, ZetaConstants::PRINTED)?)
            .result("published_mu_s3", PUBLISHED_MU_S3)
            .result("published_levy", PUBLISHED_LEVY)
            .result("relative_deviation_from_published", (q.value - PUBLISHED_MU_S3) / PUBLISHED_MU_S3);
    }
    if !q.converged || q.error_estimate > args.tol {
        r.status = Status::BudgetExceeded;
    }
    r.wall_time_s = start.elapsed().as_secs_f64();
    Ok(r)
}

#[derive(Debug, Clone, Args)]
pub struct McArgs {
    #[arg(long, default_value = "10000000", value_parser = parse_count)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Draw base points region by region in proportion to area.
    #[arg(long)]
    pub stratified: bool,
    /// Fraction of accepted samples replayed through the lattice oracle.
    #[arg(long, default_value_t = 1e-3)]
    pub audit_rate: f64,
}

impl Default for McArgs {
    fn default() -> Self {
        Self {
            samples: 10_000_000,
            seed: 0,
            stratified: false,
            audit_rate: 1e-3,
        }
    }
}

pub fn oracle_mc(args: &McArgs) -> Result<RunReport, CliError> {
    if args.samples < 10_000 {
        return Err(CliError::Usage(format!("--samples must be at least 1e4, got {}", args.samples)));
    }
    let start = Instant::now();
    let mc = if args.stratified {
        estimate_mu7_stratified(args.samples, args.seed)?
    } else {
        estimate_mu7(args.samples, args.seed)?
    };
    let audit = if args.audit_rate > 0.0 && !args.stratified {
        Some(audit_accepted(args.samples, args.seed, args.audit_rate)?)
    } else {
        None
    };
    let quad = integrate_outer(1e-9, 100_000_000)?;
    let z = (3.0 * mc.mean - quad.value) / (3.0 * mc.stderr);

    let mut r = RunReport::new("oracle-mc");
    r.param("samples", args.samples)
        .param("seed", args.seed)
        .param("stratified", args.stratified)
        .param("audit_rate", args.audit_rate);
    r.seed = Some(args.seed);
    r.value = Some(3.0 * mc.mean);
    r.error = Some(3.0 * mc.stderr);
    r.samples_or_evals = mc.samples;
    r.result("mu7_mean", mc.mean)
        .result("mu7_stderr", mc.stderr)
        .result("accepted", mc.accepted)
        .result("degenerate", mc.degenerate)
        .result("quadrature_mu_s3", quad.value)
        .result("z_vs_quadrature", z)
        .result("within_3_sigma", z.abs() <= 3.0)
        .result("audit", audit);
    if mc.degenerate || audit.is_some_and(|a| a.failures > 0) {
        r.status = Status::VerifyFailed;
    }
    r.wall_time_s = start.elapsed().as_secs_f64();
    Ok(r)
}

#[derive(Debug, Clone, Args)]
pub struct InnerArgs {
    #[arg(allow_hyphen_values = true)]
    pub a1: f64,
    pub a2: f64,
    pub b: f64,
    /// Relative tolerance of the quadrature over F.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Largest acceptable relative gap.
    #[arg(long, default_value_t = checks::INNER_GAP)]
    pub max_gap: f64,
    /// `corrected` or `literal`.
    #[arg(long, value_parser = parse_form)]
    pub x_denominator: Option<XDenominator>,
}

pub fn oracle_inner(args: &InnerArgs) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let a = ParamPoint::new(args.a1, args.a2);
    let form = args.x_denominator.unwrap_or_default();
    let label = classify_region(a)?;
    let oracle = inner_oracle_estimate(a, args.b, args.tol)?;
    let closed = inner_integrand_with(a, args.b, form);

    let mut r = RunReport::new("oracle-inner");
    r.param("a1", args.a1)
        .param("a2", args.a2)
        .param("b", args.b)
        .param("tol", args.tol)
        .param("max_gap", args.max_gap)
        .param("x_denominator", form);
    r.samples_or_evals = oracle.evals;
    r.result("region", label.as_str())
        .result("oracle", oracle.value)
        .result("oracle_error", oracle.error);
    match closed {
        Ok(v) => {
            let gap = ((v - oracle.value) / oracle.value).abs();
            r.value = Some(v);
            r.error = Some(gap);
            r.result("closed_form", v).result("relative_gap", gap);
            if !(gap < args.max_gap) {
                r.status = Status::VerifyFailed;
            }
        }
        Err(e) => {
            r.result("closed_form_error", e.to_string());
            r.status = Status::VerifyFailed;
        }
    }
    r.wall_time_s = start.elapsed().as_secs_f64();
    Ok(r)
}

/// `pi^2 / (12 ln 2)`.
pub const LEVY_1D: f64 = PI * PI / (12.0 * LN_2);

#[derive(Debug, Clone, Args)]
pub struct SimArgs {
    /// Dimension, 1 or 2.
    #[arg(short = 'd', long = "dim", default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value = "200000", value_parser = parse_count)]
    pub thetas: u64,
    #[arg(long, default_value = "1000000", value_parser = parse_count)]
    pub qmax: u64,
    /// Records skipped by the slope estimator; vectors with fewer than
    /// burn-in + 2 records are redrawn.
    #[arg(long, default_value_t = 3)]
    pub burn_in: usize,
    /// Lower end of the counting window of the window estimator
    /// (default 30 in one dimension, 300 in two).
    #[arg(long, value_parser = parse_count)]
    pub q_lo: Option<u64>,
    /// `window` or `slope`.
    #[arg(long, default_value = "window", value_parser = parse_estimator)]
    pub estimator: Estimator,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write every record as CSV.
    #[arg(long)]
    pub dump: Option<PathBuf>,
}

impl SimArgs {
    pub fn new(dim: usize, thetas: u64, qmax: u64, seed: u64) -> Self {
        Self {
            dim,
            thetas,
            qmax,
            burn_in: 3,
            q_lo: None,
            estimator: Estimator::WindowCount,
            seed,
            dump: None,
        }
    }

    pub fn config(&self) -> LevyConfig {
        LevyConfig {
            burn_in: self.burn_in,
            q_lo: self.q_lo.unwrap_or(default_q_lo(self.dim)),
            estimator: self.estimator,
            ..LevyConfig::new(self.dim, self.thetas, self.qmax, self.seed)
        }
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn simulate(args: &SimArgs) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let cfg = args.config();
    let runs = sample_runs(&cfg)?;
    let est = summarize(&cfg, &runs)?;

    if let Some(path) = &args.dump {
        let err = io_err(path);
        let mut w = BufWriter::new(File::create(path).map_err(&err)?);
        let header = if args.dim == 1 { "theta_1,n,q,dist" } else { "theta_1,theta_2,n,q,dist" };
        writeln!(w, "{header}").map_err(&err)?;
        for run in &runs {
            let theta: Vec<String> = run.theta.to_f64().iter().map(|x| format!("{x:e}")).collect();
            for (n, rec) in records_of(&run.theta, cfg.q_max).iter().enumerate() {
                writeln!(w, "{},{},{},{:e}", theta.join(","), n + 1, rec.q, rec.dist).map_err(&err)?;
            }
        }
        w.flush().map_err(&err)?;
    }

    let mut r = RunReport::new("simulate");
    r.param("dim", args.dim)
        .param("thetas", args.thetas)
        .param("qmax", args.qmax)
        .param("burn_in", args.burn_in)
        .param("q_lo", cfg.q_lo)
        .param("estimator", args.estimator)
        .param("seed", args.seed)
        .param("dump", args.dump.as_ref().map(|p| p.display().to_string()));
    r.seed = Some(args.seed);
    r.value = Some(est.mean);
    r.error = Some(est.stderr);
    r.samples_or_evals = est.thetas;
    r.result("relative_stderr", est.stderr / est.mean)
        .result("resampled", est.resampled)
        .result("mean_records", est.mean_records);
    if args.dim == 1 {
        r.result("reference", LEVY_1D)
            .result("relative_deviation", (est.mean - LEVY_1D) / LEVY_1D)
            .result("z", (est.mean - LEVY_1D) / est.stderr);
    } else {
        let candidates = [
            ("published", PUBLISHED_LEVY),
            ("standard_zeta", levy_constant(PUBLISHED_MU_S3, ZetaConstants::STANDARD)?),
        ];
        let mut table = serde_json::Map::new();
        let mut within = Vec::new();
        for (name, value) in candidates {
            let z = (est.mean - value) / est.stderr;
            if z.abs() <= 3.0 {
                within.push(name);
            }
            table.insert(name.into(), json!({ "value": value, "z": z }));
        }
        let verdict = match within.as_slice() {
            [] => "estimate is more than 3 sigma from both candidates".to_string(),
            [one] => format!("consistent with {one} only"),
            _ => "consistent with both candidates; not resolved at this budget".to_string(),
        };
        r.result("candidates", table)
            .result("within_3_sigma", &within)
            .result("verdict", verdict);
    }
    r.wall_time_s = start.elapsed().as_secs_f64();
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Level {
    Quick,
    Full,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(value_enum, default_value_t = Level::Quick)]
    pub level: Level,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `corrected` or `literal`.
    #[arg(long, value_parser = parse_form)]
    pub x_denominator: Option<XDenominator>,
}

pub fn verify(args: &VerifyArgs) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let form = args.x_denominator.unwrap_or_default();
    let outcomes = checks::suite(args.level == Level::Full, args.seed, form);
    let failed = outcomes.iter().filter(|c| c.gating && !c.passed).count();

    let mut r = RunReport::new("verify");
    r.param("level", format!("{:?}", args.level).to_lowercase())
        .param("seed", args.seed)
        .param("x_denominator", form);
    r.seed = Some(args.seed);
    r.value = Some((outcomes.len() - failed) as f64);
    r.samples_or_evals = outcomes.len() as u64;
    r.result("failed", failed).result("checks", &outcomes);
    if failed > 0 {
        r.status = Status::VerifyFailed;
    }
    r.wall_time_s = start.elapsed().as_secs_f64();
    Ok(r)
}

#[derive(Debug, Clone, Args)]
pub struct DomainArgs {
    #[arg(allow_hyphen_values = true)]
    pub a1: f64,
    pub a2: f64,
    pub b: f64,
    /// Write the boundary vertices as CSV.
    #[arg(long)]
    pub dump: Option<PathBuf>,
}

pub fn domain(args: &DomainArgs) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let a = ParamPoint::new(args.a1, args.a2);
    let f = build_f(a, args.b)?;
    let vertices = f.vertices();
    if let Some(path) = &args.dump {
        let err = io_err(path);
        let mut w = BufWriter::new(File::create(path).map_err(&err)?);
        writeln!(w, "x,y").map_err(&err)?;
        for (x, y) in &vertices {
            writeln!(w, "{x:e},{y:e}").map_err(&err)?;
        }
        w.flush().map_err(&err)?;
    }
    let mut r = RunReport::new("domain");
    r.param("a1", args.a1)
        .param("a2", args.a2)
        .param("b", args.b)
        .param("dump", args.dump.as_ref().map(|p| p.display().to_string()));
    r.value = Some(f.area());
    r.error = Some((f.area() - (1.0 - a.a1 * args.b)).abs());
    r.samples_or_evals = vertices.len() as u64;
    r.result("region", classify_region(a)?.as_str())
        .result("bounding_box", [f.x_min, f.x_max, f.y_min, f.y_max])
        .result("vertices", &vertices)
        .result("vertical_edges", f.vertical_edge_abscissas());
    r.wall_time_s = start.elapsed().as_secs_f64();
    Ok(r)
}

pub fn run(command: &Command) -> Result<RunReport, CliError> {
    match command {
        Command::Compute(a) => compute(a),
        Command::OracleMc(a) => oracle_mc(a),
        Command::OracleInner(a) => oracle_inner(a),
        Command::Simulate(a) => simulate(a),
        Command::Verify(a) => verify(a),
        Command::Domain(a) => domain(a),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_accept_scientific_notation() {
        assert_eq!(parse_count("1e7"), Ok(10_000_000));
        assert_eq!(parse_count("20000"), Ok(20_000));
        assert!(parse_count("1.5").is_err());
        assert!(parse_count("-3").is_err());
    }

    #[test]
    fn cli_parses() {
        let cli = Cli::try_parse_from(["levy2", "oracle-inner", "-0.9", "0.3", "0.3", "--x-denominator", "literal"]).unwrap();
        match cli.command {
            Command::OracleInner(a) => {
                assert_eq!(a.a1, -0.9);
                assert_eq!(a.x_denominator, Some(XDenominator::Literal));
            }
            other => panic!("{other:?}"),
        }
        let cli = Cli::try_parse_from(["levy2", "--threads", "2", "simulate", "-d", "1", "--qmax", "1e6"]).unwrap();
        assert_eq!(cli.threads, Some(2));
        assert!(Cli::try_parse_from(["levy2", "compute", "--region", "IV"]).is_err());
    }

    #[test]
    fn compute_region_matches_breakdown() {
        let full = compute(&ComputeArgs::default()).unwrap();
        let part = compute(&ComputeArgs {
            region: Some(RegionLabel::III),
            ..Default::default()
        })
        .unwrap();
        let from_full = full.results["region_breakdown"]["III"].as_f64().unwrap();
        assert!((part.value.unwrap() - from_full).abs() < 1e-9);
        assert_eq!(full.status, Status::Ok);
    }

    #[test]
    fn coarse_tolerance_reports_larger_error() {
        let coarse = compute(&ComputeArgs { tol: 1e-2, ..Default::default() }).unwrap();
        let fine = compute(&ComputeArgs { tol: 1e-9, ..Default::default() }).unwrap();
        assert!(coarse.error.unwrap() >= fine.error.unwrap());
        assert!(coarse.samples_or_evals <= fine.samples_or_evals);
    }

    #[test]
    fn literal_form_fails_oracle_inner() {
        let args = InnerArgs {
            a1: -0.9,
            a2: 0.3,
            b: 0.3,
            tol: 1e-10,
            max_gap: 1e-6,
            x_denominator: Some(XDenominator::Literal),
        };
        assert_eq!(oracle_inner(&args).unwrap().status, Status::VerifyFailed);
        let ok = oracle_inner(&InnerArgs {
            x_denominator: Some(XDenominator::Corrected),
            ..args
        })
        .unwrap();
        assert_eq!(ok.status, Status::Ok);
    }
}

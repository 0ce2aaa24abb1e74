//! Best simultaneous approximations of random vectors by brute force, and
//! the empirical Lévy constant they give.
//!
//! A component `theta` is held as the integer `t = theta * 2^64`, so
//! `q theta mod 1` is `q * t` with wrapping and the signed distance to the
//! nearest integer is that word reinterpreted as `i64`. Every comparison in
//! the scan is exact; sampled components carry 53 significant bits, so
//! `t / 2^64` is the `f64` value reported.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LevyError, Result};

const SCALE: f64 = 18_446_744_073_709_551_616.0; // 2^64

/// Largest supported dimension.
pub const MAX_DIM: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestApproxRecord {
    pub q: u64,
    pub p: Vec<i64>,
    /// `|q theta - p|`, Euclidean.
    pub dist: f64,
}

/// A vector of components in `[0, 1)` in fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixedVector {
    words: [u64; MAX_DIM],
    dim: usize,
}

impl FixedVector {
    /// Rounds each component to the nearest multiple of `2^-64`.
    pub fn from_f64(theta: &[f64]) -> Result<Self> {
        if theta.is_empty() || theta.len() > MAX_DIM {
            return Err(LevyError::Config(format!("dimension must be 1 or 2, got {}", theta.len())));
        }
        let mut words = [0; MAX_DIM];
        for (w, &x) in words.iter_mut().zip(theta) {
            if !(0.0..1.0).contains(&x) {
                return Err(LevyError::Config(format!("component {x} outside [0, 1)")));
            }
            // x * 2^64 is exact; the cast saturates only for x within 2^-65 of 1
            *w = (x * SCALE) as u64;
        }
        Ok(Self { words, dim: theta.len() })
    }

    pub fn from_words(words: &[u64]) -> Result<Self> {
        if words.is_empty() || words.len() > MAX_DIM {
            return Err(LevyError::Config(format!("dimension must be 1 or 2, got {}", words.len())));
        }
        let mut w = [0; MAX_DIM];
        w[..words.len()].copy_from_slice(words);
        Ok(Self { words: w, dim: words.len() })
    }

    /// Uniform with 53 random bits per component.
    pub fn random<R: Rng>(rng: &mut R, dim: usize) -> Self {
        let mut words = [0; MAX_DIM];
        for w in words.iter_mut().take(dim) {
            *w = rng.random::<u64>() & !((1 << 11) - 1);
        }
        Self { words, dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn words(&self) -> &[u64] {
        &self.words[..self.dim]
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.words().iter().map(|&w| w as f64 / SCALE).collect()
    }

    /// `1 - theta` componentwise (mod 1).
    pub fn reflect(&self) -> Self {
        let mut words = self.words;
        for w in words.iter_mut().take(self.dim) {
            *w = w.wrapping_neg();
        }
        Self { words, dim: self.dim }
    }

    fn nearest(&self, q: u64) -> Vec<i64> {
        self.words()
            .iter()
            .map(|&w| ((q as u128 * w as u128 + (1u128 << 63)) >> 64) as i64)
            .collect()
    }
}

fn signed_abs(x: u64) -> u64 {
    (x as i64).unsigned_abs()
}

/// Steps checked per branch in the scan.
const CHUNK: u64 = 8;

/// Calls `visit(q, |q t mod 2^64|)` for every `q <= q_max` whose first
/// coordinate is within `bound` of an integer (in units of `2^-64`).
/// `visit` returns the new bound, or `None` to stop.
fn scan_first_coordinate(t: u64, q_max: u64, mut bound: u64, mut visit: impl FnMut(u64, u64) -> Option<u64>) {
    let mut x = 0u64;
    let mut q = 1u64;
    // wide windows: plain test, no overflow in `2 * bound`
    while q <= q_max && bound >= 1 << 62 {
        x = x.wrapping_add(t);
        let dx = signed_abs(x);
        if dx <= bound {
            match visit(q, dx) {
                Some(b) => bound = b,
                None => return,
            }
        }
        q += 1;
    }
    // |x| <= bound iff x + bound <= 2 bound (mod 2^64)
    let mut span = 2 * bound;
    loop {
        if q + CHUNK <= q_max + 1 {
            let mut y = x;
            let mut hit = false;
            for _ in 0..CHUNK {
                y = y.wrapping_add(t);
                hit |= y.wrapping_add(bound) <= span;
            }
            if !hit {
                x = y;
                q += CHUNK;
                continue;
            }
        }
        let end = (q + CHUNK - 1).min(q_max);
        if q > end {
            return;
        }
        while q <= end {
            x = x.wrapping_add(t);
            if x.wrapping_add(bound) <= span {
                match visit(q, signed_abs(x)) {
                    Some(b) => {
                        bound = b;
                        span = 2 * b;
                    }
                    None => return,
                }
            }
            q += 1;
        }
    }
}

/// Denominators of best approximations up to `q_max` with their squared
/// distances in units of `2^-128`. Stops early if `q theta` hits the
/// integer lattice.
pub fn record_denominators(theta: &FixedVector, q_max: u64) -> Vec<(u64, u128)> {
    let mut out = Vec::new();
    match theta.dim {
        1 => scan_first_coordinate(theta.words[0], q_max, u64::MAX, |q, dx| {
            // every visited q beats the previous record
            out.push((q, dx as u128 * dx as u128));
            dx.checked_sub(1)
        }),
        _ => {
            let t2 = theta.words[1];
            let mut best = u128::MAX;
            scan_first_coordinate(theta.words[0], q_max, u64::MAX, |q, dx| {
                let dy = signed_abs(q.wrapping_mul(t2));
                let d2 = dx as u128 * dx as u128 + dy as u128 * dy as u128;
                if d2 < best {
                    best = d2;
                    out.push((q, d2));
                    if d2 == 0 {
                        return None;
                    }
                }
                // a new record needs dx^2 < best
                Some((best - 1).isqrt() as u64)
            })
        }
    }
    out
}

/// Best approximations of `theta` with denominators `q <= q_max`.
pub fn best_approximations(theta: &[f64], q_max: u64) -> Result<Vec<BestApproxRecord>> {
    if q_max < 2 {
        return Err(LevyError::Config(format!("q_max must be at least 2, got {q_max}")));
    }
    let v = FixedVector::from_f64(theta)?;
    Ok(records_of(&v, q_max))
}

pub fn records_of(v: &FixedVector, q_max: u64) -> Vec<BestApproxRecord> {
    record_denominators(v, q_max)
        .into_iter()
        .map(|(q, d2)| BestApproxRecord {
            q,
            p: v.nearest(q),
            dist: (d2 as f64).sqrt() / SCALE,
        })
        .collect()
}

/// How the per-vector record sequences are turned into a constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    /// `ln(q_max / q_lo)` divided by the mean number of records with
    /// `q_lo < q <= q_max`.
    WindowCount,
    /// Mean over vectors of `(ln q_N - ln q_m) / (N - m)`, `m = burn_in`.
    RecordSlope,
}

impl std::str::FromStr for Estimator {
    type Err = LevyError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "window" | "window-count" => Ok(Self::WindowCount),
            "slope" | "record-slope" => Ok(Self::RecordSlope),
            _ => Err(LevyError::Config(format!("unknown estimator {s:?}"))),
        }
    }
}

/// Default lower end of the counting window. Records below it still carry
/// the start-up transient: in one dimension it is gone after a few
/// partial quotients, in two it shifts the estimate by about +0.1% at
/// `q_lo = 30`.
pub fn default_q_lo(dim: usize) -> u64 {
    if dim == 1 {
        30
    } else {
        300
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevyConfig {
    pub dim: usize,
    pub thetas: u64,
    pub q_max: u64,
    /// Records discarded by the slope estimator; a vector with fewer than
    /// `burn_in + 2` records is resampled.
    pub burn_in: usize,
    /// Lower end of the counting window.
    pub q_lo: u64,
    pub estimator: Estimator,
    pub seed: u64,
}

impl LevyConfig {
    pub fn new(dim: usize, thetas: u64, q_max: u64, seed: u64) -> Self {
        Self {
            dim,
            thetas,
            q_max,
            burn_in: 3,
            q_lo: default_q_lo(dim),
            estimator: Estimator::WindowCount,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(1..=MAX_DIM).contains(&self.dim) {
            return Err(LevyError::Config(format!("dimension must be 1 or 2, got {}", self.dim)));
        }
        if self.thetas < 2 {
            return Err(LevyError::Config("need at least 2 vectors".into()));
        }
        if self.burn_in < 1 {
            return Err(LevyError::Config("burn-in must be at least 1".into()));
        }
        if self.q_max < 2 {
            return Err(LevyError::Config(format!("q_max must be at least 2, got {}", self.q_max)));
        }
        if self.estimator == Estimator::WindowCount && !(1..self.q_max).contains(&self.q_lo) {
            return Err(LevyError::Config(format!("q_lo = {} must lie in [1, q_max)", self.q_lo)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevyEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub thetas: u64,
    pub q_max: u64,
    pub burn_in: usize,
    pub q_lo: u64,
    pub estimator: Estimator,
    pub seed: u64,
    /// Vectors redrawn for having too few records.
    pub resampled: u64,
    /// Mean number of records per vector up to `q_max`.
    pub mean_records: f64,
}

/// Record sequence of one sampled vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaRun {
    pub index: u64,
    pub theta: FixedVector,
    pub records: Vec<(u64, u128)>,
    pub redraws: u64,
}

impl ThetaRun {
    /// Records with `q_lo < q <= q_max`.
    pub fn window_count(&self, q_lo: u64) -> usize {
        self.records.iter().filter(|r| r.0 > q_lo).count()
    }

    pub fn slope(&self, burn_in: usize) -> f64 {
        let n = self.records.len();
        let m = burn_in.min(n - 1);
        let lq = |i: usize| (self.records[i - 1].0 as f64).ln();
        (lq(n) - lq(m)) / (n - m) as f64
    }
}

fn run_theta(cfg: &LevyConfig, index: u64) -> ThetaRun {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index);
    let mut redraws = 0;
    loop {
        let theta = FixedVector::random(&mut rng, cfg.dim);
        let records = record_denominators(&theta, cfg.q_max);
        if records.len() >= cfg.burn_in + 2 && records.last().is_some_and(|r| r.1 > 0) {
            return ThetaRun { index, theta, records, redraws };
        }
        redraws += 1;
    }
}

/// Samples `cfg.thetas` vectors and scans each up to `cfg.q_max`.
pub fn sample_runs(cfg: &LevyConfig) -> Result<Vec<ThetaRun>> {
    cfg.validate()?;
    let runs: Vec<ThetaRun> = (0..cfg.thetas).into_par_iter().map(|i| run_theta(cfg, i)).collect();
    Ok(runs)
}

fn mean_and_stderr(xs: impl ExactSizeIterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    let var = xs.map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Reduces sampled runs to an estimate.
pub fn summarize(cfg: &LevyConfig, runs: &[ThetaRun]) -> Result<LevyEstimate> {
    cfg.validate()?;
    if runs.len() < 2 {
        return Err(LevyError::Config("need at least 2 runs".into()));
    }
    let (mean, stderr) = match cfg.estimator {
        Estimator::WindowCount => {
            let (c, c_se) = mean_and_stderr(runs.iter().map(|r| r.window_count(cfg.q_lo) as f64));
            if !(c > 0.0) {
                return Err(LevyError::Degenerate(format!(
                    "no records in ({}, {}]",
                    cfg.q_lo, cfg.q_max
                )));
            }
            let k = (cfg.q_max as f64 / cfg.q_lo as f64).ln() / c;
            (k, k * c_se / c)
        }
        Estimator::RecordSlope => mean_and_stderr(runs.iter().map(|r| r.slope(cfg.burn_in))),
    };
    Ok(LevyEstimate {
        mean,
        stderr,
        thetas: runs.len() as u64,
        q_max: cfg.q_max,
        burn_in: cfg.burn_in,
        q_lo: cfg.q_lo,
        estimator: cfg.estimator,
        seed: cfg.seed,
        resampled: runs.iter().map(|r| r.redraws).sum(),
        mean_records: runs.iter().map(|r| r.records.len() as f64).sum::<f64>() / runs.len() as f64,
    })
}

/// Empirical Lévy constant of random vectors in `[0, 1)^dim`.
pub fn levy_estimate(cfg: &LevyConfig) -> Result<LevyEstimate> {
    summarize(cfg, &sample_runs(cfg)?)
}

/// Continued-fraction convergent denominators of `t / 2^64` up to `q_max`,
/// without repeats. Independent of the scan, for cross-checking in one
/// dimension.
pub fn convergent_denominators(t: u64, q_max: u64) -> Vec<u64> {
    let (mut num, mut den) = (t as u128, 1u128 << 64);
    // q_{-1} = 0, q_0 = 1
    let (mut q_prev, mut q) = (0u128, 1u128);
    let mut out = vec![1];
    // theta = [0; a1, a2, ...]: invert den/num repeatedly
    while num != 0 {
        let a = den / num;
        (den, num) = (num, den % num);
        (q_prev, q) = (q, a * q + q_prev);
        if q > q_max as u128 {
            break;
        }
        if out.last() != Some(&(q as u64)) {
            out.push(q as u64);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOLDEN: f64 = 0.618_033_988_749_894_8;

    #[test]
    fn golden_ratio_gives_fibonacci() {
        let qs: Vec<u64> = best_approximations(&[GOLDEN], 100).unwrap().iter().map(|r| r.q).collect();
        assert_eq!(qs, vec![1, 2, 3, 5, 8, 13, 21, 34, 55, 89]);
    }

    #[test]
    fn nearest_integers_and_distances() {
        let r = best_approximations(&[GOLDEN], 100).unwrap();
        let last = r.last().unwrap();
        assert_eq!(last.p, vec![55]);
        assert!((last.dist - (89.0 * GOLDEN - 55.0).abs()).abs() < 1e-14);
    }

    #[test]
    fn first_record_is_one() {
        for theta in [[0.1, 0.9], [0.5, 0.25], [0.999, 0.001]] {
            assert_eq!(best_approximations(&theta, 10).unwrap()[0].q, 1);
        }
    }

    #[test]
    fn two_dim_records_decrease() {
        let r = best_approximations(&[GOLDEN, 0.414_213_562_373_095_1], 10_000).unwrap();
        assert!(r.len() > 5);
        for w in r.windows(2) {
            assert!(w[1].q > w[0].q);
            assert!(w[1].dist < w[0].dist);
        }
    }

    #[test]
    fn two_dim_scan_matches_naive() {
        let v = FixedVector::from_f64(&[std::f64::consts::FRAC_1_PI, std::f64::consts::FRAC_1_SQRT_2]).unwrap();
        let fast = record_denominators(&v, 20_000);
        let mut naive = Vec::new();
        let mut best = f64::INFINITY;
        let th = v.to_f64();
        for q in 1..=20_000u64 {
            let d: f64 = th
                .iter()
                .map(|&x| {
                    let y = q as f64 * x;
                    (y - y.round()).powi(2)
                })
                .sum();
            if d < best {
                best = d;
                naive.push(q);
            }
        }
        assert_eq!(fast.iter().map(|r| r.0).collect::<Vec<_>>(), naive);
    }

    #[test]
    fn scan_handles_every_q_max() {
        let v = FixedVector::from_f64(&[0.7548776662466927]).unwrap();
        let full = record_denominators(&v, 10_000);
        for q_max in 1..200 {
            let expect: Vec<_> = full.iter().copied().filter(|r| r.0 <= q_max).collect();
            assert_eq!(record_denominators(&v, q_max), expect, "q_max = {q_max}");
        }
    }

    #[test]
    fn rational_stops() {
        let r = best_approximations(&[0.25, 0.5], 100).unwrap();
        assert_eq!(r.last().unwrap().q, 4);
        assert_eq!(r.last().unwrap().dist, 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(best_approximations(&[1.0], 10).is_err());
        assert!(best_approximations(&[0.5, 0.5, 0.5], 10).is_err());
        assert!(best_approximations(&[0.5], 1).is_err());
    }

    #[test]
    fn convergents_of_golden() {
        let t = FixedVector::from_f64(&[GOLDEN]).unwrap().words()[0];
        assert_eq!(convergent_denominators(t, 100), vec![1, 2, 3, 5, 8, 13, 21, 34, 55, 89]);
    }

    #[test]
    fn estimate_is_deterministic() {
        let cfg = LevyConfig::new(2, 50, 10_000, 5);
        let a = levy_estimate(&cfg).unwrap();
        assert_eq!(a, levy_estimate(&cfg).unwrap());
        assert!(a.stderr > 0.0);
        let slope = levy_estimate(&LevyConfig {
            estimator: Estimator::RecordSlope,
            ..cfg
        })
        .unwrap();
        assert!(slope.stderr > 0.0);
    }

    #[test]
    fn config_validation() {
        assert!(levy_estimate(&LevyConfig::new(3, 10, 100, 0)).is_err());
        assert!(levy_estimate(&LevyConfig { q_lo: 100, ..LevyConfig::new(1, 10, 100, 0) }).is_err());
        assert!(levy_estimate(&LevyConfig { burn_in: 0, ..LevyConfig::new(1, 10, 100, 0) }).is_err());
    }
}

//! Plain Monte Carlo estimate of `mu_S(Omega_7)` straight from the
//! seven-parameter density.
//!
//! After integrating out the rotation angle and `c2` analytically the
//! estimand is
//!
//! ```text
//! mu_S = 4 pi / 3 \int_{Omega_2^+} da \int_0^1 db \int_{F(a,b)} dc1 dc3
//!        \int_{sqrt(1-c1^2)}^inf dc2 / ((1 - a1 b) c2 - a2 (b c1 - c3))^3
//! ```
//!
//! sampled uniformly over the box `[-1,1] x [0,1] x [0,1] x [-1,1] x [-1.5,1.5]`
//! for `(a1, a2, b, c1, c3)`. The only shared code with the quadrature path
//! is `F(a, b)` membership.
//!
//! Random numbers come from ChaCha8, seeded with the user seed and one
//! stream per block of `BLOCK` samples, so results do not depend on the
//! number of threads.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, LevyError, Result};
use crate::fundamental_domain::{build_f, lattice_membership_oracle};
use crate::geometry::{classify_region, ParamPoint, RegionLabel};
use crate::integrand::xi;
use crate::quadrature::region_area;

/// Samples per independently seeded block.
pub const BLOCK: u64 = 1 << 16;

const BOX_VOLUME: f64 = 2.0 * 1.0 * 1.0 * 2.0 * 3.0;
const C3_HALF_WIDTH: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
    /// Samples that landed in the integration domain.
    pub accepted: u64,
    /// No sample was accepted; `mean` and `stderr` are meaningless.
    pub degenerate: bool,
}

/// `\int_{sqrt(1-c1^2)}^inf dc2 / ((1 - a1 b) c2 - a2 (b c1 - c3))^3`
/// in closed form, `1 / (2 (1 - a1 b) Xi^2)`.
pub fn c2_tail_integral(a: ParamPoint, b: f64, c1: f64, c3: f64) -> Result<f64> {
    let x = xi(a, b, c1, c3)?;
    if !(x > 0.0) {
        return Err(domain("c2_tail_integral", format!("Xi = {x} <= 0 at a = {a}, b = {b}, c = ({c1}, {c3})")));
    }
    Ok(1.0 / (2.0 * (1.0 - a.a1 * b) * x * x))
}

/// Running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Welford {
    pub n: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Welford {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Chan et al. pairwise combination.
    pub fn merge(&self, other: &Welford) -> Welford {
        if self.n == 0 {
            return *other;
        }
        if other.n == 0 {
            return *self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let (na, nb) = (self.n as f64, other.n as f64);
        Welford {
            n,
            mean: self.mean + delta * nb / n as f64,
            m2: self.m2 + other.m2 + delta * delta * na * nb / n as f64,
        }
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        (self.variance() / self.n as f64).sqrt()
    }
}

fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

/// One draw from the sampling box.
#[derive(Debug, Clone, Copy)]
struct Draw {
    a: ParamPoint,
    b: f64,
    c1: f64,
    c3: f64,
}

fn draw(rng: &mut ChaCha8Rng) -> Draw {
    let a1 = rng.random_range(-1.0..1.0);
    let a2 = rng.random::<f64>();
    let b = rng.random::<f64>();
    let c1 = rng.random_range(-1.0..1.0);
    let c3 = rng.random_range(-C3_HALF_WIDTH..C3_HALF_WIDTH);
    Draw {
        a: ParamPoint::new(a1, a2),
        b,
        c1,
        c3,
    }
}

/// `(4 pi/3) * c2 tail` if the draw lies in the domain, else `None`.
/// Measure-zero degenerate draws count as outside.
fn weight(d: &Draw) -> Result<Option<f64>> {
    if !d.a.in_omega2_plus() {
        return Ok(None);
    }
    let f = match build_f(d.a, d.b) {
        Ok(f) => f,
        Err(LevyError::Degenerate(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    if !f.contains(d.c1, d.c3) {
        return Ok(None);
    }
    Ok(Some(4.0 * PI / 3.0 * c2_tail_integral(d.a, d.b, d.c1, d.c3)?))
}

fn run_block(seed: u64, block: u64, count: u64) -> Result<(Welford, u64)> {
    let mut rng = block_rng(seed, block);
    let mut stats = Welford::default();
    let mut accepted = 0;
    for _ in 0..count {
        let d = draw(&mut rng);
        match weight(&d)? {
            Some(w) => {
                accepted += 1;
                stats.push(w);
            }
            None => stats.push(0.0),
        }
    }
    Ok((stats, accepted))
}

fn blocks(samples: u64) -> Vec<(u64, u64)> {
    let full = samples / BLOCK;
    let rest = samples % BLOCK;
    let mut v: Vec<(u64, u64)> = (0..full).map(|i| (i, BLOCK)).collect();
    if rest > 0 {
        v.push((full, rest));
    }
    v
}

/// Monte Carlo estimate of `mu_S(Omega_7)` (not `3 mu_S`).
pub fn estimate_mu7(samples: u64, seed: u64) -> Result<McEstimate> {
    if samples < 2 {
        return Err(LevyError::Config(format!("need at least 2 samples, got {samples}")));
    }
    let parts: Vec<Result<(Welford, u64)>> = blocks(samples)
        .into_par_iter()
        .map(|(i, n)| run_block(seed, i, n))
        .collect();
    let mut stats = Welford::default();
    let mut accepted = 0;
    for p in parts {
        let (w, acc) = p?;
        stats = stats.merge(&w);
        accepted += acc;
    }
    Ok(McEstimate {
        mean: BOX_VOLUME * stats.mean,
        stderr: BOX_VOLUME * stats.stderr(),
        samples,
        seed,
        accepted,
        degenerate: accepted == 0,
    })
}

const REGION_BOX: (f64, f64) = (-1.0, 0.5);

/// Stratified variant: the base point is drawn region by region (uniformly
/// within each region by rejection from `[-1, 1/2] x [0, 1]`), with samples
/// allocated in proportion to the exact region areas.
pub fn estimate_mu7_stratified(samples: u64, seed: u64) -> Result<McEstimate> {
    if samples < 6 {
        return Err(LevyError::Config(format!("need at least 6 samples, got {samples}")));
    }
    let areas: Vec<f64> = RegionLabel::ALL.iter().map(|&l| region_area(l)).collect();
    let total_area: f64 = areas.iter().sum();
    let mut mean = 0.0;
    let mut var = 0.0;
    let mut accepted = 0;
    let mut used = 0;
    for (idx, (&label, &area)) in RegionLabel::ALL.iter().zip(&areas).enumerate() {
        let n = if idx + 1 == areas.len() {
            samples - used
        } else {
            ((samples as f64) * area / total_area).round() as u64
        };
        used += n;
        let stream_base = (idx as u64 + 1) << 40;
        let parts: Vec<Result<(Welford, u64)>> = blocks(n)
            .into_par_iter()
            .map(|(i, count)| {
                let mut rng = block_rng(seed, stream_base + i);
                let mut stats = Welford::default();
                let mut acc = 0;
                for _ in 0..count {
                    let a = loop {
                        let a = ParamPoint::new(rng.random_range(REGION_BOX.0..REGION_BOX.1), rng.random::<f64>());
                        if a.in_omega2_plus() && classify_region(a)? == label {
                            break a;
                        }
                    };
                    let mut d = draw(&mut rng);
                    d.a = a;
                    match weight(&d)? {
                        Some(w) => {
                            acc += 1;
                            stats.push(w);
                        }
                        None => stats.push(0.0),
                    }
                }
                Ok((stats, acc))
            })
            .collect();
        let mut stats = Welford::default();
        for p in parts {
            let (w, acc) = p?;
            stats = stats.merge(&w);
            accepted += acc;
        }
        // remaining box for (b, c1, c3) has volume 1 * 2 * 3
        let scale = area * 6.0;
        mean += scale * stats.mean;
        var += scale * scale * stats.variance() / stats.n.max(1) as f64;
    }
    Ok(McEstimate {
        mean,
        stderr: var.sqrt(),
        samples,
        seed,
        accepted,
        degenerate: accepted == 0,
    })
}

/// Outcome of replaying accepted samples through the lattice oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub checked: u64,
    pub failures: u64,
}

/// Replays the sample stream of [`estimate_mu7`] and runs every accepted
/// sample with probability `rate` through the lattice membership oracle,
/// using `c2 = -(sqrt(1 - c1^2) + delta)` with `delta` uniform in `(0, 1)`.
pub fn audit_accepted(samples: u64, seed: u64, rate: f64) -> Result<AuditReport> {
    let parts: Vec<Result<AuditReport>> = blocks(samples)
        .into_par_iter()
        .map(|(i, n)| {
            let mut rng = block_rng(seed, i);
            let mut audit_rng = block_rng(seed ^ 0xa5a5_a5a5_a5a5_a5a5, i);
            let mut r = AuditReport { checked: 0, failures: 0 };
            for _ in 0..n {
                let d = draw(&mut rng);
                if weight(&d)?.is_none() || audit_rng.random::<f64>() >= rate {
                    continue;
                }
                let delta: f64 = audit_rng.random_range(1e-6..1.0);
                let c2 = -((1.0 - d.c1 * d.c1).sqrt() + delta);
                r.checked += 1;
                if !lattice_membership_oracle(d.a, d.b, d.c1, c2, d.c3, 3)? {
                    r.failures += 1;
                }
            }
            Ok(r)
        })
        .collect();
    let mut total = AuditReport { checked: 0, failures: 0 };
    for p in parts {
        let r = p?;
        total.checked += r.checked;
        total.failures += r.failures;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c2_tail_example() {
        let a = ParamPoint::new(-0.9, 0.3);
        let v = c2_tail_integral(a, 0.3, 0.0, 0.0).unwrap();
        assert!((v - 1.0 / (2.0 * 1.27f64.powi(3))).abs() < 1e-15);
        assert!((v - 0.244_1).abs() < 1e-3);
    }

    #[test]
    fn c2_tail_rejects_nonpositive_xi() {
        // far outside F the linear form goes negative
        let a = ParamPoint::new(-0.5, 0.9);
        assert!(c2_tail_integral(a, 0.9, 0.999_999, -1.5).is_err());
    }

    #[test]
    fn welford_merge_matches_sequential() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 / 7.0).collect();
        let mut all = Welford::default();
        xs.iter().for_each(|&x| all.push(x));
        let mut left = Welford::default();
        let mut right = Welford::default();
        xs[..313].iter().for_each(|&x| left.push(x));
        xs[313..].iter().for_each(|&x| right.push(x));
        let merged = left.merge(&right);
        assert_eq!(merged.n, all.n);
        assert!((merged.mean - all.mean).abs() < 1e-12);
        assert!((merged.m2 - all.m2).abs() < 1e-8 * all.m2);
    }

    #[test]
    fn estimate_is_deterministic() {
        let a = estimate_mu7(100_000, 11).unwrap();
        let b = estimate_mu7(100_000, 11).unwrap();
        assert_eq!(a, b);
        assert!(a.stderr > 0.0 && a.accepted > 0 && !a.degenerate);
        let c = estimate_mu7(100_000, 12).unwrap();
        assert_ne!(a.mean, c.mean);
    }

    #[test]
    fn block_layout_covers_samples() {
        let b = blocks(3 * BLOCK + 5);
        assert_eq!(b.len(), 4);
        assert_eq!(b.iter().map(|x| x.1).sum::<u64>(), 3 * BLOCK + 5);
    }
}

//! Globally adaptive Gauss-Kronrod (G7/K15) integration in one variable,
//! with a nested form that integrates an integrand which is itself an
//! adaptive estimate and carries its own error.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Kronrod abscissae on [0, 1], descending; odd indices are the Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Value of an integrand sample, with the error already committed in
/// computing it (zero for closed-form integrands) and its cost.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evals: u64,
    /// Deepest bisection level reached anywhere below this estimate.
    pub max_depth: u32,
    pub converged: bool,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            error: 0.0,
            evals: 1,
            max_depth: 0,
            converged: true,
        }
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    rule_error: f64,
    inner_error: f64,
    depth: u32,
}

impl Panel {
    fn error(&self) -> f64 {
        self.rule_error + self.inner_error
    }
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        // largest rule error first; ties broken by position for determinism
        self.rule_error
            .total_cmp(&other.rule_error)
            .then_with(|| other.lo.total_cmp(&self.lo))
    }
}

/// One G7/K15 panel over `[lo, hi]`.
fn panel<F: FnMut(f64) -> Estimate>(f: &mut F, lo: f64, hi: f64, depth: u32, stats: &mut Estimate) -> Panel {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut fv = [0.0; 15];
    let mut inner = 0.0;
    let mut sample = |x: f64, w: f64, stats: &mut Estimate| {
        let e = f(x);
        stats.evals += e.evals;
        stats.max_depth = stats.max_depth.max(e.max_depth);
        stats.converged &= e.converged;
        inner += w * e.error;
        e.value
    };
    fv[7] = sample(center, WGK[7], stats);
    for j in 0..7 {
        let dx = half * XGK[j];
        fv[j] = sample(center - dx, WGK[j], stats);
        fv[14 - j] = sample(center + dx, WGK[j], stats);
    }
    let mut kronrod = WGK[7] * fv[7];
    let mut gauss = WG[3] * fv[7];
    let mut res_abs = WGK[7] * fv[7].abs();
    for j in 0..7 {
        let pair = fv[j] + fv[14 - j];
        kronrod += WGK[j] * pair;
        res_abs += WGK[j] * (fv[j].abs() + fv[14 - j].abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let mean = 0.5 * kronrod;
    let mut res_asc = WGK[7] * (fv[7] - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv[j] - mean).abs() + (fv[14 - j] - mean).abs());
    }
    let h = half.abs();
    Panel {
        lo,
        hi,
        value: kronrod * half,
        rule_error: rescale_error((kronrod - gauss) * half, res_abs * h, res_asc * h),
        inner_error: inner * h,
        depth,
    }
}

/// Smallest relative tolerance worth asking for: the error estimate never
/// drops below about `50 eps` of the panel magnitude.
pub const REL_TOL_FLOOR: f64 = 1e-13;

/// Tolerances and limits for [`AdaptiveRule::integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveRule {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum number of panels kept at once.
    pub max_panels: usize,
    /// Stop refining once this many integrand evaluations have been spent.
    pub max_evals: u64,
}

impl AdaptiveRule {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            max_panels: 2000,
            max_evals: u64::MAX,
        }
    }

    pub fn with_max_panels(mut self, n: usize) -> Self {
        self.max_panels = n.max(1);
        self
    }

    pub fn with_max_evals(mut self, n: u64) -> Self {
        self.max_evals = n;
        self
    }

    /// Integrates a closed-form integrand.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, lo: f64, hi: f64) -> Estimate {
        self.integrate_nested(|x| Estimate::exact(f(x)), lo, hi)
    }

    /// Integrates over the pieces `[breaks[i], breaks[i+1]]`, refining
    /// globally across all of them.
    pub fn integrate_pieces<F: FnMut(f64) -> Estimate>(&self, mut f: F, breaks: &[f64]) -> Estimate {
        let mut stats = Estimate {
            converged: true,
            ..Default::default()
        };
        let mut heap = BinaryHeap::new();
        for w in breaks.windows(2) {
            if w[1] > w[0] {
                heap.push(panel(&mut f, w[0], w[1], 0, &mut stats));
            }
        }
        self.refine(&mut f, heap, stats)
    }

    /// Integrates an integrand whose samples carry their own error. The
    /// reported error is the rule error plus the quadrature of the sample
    /// errors; only the rule error drives refinement.
    pub fn integrate_nested<F: FnMut(f64) -> Estimate>(&self, mut f: F, lo: f64, hi: f64) -> Estimate {
        let mut stats = Estimate {
            converged: true,
            ..Default::default()
        };
        let mut heap = BinaryHeap::new();
        heap.push(panel(&mut f, lo, hi, 0, &mut stats));
        self.refine(&mut f, heap, stats)
    }

    fn refine<F: FnMut(f64) -> Estimate>(
        &self,
        f: &mut F,
        mut heap: BinaryHeap<Panel>,
        mut stats: Estimate,
    ) -> Estimate {
        let mut converged_here = false;
        loop {
            let (value, rule_err) = heap
                .iter()
                .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.rule_error));
            if rule_err <= self.abs_tol.max(self.rel_tol * value.abs()) {
                converged_here = true;
                break;
            }
            if heap.len() >= self.max_panels || stats.evals >= self.max_evals {
                break;
            }
            let worst = heap.pop().expect("nonempty panel set");
            let mid = 0.5 * (worst.lo + worst.hi);
            if !(mid > worst.lo && mid < worst.hi) {
                // interval exhausted at machine resolution
                heap.push(Panel {
                    rule_error: 0.0,
                    inner_error: worst.inner_error + worst.rule_error,
                    ..worst
                });
                continue;
            }
            heap.push(panel(f, worst.lo, mid, worst.depth + 1, &mut stats));
            heap.push(panel(f, mid, worst.hi, worst.depth + 1, &mut stats));
        }
        // fixed summation order: sort panels by position
        let mut panels = heap.into_vec();
        panels.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        stats.value = panels.iter().map(|p| p.value).sum();
        stats.error = panels.iter().map(Panel::error).sum();
        let depth = panels.iter().map(|p| p.depth).max().unwrap_or(0);
        stats.max_depth = stats.max_depth.max(depth);
        stats.converged &= converged_here;
        stats
    }
}

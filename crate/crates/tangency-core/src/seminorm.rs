//! Monte Carlo estimators for fractional seminorms, Hölder scans,
//! box-counting slopes, superdensity profiles, slicing ratios and
//! Poincaré quotients.
//!
//! The singular pair kernel is handled by dyadic-shell stratification of the
//! separation `|x - y|`: shells run from the domain diameter down to
//! `diam * 2^{-30}`, and the remaining tail is importance-sampled with the
//! power-law density matched to the kernel whenever `s p < 1` (otherwise it
//! is truncated and the estimate flagged as a lower bound). Every estimator
//! is deterministic given its `(seed, budget)`.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::CoreError;
use crate::fit::linear_fit;
use crate::geom::{unit_ball_volume, BoxDomain, CantorScaffold, DeepPoint};
use crate::linalg::LinMap;
use crate::lusin::LusinFunction;
use crate::math;
use crate::rng::{ball_point, substream, unit_vector, Stream};
use crate::Result;

/// Number of dyadic separation shells before the analytic tail.
pub const SHELLS: usize = 30;

/// What a sampler evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerKind {
    Function,
    Indicator,
    GradientField,
}

/// Region over which pair estimators integrate.
#[derive(Debug, Clone)]
pub enum SampleDomain {
    Box(BoxDomain),
    Ball { center: Vec<f64>, radius: f64 },
}

impl SampleDomain {
    pub fn dim(&self) -> usize {
        match self {
            SampleDomain::Box(b) => b.dim(),
            SampleDomain::Ball { center, .. } => center.len(),
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            SampleDomain::Box(b) => b.volume(),
            SampleDomain::Ball { center, radius } => {
                unit_ball_volume(center.len()) * math::powf(*radius, center.len() as f64)
            }
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            SampleDomain::Box(b) => b.diameter(),
            SampleDomain::Ball { radius, .. } => 2.0 * radius,
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            SampleDomain::Box(b) => b.contains(x),
            SampleDomain::Ball { center, radius } => crate::linalg::dist(center, x) <= *radius,
        }
    }

    pub fn sample(&self, rng: &mut Stream) -> Vec<f64> {
        match self {
            SampleDomain::Box(b) => (0..b.dim())
                .map(|a| rng.gen_range(b.lo()[a]..b.hi()[a]))
                .collect(),
            SampleDomain::Ball { center, radius } => {
                let off = ball_point(rng, center.len(), *radius);
                center.iter().zip(&off).map(|(c, o)| c + o).collect()
            }
        }
    }
}

/// Scale-aware point proposal: draws a point given the current separation
/// scale.
pub type HintSampler<'a> = Box<dyn Fn(&mut Stream, f64) -> Vec<f64> + Sync + 'a>;
/// Exact density of a [`HintSampler`] at a point and scale.
pub type HintDensity<'a> = Box<dyn Fn(&[f64], f64) -> f64 + Sync + 'a>;

/// Importance proposal concentrated where `|f(x) - f(y)|` is alive at small
/// separations (jump sets of indicators). `sample` receives the current
/// separation scale and must return points inside the domain; `pdf` must be
/// its exact density at that scale. The estimator mixes the proposal 50/50
/// with the uniform draw, which keeps it unbiased for any proposal while
/// taming the variance of the deep shells.
pub struct JumpHint<'a> {
    pub sample: HintSampler<'a>,
    pub pdf: HintDensity<'a>,
}

/// Scalar field evaluator.
pub type FieldEval<'a> = Box<dyn Fn(&[f64]) -> f64 + Sync + 'a>;

/// A scalar field over a sampling domain.
pub struct FieldSampler<'a> {
    pub eval: FieldEval<'a>,
    pub domain: SampleDomain,
    pub kind: SamplerKind,
    pub hint: Option<JumpHint<'a>>,
}

impl<'a> FieldSampler<'a> {
    pub fn function(domain: SampleDomain, eval: impl Fn(&[f64]) -> f64 + Sync + 'a) -> Self {
        FieldSampler {
            eval: Box::new(eval),
            domain,
            kind: SamplerKind::Function,
            hint: None,
        }
    }

    pub fn indicator(domain: SampleDomain, set: impl Fn(&[f64]) -> bool + Sync + 'a) -> Self {
        FieldSampler {
            eval: Box::new(move |x| if set(x) { 1.0 } else { 0.0 }),
            domain,
            kind: SamplerKind::Indicator,
            hint: None,
        }
    }

    /// Indicator of the level-`level` union of a scaffold, over its domain.
    pub fn scaffold_indicator(scaffold: &'a CantorScaffold, level: usize) -> Self {
        FieldSampler {
            eval: Box::new(move |x| {
                if scaffold.membership(x, level).unwrap_or(false) {
                    1.0
                } else {
                    0.0
                }
            }),
            domain: SampleDomain::Box(scaffold.domain().clone()),
            kind: SamplerKind::Indicator,
            hint: None,
        }
    }

    pub fn with_hint(mut self, hint: JumpHint<'a>) -> Self {
        self.hint = Some(hint);
        self
    }

    /// Hint for an indicator whose jump set is the hyperplane
    /// `x[axis] = at`: points uniform in a slab of half-width
    /// `4 * scale` around the jump (box domains only).
    pub fn with_hyperplane_hint(self, axis: usize, at: f64) -> Self {
        let b = match &self.domain {
            SampleDomain::Box(b) => b.clone(),
            _ => return self,
        };
        let (blo, bhi) = (b.lo()[axis], b.hi()[axis]);
        let slab = move |scale: f64| -> (f64, f64) {
            let w = 4.0 * scale;
            ((at - w).max(blo), (at + w).min(bhi))
        };
        let bs = b.clone();
        let sample = move |rng: &mut Stream, scale: f64| -> Vec<f64> {
            let (lo, hi) = slab(scale);
            (0..bs.dim())
                .map(|a| {
                    if a == axis {
                        rng.gen_range(lo..hi)
                    } else {
                        rng.gen_range(bs.lo()[a]..bs.hi()[a])
                    }
                })
                .collect()
        };
        let bp = b;
        let pdf = move |x: &[f64], scale: f64| -> f64 {
            let (lo, hi) = slab(scale);
            if x[axis] < lo || x[axis] > hi || !bp.contains(x) {
                return 0.0;
            }
            let cross: f64 = (0..bp.dim())
                .filter(|a| *a != axis)
                .map(|a| bp.side(a))
                .product();
            1.0 / ((hi - lo) * cross)
        };
        self.with_hint(JumpHint {
            sample: Box::new(sample),
            pdf: Box::new(pdf),
        })
    }
}

/// A stratified pair estimate of a Gagliardo-type double integral, reported
/// as the `p`-th root with a delta-method standard error.
#[derive(Debug, Clone)]
pub struct SeminormEstimate {
    pub value: f64,
    pub stderr: f64,
    /// The estimated `p`-th power (the double integral itself).
    pub power: f64,
    pub power_stderr: f64,
    pub budget: usize,
    pub seed: u64,
    /// True when the sub-shell tail had to be truncated (`s p >= 1`), making
    /// the report a lower bound.
    pub truncated: bool,
    pub shell_samples: Vec<usize>,
}

struct ShellPlan {
    lo: f64,
    hi: f64,
    n: usize,
    tail: bool,
}

/// Hard floor of the tail shell relative to the diameter: below this scale a
/// pair of `f64` points cannot be resolved against generic field values, so
/// the kernel-matched tail draw stops there. The excluded mass is
/// `O(2^{-48(1-s)p})` of the total.
const TAIL_FLOOR: f64 = 3.552713678800501e-15; // 2^{-48}

fn plan_shells(diam: f64, s: f64, sp: f64, budget: usize) -> (Vec<ShellPlan>, bool) {
    let tail_ok = sp < 1.0;
    let count = SHELLS + usize::from(tail_ok);
    let weights: Vec<f64> = (0..count)
        .map(|m| math::powf(2.0, -(m as f64) * (1.0 - s)))
        .collect();
    let total: f64 = weights.iter().sum();
    let mut plans = Vec::with_capacity(count);
    for (m, w) in weights.iter().enumerate() {
        let n = ((budget as f64 * w / total) as usize).max(16);
        if m < SHELLS {
            plans.push(ShellPlan {
                lo: diam * math::exp2i(-(m as i32) - 1),
                hi: diam * math::exp2i(-(m as i32)),
                n,
                tail: false,
            });
        } else {
            plans.push(ShellPlan {
                lo: diam * TAIL_FLOOR,
                hi: diam * math::exp2i(-(SHELLS as i32)),
                n,
                tail: true,
            });
        }
    }
    (plans, !tail_ok)
}

/// Draw from the kernel-matched density `q(l) ~ l^{-sp}` on `[lo, hi]` and
/// return the length together with the full importance weight (volume and
/// sphere factors excluded).
fn tail_draw(rng: &mut Stream, lo: f64, hi: f64, sp: f64) -> (f64, f64) {
    let u: f64 = rng.gen_range(0.0..1.0f64);
    let a = math::powf(lo, 1.0 - sp);
    let b = math::powf(hi, 1.0 - sp);
    let ell = math::powf(a + u * (b - a), 1.0 / (1.0 - sp));
    let w = (b - a) / ((1.0 - sp) * ell);
    (ell, w)
}

#[allow(clippy::too_many_arguments)]
/// Core pair loop: draws stratified pairs and hands each to `integrand`
/// along with its importance weight; `integrand` returns the kernel-free
/// value(s) for the pair.
fn pair_sweep<const M: usize>(
    domain: &SampleDomain,
    hint: Option<&JumpHint<'_>>,
    s: f64,
    p: f64,
    budget: usize,
    seed: u64,
    tag: u64,
    mut integrand: impl FnMut(&[f64], &[f64], f64) -> [f64; M],
) -> ([f64; M], [f64; M], bool, Vec<usize>) {
    let n_dim = domain.dim();
    let sp = s * p;
    let diam = domain.diameter();
    let sphere = n_dim as f64 * unit_ball_volume(n_dim);
    let vol = domain.volume();
    let (plans, truncated) = plan_shells(diam, s, sp, budget);
    let mut power = [0.0; M];
    let mut variance = [0.0; M];
    let mut counts = Vec::with_capacity(plans.len());
    for (m, plan) in plans.iter().enumerate() {
        let mut rng = substream(seed, &[tag, m as u64]);
        let mut sum = [0.0; M];
        let mut sumsq = [0.0; M];
        for _ in 0..plan.n {
            // Separation first, then the point: the jump proposal's slab
            // must track the drawn separation (the tail spans many octaves,
            // and a fixed-width slab would leave rare, huge-weight hits).
            let (ell, ell_weight) = if plan.tail {
                let (ell, w) = tail_draw(&mut rng, plan.lo, plan.hi, sp);
                (ell, w)
            } else {
                let ell = rng.gen_range(plan.lo..plan.hi);
                (ell, (plan.hi - plan.lo) * math::powf(ell, -sp - 1.0))
            };
            let (x, x_density) = match hint {
                Some(h) => {
                    let x = if rng.gen::<bool>() {
                        domain.sample(&mut rng)
                    } else {
                        (h.sample)(&mut rng, ell)
                    };
                    let q = 0.5 / vol + 0.5 * (h.pdf)(&x, ell);
                    (x, q)
                }
                None => (domain.sample(&mut rng), 1.0 / vol),
            };
            let dir = unit_vector(&mut rng, n_dim);
            let weight = sphere * ell_weight / x_density;
            let y: Vec<f64> = x.iter().zip(&dir).map(|(xi, d)| xi + d * ell).collect();
            let vals = if domain.contains(&y) {
                integrand(&x, &y, ell)
            } else {
                [0.0; M]
            };
            for i in 0..M {
                let c = vals[i] * weight;
                sum[i] += c;
                sumsq[i] += c * c;
            }
        }
        counts.push(plan.n);
        let nn = plan.n as f64;
        for i in 0..M {
            let mean = sum[i] / nn;
            power[i] += mean;
            if plan.n > 1 {
                let var = (sumsq[i] / nn - mean * mean).max(0.0) / (nn - 1.0);
                variance[i] += var;
            }
        }
    }
    (power, variance, truncated, counts)
}

/// Gagliardo seminorm `[f]_{W^{s,p}}` over the sampler's domain.
pub fn fractional_seminorm(
    f: &FieldSampler<'_>,
    s: f64,
    p: f64,
    budget: usize,
    seed: u64,
) -> Result<SeminormEstimate> {
    if !(s > 0.0 && s < 1.0) {
        return Err(CoreError::invalid("fractional seminorm needs 0 < s < 1"));
    }
    if !(1.0..f64::INFINITY).contains(&p) {
        return Err(CoreError::invalid("fractional seminorm needs 1 <= p < inf"));
    }
    if budget == 0 {
        return Err(CoreError::invalid("budget must be positive"));
    }
    let sp = s * p;
    // The sweep's weight carries the net kernel power ell^{-sp-1}: the
    // kernel is ell^{-(sp+n)} and the radial draw density contributes
    // ell^{n-1}, so the integrand here is just |f(x) - f(y)|^p.
    let ([power], [variance], truncated, shell_samples) = pair_sweep::<1>(
        &f.domain,
        f.hint.as_ref(),
        s,
        p,
        budget,
        seed,
        0x5E41,
        |x, y, _ell| {
            let d = math::abs((f.eval)(x) - (f.eval)(y));
            [math::powf(d, p)]
        },
    );
    let power_stderr = math::sqrt(variance);
    let (value, stderr) = if power > 0.0 {
        let v = math::powf(power, 1.0 / p);
        (v, v / (p * power) * power_stderr)
    } else {
        (0.0, power_stderr)
    };
    Ok(SeminormEstimate {
        value,
        stderr,
        power,
        power_stderr,
        budget,
        seed,
        truncated: truncated && sp >= 1.0,
        shell_samples,
    })
}

/// A graph `x -> (x, value(x))` with its differential.
pub trait GraphMap {
    /// Codomain dimension `n - k`.
    fn rows(&self) -> usize;
    fn value(&self, x: &[f64]) -> Vec<f64>;
    fn grad(&self, x: &[f64]) -> LinMap;
}

impl GraphMap for LusinFunction<'_> {
    fn rows(&self) -> usize {
        self.datum().rows()
    }

    fn value(&self, x: &[f64]) -> Vec<f64> {
        self.eval_global(x).value
    }

    fn grad(&self, x: &[f64]) -> LinMap {
        self.eval_global(x).grad
    }
}

/// Graph defined by closures (test data such as tilted planes).
pub struct FnGraph<V, G> {
    pub rows: usize,
    pub value: V,
    pub grad: G,
}

impl<V: Fn(&[f64]) -> Vec<f64>, G: Fn(&[f64]) -> LinMap> GraphMap for FnGraph<V, G> {
    fn rows(&self) -> usize {
        self.rows
    }

    fn value(&self, x: &[f64]) -> Vec<f64> {
        (self.value)(x)
    }

    fn grad(&self, x: &[f64]) -> LinMap {
        (self.grad)(x)
    }
}

/// Outcome of comparing the seminorm over a graph against the base domain.
#[derive(Debug, Clone)]
pub struct GraphCompare {
    /// Ratio of the `p`-th powers (graph / base), pairs shared.
    pub ratio: f64,
    pub stderr: f64,
    /// Admissible window for the ratio given the Lipschitz estimate.
    pub window: (f64, f64),
    /// Sampled Lipschitz bound of the graph map.
    pub lip: f64,
    pub base_power: f64,
    pub graph_power: f64,
}

/// Determinant of `I_k + G^T G` for the small `k` used here.
fn area_factor(grad: &LinMap) -> f64 {
    let k = grad.cols;
    let mut g = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..k {
            let mut acc = if i == j { 1.0 } else { 0.0 };
            for r in 0..grad.rows {
                acc += grad.get(r, i) * grad.get(r, j);
            }
            g[i * k + j] = acc;
        }
    }
    let det = match k {
        1 => g[0],
        2 => g[0] * g[3] - g[1] * g[2],
        3 => {
            g[0] * (g[4] * g[8] - g[5] * g[7]) - g[1] * (g[3] * g[8] - g[5] * g[6])
                + g[2] * (g[3] * g[7] - g[4] * g[6])
        }
        _ => panic!("area factor implemented for k <= 3"),
    };
    math::sqrt(det)
}

/// Compare `[f]_{W^{s,p}}^p` computed with graph distances and area weights
/// against the flat base version, with common pairs, and report the ratio
/// together with the window implied by the graph's Lipschitz bound.
pub fn graph_seminorm_compare(
    graph: &dyn GraphMap,
    f: &FieldSampler<'_>,
    s: f64,
    p: f64,
    budget: usize,
    seed: u64,
) -> Result<GraphCompare> {
    if !(s > 0.0 && s < 1.0) || !(1.0..f64::INFINITY).contains(&p) {
        return Err(CoreError::invalid(
            "graph compare needs 0 < s < 1 and 1 <= p < inf",
        ));
    }
    let k = f.domain.dim();
    let sp = s * p;
    // Lipschitz estimate from sampled gradients.
    let mut rng = substream(seed, &[0x11b]);
    let mut lip: f64 = 0.0;
    for _ in 0..2048 {
        let x = f.domain.sample(&mut rng);
        lip = lip.max(graph.grad(&x).op_norm());
    }
    if !lip.is_finite() {
        return Err(CoreError::Numeric("non-finite Lipschitz estimate".into()));
    }
    const BATCHES: usize = 16;
    let mut base_b = [0.0f64; BATCHES];
    let mut graph_b = [0.0f64; BATCHES];
    let mut batch = 0usize;
    let ([base_power, graph_power], _, _, _) = pair_sweep::<2>(
        &f.domain,
        f.hint.as_ref(),
        s,
        p,
        budget,
        seed,
        0x6124,
        |x, y, ell| {
            let d = math::abs((f.eval)(x) - (f.eval)(y));
            let dp = math::powf(d, p);
            let ux = graph.value(x);
            let uy = graph.value(y);
            let vertical = crate::linalg::dist(&ux, &uy);
            let dist_g = math::sqrt(ell * ell + vertical * vertical);
            // Base kernel ell^{-(sp+k)} is folded into the sweep weight as
            // ell^{-sp-1} * ell^{k-1}; express the graph kernel through the
            // ratio of the two kernels.
            let kernel_ratio = math::powf(dist_g / ell, -(sp + k as f64));
            let jf = area_factor(&graph.grad(x)) * area_factor(&graph.grad(y));
            let g = dp * kernel_ratio * jf;
            base_b[batch % BATCHES] += dp;
            graph_b[batch % BATCHES] += g;
            batch += 1;
            [dp, g]
        },
    );
    if base_power <= 0.0 {
        return Err(CoreError::Numeric(
            "base seminorm vanished; ratio undefined".into(),
        ));
    }
    let ratio = graph_power / base_power;
    // Spread of per-batch ratios as the error estimate.
    let ratios: Vec<f64> = base_b
        .iter()
        .zip(&graph_b)
        .filter(|(b, _)| **b > 0.0)
        .map(|(b, g)| g / b)
        .collect();
    let stderr = if ratios.len() > 1 {
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        let var =
            ratios.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (ratios.len() - 1) as f64;
        math::sqrt(var / ratios.len() as f64)
    } else {
        f64::INFINITY
    };
    let n_total = k + graph.rows();
    let window = (
        math::powf(1.0 + lip * lip, -(sp + k as f64) / 2.0),
        n_total as f64 * (1.0 + lip * lip),
    );
    Ok(GraphCompare {
        ratio,
        stderr,
        window,
        lip,
        base_power,
        graph_power,
    })
}

/// Per-scale sup table of `|g(x) - g(y)| / |x-y|^alpha` and its log-log
/// slope against the scale.
#[derive(Debug, Clone)]
pub struct HolderScan {
    pub rows: Vec<HolderRow>,
    /// Least-squares slope of `log(sup)` against `log(scale)`; `None` when
    /// fewer than two scales had positive sups.
    pub slope: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct HolderRow {
    pub scale: f64,
    pub sup: f64,
    pub pairs: usize,
}

/// Multiscale Hölder scan over an arbitrary pair source: for each scale `t`
/// the source must yield `(|g(x) - g(y)|, |x - y|)` with `|x - y|` in
/// `[t, 2t)`.
pub fn holder_estimate(
    mut pairs: impl FnMut(&mut Stream, f64) -> Option<(f64, f64)>,
    alpha: f64,
    scales: &[f64],
    pairs_per_scale: usize,
    seed: u64,
) -> Result<HolderScan> {
    if scales.is_empty() {
        return Err(CoreError::invalid("holder scan needs at least one scale"));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(CoreError::invalid("holder scan needs alpha in (0, 1]"));
    }
    let mut rows = Vec::with_capacity(scales.len());
    for (i, &t) in scales.iter().enumerate() {
        if !(t > 0.0) {
            return Err(CoreError::invalid("scales must be positive"));
        }
        let mut rng = substream(seed, &[0x401d, i as u64]);
        let mut sup: f64 = 0.0;
        let mut used = 0usize;
        for _ in 0..pairs_per_scale {
            if let Some((dg, dist)) = pairs(&mut rng, t) {
                if dist > 0.0 {
                    sup = sup.max(dg / math::powf(dist, alpha));
                    used += 1;
                }
            }
        }
        rows.push(HolderRow {
            scale: t,
            sup,
            pairs: used,
        });
    }
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.sup > 0.0)
        .map(|r| (math::ln(r.scale), math::ln(r.sup)))
        .collect();
    let slope = if pts.len() >= 2 {
        let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
        linear_fit(&xs, &ys).ok().map(|(m, _)| m)
    } else {
        None
    };
    Ok(HolderScan { rows, slope })
}

/// Uniform pair source over a sampler's domain.
pub fn field_pair_source<'b>(
    f: &'b FieldSampler<'_>,
) -> impl FnMut(&mut Stream, f64) -> Option<(f64, f64)> + 'b {
    move |rng, t| {
        for _ in 0..8 {
            let x = f.domain.sample(rng);
            let dir = unit_vector(rng, f.domain.dim());
            let ell = t * (1.0 + rng.gen_range(0.0..0.999));
            let y: Vec<f64> = x.iter().zip(&dir).map(|(xi, d)| xi + d * ell).collect();
            if f.domain.contains(&y) {
                return Some((math::abs((f.eval)(&x) - (f.eval)(&y)), ell));
            }
        }
        None
    }
}

/// Box-counting dimension from exact scaffold counts: least-squares slope of
/// `log N(r_i)` against `log(1 / r_i)` over the given levels.
pub fn box_dimension_estimate(scaffold: &CantorScaffold, levels: &[usize]) -> Result<f64> {
    if levels.len() < 3 {
        return Err(CoreError::invalid(
            "box dimension fit needs at least 3 levels",
        ));
    }
    let mut xs = Vec::with_capacity(levels.len());
    let mut ys = Vec::with_capacity(levels.len());
    for &level in levels {
        if level > scaffold.depth() {
            return Err(CoreError::invalid("level exceeds scaffold depth"));
        }
        xs.push(-math::ln(scaffold.side(level)));
        ys.push(scaffold.log_cube_count(level));
    }
    linear_fit(&xs, &ys).map(|(m, _)| m)
}

/// One radius of a superdensity profile.
#[derive(Debug, Clone, Copy)]
pub struct SuperdensityRow {
    pub r: f64,
    /// `measure(B(x,r) \ E) / r^{k + b k/(k-s)}`.
    pub ratio: f64,
    pub stderr: f64,
    /// Raw complement fraction of the ball.
    pub complement_fraction: f64,
}

#[allow(clippy::too_many_arguments)]
fn superdensity_core(
    outside: impl Fn(&[f64]) -> bool,
    k: usize,
    radii: &[f64],
    b: f64,
    s: f64,
    samples: usize,
    seed: u64,
) -> Result<Vec<SuperdensityRow>> {
    if !(0.0 <= b && b < s && s < 1.0) {
        return Err(CoreError::invalid("superdensity needs 0 <= b < s < 1"));
    }
    if radii.iter().any(|r| !(*r > 0.0)) {
        return Err(CoreError::invalid("radii must be positive"));
    }
    // Sobolev-type exponent 1* = n/(n-s) with ambient n = k.
    let one_star = k as f64 / (k as f64 - s);
    let exponent = k as f64 + b * one_star;
    let omega = unit_ball_volume(k);
    let mut rows = Vec::with_capacity(radii.len());
    for (i, &r) in radii.iter().enumerate() {
        let mut rng = substream(seed, &[0x5d, i as u64]);
        let mut out = 0usize;
        for _ in 0..samples {
            let off = ball_point(&mut rng, k, r);
            if outside(&off) {
                out += 1;
            }
        }
        let frac = out as f64 / samples as f64;
        let vol = omega * math::powf(r, k as f64);
        let scale = math::powf(r, exponent);
        let se = vol * math::sqrt(frac * (1.0 - frac) / samples as f64) / scale;
        rows.push(SuperdensityRow {
            r,
            ratio: frac * vol / scale,
            stderr: se,
            complement_fraction: frac,
        });
    }
    Ok(rows)
}

#[allow(clippy::too_many_arguments)]
/// Superdensity profile of the level-`level` union around an anchored point.
pub fn superdensity_profile(
    scaffold: &CantorScaffold,
    level: usize,
    x: &DeepPoint,
    radii: &[f64],
    b: f64,
    s: f64,
    samples: usize,
    seed: u64,
) -> Result<Vec<SuperdensityRow>> {
    superdensity_core(
        |off| !scaffold.membership_deep(&x.translated(off), level),
        scaffold.k(),
        radii,
        b,
        s,
        samples,
        seed,
    )
}

/// Superdensity profile of an arbitrary membership oracle around a global
/// point.
pub fn superdensity_profile_oracle(
    set: &dyn Fn(&[f64]) -> bool,
    x: &[f64],
    radii: &[f64],
    b: f64,
    s: f64,
    samples: usize,
    seed: u64,
) -> Result<Vec<SuperdensityRow>> {
    superdensity_core(
        |off| {
            let z: Vec<f64> = x.iter().zip(off).map(|(a, o)| a + o).collect();
            !set(&z)
        },
        x.len(),
        radii,
        b,
        s,
        samples,
        seed,
    )
}

/// One test function's slicing comparison.
#[derive(Debug, Clone)]
pub struct SlicingRow {
    /// `[f]^p` over the plane.
    pub plane_power: f64,
    pub plane_stderr: f64,
    /// Direction-averaged line seminorm integral.
    pub sliced: f64,
    pub sliced_stderr: f64,
    /// `plane / sliced`: the empirical slicing constant; `None` when both
    /// sides vanish.
    pub ratio: Option<f64>,
    pub ratio_stderr: f64,
}

/// Compare the planar seminorm power against its direction-averaged line
/// slicing for each test function (`n = 2`, lines in the plane only).
pub fn slicing_ratio(
    fs: &[&FieldSampler<'_>],
    s: f64,
    p: f64,
    directions: usize,
    budget: usize,
    seed: u64,
) -> Result<Vec<SlicingRow>> {
    if directions == 0 || fs.is_empty() {
        return Err(CoreError::invalid(
            "slicing needs test functions and directions",
        ));
    }
    let sp = s * p;
    let mut out = Vec::with_capacity(fs.len());
    for (fi, f) in fs.iter().enumerate() {
        if f.domain.dim() != 2 {
            return Err(CoreError::Unsupported(
                "slicing is implemented for n = 2 only".into(),
            ));
        }
        let lhs = fractional_seminorm(f, s, p, budget, seed ^ (fi as u64))?;
        // Direction-averaged line integrals.
        let diam = f.domain.diameter();
        let (plans, _) = plan_shells(diam, s, sp, budget / directions);
        let mut dir_means = Vec::with_capacity(directions);
        let mut dir_vars = Vec::with_capacity(directions);
        for d in 0..directions {
            let mut rng = substream(seed, &[0x51d, fi as u64, d as u64]);
            let theta =
                (d as f64 + rng.gen_range(0.0..1.0)) * core::f64::consts::PI / directions as f64;
            let v = [math::cos(theta), math::sin(theta)];
            let jv = [-v[1], v[0]];
            // Projection ranges of the domain onto the two axes.
            let (zr, tr) = match &f.domain {
                SampleDomain::Box(bx) => {
                    let corners = [
                        [bx.lo()[0], bx.lo()[1]],
                        [bx.lo()[0], bx.hi()[1]],
                        [bx.hi()[0], bx.lo()[1]],
                        [bx.hi()[0], bx.hi()[1]],
                    ];
                    let proj = |axis: [f64; 2]| {
                        let vals = corners.map(|c| c[0] * axis[0] + c[1] * axis[1]);
                        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
                        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                        (lo, hi)
                    };
                    (proj(jv), proj(v))
                }
                SampleDomain::Ball { .. } => {
                    return Err(CoreError::Unsupported(
                        "slicing expects a box domain".into(),
                    ))
                }
            };
            let (lz, lt) = (zr.1 - zr.0, tr.1 - tr.0);
            let mut mean_d = 0.0;
            let mut var_d = 0.0;
            for (m, plan) in plans.iter().enumerate() {
                let mut srng = substream(seed, &[0x51e, fi as u64, d as u64, m as u64]);
                let mut sum = 0.0;
                let mut sumsq = 0.0;
                for _ in 0..plan.n {
                    let z = srng.gen_range(zr.0..zr.1);
                    let t1 = srng.gen_range(tr.0..tr.1);
                    let sign = if srng.gen::<bool>() { 1.0 } else { -1.0 };
                    let (ell, w) = if plan.tail {
                        let (ell, w) = tail_draw(&mut srng, plan.lo, plan.hi, sp);
                        (ell, lz * lt * 2.0 * w)
                    } else {
                        let ell = srng.gen_range(plan.lo..plan.hi);
                        let w = lz * lt * 2.0 * (plan.hi - plan.lo) * math::powf(ell, -sp - 1.0);
                        (ell, w)
                    };
                    let x = [z * jv[0] + t1 * v[0], z * jv[1] + t1 * v[1]];
                    let y = [x[0] + sign * ell * v[0], x[1] + sign * ell * v[1]];
                    let c = if f.domain.contains(&x) && f.domain.contains(&y) {
                        math::powf(math::abs((f.eval)(&x) - (f.eval)(&y)), p) * w
                    } else {
                        0.0
                    };
                    sum += c;
                    sumsq += c * c;
                }
                let nn = plan.n as f64;
                let mean = sum / nn;
                mean_d += mean;
                if plan.n > 1 {
                    var_d += (sumsq / nn - mean * mean).max(0.0) / (nn - 1.0);
                }
            }
            dir_means.push(mean_d);
            dir_vars.push(var_d);
        }
        let sliced = dir_means.iter().sum::<f64>() / directions as f64;
        let between = if directions > 1 {
            let mean = sliced;
            dir_means
                .iter()
                .map(|m| (m - mean) * (m - mean))
                .sum::<f64>()
                / (directions - 1) as f64
        } else {
            0.0
        };
        let within = dir_vars.iter().sum::<f64>() / directions as f64;
        let sliced_se = math::sqrt((between + within) / directions as f64);
        let (ratio, ratio_se) = if lhs.power > 1e-300 && sliced > 1e-300 {
            let r = lhs.power / sliced;
            let rel = math::sqrt(
                (lhs.power_stderr / lhs.power) * (lhs.power_stderr / lhs.power)
                    + (sliced_se / sliced) * (sliced_se / sliced),
            );
            (Some(r), r * rel)
        } else {
            (None, 0.0)
        };
        out.push(SlicingRow {
            plane_power: lhs.power,
            plane_stderr: lhs.power_stderr,
            sliced,
            sliced_stderr: sliced_se,
            ratio,
            ratio_stderr: ratio_se,
        });
    }
    Ok(out)
}

/// Poincaré quotient outcome.
#[derive(Debug, Clone, Copy)]
pub struct PoincareOutcome {
    pub l1: f64,
    pub seminorm: f64,
    pub ratio: f64,
}

/// `||f||_{L^1(B)} / (R^{n(1-1/q)+alpha} [f]_{W^{alpha,q}(B)})` for an `f`
/// vanishing on the sphere; `None` when `f` is identically negligible.
pub fn poincare_ratio(
    f: &FieldSampler<'_>,
    alpha: f64,
    q: f64,
    budget: usize,
    seed: u64,
) -> Result<Option<PoincareOutcome>> {
    let (center, radius) = match &f.domain {
        SampleDomain::Ball { center, radius } => (center.clone(), *radius),
        _ => {
            return Err(CoreError::invalid(
                "poincare ratio integrates over a ball domain",
            ))
        }
    };
    let n = center.len() as f64;
    if !(alpha > 0.0 && alpha < 1.0 && q >= 1.0) {
        return Err(CoreError::invalid(
            "poincare ratio needs alpha in (0,1), q >= 1",
        ));
    }
    if alpha * q <= n {
        return Err(CoreError::invalid("poincare ratio needs alpha * q > n"));
    }
    // Boundary check: f must vanish on the sphere.
    let mut rng = substream(seed, &[0xb0d]);
    for _ in 0..1000 {
        let dir = unit_vector(&mut rng, center.len());
        let x: Vec<f64> = center
            .iter()
            .zip(&dir)
            .map(|(c, d)| c + radius * d)
            .collect();
        if math::abs((f.eval)(&x)) > 1e-8 {
            return Err(CoreError::invalid("function does not vanish on the sphere"));
        }
    }
    // L1 norm by plain Monte Carlo over the ball.
    let mut rng = substream(seed, &[0xb0e]);
    let nl1 = (budget / 4).max(1000);
    let mut acc = 0.0;
    for _ in 0..nl1 {
        let x = f.domain.sample(&mut rng);
        acc += math::abs((f.eval)(&x));
    }
    let l1 = acc / nl1 as f64 * f.domain.volume();
    let sem = fractional_seminorm(f, alpha, q, budget, seed ^ 0x9d)?;
    if l1 < 1e-300 && sem.value < 1e-300 {
        return Ok(None);
    }
    let scale = math::powf(radius, n * (1.0 - 1.0 / q) + alpha);
    Ok(Some(PoincareOutcome {
        l1,
        seminorm: sem.value,
        ratio: l1 / (scale * sem.value),
    }))
}

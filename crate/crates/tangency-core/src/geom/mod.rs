//! Multi-scale cube scaffolds with prescribed gap-width schedules.
//!
//! A scaffold is built from a box domain, a branching parameter `B` (each
//! cube splits into `2^B` children per axis), a base mesh `delta` and a gap
//! schedule `rho_j`. Level-0 cubes of side `r_0 = delta - rho_0` sit centered
//! on a corner-anchored `delta`-tiling of the domain; a cube of side `r_{i-1}`
//! spawns `2^{B k}` children of side `r_i = 2^{-B} r_{i-1} - rho_i`, leaving
//! gaps of width exactly `rho_i` between siblings. The limiting compact set
//! is the intersection of the level unions.

pub mod deep;

use alloc::format;
use alloc::vec::Vec;

use crate::error::CoreError;
use crate::math;
use crate::Result;

pub use deep::{CubePath, DeepPoint};

/// Axis-aligned box domain, one closed interval per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxDomain {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(CoreError::invalid(
                "domain needs k >= 1 matching interval bounds",
            ));
        }
        for (a, b) in lo.iter().zip(&hi) {
            if !(a.is_finite() && b.is_finite() && b > a) {
                return Err(CoreError::invalid(
                    "every domain interval must have positive length",
                ));
            }
        }
        Ok(BoxDomain { lo, hi })
    }

    /// Unit cube `(0,1)^k`.
    pub fn unit(k: usize) -> Self {
        BoxDomain {
            lo: alloc::vec![0.0; k],
            hi: alloc::vec![1.0; k],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn side(&self, axis: usize) -> f64 {
        self.hi[axis] - self.lo[axis]
    }

    pub fn min_side(&self) -> f64 {
        (0..self.dim())
            .map(|a| self.side(a))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.side(a)).product()
    }

    pub fn diameter(&self) -> f64 {
        math::sqrt((0..self.dim()).map(|a| self.side(a) * self.side(a)).sum())
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(v, (a, b))| v >= a && v <= b)
    }
}

/// Which closed-form gap schedule drives the construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regime {
    /// `rho_j = (3 delta / pi^2)^{1/(1-s)} j^{-2/(1-s)} 2^{-Bj/(1-s)}`, so that
    /// `sum_j 2^{Bj} rho_j^{1-s} = delta / 2`. Requires `0 <= s < 1/2`, `B >= 10`.
    Sobolev { s: f64 },
    /// `rho_j = delta (1-lambda) lambda^j 2^{-Bj}` with
    /// `lambda = 2^{-B(k-d)/d}`; the level-0 cubes shrink to side
    /// `delta * lambda` and the limit set is a self-similar fractal of
    /// dimension `d`. Requires `0 < d < k`.
    Dimension { d: f64 },
    /// The Sobolev schedule at `s = 0`.
    Extremal,
    /// All gaps zero; every level tiles its parent exactly. Degenerate case
    /// used as a reference (full-measure limit, dimension `k`).
    Gapless,
}

impl Regime {
    pub fn name(&self) -> &'static str {
        match self {
            Regime::Sobolev { .. } => "sobolev",
            Regime::Dimension { .. } => "dimension",
            Regime::Extremal => "extremal",
            Regime::Gapless => "gapless",
        }
    }
}

/// Relative tail threshold below which series are flagged as converged.
pub const SERIES_TAIL_TOL: f64 = 1e-12;

/// Result of summing a schedule series up to a cutoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSum {
    pub value: f64,
    /// Tail increments fell below `SERIES_TAIL_TOL * delta`.
    pub converged: bool,
    /// The series fails the ratio test (terms eventually grow).
    pub divergent: bool,
    pub terms: usize,
}

/// A gap-width schedule `j -> rho_j` (defined for `j >= 0`) together with the
/// parameters it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct RhoSchedule {
    regime: Regime,
    k: usize,
    b: u32,
    delta: f64,
    /// `2^{-B(k-d)/d}` in the dimension regime.
    lambda: Option<f64>,
}

/// Branching limit: `2^B` children per axis must fit in the index type and
/// `2^{Bj}` must stay exact in `f64` over practical depths.
const MAX_B: u32 = 20;

impl RhoSchedule {
    /// Construct a schedule. `param` is `s` in the sobolev regime, `d` in the
    /// dimension regime, and ignored otherwise.
    pub fn make(regime_tag: &str, k: usize, b: u32, delta: f64, param: f64) -> Result<Self> {
        if k == 0 {
            return Err(CoreError::invalid("k must be >= 1"));
        }
        if !(delta.is_finite() && delta > 0.0) {
            return Err(CoreError::invalid("delta must be positive"));
        }
        if b == 0 || b > MAX_B {
            return Err(CoreError::invalid(format!("B must be in 1..={MAX_B}")));
        }
        let regime = match regime_tag {
            "sobolev" => {
                if !(0.0..0.5).contains(&param) {
                    return Err(CoreError::invalid("sobolev regime needs 0 <= s < 1/2"));
                }
                if b < 10 {
                    return Err(CoreError::invalid("sobolev regime needs B >= 10"));
                }
                Regime::Sobolev { s: param }
            }
            "dimension" => {
                if !(param > 0.0 && param < k as f64) {
                    return Err(CoreError::invalid("dimension regime needs 0 < d < k"));
                }
                Regime::Dimension { d: param }
            }
            "extremal" => {
                if b < 10 {
                    return Err(CoreError::invalid("extremal regime needs B >= 10"));
                }
                Regime::Extremal
            }
            "gapless" => Regime::Gapless,
            other => return Err(CoreError::invalid(format!("unknown regime '{other}'"))),
        };
        let lambda = match regime {
            Regime::Dimension { d } => {
                let lam = math::exp2i(0) * math::powf(2.0, -(b as f64) * (k as f64 - d) / d);
                debug_assert!(lam > 0.0 && lam < 1.0);
                Some(lam)
            }
            _ => None,
        };
        let schedule = RhoSchedule {
            regime,
            k,
            b,
            delta,
            lambda,
        };
        // The sobolev/extremal schedules must leave positive side length at
        // every depth: sum_j 2^{Bj} rho_j < delta. (The dimension regime
        // sums to delta exactly; its sides stay positive by closed form.)
        if !matches!(schedule.regime, Regime::Dimension { .. }) {
            let total = schedule.sum_2bj_rho(usize::MAX);
            if !total.divergent && total.converged && total.value >= delta {
                return Err(CoreError::invalid(
                    "schedule gaps consume the whole mesh: sum 2^{Bj} rho_j >= delta",
                ));
            }
        }
        Ok(schedule)
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn b(&self) -> u32 {
        self.b
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `lambda = 2^{-B(k-d)/d}` (dimension regime only).
    pub fn lambda(&self) -> Option<f64> {
        self.lambda
    }

    /// The regime parameter as passed to `make` (s or d), if any.
    pub fn param(&self) -> Option<f64> {
        match self.regime {
            Regime::Sobolev { s } => Some(s),
            Regime::Dimension { d } => Some(d),
            _ => None,
        }
    }

    /// Gap width `rho_j`, defined for every `j >= 0`.
    ///
    /// `rho_0` is the level-0 shrink: zero except in the dimension regime,
    /// where it equals `delta (1 - lambda)` so that the closed forms
    /// `r_i = delta lambda^{i+1} 2^{-Bi}` and
    /// `sum_{j>=0} 2^{Bj} rho_j = delta` hold exactly.
    pub fn rho(&self, j: usize) -> f64 {
        match self.regime {
            Regime::Sobolev { s } => {
                if j == 0 {
                    0.0
                } else {
                    let e = 1.0 / (1.0 - s);
                    let base = 3.0 * self.delta / (core::f64::consts::PI * core::f64::consts::PI);
                    math::powf(base, e)
                        * math::powf(j as f64, -2.0 * e)
                        * math::powf(2.0, -(self.b as f64) * j as f64 * e)
                }
            }
            Regime::Extremal => {
                if j == 0 {
                    0.0
                } else {
                    let base = 3.0 * self.delta / (core::f64::consts::PI * core::f64::consts::PI);
                    base * math::powf(j as f64, -2.0) * math::powf(2.0, -(self.b as f64) * j as f64)
                }
            }
            Regime::Dimension { .. } => {
                let lam = self.lambda.unwrap();
                self.delta
                    * (1.0 - lam)
                    * math::powf(lam, j as f64)
                    * math::powf(2.0, -(self.b as f64) * j as f64)
            }
            Regime::Gapless => 0.0,
        }
    }

    /// `ln rho_j` in closed form (no underflow at depth), `-inf` where the
    /// gap is zero.
    pub fn ln_rho(&self, j: usize) -> f64 {
        const LN2: f64 = core::f64::consts::LN_2;
        match self.regime {
            Regime::Sobolev { s } => {
                if j == 0 {
                    f64::NEG_INFINITY
                } else {
                    let e = 1.0 / (1.0 - s);
                    let base = 3.0 * self.delta / (core::f64::consts::PI * core::f64::consts::PI);
                    e * (math::ln(base)
                        - 2.0 * math::ln(j as f64)
                        - (self.b as f64) * j as f64 * LN2)
                }
            }
            Regime::Extremal => {
                if j == 0 {
                    f64::NEG_INFINITY
                } else {
                    let base = 3.0 * self.delta / (core::f64::consts::PI * core::f64::consts::PI);
                    math::ln(base) - 2.0 * math::ln(j as f64) - (self.b as f64) * j as f64 * LN2
                }
            }
            Regime::Dimension { .. } => {
                let lam = self.lambda.unwrap();
                math::ln(self.delta * (1.0 - lam))
                    + j as f64 * (math::ln(lam) - (self.b as f64) * LN2)
            }
            Regime::Gapless => f64::NEG_INFINITY,
        }
    }

    /// Partial sum `sum_{j<=N} 2^{Bj} rho_j` with convergence detection.
    /// Pass `usize::MAX` to sum until the tail falls below the threshold.
    ///
    /// Terms are assembled in log space: the gap widths underflow `f64` long
    /// before the summands do.
    pub fn sum_2bj_rho(&self, n: usize) -> SeriesSum {
        const LN2: f64 = core::f64::consts::LN_2;
        self.sum_series(n, |j| {
            if j == 0 {
                self.rho(0)
            } else {
                math::exp((self.b as f64) * j as f64 * LN2 + self.ln_rho(j))
            }
        })
    }

    /// Partial sum `sum_{1<=j<=N} 2^{Bj} rho_j^{1-s}` (the indicator
    /// regularity series) with convergence/divergence detection.
    pub fn sum_2bj_rho_pow(&self, s: f64, n: usize) -> SeriesSum {
        const LN2: f64 = core::f64::consts::LN_2;
        self.sum_series(n, |j| {
            if j == 0 {
                0.0
            } else {
                math::exp((self.b as f64) * j as f64 * LN2 + (1.0 - s) * self.ln_rho(j))
            }
        })
    }

    fn sum_series(&self, n: usize, term: impl Fn(usize) -> f64) -> SeriesSum {
        let tol = SERIES_TAIL_TOL * self.delta;
        let hard_cap: usize = 200_000;
        let mut value = 0.0;
        let mut converged = false;
        let mut divergent = false;
        let mut prev = f64::NAN;
        let mut terms = 0;
        for j in 0..=n.min(hard_cap) {
            let t = term(j);
            if !t.is_finite() {
                divergent = true;
                terms = j;
                break;
            }
            value += t;
            terms = j + 1;
            // Ratio test on consecutive nonzero terms, once they are past
            // the preasymptotic range.
            if j > 8 && prev > 0.0 && t >= prev {
                divergent = true;
                break;
            }
            if j > 0 && t < tol {
                converged = true;
                if n == usize::MAX {
                    break;
                }
            }
            prev = t;
        }
        if divergent {
            converged = false;
        }
        SeriesSum {
            value,
            converged,
            divergent,
            terms,
        }
    }

    /// `2^{B*level} r_level = delta - sum_{j<=level} 2^{Bj} rho_j`, computed
    /// without cancellation (the dimension regime's sum converges to delta,
    /// so the difference is formed from its closed form `delta
    /// lambda^{level+1}` instead of the partial sums).
    pub fn span(&self, level: usize) -> f64 {
        match self.regime {
            Regime::Dimension { .. } => {
                let lam = self.lambda.unwrap();
                self.delta * math::powf(lam, level as f64 + 1.0)
            }
            _ => {
                let mut sum = 0.0;
                for j in 0..=level {
                    sum += math::exp2i((self.b as i32) * j as i32) * self.rho(j);
                }
                self.delta - sum
            }
        }
    }

    /// Side lengths `r_0..r_N`; errors at the first depth where the closed
    /// form `r_i = (delta - sum_{j<=i} 2^{Bj} rho_j) / 2^{Bi}` is
    /// non-positive.
    pub fn side_lengths(&self, n: usize) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let r = self.span(i) * math::exp2i(-((self.b as i32) * i as i32));
            if !(r > 0.0) {
                return Err(CoreError::ScheduleExhausted { depth: i });
            }
            out.push(r);
        }
        Ok(out)
    }

    /// Hausdorff/box dimension `B k / (B - log2 lambda)` of the limit set
    /// (dimension regime only).
    pub fn theoretical_dimension(&self) -> Result<f64> {
        match self.lambda {
            Some(lam) => {
                let b = self.b as f64;
                Ok(b * self.k as f64 / (b - math::log2(lam)))
            }
            None => Err(CoreError::Unsupported(
                "theoretical dimension is defined for the dimension regime only".into(),
            )),
        }
    }

    /// Ratio test for the `W^{1,q}` summability series
    /// `sum_i 2^{Bki} r_i^{2q+k-1} rho_{i+1}^{1-q}`: returns the limiting
    /// consecutive-term ratio (converges iff < 1). Assembled in log space;
    /// the raw terms overflow or underflow `f64` for large `q`.
    pub fn w1q_term_ratio(&self, q: f64) -> Result<f64> {
        if q < 1.0 {
            return Err(CoreError::invalid("q must be >= 1"));
        }
        if matches!(self.regime, Regime::Gapless) {
            return Err(CoreError::Unsupported(
                "gapless schedule has no gap series".into(),
            ));
        }
        const LN2: f64 = core::f64::consts::LN_2;
        let depth = 16;
        let r = self.side_lengths(depth)?;
        let log_term = |i: usize| -> f64 {
            (self.b as f64) * (self.k as f64) * i as f64 * LN2
                + (2.0 * q + self.k as f64 - 1.0) * math::ln(r[i])
                + (1.0 - q) * self.ln_rho(i + 1)
        };
        let diff = log_term(depth) - log_term(depth - 1);
        Ok(math::exp(diff))
    }

    /// Partial sums of the C^1 summability series
    /// `sum_j rho_{j+1}^{-1} r_j^2` up to depth `n`.
    pub fn c1_series(&self, n: usize) -> Result<f64> {
        let r = self.side_lengths(n)?;
        let mut acc = 0.0;
        for j in 0..=n.saturating_sub(1) {
            let rho = self.rho(j + 1);
            if rho > 0.0 {
                acc += r[j] * r[j] / rho;
            }
        }
        Ok(acc)
    }
}

/// The nested cube families up to a finite depth, with exact side lengths
/// and measures. Queries are pure; the type is immutable after construction.
#[derive(Debug, Clone)]
pub struct CantorScaffold {
    schedule: RhoSchedule,
    domain: BoxDomain,
    depth: usize,
    /// `r[0..=depth]`
    r: Vec<f64>,
    /// `rho[0..=depth]`
    rho: Vec<f64>,
    /// root cubes per axis (corner-anchored `delta`-tiling)
    roots_per_axis: Vec<u64>,
}

impl CantorScaffold {
    pub fn build(domain: BoxDomain, schedule: RhoSchedule, depth: usize) -> Result<Self> {
        if domain.dim() != schedule.k() {
            return Err(CoreError::Mismatch("domain dimension != schedule k".into()));
        }
        let delta = schedule.delta();
        if delta >= domain.min_side() {
            return Err(CoreError::EmptyLattice);
        }
        let mut roots_per_axis = Vec::with_capacity(domain.dim());
        for a in 0..domain.dim() {
            // Tolerate representation error when the side is an exact
            // multiple of delta.
            let count = math::floor(domain.side(a) / delta * (1.0 + 1e-12)) as u64;
            if count == 0 {
                return Err(CoreError::EmptyLattice);
            }
            roots_per_axis.push(count);
        }
        let r = schedule.side_lengths(depth)?;
        let rho = (0..=depth).map(|j| schedule.rho(j)).collect();
        Ok(CantorScaffold {
            schedule,
            domain,
            depth,
            r,
            rho,
            roots_per_axis,
        })
    }

    pub fn schedule(&self) -> &RhoSchedule {
        &self.schedule
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn k(&self) -> usize {
        self.schedule.k()
    }

    pub fn b(&self) -> u32 {
        self.schedule.b()
    }

    /// Side length `r_level`.
    pub fn side(&self, level: usize) -> f64 {
        self.r[level]
    }

    pub fn sides(&self) -> &[f64] {
        &self.r
    }

    pub fn rho(&self, level: usize) -> f64 {
        self.rho[level]
    }

    /// Per-axis child pitch at `level >= 1`: `2^{-B} r_{level-1}`. At level 0
    /// the pitch is the root spacing `delta`.
    pub fn pitch(&self, level: usize) -> f64 {
        if level == 0 {
            self.schedule.delta()
        } else {
            self.r[level - 1] * math::exp2i(-(self.b() as i32))
        }
    }

    pub fn roots_per_axis(&self) -> &[u64] {
        &self.roots_per_axis
    }

    /// Number of root cubes.
    pub fn card_roots(&self) -> u64 {
        self.roots_per_axis.iter().product()
    }

    /// `log(cube count at level)`, exact in closed form; counts themselves
    /// overflow every integer type at large `B k * level`.
    pub fn log_cube_count(&self, level: usize) -> f64 {
        math::ln(self.card_roots() as f64)
            + (self.b() as f64) * (self.k() as f64) * level as f64 * core::f64::consts::LN_2
    }

    /// Exact Lebesgue measure of the level union,
    /// `Card(L1) (delta - sum_{j<=level} 2^{Bj} rho_j)^k`.
    ///
    /// Computed from the closed-form span, which stays finite at depths
    /// where the raw cube count `2^{Bk*level}` would overflow.
    pub fn measure(&self, level: usize) -> f64 {
        debug_assert!(level <= self.depth);
        self.card_roots() as f64 * math::powf(self.schedule.span(level), self.k() as f64)
    }

    /// Limit measure `Card(L1) (delta - sum_j 2^{Bj} rho_j)^k` with the series
    /// summed to its convergence flag. The dimension-regime limit is exactly
    /// zero.
    pub fn measure_limit(&self) -> SeriesSum {
        let s = self.schedule.sum_2bj_rho(usize::MAX);
        let span = match self.schedule.regime() {
            Regime::Dimension { .. } => 0.0,
            _ => (self.schedule.delta() - s.value).max(0.0),
        };
        SeriesSum {
            value: self.card_roots() as f64 * math::powf(span, self.k() as f64),
            ..s
        }
    }

    /// Constant-free regularity bound `vol(domain) + sum_{j<=N} 2^{Bj} rho_j^{1-s}`
    /// for the indicator of the level-N union, with series flags.
    pub fn indicator_seminorm_bound(&self, s: f64, n: usize) -> Result<SeriesSum> {
        if !(s > 0.0 && s < 1.0) {
            return Err(CoreError::invalid("indicator bound needs 0 < s < 1"));
        }
        let series = self.schedule.sum_2bj_rho_pow(s, n);
        Ok(SeriesSum {
            value: self.domain.volume() + series.value,
            ..series
        })
    }

    /// Fully explicit upper bound for the Gagliardo seminorm of the level-N
    /// indicator, derived from the radial kernel estimate
    /// `[1_E]_{W^{s,1}} <= (2 k omega_k / s) * int_{Omega \ E} dist(y, E)^{-s} dy`
    /// and the exact inventory of maximal gap intervals per axis (the
    /// complement of a product set is the union of per-axis gap slabs, and
    /// `dist(y,E)` dominates the single-axis gap distance).
    pub fn explicit_indicator_bound(&self, s: f64, n: usize) -> Result<f64> {
        if !(s > 0.0 && s < 1.0) {
            return Err(CoreError::invalid("explicit bound needs 0 < s < 1"));
        }
        if n > self.depth {
            return Err(CoreError::invalid("level exceeds scaffold depth"));
        }
        let k = self.k() as f64;
        let sphere_area = k * unit_ball_volume(self.k());
        // One-sided integral over a gap of width w flanked by the set on
        // both sides: 2 * (w/2)^{1-s} / (1-s); one-sided strips drop the 2.
        let gap_int = |w: f64| -> f64 {
            if w <= 0.0 {
                0.0
            } else {
                2.0 * math::powf(w / 2.0, 1.0 - s) / (1.0 - s)
            }
        };
        let edge_int = |w: f64| -> f64 {
            if w <= 0.0 {
                0.0
            } else {
                math::powf(w, 1.0 - s) / (1.0 - s)
            }
        };
        // Margin from a level-j cube edge inward to its deepest descendants.
        let margin = |j: usize| -> f64 {
            let mut m = 0.0;
            for l in (j + 1)..=n {
                m += self.rho[l] / 2.0;
            }
            m
        };
        let mut total = 0.0;
        for axis in 0..self.k() {
            let roots = self.roots_per_axis[axis] as f64;
            let mut g = 0.0;
            // Interior sibling gaps at levels 1..=n; maximal width is the
            // nominal gap plus both flanking descent margins.
            let children = math::exp2i(self.b() as i32);
            for j in 1..=n {
                let count =
                    roots * (children - 1.0) * math::exp2i((self.b() as i32) * (j as i32 - 1));
                g += count * gap_int(self.rho[j] + 2.0 * margin(j));
            }
            // Root-cell interfaces: the two half-shrinks rho_0/2 plus both
            // descent margins.
            let interface = self.rho[0] + 2.0 * margin(0);
            g += (roots - 1.0) * gap_int(interface);
            // Domain edges: one-sided strips (half interface plus any
            // leftover slab where the tiling does not reach the boundary).
            let leftover = self.domain.side(axis) - roots * self.schedule.delta();
            g += edge_int(interface / 2.0) + edge_int(interface / 2.0 + leftover.max(0.0));
            // Cross-sectional volume of the slabs along the other axes.
            let cross: f64 = (0..self.k())
                .filter(|a| *a != axis)
                .map(|a| self.domain.side(a))
                .product();
            total += g * cross;
        }
        Ok(2.0 * sphere_area / s * total)
    }

    /// Offset of a child-cube center from its parent center along one axis.
    /// `level >= 1`, `digit < 2^B`; at level 0 this is the root-cell offset
    /// from the corner-anchored tiling.
    pub fn child_offset(&self, level: usize, digit: u32) -> f64 {
        debug_assert!(level >= 1);
        let pitch = self.pitch(level);
        (digit as f64 + 0.5) * pitch - self.r[level - 1] / 2.0
    }

    /// Global coordinates of a root-cell center (indices may lie outside the
    /// lattice; callers check bounds).
    pub fn root_center(&self, root: &[i64]) -> Vec<f64> {
        root.iter()
            .enumerate()
            .map(|(a, &m)| self.domain.lo[a] + self.schedule.delta() * (m as f64 + 0.5))
            .collect()
    }

    pub fn root_in_lattice(&self, root: &[i64]) -> bool {
        root.iter()
            .enumerate()
            .all(|(a, &m)| m >= 0 && (m as u64) < self.roots_per_axis[a])
    }

    /// Membership of a global point in the closed level union.
    pub fn membership(&self, x: &[f64], level: usize) -> Result<bool> {
        if level > self.depth {
            return Err(CoreError::invalid("level exceeds scaffold depth"));
        }
        if x.len() != self.k() {
            return Err(CoreError::Mismatch("point dimension != k".into()));
        }
        let p = self.anchor_global(x);
        Ok(self.membership_deep(&p, level))
    }

    /// Membership of an anchored point in the closed level union.
    pub fn membership_deep(&self, p: &DeepPoint, level: usize) -> bool {
        debug_assert!(level <= self.depth);
        let c = self.canonicalize(p);
        if !c.in_lattice {
            return false;
        }
        let pt = c.point;
        let anchored = pt.level();
        if anchored < level {
            return false;
        }
        if anchored == level {
            let half = self.r[level] / 2.0;
            return pt.offset.iter().all(|d| math::abs(*d) <= half);
        }
        // Anchored deeper: the descent only recurses through containing
        // cubes, so every prefix at or above `anchored - 1` contains x.
        true
    }

    /// Export-oriented summary row: `(level, r, measure)`.
    pub fn level_table(&self) -> Vec<(usize, f64, f64)> {
        (0..=self.depth)
            .map(|i| (i, self.r[i], self.measure(i)))
            .collect()
    }
}

/// Volume of the unit ball in dimension k (k <= 3 closed forms, then the
/// recursion `omega_k = 2 pi / k * omega_{k-2}`).
pub fn unit_ball_volume(k: usize) -> f64 {
    match k {
        0 => 1.0,
        1 => 2.0,
        2 => core::f64::consts::PI,
        _ => 2.0 * core::f64::consts::PI / (k as f64) * unit_ball_volume(k - 2),
    }
}

/// Convenience constructor mirroring the external interface: regime tag,
/// dimensions and parameter in one call.
pub fn make_schedule(
    regime: &str,
    k: usize,
    b: u32,
    delta: f64,
    param: f64,
) -> Result<RhoSchedule> {
    RhoSchedule::make(regime, k, b, delta, param)
}

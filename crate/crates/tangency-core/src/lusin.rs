//! Layered functions with prescribed gradient on the limit set.
//!
//! Given a gradient datum `F(x, u)` and a scaffold, the construction sets,
//! per cube `Q` of level `i` with center `c(Q)`,
//!
//! ```text
//! a_Q = F(c(Q), v_Q)    with    v_Q = u_{i-1}(c(Q)),
//! u_i = u_{i-1} + sum_Q sigma_Q (a_Q - a_parent(Q)) [x - c(Q)],
//! ```
//!
//! where `sigma_Q` is 1 on `Q` and supported in the cube of side
//! `r_i + rho_i / 2`. On each cube the layers telescope: `u_i` is affine with
//! gradient exactly `a_Q`, and `v` obeys the ladder
//! `v_child = v_parent + a_parent [c_child - c_parent]`. Both facts let the
//! evaluator walk a single cube path per query point, in coordinates
//! relative to the path, so evaluation stays numerically exact even for
//! schedules whose deep cubes are far below global `f64` resolution.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::cutoff::{self, CutoffProfile};
use crate::error::CoreError;
use crate::geom::{CantorScaffold, CubePath, DeepPoint};
use crate::linalg::LinMap;
use crate::math;
use crate::rng::Stream;
use crate::Result;

type EvalFn = dyn Fn(&[f64], &[f64]) -> LinMap + Send + Sync;

/// Affine dependence `F(x, u) = A_0 + sum_m x_m A_m + sum_j u_j B_j`,
/// carried alongside the evaluator to allow exact differencing of
/// coefficients between nearby cubes.
#[derive(Debug, Clone)]
pub struct AffineParts {
    pub constant: LinMap,
    pub x_parts: Vec<LinMap>,
    pub u_parts: Vec<LinMap>,
}

/// A locally Lipschitz gradient datum with recorded sup and Lipschitz bounds
/// on the working set.
pub struct GradientDatum {
    /// Codomain dimension `n - k`.
    rows: usize,
    /// Domain dimension `k`.
    cols: usize,
    eval: Box<EvalFn>,
    affine: Option<AffineParts>,
    m1: f64,
    m2: f64,
}

impl GradientDatum {
    pub fn from_fn(
        rows: usize,
        cols: usize,
        eval: impl Fn(&[f64], &[f64]) -> LinMap + Send + Sync + 'static,
        m1: f64,
        m2: f64,
    ) -> Self {
        GradientDatum {
            rows,
            cols,
            eval: Box::new(eval),
            affine: None,
            m1,
            m2,
        }
    }

    /// Datum with explicit affine structure.
    pub fn affine(parts: AffineParts, m1: f64, m2: f64) -> Self {
        let rows = parts.constant.rows;
        let cols = parts.constant.cols;
        assert_eq!(parts.x_parts.len(), cols);
        assert_eq!(parts.u_parts.len(), rows);
        let p = parts.clone();
        let eval = move |x: &[f64], u: &[f64]| -> LinMap {
            let mut out = p.constant.clone();
            for (m, xm) in x.iter().enumerate().take(p.x_parts.len()) {
                out = out.add(&p.x_parts[m].scale(*xm));
            }
            for (j, uj) in u.iter().enumerate().take(p.u_parts.len()) {
                out = out.add(&p.u_parts[j].scale(*uj));
            }
            out
        };
        GradientDatum {
            rows,
            cols,
            eval: Box::new(eval),
            affine: Some(parts),
            m1,
            m2,
        }
    }

    /// The constant datum `F == a` (Lipschitz bound zero).
    pub fn constant(a: LinMap) -> Self {
        let m1 = a.op_norm();
        let parts = AffineParts {
            constant: a.clone(),
            x_parts: (0..a.cols).map(|_| LinMap::zeros(a.rows, a.cols)).collect(),
            u_parts: (0..a.rows).map(|_| LinMap::zeros(a.rows, a.cols)).collect(),
        };
        GradientDatum::affine(parts, m1, 0.0)
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        GradientDatum::constant(LinMap::zeros(rows, cols))
    }

    /// Tangency datum of the horizontal plane field in R^3:
    /// `F((x1, x2), u) = (-2 x2, 2 x1)` as a row. `coord_bound` is the sup
    /// of `|x|` over the working set, giving `M1 = 2 coord_bound`, `M2 = 2`.
    pub fn heisenberg(coord_bound: f64) -> Self {
        let parts = AffineParts {
            constant: LinMap::zeros(1, 2),
            x_parts: vec![
                LinMap::from_rows(&[&[0.0, 2.0]]),
                LinMap::from_rows(&[&[-2.0, 0.0]]),
            ],
            u_parts: vec![LinMap::zeros(1, 2)],
        };
        GradientDatum::affine(parts, 2.0 * coord_bound, 2.0)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn m1(&self) -> f64 {
        self.m1
    }

    pub fn m2(&self) -> f64 {
        self.m2
    }

    pub fn affine_parts(&self) -> Option<&AffineParts> {
        self.affine.as_ref()
    }

    pub fn eval(&self, x: &[f64], u: &[f64]) -> LinMap {
        (self.eval)(x, u)
    }

    /// Spot-check the recorded `M1`/`M2` by sampling the working box and
    /// `[-1,1]^{rows}`: returns the largest observed norm and difference
    /// quotient.
    pub fn spot_check(
        &self,
        lo: &[f64],
        hi: &[f64],
        samples: usize,
        rng: &mut Stream,
    ) -> (f64, f64) {
        let mut max_norm: f64 = 0.0;
        let mut max_quot: f64 = 0.0;
        let draw = |rng: &mut Stream, lo: &[f64], hi: &[f64]| -> Vec<f64> {
            lo.iter()
                .zip(hi)
                .map(|(a, b)| rng.gen_range(*a..=*b))
                .collect()
        };
        let ulo = vec![-1.0; self.rows];
        let uhi = vec![1.0; self.rows];
        let mut prev: Option<(Vec<f64>, Vec<f64>, LinMap)> = None;
        for _ in 0..samples {
            let x = draw(rng, lo, hi);
            let u = draw(rng, &ulo, &uhi);
            let f = self.eval(&x, &u);
            max_norm = max_norm.max(f.op_norm());
            if let Some((px, pu, pf)) = prev {
                let (dx, du) = (crate::linalg::dist(&x, &px), crate::linalg::dist(&u, &pu));
                let dd = math::sqrt(dx * dx + du * du);
                if dd > 1e-9 {
                    max_quot = max_quot.max(f.sub(&pf).op_norm() / dd);
                }
            }
            prev = Some((x, u, f));
        }
        (max_norm, max_quot)
    }
}

impl core::fmt::Debug for GradientDatum {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("GradientDatum")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .field("m1", &self.m1)
            .field("m2", &self.m2)
            .field("affine", &self.affine.is_some())
            .finish()
    }
}

/// Per-level coefficient data along one cube path.
#[derive(Debug, Clone)]
pub struct CoeffChain {
    /// `a[i]` is the coefficient of the level-(i+1) cube on the path.
    pub a: Vec<LinMap>,
    /// `delta_a[i] = a[i] - a[i-1]` (with `a[-1] = 0`), formed exactly from
    /// the affine structure when available.
    pub delta_a: Vec<LinMap>,
    /// `v[i]` is the ladder value `u_i(c(Q_{i+1}))` at the cube center.
    pub v: Vec<Vec<f64>>,
}

/// The layered function at a fixed depth over a scaffold.
pub struct LusinFunction<'a> {
    scaffold: &'a CantorScaffold,
    datum: &'a GradientDatum,
    depth: usize,
    eta: f64,
}

/// Everything the evaluator knows about `u` at one point.
#[derive(Debug, Clone)]
pub struct EvalDetail {
    /// `u(x)`.
    pub value: Vec<f64>,
    /// `Du(x)`.
    pub grad: LinMap,
    /// Deepest level whose cube contains the point (0 when outside level-1
    /// supports' parents).
    pub anchor_level: usize,
    /// `u(x) - v_anchor`: the value relative to the anchor cube's ladder
    /// value, exact at depth.
    pub rel_value: Vec<f64>,
    /// Present when the point lies in a cutoff transition band.
    pub ring_level: Option<usize>,
}

impl<'a> LusinFunction<'a> {
    /// Build the depth-`n` function. Checks the mesh smallness condition
    /// `delta * 10 M2 k^{3/2} (2 + 12 M1 pi^2 k^{3/2} + 2 M1) <= eta` and the
    /// dimensional compatibility of datum and scaffold.
    pub fn build(
        datum: &'a GradientDatum,
        scaffold: &'a CantorScaffold,
        depth: usize,
        eta: f64,
    ) -> Result<Self> {
        if datum.cols() != scaffold.k() {
            return Err(CoreError::Mismatch(
                "datum domain dimension != scaffold k".into(),
            ));
        }
        if depth > scaffold.depth() {
            return Err(CoreError::invalid("depth exceeds scaffold depth"));
        }
        if !(eta > 0.0) {
            return Err(CoreError::invalid("eta must be positive"));
        }
        let k = scaffold.k() as f64;
        let k32 = math::powf(k, 1.5);
        let pi2 = core::f64::consts::PI * core::f64::consts::PI;
        let denom =
            10.0 * datum.m2() * k32 * (2.0 + 12.0 * datum.m1() * pi2 * k32 + 2.0 * datum.m1());
        if scaffold.schedule().delta() * denom > eta {
            return Err(CoreError::invalid(
                "delta too large for (eta, M1, M2): mesh smallness condition violated",
            ));
        }
        Ok(LusinFunction {
            scaffold,
            datum,
            depth,
            eta,
        })
    }

    pub fn scaffold(&self) -> &CantorScaffold {
        self.scaffold
    }

    pub fn datum(&self) -> &GradientDatum {
        self.datum
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Codomain dimension `n - k`.
    pub fn rows(&self) -> usize {
        self.datum.rows()
    }

    /// `4 M1 sqrt(k) sum_{j<=depth} r_j`: the sup-norm bound of the layered
    /// sum.
    pub fn sup_bound(&self) -> f64 {
        let k = self.scaffold.k() as f64;
        let sum: f64 = (1..=self.depth).map(|j| self.scaffold.side(j)).sum();
        4.0 * self.datum.m1() * math::sqrt(k) * sum
    }

    /// Residual bound constant `C = 2 M2 sqrt(k) (M2 + M1 + 2)`; on a
    /// level-N cube the residual is at most `C r_N`.
    pub fn residual_constant(&self) -> f64 {
        let k = self.scaffold.k() as f64;
        2.0 * self.datum.m2() * math::sqrt(k) * (self.datum.m2() + self.datum.m1() + 2.0)
    }

    /// Coefficients and ladder values along `path`, computed top-down.
    pub fn chain(&self, path: &CubePath) -> CoeffChain {
        let upto = path.level().min(self.depth);
        let mut a: Vec<LinMap> = Vec::with_capacity(upto);
        let mut delta_a: Vec<LinMap> = Vec::with_capacity(upto);
        let mut v: Vec<Vec<f64>> = Vec::with_capacity(upto);
        let mut center = self.scaffold.root_center(&path.root);
        let k = self.scaffold.k();
        for lev in 1..=upto {
            let step: Vec<f64> = (0..k)
                .map(|ax| self.scaffold.child_offset(lev, path.digit(lev, ax)))
                .collect();
            for (c, s) in center.iter_mut().zip(&step) {
                *c += s;
            }
            let v_here = if lev == 1 {
                vec![0.0; self.datum.rows()]
            } else {
                let prev_a = &a[lev - 2];
                let prev_v = &v[lev - 2];
                let inc = prev_a.apply(&step);
                prev_v.iter().zip(&inc).map(|(x, y)| x + y).collect()
            };
            let a_here = self.datum.eval(&center, &v_here);
            let d_here = match (self.datum.affine_parts(), lev) {
                (Some(parts), l) if l >= 2 => {
                    // Exact difference from the affine structure:
                    // a_l - a_{l-1} = sum_m step_m A_m + sum_j (v_l - v_{l-1})_j B_j.
                    let mut d = LinMap::zeros(self.datum.rows(), self.datum.cols());
                    for (m, s) in step.iter().enumerate() {
                        d = d.add(&parts.x_parts[m].scale(*s));
                    }
                    let prev_a = &a[lev - 2];
                    let dv = prev_a.apply(&step);
                    for (j, dvj) in dv.iter().enumerate() {
                        d = d.add(&parts.u_parts[j].scale(*dvj));
                    }
                    d
                }
                (_, 1) => a_here.clone(),
                _ => a_here.sub(&a[lev - 2]),
            };
            a.push(a_here);
            delta_a.push(d_here);
            v.push(v_here);
        }
        CoeffChain { a, delta_a, v }
    }

    /// Coefficient matrix of one cube (`a_Q`).
    pub fn coefficient(&self, path: &CubePath) -> Result<LinMap> {
        if path.level() == 0 || path.level() > self.depth {
            return Err(CoreError::invalid(
                "coefficient requested outside 1..=depth",
            ));
        }
        Ok(self.chain(path).a.last().unwrap().clone())
    }

    /// Evaluate at a global point.
    pub fn eval_global(&self, x: &[f64]) -> EvalDetail {
        self.eval_at_depth(&self.scaffold.anchor_global(x), self.depth)
    }

    /// Evaluate at an anchored point.
    pub fn eval_deep(&self, p: &DeepPoint) -> EvalDetail {
        self.eval_at_depth(p, self.depth)
    }

    /// Evaluate the depth-`n` truncation `u_n` (`n <= depth`).
    pub fn eval_at_depth(&self, p: &DeepPoint, n: usize) -> EvalDetail {
        let n = n.min(self.depth);
        let rows = self.datum.rows();
        let cols = self.datum.cols();
        let zero = || EvalDetail {
            value: vec![0.0; rows],
            grad: LinMap::zeros(rows, cols),
            anchor_level: 0,
            rel_value: vec![0.0; rows],
            ring_level: None,
        };
        let canon = self.scaffold.canonicalize(p);
        if !canon.in_lattice {
            return zero();
        }
        let c = &canon.point;
        let lc = c.path.level();
        // Deepest level of u whose cube contains the point.
        let inside_anchor_cube = c
            .offset
            .iter()
            .all(|d| math::abs(*d) <= self.scaffold.side(lc) / 2.0);
        let contained = if inside_anchor_cube {
            lc
        } else {
            lc.saturating_sub(1)
        };
        let m = contained.min(n);
        // A transition term exists when the next level's cube (the anchor)
        // is within u's depth and the point is not past its support.
        let ring = if m < n && lc == m + 1 {
            let profile = self.ring_profile(lc);
            if profile.outside(&c.offset) || profile.on_plateau(&c.offset) {
                None
            } else {
                Some(profile)
            }
        } else {
            None
        };
        if m == 0 && ring.is_none() {
            return zero();
        }
        let chain = self.chain(&c.path);
        let (a_m, v_m) = if m == 0 {
            (LinMap::zeros(rows, cols), vec![0.0; rows])
        } else {
            (chain.a[m - 1].clone(), chain.v[m - 1].clone())
        };
        let d_m = self.scaffold.position_rel(c, m);
        let mut rel = a_m.apply(&d_m);
        let mut grad = a_m;
        let mut ring_level = None;
        if let Some(profile) = ring {
            let da = &chain.delta_a[lc - 1];
            let sigma = profile.value(&c.offset);
            let dsigma = profile.gradient(&c.offset);
            let lin = da.apply(&c.offset);
            for (r, l) in rel.iter_mut().zip(&lin) {
                *r += sigma * l;
            }
            grad = grad.add(&da.scale(sigma)).add_outer(&lin, &dsigma);
            ring_level = Some(lc);
        }
        let value = v_m.iter().zip(&rel).map(|(a, b)| a + b).collect();
        EvalDetail {
            value,
            grad,
            anchor_level: m,
            rel_value: rel,
            ring_level,
        }
    }

    /// Cutoff profile of the level-`lev` cube (centered at the origin of the
    /// cube's own coordinates).
    fn ring_profile(&self, lev: usize) -> CutoffProfile {
        CutoffProfile::new(
            vec![0.0; self.scaffold.k()],
            self.scaffold.side(lev),
            self.scaffold.rho(lev),
        )
        .expect("scaffold sides and gaps are positive")
    }

    /// `|Du(x) - F(x, u(x))|` in operator norm, at a global point.
    pub fn residual_global(&self, x: &[f64]) -> f64 {
        let d = self.eval_global(x);
        d.grad.sub(&self.datum.eval(x, &d.value)).op_norm()
    }

    /// Residual at an anchored point. The datum is evaluated at the point's
    /// global coordinates, which are exact at cube centers by construction.
    pub fn residual_deep(&self, p: &DeepPoint) -> f64 {
        let d = self.eval_deep(p);
        let x = self.scaffold.global(p);
        d.grad.sub(&self.datum.eval(&x, &d.value)).op_norm()
    }

    /// Stable gradient difference `Du(x) - Du(y)`.
    ///
    /// When both points live under a common ancestor and the datum carries
    /// affine structure, the difference of cube coefficients is assembled
    /// from exact center and ladder differences, so the result keeps full
    /// relative precision at separations far below `|Du|` resolution.
    pub fn grad_diff(&self, x: &DeepPoint, y: &DeepPoint) -> LinMap {
        let dx = self.eval_deep(x);
        let dy = self.eval_deep(y);
        let (cx, cy) = (self.scaffold.canonicalize(x), self.scaffold.canonicalize(y));
        let common = match (cx.in_lattice, cy.in_lattice) {
            (true, true) => cx.point.path.common_prefix(&cy.point.path),
            _ => None,
        };
        let (parts, p) = match (self.datum.affine_parts(), common) {
            (Some(parts), Some(p)) => (parts, p),
            _ => return dx.grad.sub(&dy.grad),
        };
        // Ring terms are already exact (they are built from delta_a and
        // local offsets); the anchor coefficients a_mx, a_my need exact
        // differencing. The branch sums must start at a level that is an
        // ancestor of both anchors.
        let q = p.min(dx.anchor_level).min(dy.anchor_level);
        let ring_x = dx
            .grad
            .sub(&self.anchor_coefficient(&cx.point, dx.anchor_level));
        let ring_y = dy
            .grad
            .sub(&self.anchor_coefficient(&cy.point, dy.anchor_level));
        let a_diff = self.coefficient_diff(
            parts,
            &cx.point,
            dx.anchor_level,
            &cy.point,
            dy.anchor_level,
            q,
        );
        a_diff.add(&ring_x).sub(&ring_y)
    }

    fn anchor_coefficient(&self, c: &DeepPoint, m: usize) -> LinMap {
        if m == 0 {
            LinMap::zeros(self.datum.rows(), self.datum.cols())
        } else {
            self.chain(&c.path.truncated(m)).a[m - 1].clone()
        }
    }

    /// Exact `a(Q_x^{m_x}) - a(Q_y^{m_y})` for an affine datum, via branch
    /// sums relative to the common ancestor at level `p`.
    fn coefficient_diff(
        &self,
        parts: &AffineParts,
        x: &DeepPoint,
        mx: usize,
        y: &DeepPoint,
        my: usize,
        p: usize,
    ) -> LinMap {
        let k = self.scaffold.k();
        let rows = self.datum.rows();
        // Center offsets of the two anchors relative to the common ancestor.
        let branch_center = |pt: &DeepPoint, m: usize| -> Vec<f64> {
            let mut acc = vec![0.0; k];
            for lev in ((p + 1)..=m).rev() {
                for (ax, item) in acc.iter_mut().enumerate() {
                    *item += self.scaffold.child_offset(lev, pt.path.digit(lev, ax));
                }
            }
            acc
        };
        // Ladder increments relative to the common ancestor's value (which
        // cancels): v_m - v_p = sum a_{lev-1} [c_lev - c_{lev-1}].
        let branch_ladder = |pt: &DeepPoint, m: usize| -> Vec<f64> {
            let chain = self.chain(&pt.path.truncated(m));
            let mut acc = vec![0.0; rows];
            for lev in ((p.max(1) + 1)..=m).rev() {
                let step: Vec<f64> = (0..k)
                    .map(|ax| self.scaffold.child_offset(lev, pt.path.digit(lev, ax)))
                    .collect();
                let inc = chain.a[lev - 2].apply(&step);
                for (a, b) in acc.iter_mut().zip(&inc) {
                    *a += b;
                }
            }
            acc
        };
        let dc_x = branch_center(x, mx);
        let dc_y = branch_center(y, my);
        let dv_x = branch_ladder(x, mx);
        let dv_y = branch_ladder(y, my);
        let mut out = LinMap::zeros(rows, k);
        // Zero-depth anchors contribute -a_p ... but if either anchor level
        // is 0 the coefficient is the zero map and the difference reduces to
        // the other side's absolute coefficient; fall back to chains.
        if mx == 0 || my == 0 {
            return self
                .anchor_coefficient(x, mx)
                .sub(&self.anchor_coefficient(y, my));
        }
        for ax in 0..k {
            out = out.add(&parts.x_parts[ax].scale(dc_x[ax] - dc_y[ax]));
        }
        for j in 0..rows {
            out = out.add(&parts.u_parts[j].scale(dv_x[j] - dv_y[j]));
        }
        out
    }

    /// Sup estimates of the per-level increments `u_l - u_{l-1}` and their
    /// gradients over stratified samples, together with the closed-form
    /// bounds they must respect.
    pub fn level_increment_norms(
        &self,
        samples_per_level: usize,
        seed: u64,
    ) -> Vec<LevelIncrement> {
        let k = self.scaffold.k() as f64;
        let m1 = self.datum.m1();
        let m2 = self.datum.m2();
        let mut out = Vec::with_capacity(self.depth);
        for lev in 1..=self.depth {
            let mut rng = crate::rng::substream(seed, &[0x11CE, lev as u64]);
            let mut sup_val: f64 = 0.0;
            let mut sup_grad: f64 = 0.0;
            for i in 0..samples_per_level {
                let cube = self.scaffold.random_cube(lev, &mut rng);
                // Stratify: interior, transition band, just outside.
                let p = match i % 3 {
                    0 => self.scaffold.random_point_in_cube(&cube, 0.98, &mut rng),
                    1 => self.ring_point(&cube, &mut rng),
                    _ => self.scaffold.random_point_in_cube(&cube, 1.4, &mut rng),
                };
                let hi = self.eval_at_depth(&p, lev);
                let lo = self.eval_at_depth(&p, lev - 1);
                let dv = math::norm(
                    &hi.value
                        .iter()
                        .zip(&lo.value)
                        .map(|(a, b)| a - b)
                        .collect::<Vec<_>>(),
                );
                sup_val = sup_val.max(dv);
                sup_grad = sup_grad.max(hi.grad.sub(&lo.grad).op_norm());
            }
            let r_prev = self.scaffold.side(lev - 1);
            let rho = self.scaffold.rho(lev);
            let val_bound = 4.0 * m1 * math::sqrt(k) * self.scaffold.side(lev);
            let grad_bound = if lev == 1 {
                // Base layer: |Dsigma| |a| |x - c| + |a|.
                m1 * (4.0 * k * cutoff::C1 * self.scaffold.side(1) / rho + 1.0) * 1.05
            } else {
                16.0 * k
                    * k
                    * (m1 + 1.0)
                    * m2.max(1e-300)
                    * cutoff::C1.max(1.0)
                    * (r_prev * r_prev / rho + r_prev)
            };
            out.push(LevelIncrement {
                level: lev,
                sup_value: sup_val,
                sup_grad,
                value_bound: val_bound,
                grad_bound,
            });
        }
        out
    }

    /// Random point in the transition band of a cube's cutoff.
    fn ring_point(&self, cube: &CubePath, rng: &mut Stream) -> DeepPoint {
        let lev = cube.level();
        let k = self.scaffold.k();
        let half = self.scaffold.side(lev) / 2.0;
        let w = self.scaffold.rho(lev) / 4.0;
        let axis = rng.gen_range(0..k);
        let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        let mut offset: Vec<f64> = (0..k)
            .map(|_| rng.gen_range(-0.9 * half..=0.9 * half))
            .collect();
        offset[axis] = sign * (half + rng.gen_range(0.05..0.95) * w);
        DeepPoint {
            path: cube.clone(),
            offset,
        }
    }

    /// Pair sampler for multiscale gradient oscillation scans: produces
    /// `(|Du(x) - Du(y)|, |x - y|)` with `|x - y|` in `[t, 2t)`. Pairs are
    /// stratified over interior/interior, cross-cube, and transition-band
    /// placements so the sampled sup tracks the construction's actual
    /// oscillation at every scale.
    pub fn grad_pair(&self, t: f64, rng: &mut Stream) -> Option<(f64, f64)> {
        let n = self.depth;
        let sep = t * (1.0 + rng.gen_range(0.0..0.99));
        let k = self.scaffold.k();
        let kind = rng.gen_range(0u32..2);
        let (x, y) = if kind == 0 {
            // Interior pair within the deepest cube that fits the separation.
            let mut lev = 1;
            while lev < n && self.scaffold.side(lev + 1) >= 8.0 * sep {
                lev += 1;
            }
            let cube = self.scaffold.random_cube(lev, rng);
            let x = self.scaffold.random_point_in_cube(&cube, 0.9, rng);
            let dir = crate::rng::unit_vector(rng, k);
            let y = x.translated(&dir.iter().map(|d| d * sep).collect::<Vec<_>>());
            (x, y)
        } else {
            // Transition-band pair: step across a cutoff ring along its
            // normal axis.
            let lev = rng.gen_range(1..=n);
            let cube = self.scaffold.random_cube(lev, rng);
            let x = self.ring_point(&cube, rng);
            let axis = rng.gen_range(0..k);
            let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            let mut d = vec![0.0; k];
            d[axis] = sign * sep;
            (x.clone(), x.translated(&d))
        };
        let diff = self.grad_diff(&x, &y).op_norm();
        Some((diff, sep))
    }
}

impl core::fmt::Debug for LusinFunction<'_> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("LusinFunction")
            .field("depth", &self.depth)
            .field("eta", &self.eta)
            .field("k", &self.scaffold.k())
            .field("rows", &self.datum.rows())
            .finish()
    }
}

/// One row of [`LusinFunction::level_increment_norms`].
#[derive(Debug, Clone, Copy)]
pub struct LevelIncrement {
    pub level: usize,
    pub sup_value: f64,
    pub sup_grad: f64,
    pub value_bound: f64,
    pub grad_bound: f64,
}

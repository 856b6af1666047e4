//! Circulation, flux and boundary-escape probes on rectangles in the plane.
//!
//! Circulations are composite Gauss-Legendre line integrals around the
//! positively oriented boundary; fluxes are tensor Gauss-Legendre area
//! integrals of the curl. For escape scans against product Cantor sets the
//! one-dimensional boundary measures are computed exactly from the scaffold
//! (per-axis interval arithmetic), with a small per-radius search over
//! center offsets keeping the best-aligned square.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::CoreError;
use crate::fit::linear_fit;
use crate::geom::{CantorScaffold, DeepPoint};
use crate::lusin::LusinFunction;
use crate::math;
use crate::Result;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = math::cos(core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            // Evaluate P_n and P_n' at x by upward recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for m in 2..=n {
                let p2 = ((2.0 * m as f64 - 1.0) * x * p1 - (m as f64 - 1.0) * p0) / m as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            dp = n as f64 * (x * p - p0) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if math::abs(dx) < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

type FormEval = dyn Fn(&[f64; 2]) -> [f64; 2] + Send + Sync;
type CurlEval = dyn Fn(&[f64; 2]) -> f64 + Send + Sync;

/// A 1-form `g = g_1 dx_1 + g_2 dx_2` with optional pointwise curl and
/// optional exact linear part (used for scale-relative evaluation).
#[derive(Clone)]
pub struct OneForm {
    eval: Arc<FormEval>,
    curl: Option<Arc<CurlEval>>,
    /// `g(z) = linear z + const`: rows of the 2x2 coefficient matrix.
    linear: Option<[[f64; 2]; 2]>,
    tag: &'static str,
}

impl OneForm {
    pub fn new(
        tag: &'static str,
        eval: impl Fn(&[f64; 2]) -> [f64; 2] + Send + Sync + 'static,
    ) -> Self {
        OneForm {
            eval: Arc::new(eval),
            curl: None,
            linear: None,
            tag,
        }
    }

    pub fn with_curl(mut self, curl: impl Fn(&[f64; 2]) -> f64 + Send + Sync + 'static) -> Self {
        self.curl = Some(Arc::new(curl));
        self
    }

    /// Record that the form is affine with the given linear coefficient
    /// matrix (row `p` holds the gradient of component `p`).
    pub fn with_linear_part(mut self, linear: [[f64; 2]; 2]) -> Self {
        self.linear = Some(linear);
        self
    }

    /// The model pair `(M_{1,1}, M_{1,2}) = (-2 z_2, 2 z_1)` with curl 4.
    pub fn heisenberg_pair() -> Self {
        OneForm::new("heisenberg-m", |z| [-2.0 * z[1], 2.0 * z[0]])
            .with_curl(|_| 4.0)
            .with_linear_part([[0.0, -2.0], [2.0, 0.0]])
    }

    pub fn tag(&self) -> &'static str {
        self.tag
    }

    pub fn has_curl(&self) -> bool {
        self.curl.is_some()
    }

    pub fn value(&self, z: &[f64; 2]) -> [f64; 2] {
        (self.eval)(z)
    }

    pub fn curl(&self, z: &[f64; 2]) -> Result<f64> {
        match &self.curl {
            Some(c) => Ok(c(z)),
            None => Err(CoreError::Unsupported(
                "one-form has no curl evaluator".into(),
            )),
        }
    }

    /// `g(base + d) - g(base)`, exactly linear when the form records its
    /// linear part, by direct subtraction otherwise.
    pub fn value_rel(&self, base: &[f64; 2], d: &[f64; 2]) -> [f64; 2] {
        if let Some(lin) = &self.linear {
            [
                lin[0][0] * d[0] + lin[0][1] * d[1],
                lin[1][0] * d[0] + lin[1][1] * d[1],
            ]
        } else {
            let z = [base[0] + d[0], base[1] + d[1]];
            let a = self.value(&z);
            let b = self.value(base);
            [a[0] - b[0], a[1] - b[1]]
        }
    }
}

/// An oriented rectangle probe with sides parallel to a unit direction and
/// its rotation by 90 degrees.
#[derive(Debug, Clone)]
pub struct RectangleProbe {
    pub center: [f64; 2],
    dir: [f64; 2],
    half: [f64; 2],
    order: usize,
    segments: usize,
    /// +1 for counterclockwise traversal, -1 for the reversed probe.
    orientation: f64,
}

impl RectangleProbe {
    pub fn new(center: [f64; 2], dir: [f64; 2], half: [f64; 2], order: usize) -> Result<Self> {
        let n = math::sqrt(dir[0] * dir[0] + dir[1] * dir[1]);
        if math::abs(n - 1.0) > 1e-12 {
            return Err(CoreError::invalid(
                "direction must be a unit vector (|v| = 1 to 1e-12)",
            ));
        }
        if !(half[0] > 0.0 && half[1] > 0.0) {
            return Err(CoreError::invalid("rectangle half-sides must be positive"));
        }
        if order < 2 {
            return Err(CoreError::invalid("quadrature order must be >= 2"));
        }
        Ok(RectangleProbe {
            center,
            dir: [dir[0] / n, dir[1] / n],
            half,
            order,
            segments: 1,
            orientation: 1.0,
        })
    }

    pub fn axis_square(center: [f64; 2], r: f64, order: usize) -> Result<Self> {
        RectangleProbe::new(center, [1.0, 0.0], [r, r], order)
    }

    pub fn from_angle(center: [f64; 2], angle: f64, half: [f64; 2], order: usize) -> Result<Self> {
        RectangleProbe::new(center, [math::cos(angle), math::sin(angle)], half, order)
    }

    /// Composite rule: split every side into this many panels.
    pub fn with_segments(mut self, segments: usize) -> Self {
        self.segments = segments.max(1);
        self
    }

    /// Same rectangle traversed clockwise.
    pub fn reversed(&self) -> Self {
        let mut out = self.clone();
        out.orientation = -self.orientation;
        out
    }

    pub fn area(&self) -> f64 {
        4.0 * self.half[0] * self.half[1]
    }

    fn axes(&self) -> ([f64; 2], [f64; 2]) {
        let v = self.dir;
        let w = [-v[1], v[0]];
        (v, w)
    }

    /// Corners in counterclockwise geometric order (orientation affects
    /// integrals, not the stored geometry).
    pub fn corners(&self) -> [[f64; 2]; 4] {
        let (v, w) = self.axes();
        let (a, b) = (self.half[0], self.half[1]);
        let corner = |sv: f64, sw: f64| {
            [
                self.center[0] + sv * a * v[0] + sw * b * w[0],
                self.center[1] + sv * a * v[1] + sw * b * w[1],
            ]
        };
        [
            corner(-1.0, -1.0),
            corner(1.0, -1.0),
            corner(1.0, 1.0),
            corner(-1.0, 1.0),
        ]
    }

    /// Side endpoints (start, end) in counterclockwise order, `kappa` in
    /// `0..4`.
    pub fn side(&self, kappa: usize) -> ([f64; 2], [f64; 2]) {
        let c = self.corners();
        (c[kappa], c[(kappa + 1) % 4])
    }

    pub fn orientation(&self) -> f64 {
        self.orientation
    }
}

/// Line integral of `g . tangent` around the boundary.
///
/// Quadrature nodes are accumulated in canonical counterclockwise order and
/// the orientation sign is applied once at the end, so reversing a probe
/// negates the result bit-exactly.
pub fn circulation(g: &OneForm, probe: &RectangleProbe) -> f64 {
    let (nodes, weights) = gauss_legendre(probe.order);
    let mut total = 0.0;
    for kappa in 0..4 {
        let (p0, p1) = probe.side(kappa);
        let full = [p1[0] - p0[0], p1[1] - p0[1]];
        let step = 1.0 / probe.segments as f64;
        for seg in 0..probe.segments {
            let s0 = seg as f64 * step;
            for (x, w) in nodes.iter().zip(&weights) {
                // Map [-1,1] to [s0, s0 + step].
                let t = s0 + (x + 1.0) / 2.0 * step;
                let z = [p0[0] + t * full[0], p0[1] + t * full[1]];
                let gv = g.value(&z);
                total += w / 2.0 * step * (gv[0] * full[0] + gv[1] * full[1]);
            }
        }
    }
    probe.orientation * total
}

/// Area integral of the curl over the rectangle.
pub fn curl_flux(g: &OneForm, probe: &RectangleProbe) -> Result<f64> {
    if !g.has_curl() {
        return Err(CoreError::Unsupported(
            "one-form has no curl evaluator".into(),
        ));
    }
    let (nodes, weights) = gauss_legendre(probe.order);
    let (v, w) = probe.axes();
    let (a, b) = (probe.half[0], probe.half[1]);
    let signed_area_element = probe.orientation * a * b * (v[0] * w[1] - v[1] * w[0]);
    let mut total = 0.0;
    for (xs, ws) in nodes.iter().zip(&weights) {
        for (xt, wt) in nodes.iter().zip(&weights) {
            let z = [
                probe.center[0] + xs * a * v[0] + xt * b * w[0],
                probe.center[1] + xs * a * v[1] + xt * b * w[1],
            ];
            total += ws * wt * g.curl(&z)? * signed_area_element;
        }
    }
    Ok(total)
}

/// `|circulation - curl_flux|`.
pub fn stokes_residual(g: &OneForm, probe: &RectangleProbe) -> Result<f64> {
    Ok(math::abs(circulation(g, probe) - curl_flux(g, probe)?))
}

/// One measured radius of an escape scan.
#[derive(Debug, Clone, Copy)]
pub struct EscapeRow {
    pub r: f64,
    /// 1-D measure of the part of the square boundary outside the set.
    pub measure: f64,
    /// Center offset of the best-aligned square.
    pub offset: [f64; 2],
}

/// Escape measures over a radius family, with the fitted exponent of
/// `log measure` against `log r` (absent unless at least two radii have
/// positive measure).
#[derive(Debug, Clone)]
pub struct EscapeScan {
    pub rows: Vec<EscapeRow>,
    pub exponent: Option<f64>,
}

fn fit_exponent(rows: &[EscapeRow]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|row| row.measure > 0.0)
        .map(|row| (math::ln(row.r), math::ln(row.measure)))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    linear_fit(&xs, &ys).ok().map(|(m, _)| m)
}

/// Sampled-mode escape scan for an arbitrary membership oracle: squares of
/// side `2r` around `center` oriented along `v`, boundary measured by dense
/// midpoint sampling.
pub fn escape_scan_sampling(
    set: &dyn Fn(&[f64; 2]) -> bool,
    center: [f64; 2],
    v: [f64; 2],
    radii: &[f64],
    points_per_side: usize,
) -> Result<EscapeScan> {
    if radii.iter().any(|r| !(*r > 0.0)) {
        return Err(CoreError::invalid("radii must be positive"));
    }
    let mut rows = Vec::with_capacity(radii.len());
    for &r in radii {
        let probe = RectangleProbe::new(center, v, [r, r], 2)?;
        let mut missing = 0.0;
        for kappa in 0..4 {
            let (p0, p1) = probe.side(kappa);
            let dx = p1[0] - p0[0];
            let dy = p1[1] - p0[1];
            let len = math::sqrt(dx * dx + dy * dy);
            let mut out = 0usize;
            for i in 0..points_per_side {
                let t = (i as f64 + 0.5) / points_per_side as f64;
                let z = [p0[0] + t * (p1[0] - p0[0]), p0[1] + t * (p1[1] - p0[1])];
                if !set(&z) {
                    out += 1;
                }
            }
            missing += len * out as f64 / points_per_side as f64;
        }
        rows.push(EscapeRow {
            r,
            measure: missing,
            offset: [0.0, 0.0],
        });
    }
    let exponent = fit_exponent(&rows);
    Ok(EscapeScan { rows, exponent })
}

/// Exact-mode escape scan against the product of two one-dimensional
/// level-`level` Cantor unions. Squares are axis-aligned, centered at the
/// anchored point `(ax, ay)` shifted by the best of `offsets` candidate
/// per-axis offsets in `[-r/4, r/4]` (the minimum-measure square is kept).
pub fn escape_scan_exact(
    sx: &CantorScaffold,
    sy: &CantorScaffold,
    level: usize,
    ax: &DeepPoint,
    ay: &DeepPoint,
    radii: &[f64],
    offsets: usize,
) -> Result<EscapeScan> {
    if sx.k() != 1 || sy.k() != 1 {
        return Err(CoreError::Unsupported(
            "exact escape mode needs k = 1 scaffolds".into(),
        ));
    }
    if radii.iter().any(|r| !(*r > 0.0)) {
        return Err(CoreError::invalid("radii must be positive"));
    }
    let offsets = offsets.max(1);
    let mut rows = Vec::with_capacity(radii.len());
    for &r in radii {
        let candidates: Vec<f64> = (0..offsets)
            .map(|i| {
                if offsets == 1 {
                    0.0
                } else {
                    (i as f64 / (offsets - 1) as f64 - 0.5) * (r / 2.0)
                }
            })
            .collect();
        // Per-axis tables: how many of the two lines at +-r hit the axis
        // set, and the overlap of the 2r window with the axis set.
        let axis_tables =
            |s: &CantorScaffold, anchor: &DeepPoint| -> Result<(Vec<u32>, Vec<f64>)> {
                let mut hits = Vec::with_capacity(candidates.len());
                let mut olap = Vec::with_capacity(candidates.len());
                for &o in &candidates {
                    let lo = s.line_member(level, anchor, o - r)?;
                    let hi = s.line_member(level, anchor, o + r)?;
                    hits.push(lo as u32 + hi as u32);
                    olap.push(s.line_overlap(level, anchor, o - r, o + r)?);
                }
                Ok((hits, olap))
            };
        let (hx, ox) = axis_tables(sx, ax)?;
        let (hy, oy) = axis_tables(sy, ay)?;
        let mut best = (f64::INFINITY, 0usize, 0usize);
        for i in 0..candidates.len() {
            for j in 0..candidates.len() {
                // Vertical sides escape 2r each unless their x-line hits the
                // set, in which case the y-window overlap is recovered; the
                // horizontal sides mirror this.
                let measure = 8.0 * r - hx[i] as f64 * oy[j] - hy[j] as f64 * ox[i];
                if measure < best.0 {
                    best = (measure, i, j);
                }
            }
        }
        rows.push(EscapeRow {
            r,
            measure: best.0.max(0.0),
            offset: [candidates[best.1], candidates[best.2]],
        });
    }
    let exponent = fit_exponent(&rows);
    Ok(EscapeScan { rows, exponent })
}

/// One radius of the locality diagnostic.
#[derive(Debug, Clone, Copy)]
pub struct WitnessRow {
    pub r: f64,
    /// Circulation of `h = m - du` around the best-offset square. The
    /// gradient part integrates to zero around any closed loop, so it is
    /// dropped exactly and the column carries the quadrature of `m` alone
    /// (scale-relative, constants cancel).
    pub circulation: f64,
    /// Raw fixed-order quadrature of the gradient loop `int du . t ds`,
    /// which is zero analytically; its measured size shows how much of the
    /// cutoff-ring mass the quadrature resolves at this radius.
    pub du_loop_quadrature: f64,
    /// Flux of the curl of `m` through the square.
    pub flux: f64,
    /// Boundary-escape measure of the square (exact mode), when available.
    pub escape: Option<f64>,
    /// `circulation / area`: tends to the curl of `m` as `r -> 0`.
    pub ratio: f64,
    pub offset: [f64; 2],
}

/// Escape context for the witness: per-axis scaffolds and anchors of the
/// product set.
pub struct EscapeContext<'a> {
    pub sx: &'a CantorScaffold,
    pub sy: &'a CantorScaffold,
    pub level: usize,
    pub ax: &'a DeepPoint,
    pub ay: &'a DeepPoint,
    pub offsets: usize,
}

/// Circulation-versus-curl locality diagnostic around a point.
///
/// For each radius the square (best-offset when an escape context is given)
/// is traversed with a composite rule. The circulation of `h = m - du`
/// splits as `circ(m) - loop(du)`; the gradient loop vanishes identically,
/// so the reported circulation is the quadrature of `m` alone (formed
/// scale-relatively, so it stays meaningful at radii far below global
/// resolution), while the raw gradient-loop quadrature is kept as a
/// separate column measuring how much of the cutoff-ring oscillation the
/// rule resolves.
pub fn locality_witness(
    m: &OneForm,
    u: Option<&LusinFunction<'_>>,
    escape: Option<&EscapeContext<'_>>,
    center: &DeepPoint,
    radii: &[f64],
    order: usize,
) -> Result<Vec<WitnessRow>> {
    if !m.has_curl() {
        return Err(CoreError::Unsupported(
            "witness needs a curl evaluator".into(),
        ));
    }
    if let Some(u) = u {
        if u.scaffold().k() != 2 || u.rows() != 1 {
            return Err(CoreError::Mismatch(
                "witness needs a k = 2 scalar graph".into(),
            ));
        }
    }
    let scaffold = u.map(|f| f.scaffold());
    let center_global: [f64; 2] = match scaffold {
        Some(s) => {
            let g = s.global(center);
            [g[0], g[1]]
        }
        None => {
            if center.offset.len() != 2 {
                return Err(CoreError::Mismatch(
                    "witness center must be two-dimensional".into(),
                ));
            }
            [center.offset[0], center.offset[1]]
        }
    };
    let (nodes, weights) = gauss_legendre(order.max(2));
    let segments = 8usize;
    let mut rows = Vec::with_capacity(radii.len());
    for &r in radii {
        // Offset search via the escape context when present.
        let (offset, escape_measure) = match escape {
            Some(ctx) => {
                let scan = escape_scan_exact(
                    ctx.sx,
                    ctx.sy,
                    ctx.level,
                    ctx.ax,
                    ctx.ay,
                    &[r],
                    ctx.offsets,
                )?;
                (scan.rows[0].offset, Some(scan.rows[0].measure))
            }
            None => ([0.0, 0.0], None),
        };
        // Square corners as offsets from the anchored center.
        let corner = |sv: f64, sw: f64| [offset[0] + sv * r, offset[1] + sw * r];
        let corners = [
            corner(-1.0, -1.0),
            corner(1.0, -1.0),
            corner(1.0, 1.0),
            corner(-1.0, 1.0),
        ];
        let mut circ = 0.0;
        let mut du_loop = 0.0;
        for kappa in 0..4 {
            let p0 = corners[kappa];
            let p1 = corners[(kappa + 1) % 4];
            let full = [p1[0] - p0[0], p1[1] - p0[1]];
            let step = 1.0 / segments as f64;
            for seg in 0..segments {
                let s0 = seg as f64 * step;
                for (x, w) in nodes.iter().zip(&weights) {
                    let t = s0 + (x + 1.0) / 2.0 * step;
                    let d = [p0[0] + t * full[0], p0[1] + t * full[1]];
                    let h = m.value_rel(&center_global, &d);
                    circ += w / 2.0 * step * (h[0] * full[0] + h[1] * full[1]);
                    if let Some(u) = u {
                        let node = center.translated(&[d[0], d[1]]);
                        let dg = u.grad_diff(&node, center);
                        du_loop +=
                            w / 2.0 * step * (dg.get(0, 0) * full[0] + dg.get(0, 1) * full[1]);
                    }
                }
            }
        }
        let area = 4.0 * r * r;
        let flux = m.curl(&center_global)? * area;
        rows.push(WitnessRow {
            r,
            circulation: circ,
            du_loop_quadrature: du_loop,
            flux,
            escape: escape_measure,
            ratio: circ / area,
            offset,
        });
    }
    Ok(rows)
}

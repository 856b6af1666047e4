//! Matrix-field representations of k-plane distributions in graph form,
//! Lie brackets, and tangency checks.
//!
//! A distribution assigns to each point `z` of `R^n` the k-plane spanned by
//! the columns of `[I_k; M(z)]`: the graph of the linear map
//! `M(z): R^k -> R^{n-k}` over the base plane `span(e_1..e_k)`. The spanning
//! vector fields are `X_i(z) = e_i + M(z) e_i`, and the curl-type defects
//! `d M_{p,b} / d z_a - d M_{p,a} / d z_b` witness non-involutivity.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::CoreError;
use crate::geom::DeepPoint;
use crate::linalg::LinMap;
use crate::lusin::LusinFunction;
use crate::math;
use crate::Result;

type MatrixEval = dyn Fn(&[f64]) -> LinMap + Send + Sync;
/// Partial derivatives of the matrix field: one `(n-k) x k` matrix per
/// ambient coordinate.
type MatrixJacobian = dyn Fn(&[f64]) -> Vec<LinMap> + Send + Sync;
type VecField = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
/// `n x n` Jacobian of a vector field.
type VecJacobian = dyn Fn(&[f64]) -> LinMap + Send + Sync;

/// Central finite-difference step at position `x`.
fn fd_step(x: &[f64]) -> f64 {
    1e-5 * (1.0 + math::norm(x))
}

/// Provenance of a distribution field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Builtin(&'static str),
    User,
}

/// A k-plane distribution on `R^n` in graph form.
#[derive(Clone)]
pub struct DistributionField {
    n: usize,
    k: usize,
    matrix: Arc<MatrixEval>,
    jacobian: Option<Arc<MatrixJacobian>>,
    kind: FieldKind,
}

impl DistributionField {
    pub fn new(
        n: usize,
        k: usize,
        matrix: impl Fn(&[f64]) -> LinMap + Send + Sync + 'static,
    ) -> Result<Self> {
        if k == 0 || k >= n {
            return Err(CoreError::invalid("graph form needs 1 <= k < n"));
        }
        Ok(DistributionField {
            n,
            k,
            matrix: Arc::new(matrix),
            jacobian: None,
            kind: FieldKind::User,
        })
    }

    pub fn with_jacobian(
        mut self,
        jacobian: impl Fn(&[f64]) -> Vec<LinMap> + Send + Sync + 'static,
    ) -> Self {
        self.jacobian = Some(Arc::new(jacobian));
        self
    }

    /// The horizontal distribution of the first Heisenberg group:
    /// `X = e1 - 2 x2 e3`, `Y = e2 + 2 x1 e3`, i.e. in graph form
    /// `M(z) e1 = -2 z2 e3`, `M(z) e2 = 2 z1 e3`.
    pub fn heisenberg() -> Self {
        let matrix = |z: &[f64]| LinMap::from_rows(&[&[-2.0 * z[1], 2.0 * z[0]]]);
        let jacobian = |_z: &[f64]| {
            vec![
                LinMap::from_rows(&[&[0.0, 2.0]]),
                LinMap::from_rows(&[&[-2.0, 0.0]]),
                LinMap::zeros(1, 2),
            ]
        };
        DistributionField {
            n: 3,
            k: 2,
            matrix: Arc::new(matrix),
            jacobian: Some(Arc::new(jacobian)),
            kind: FieldKind::Builtin("heisenberg"),
        }
    }

    /// Polynomial matrix field: entry `(p, a)` is a sum of monomials in the
    /// `n` ambient coordinates. Exact analytic Jacobian included.
    pub fn polynomial(n: usize, k: usize, entries: Vec<PolyEntry>) -> Result<Self> {
        if k == 0 || k >= n {
            return Err(CoreError::invalid("graph form needs 1 <= k < n"));
        }
        for e in &entries {
            if e.p == 0 || e.p > n - k || e.a == 0 || e.a > k {
                return Err(CoreError::invalid("polynomial entry index out of range"));
            }
            for m in &e.monomials {
                if m.exponents.len() != n {
                    return Err(CoreError::invalid("monomial exponent arity != n"));
                }
            }
        }
        let rows = n - k;
        let ev = entries.clone();
        let matrix = move |z: &[f64]| {
            let mut out = LinMap::zeros(rows, k);
            for e in &ev {
                let mut acc = 0.0;
                for m in &e.monomials {
                    acc += m.eval(z);
                }
                out.set(e.p - 1, e.a - 1, out.get(e.p - 1, e.a - 1) + acc);
            }
            out
        };
        let ej = entries;
        let jacobian = move |z: &[f64]| {
            let mut out = vec![LinMap::zeros(rows, k); z.len()];
            for e in &ej {
                for m in &e.monomials {
                    for (axis, d) in m.partials(z).into_iter().enumerate() {
                        let cur = out[axis].get(e.p - 1, e.a - 1);
                        out[axis].set(e.p - 1, e.a - 1, cur + d);
                    }
                }
            }
            out
        };
        Ok(DistributionField {
            n,
            k,
            matrix: Arc::new(matrix),
            jacobian: Some(Arc::new(jacobian)),
            kind: FieldKind::User,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn has_jacobian(&self) -> bool {
        self.jacobian.is_some()
    }

    /// Graph matrix `M(z)` at an ambient point.
    pub fn matrix(&self, z: &[f64]) -> LinMap {
        (self.matrix)(z)
    }

    /// Partial derivatives of `M` at `z` (analytic when available, central
    /// finite differences otherwise).
    pub fn matrix_partials(&self, z: &[f64]) -> Vec<LinMap> {
        if let Some(j) = &self.jacobian {
            return j(z);
        }
        let h = fd_step(z);
        (0..self.n)
            .map(|axis| {
                let mut zp = z.to_vec();
                let mut zm = z.to_vec();
                zp[axis] += h;
                zm[axis] -= h;
                self.matrix(&zp)
                    .sub(&self.matrix(&zm))
                    .scale(1.0 / (2.0 * h))
            })
            .collect()
    }

    /// Spanning vector field `X_i(z) = e_i + M(z) e_i` (`i` is 1-based).
    pub fn spanning_field(&self, i: usize, z: &[f64]) -> Vec<f64> {
        debug_assert!(i >= 1 && i <= self.k);
        let m = self.matrix(z);
        let mut out = vec![0.0; self.n];
        out[i - 1] = 1.0;
        for p in 0..(self.n - self.k) {
            out[self.k + p] = m.get(p, i - 1);
        }
        out
    }

    /// The pair `(X_a, X_b)` of spanning fields with analytic Jacobians
    /// derived from the matrix-field partials.
    pub fn spanning_pair(&self, a: usize, b: usize) -> Result<VectorFieldPair> {
        if a == 0 || a > self.k || b == 0 || b > self.k {
            return Err(CoreError::invalid("spanning field index out of range"));
        }
        let make = |i: usize| -> (Arc<VecField>, Option<Arc<VecJacobian>>) {
            let field = self.clone();
            let eval = move |z: &[f64]| field.spanning_field(i, z);
            let field2 = self.clone();
            let jac: Option<Arc<VecJacobian>> = if self.jacobian.is_some() {
                Some(Arc::new(move |z: &[f64]| {
                    let parts = field2.matrix_partials(z);
                    let n = field2.n;
                    let k = field2.k;
                    let mut j = LinMap::zeros(n, n);
                    for (axis, part) in parts.iter().enumerate() {
                        for p in 0..(n - k) {
                            j.set(k + p, axis, part.get(p, i - 1));
                        }
                    }
                    j
                }))
            } else {
                None
            };
            (Arc::new(eval), jac)
        };
        let (xa, ja) = make(a);
        let (xb, jb) = make(b);
        Ok(VectorFieldPair {
            n: self.n,
            first: xa,
            second: xb,
            jac_first: ja,
            jac_second: jb,
        })
    }
}

impl core::fmt::Debug for DistributionField {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("DistributionField")
            .field("n", &self.n)
            .field("k", &self.k)
            .field("kind", &self.kind)
            .finish()
    }
}

/// One entry of a polynomial matrix field.
#[derive(Debug, Clone)]
pub struct PolyEntry {
    /// Codomain index, 1-based in `1..=n-k`.
    pub p: usize,
    /// Base-plane index, 1-based in `1..=k`.
    pub a: usize,
    pub monomials: Vec<Monomial>,
}

/// `coeff * prod z_i^{e_i}` over the `n` ambient coordinates.
#[derive(Debug, Clone)]
pub struct Monomial {
    pub coeff: f64,
    pub exponents: Vec<u32>,
}

impl Monomial {
    pub fn eval(&self, z: &[f64]) -> f64 {
        let mut acc = self.coeff;
        for (zi, &e) in z.iter().zip(&self.exponents) {
            for _ in 0..e {
                acc *= zi;
            }
        }
        acc
    }

    /// All partial derivatives at `z`.
    pub fn partials(&self, z: &[f64]) -> Vec<f64> {
        (0..z.len())
            .map(|axis| {
                let e = self.exponents[axis];
                if e == 0 {
                    return 0.0;
                }
                let mut acc = self.coeff * e as f64;
                for (i, (zi, &ei)) in z.iter().zip(&self.exponents).enumerate() {
                    let power = if i == axis { ei - 1 } else { ei };
                    for _ in 0..power {
                        acc *= zi;
                    }
                }
                acc
            })
            .collect()
    }
}

/// Two C^1 vector fields with analytic or finite-difference Jacobians.
#[derive(Clone)]
pub struct VectorFieldPair {
    n: usize,
    first: Arc<VecField>,
    second: Arc<VecField>,
    jac_first: Option<Arc<VecJacobian>>,
    jac_second: Option<Arc<VecJacobian>>,
}

impl VectorFieldPair {
    pub fn new(
        n: usize,
        first: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        second: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        VectorFieldPair {
            n,
            first: Arc::new(first),
            second: Arc::new(second),
            jac_first: None,
            jac_second: None,
        }
    }

    pub fn with_jacobians(
        mut self,
        first: impl Fn(&[f64]) -> LinMap + Send + Sync + 'static,
        second: impl Fn(&[f64]) -> LinMap + Send + Sync + 'static,
    ) -> Self {
        self.jac_first = Some(Arc::new(first));
        self.jac_second = Some(Arc::new(second));
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn first(&self, z: &[f64]) -> Vec<f64> {
        (self.first)(z)
    }

    pub fn second(&self, z: &[f64]) -> Vec<f64> {
        (self.second)(z)
    }

    fn jacobian_of(&self, which: bool, z: &[f64]) -> LinMap {
        let (field, jac) = if which {
            (&self.first, &self.jac_first)
        } else {
            (&self.second, &self.jac_second)
        };
        if let Some(j) = jac {
            return j(z);
        }
        let h = fd_step(z);
        let n = self.n;
        let mut out = LinMap::zeros(n, n);
        for axis in 0..n {
            let mut zp = z.to_vec();
            let mut zm = z.to_vec();
            zp[axis] += h;
            zm[axis] -= h;
            let (fp, fm) = (field(&zp), field(&zm));
            for row in 0..n {
                out.set(row, axis, (fp[row] - fm[row]) / (2.0 * h));
            }
        }
        out
    }

    pub fn jacobian_first(&self, z: &[f64]) -> LinMap {
        self.jacobian_of(true, z)
    }

    pub fn jacobian_second(&self, z: &[f64]) -> LinMap {
        self.jacobian_of(false, z)
    }
}

/// Lie bracket `[X, X'](z) = DX(z) X'(z) - DX'(z) X(z)`.
pub fn lie_bracket(pair: &VectorFieldPair, z: &[f64]) -> Vec<f64> {
    let jx = pair.jacobian_first(z);
    let jxp = pair.jacobian_second(z);
    let fx = pair.first(z);
    let fxp = pair.second(z);
    let a = jx.apply(&fxp);
    let b = jxp.apply(&fx);
    a.iter().zip(&b).map(|(u, v)| u - v).collect()
}

/// The scalar defect `d_a M_{p,b}(z) - d_b M_{p,a}(z)` (all indices
/// 1-based; `a, b` range over base axes, `p` over vertical components).
pub fn involutivity_defect(
    field: &DistributionField,
    z: &[f64],
    a: usize,
    b: usize,
    p: usize,
) -> Result<f64> {
    let k = field.k();
    if a == 0 || a > k || b == 0 || b > k || p == 0 || p > field.n() - k {
        return Err(CoreError::invalid("defect indices out of range"));
    }
    let parts = field.matrix_partials(z);
    Ok(parts[a - 1].get(p - 1, b - 1) - parts[b - 1].get(p - 1, a - 1))
}

/// Scan all `(a, b, p)` triples for a defect exceeding `tol`; returns the
/// maximizing triple (1-based) with its signed value, or `None` when the
/// field looks involutive at `z`.
pub fn noninvolutivity_certificate(
    field: &DistributionField,
    z: &[f64],
    tol: f64,
) -> Option<(usize, usize, usize, f64)> {
    let k = field.k();
    let rows = field.n() - k;
    let parts = field.matrix_partials(z);
    let mut best: Option<(usize, usize, usize, f64)> = None;
    for a in 1..=k {
        for b in (a + 1)..=k {
            for p in 1..=rows {
                let v = parts[a - 1].get(p - 1, b - 1) - parts[b - 1].get(p - 1, a - 1);
                if math::abs(v) > tol
                    && best.is_none_or(|(_, _, _, bv)| math::abs(v) > math::abs(bv))
                {
                    best = Some((a, b, p, v));
                }
            }
        }
    }
    best
}

/// Default tolerance for the non-involutivity scan.
pub const DEFECT_TOL: f64 = 1e-8;

/// Outcome of a pointwise tangency check of a constructed graph against a
/// distribution.
#[derive(Debug, Clone)]
pub struct TangencyOutcome {
    pub tangent: bool,
    /// `|Du(x) - M((x, u(x)))|` in operator norm.
    pub gap: f64,
    /// The graph point `(x, u(x))`.
    pub graph_point: Vec<f64>,
}

/// Check `|Du(x) - M((x, u(x)))| <= tol` at an anchored base point.
pub fn tangency_check(
    u: &LusinFunction<'_>,
    field: &DistributionField,
    x: &DeepPoint,
    tol: f64,
) -> Result<TangencyOutcome> {
    if field.k() != u.scaffold().k() || field.n() != u.scaffold().k() + u.rows() {
        return Err(CoreError::Mismatch(
            "field dimensions do not match the graph".into(),
        ));
    }
    let detail = u.eval_deep(x);
    let base = u.scaffold().global(x);
    let mut graph_point = base.clone();
    graph_point.extend_from_slice(&detail.value);
    let gap = detail.grad.sub(&field.matrix(&graph_point)).op_norm();
    Ok(TangencyOutcome {
        tangent: gap <= tol,
        gap,
        graph_point,
    })
}

/// Same check at a global base point against an arbitrary graph function.
pub fn tangency_check_graph(
    value: &[f64],
    grad: &LinMap,
    field: &DistributionField,
    x: &[f64],
    tol: f64,
) -> TangencyOutcome {
    let mut graph_point = x.to_vec();
    graph_point.extend_from_slice(value);
    let gap = grad.sub(&field.matrix(&graph_point)).op_norm();
    TangencyOutcome {
        tangent: gap <= tol,
        gap,
        graph_point,
    }
}

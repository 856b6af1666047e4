//! Anchored coordinates for points far below global `f64` resolution.
//!
//! Deep schedules (e.g. `B = 10` at depth 6) produce cubes of side around
//! `1e-20` at unit-scale coordinates, far below the spacing of representable
//! doubles. A [`DeepPoint`] therefore stores a cube path plus a small offset
//! from that cube's center, and all geometry works with differences relative
//! to ancestors, which keeps full relative precision at every scale. Global
//! coordinates are only materialized for shallow scaffolds or reporting.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::CoreError;
use crate::math;
use crate::rng::Stream;
use crate::Result;

use super::CantorScaffold;

/// Address of a cube: per-axis root-cell index, then per-level child digits
/// (one digit per axis per level, `digit < 2^B`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CubePath {
    pub root: Vec<i64>,
    /// Level-major, `k` digits per level (level 1 first).
    pub digits: Vec<u32>,
    k: usize,
}

impl CubePath {
    pub fn new_root(root: Vec<i64>) -> Self {
        let k = root.len();
        CubePath {
            root,
            digits: Vec::new(),
            k,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn level(&self) -> usize {
        self.digits.len() / self.k
    }

    /// Child digit at `level >= 1` along `axis`.
    pub fn digit(&self, level: usize, axis: usize) -> u32 {
        self.digits[(level - 1) * self.k + axis]
    }

    pub fn push(&mut self, digits: &[u32]) {
        debug_assert_eq!(digits.len(), self.k);
        self.digits.extend_from_slice(digits);
    }

    pub fn pop(&mut self) -> Vec<u32> {
        let k = self.k;
        let at = self.digits.len() - k;
        self.digits.split_off(at)
    }

    pub fn truncated(&self, level: usize) -> CubePath {
        CubePath {
            root: self.root.clone(),
            digits: self.digits[..level * self.k].to_vec(),
            k: self.k,
        }
    }

    /// Length of the common prefix (in levels) with another path rooted in
    /// the same cell; `None` if the roots differ.
    pub fn common_prefix(&self, other: &CubePath) -> Option<usize> {
        if self.root != other.root {
            return None;
        }
        let max = self.level().min(other.level());
        let mut shared = 0;
        'outer: for lev in 1..=max {
            for a in 0..self.k {
                if self.digit(lev, a) != other.digit(lev, a) {
                    break 'outer;
                }
            }
            shared = lev;
        }
        Some(shared)
    }
}

/// A point expressed as `center(path) + offset`, with `offset` in absolute
/// units. The sum is never formed at depth; arithmetic stays relative.
#[derive(Debug, Clone, PartialEq)]
pub struct DeepPoint {
    pub path: CubePath,
    pub offset: Vec<f64>,
}

impl DeepPoint {
    pub fn at_center(path: CubePath) -> Self {
        let k = path.k();
        DeepPoint {
            path,
            offset: vec![0.0; k],
        }
    }

    pub fn level(&self) -> usize {
        self.path.level()
    }

    /// Same anchor, offset translated by `delta`.
    pub fn translated(&self, delta: &[f64]) -> DeepPoint {
        DeepPoint {
            path: self.path.clone(),
            offset: self.offset.iter().zip(delta).map(|(o, d)| o + d).collect(),
        }
    }
}

/// A canonicalized point: anchored at the deepest cube cell containing it.
#[derive(Debug, Clone)]
pub struct Canonical {
    pub point: DeepPoint,
    /// Whether the root cell lies inside the lattice.
    pub in_lattice: bool,
}

impl CantorScaffold {
    /// Anchor a global point (root cell + offset), then canonicalize.
    pub fn anchor_global(&self, x: &[f64]) -> DeepPoint {
        let delta = self.schedule().delta();
        let root: Vec<i64> = (0..self.k())
            .map(|a| math::floor((x[a] - self.domain().lo()[a]) / delta) as i64)
            .collect();
        let center = self.root_center(&root);
        let offset = x.iter().zip(&center).map(|(v, c)| v - c).collect();
        self.canonicalize(&DeepPoint {
            path: CubePath::new_root(root),
            offset,
        })
        .point
    }

    /// Global coordinates of the point (precision limited by `f64` at the
    /// root scale; intended for shallow scaffolds and reporting).
    pub fn global(&self, p: &DeepPoint) -> Vec<f64> {
        let mut out = self.center_global(&p.path);
        for a in 0..self.k() {
            out[a] += p.offset[a];
        }
        out
    }

    /// Global coordinates of a cube center, accumulated root-first so that
    /// every caller sees bit-identical values for the same path.
    pub fn center_global(&self, path: &CubePath) -> Vec<f64> {
        let mut out = self.root_center(&path.root);
        for lev in 1..=path.level() {
            for a in 0..self.k() {
                out[a] += self.child_offset(lev, path.digit(lev, a));
            }
        }
        out
    }

    /// Offset of the point from the center of the level-`m` prefix cube
    /// (`m <= p.level()`), summed deepest-first for precision.
    pub fn position_rel(&self, p: &DeepPoint, m: usize) -> Vec<f64> {
        let mut acc = p.offset.clone();
        for lev in ((m + 1)..=p.level()).rev() {
            for a in 0..self.k() {
                acc[a] += self.child_offset(lev, p.path.digit(lev, a));
            }
        }
        acc
    }

    /// Re-anchor the point at the deepest cube cell that contains it: climb
    /// while the offset escapes the current cell, shift root cells at level
    /// zero, then descend through containing cubes down to the scaffold
    /// depth.
    pub fn canonicalize(&self, p: &DeepPoint) -> Canonical {
        let k = self.k();
        let mut path = p.path.clone();
        let mut off = p.offset.clone();
        // Climb.
        loop {
            let lev = path.level();
            let half_cell = self.pitch(lev) / 2.0;
            let escapes = off.iter().any(|d| math::abs(*d) > half_cell);
            if !escapes {
                break;
            }
            if lev == 0 {
                let delta = self.schedule().delta();
                for a in 0..k {
                    let shift = math::floor((off[a] + delta / 2.0) / delta);
                    path.root[a] += shift as i64;
                    off[a] -= shift * delta;
                }
                break;
            }
            let digits = path.pop();
            for a in 0..k {
                off[a] += self.child_offset(lev, digits[a]);
            }
        }
        let in_lattice = self.root_in_lattice(&path.root);
        // Descend through containing cubes.
        if in_lattice {
            let children = math::exp2i(self.b() as i32);
            while path.level() < self.depth() {
                let lev = path.level();
                let half_cube = self.side(lev) / 2.0;
                if off.iter().any(|d| math::abs(*d) > half_cube) {
                    break;
                }
                let pitch = self.pitch(lev + 1);
                let mut digits = Vec::with_capacity(k);
                for item in off.iter().take(k) {
                    let g = math::floor((item + half_cube) / pitch);
                    digits.push((g.max(0.0).min(children - 1.0)) as u32);
                }
                for a in 0..k {
                    off[a] -= self.child_offset(lev + 1, digits[a]);
                }
                path.push(&digits);
            }
        }
        Canonical {
            point: DeepPoint { path, offset: off },
            in_lattice,
        }
    }

    /// Uniformly random cube path at `level`.
    pub fn random_cube(&self, level: usize, rng: &mut Stream) -> CubePath {
        let k = self.k();
        let children = 1u32 << self.b();
        let root = (0..k)
            .map(|a| rng.gen_range(0..self.roots_per_axis()[a]) as i64)
            .collect();
        let mut path = CubePath::new_root(root);
        for _ in 1..=level {
            let digits: Vec<u32> = (0..k).map(|_| rng.gen_range(0..children)).collect();
            path.push(&digits);
        }
        path
    }

    /// Uniformly random point inside the cube, with per-axis offsets within
    /// `frac` of the half-side (e.g. `frac = 0.98` keeps clear of the faces).
    pub fn random_point_in_cube(&self, path: &CubePath, frac: f64, rng: &mut Stream) -> DeepPoint {
        let half = self.side(path.level()) / 2.0 * frac;
        let offset = (0..self.k()).map(|_| rng.gen_range(-half..=half)).collect();
        DeepPoint {
            path: path.clone(),
            offset,
        }
    }

    /// Visit every cube at `level`; errors if the family is too large to
    /// enumerate.
    pub fn for_each_cube(&self, level: usize, mut f: impl FnMut(&CubePath)) -> Result<()> {
        let k = self.k();
        let per_axis_children = 1u64 << self.b();
        let per_cube = math::exp2i((self.b() * (k * level) as u32) as i32);
        let total = self.card_roots() as f64 * per_cube;
        if total > 2e6 {
            return Err(CoreError::Unsupported(
                "cube family too large to enumerate; use sampling".into(),
            ));
        }
        let mut root = vec![0i64; k];
        loop {
            let mut digits = vec![0u32; k * level];
            loop {
                let mut path = CubePath::new_root(root.clone());
                for lev in 0..level {
                    path.push(&digits[lev * k..(lev + 1) * k]);
                }
                f(&path);
                // Increment digit counter.
                let mut i = digits.len();
                loop {
                    if i == 0 {
                        break;
                    }
                    i -= 1;
                    digits[i] += 1;
                    if (digits[i] as u64) < per_axis_children {
                        break;
                    }
                    digits[i] = 0;
                }
                if digits.iter().all(|d| *d == 0) {
                    break;
                }
            }
            // Increment root counter.
            let mut a = k;
            loop {
                if a == 0 {
                    return Ok(());
                }
                a -= 1;
                root[a] += 1;
                if (root[a] as u64) < self.roots_per_axis()[a] {
                    break;
                }
                root[a] = 0;
            }
            if root.iter().all(|m| *m == 0) {
                return Ok(());
            }
        }
    }

    /// Flattened address of a path: row-major root index, then one row-major
    /// child index per level.
    pub fn path_indices(&self, path: &CubePath) -> (u64, Vec<u64>) {
        let k = self.k();
        let mut root_idx = 0u64;
        for a in 0..k {
            root_idx = root_idx * self.roots_per_axis()[a] + path.root[a] as u64;
        }
        let children = 1u64 << self.b();
        let mut out = Vec::with_capacity(path.level());
        for lev in 1..=path.level() {
            let mut idx = 0u64;
            for a in 0..k {
                idx = idx * children + path.digit(lev, a) as u64;
            }
            out.push(idx);
        }
        (root_idx, out)
    }

    /// Inverse of [`Self::path_indices`].
    pub fn path_from_indices(&self, root_idx: u64, child_indices: &[u64]) -> Result<CubePath> {
        let k = self.k();
        let mut root = vec![0i64; k];
        let mut rest = root_idx;
        for a in (0..k).rev() {
            let n = self.roots_per_axis()[a];
            root[a] = (rest % n) as i64;
            rest /= n;
        }
        if rest != 0 {
            return Err(CoreError::invalid("root index out of range"));
        }
        let children = 1u64 << self.b();
        let mut path = CubePath::new_root(root);
        for &ci in child_indices {
            let mut digits = vec![0u32; k];
            let mut rest = ci;
            for a in (0..k).rev() {
                digits[a] = (rest % children) as u32;
                rest /= children;
            }
            if rest != 0 {
                return Err(CoreError::invalid("child index out of range"));
            }
            path.push(&digits);
        }
        Ok(path)
    }
}

/// Exact one-dimensional queries against a `k = 1` scaffold, used by the
/// boundary-escape probes. All interval arithmetic is relative to ancestor
/// cubes, so results stay exact (to `f64` roundoff at matching scale) even at
/// depths far below global resolution.
impl CantorScaffold {
    /// Membership of `x + t` in the closed level-`n` union, where `x` is the
    /// anchored point (`k = 1`).
    pub fn line_member(&self, n: usize, anchor: &DeepPoint, t: f64) -> Result<bool> {
        if self.k() != 1 {
            return Err(CoreError::Unsupported(
                "line queries need a k = 1 scaffold".into(),
            ));
        }
        Ok(self.membership_deep(&anchor.translated(&[t]), n))
    }

    /// Exact length of `C_n` intersected with `[x + lo, x + hi]` (`k = 1`).
    pub fn line_overlap(&self, n: usize, anchor: &DeepPoint, lo: f64, hi: f64) -> Result<f64> {
        if self.k() != 1 {
            return Err(CoreError::Unsupported(
                "line queries need a k = 1 scaffold".into(),
            ));
        }
        if n > self.depth() {
            return Err(CoreError::invalid("level exceeds scaffold depth"));
        }
        if hi <= lo {
            return Ok(0.0);
        }
        let c = self.canonicalize(anchor);
        let p = &c.point;
        // Deepest ancestor whose cube contains the whole interval.
        for m in (0..=p.level()).rev() {
            let rel = self.position_rel(p, m)[0];
            let (a, b) = (rel + lo, rel + hi);
            let half = self.side(m) / 2.0;
            if a >= -half && b <= half {
                return Ok(self.overlap_in_cube(n, m, a, b));
            }
        }
        // The interval crosses root cells: handle per cell at root scale.
        let rel = self.position_rel(p, 0)[0];
        let delta = self.schedule().delta();
        let mut total = 0.0;
        let lo_cell = math::floor((rel + lo) / delta + 0.5) as i64;
        let hi_cell = math::floor((rel + hi) / delta + 0.5) as i64;
        for cell in lo_cell..=hi_cell {
            let root = p.path.root[0] + cell;
            if !self.root_in_lattice(&[root]) {
                continue;
            }
            let shift = cell as f64 * delta;
            total += self.overlap_in_cube(n, 0, rel + lo - shift, rel + hi - shift);
        }
        Ok(total)
    }

    /// Total level-`n` descendant length inside one level-`m` cube.
    fn full_mass(&self, n: usize, m: usize) -> f64 {
        math::exp2i((self.b() as i32) * (n - m) as i32) * self.side(n)
    }

    /// Length of `C_n` within a level-`m` cube intersected with the interval
    /// `[a, b]` given in coordinates relative to the cube center.
    fn overlap_in_cube(&self, n: usize, m: usize, a: f64, b: f64) -> f64 {
        let half = self.side(m) / 2.0;
        let a = a.max(-half);
        let b = b.min(half);
        if b <= a {
            return 0.0;
        }
        if m == n {
            return b - a;
        }
        if a <= -half && b >= half {
            return self.full_mass(n, m);
        }
        let pitch = self.pitch(m + 1);
        let children = math::exp2i(self.b() as i32);
        let g_lo = (math::floor((a + half) / pitch))
            .max(0.0)
            .min(children - 1.0);
        let g_hi = (math::floor((b + half) / pitch))
            .max(0.0)
            .min(children - 1.0);
        let (g_lo, g_hi) = (g_lo as u32, g_hi as u32);
        let mut total = 0.0;
        // Cells strictly between the edge cells are fully covered.
        if g_hi > g_lo + 1 {
            total += (g_hi - g_lo - 1) as f64 * self.full_mass(n, m + 1);
        }
        for g in [g_lo, g_hi] {
            let off = self.child_offset(m + 1, g);
            total += self.overlap_in_cube(n, m + 1, a - off, b - off);
            if g_hi == g_lo {
                break;
            }
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{BoxDomain, RhoSchedule};

    fn scaffold_1d() -> CantorScaffold {
        let sched = RhoSchedule::make("dimension", 1, 1, 0.1, 0.5).unwrap();
        CantorScaffold::build(BoxDomain::new(vec![0.0], vec![1.0]).unwrap(), sched, 6).unwrap()
    }

    #[test]
    fn canonicalize_roundtrips_global_points() {
        let sc = scaffold_1d();
        for &x in &[0.051, 0.12, 0.349, 0.77, 0.9999] {
            let p = sc.anchor_global(&[x]);
            let back = sc.global(&p)[0];
            assert!((back - x).abs() < 1e-12, "{x} -> {back}");
        }
    }

    #[test]
    fn translation_across_cells_is_consistent() {
        let sc = scaffold_1d();
        let p = sc.anchor_global(&[0.42]);
        let q = sc.canonicalize(&p.translated(&[0.3])).point;
        assert!((sc.global(&q)[0] - 0.72).abs() < 1e-12);
    }

    #[test]
    fn overlap_matches_enumeration() {
        let sc = scaffold_1d();
        let n = 4;
        // Enumerate the level-n intervals directly.
        let mut intervals: Vec<(f64, f64)> = Vec::new();
        sc.for_each_cube(n, |path| {
            let c = sc.center_global(path)[0];
            let h = sc.side(n) / 2.0;
            intervals.push((c - h, c + h));
        })
        .unwrap();
        let olap = |lo: f64, hi: f64| -> f64 {
            intervals
                .iter()
                .map(|(a, b)| (b.min(hi) - a.max(lo)).max(0.0))
                .sum()
        };
        let anchor = sc.anchor_global(&[0.5]);
        for &(lo, hi) in &[(-0.2, 0.2), (-0.04, 0.01), (-0.5, 0.5), (0.003, 0.0031)] {
            let exact = sc.line_overlap(n, &anchor, lo, hi).unwrap();
            let brute = olap(0.5 + lo, 0.5 + hi);
            assert!(
                (exact - brute).abs() <= 1e-12 * brute.max(1e-9),
                "[{lo},{hi}]: {exact} vs {brute}"
            );
        }
    }

    #[test]
    fn address_roundtrip() {
        let sc = scaffold_1d();
        let mut rng = crate::rng::substream(7, &[1]);
        for _ in 0..20 {
            let path = sc.random_cube(3, &mut rng);
            let (root, children) = sc.path_indices(&path);
            let back = sc.path_from_indices(root, &children).unwrap();
            assert_eq!(path, back);
        }
    }
}

//! C^2 tensor-product cutoffs built from quintic smoothstep ramps.
//!
//! A profile is 1 on an inner cube, 0 outside the concentric cube of side
//! `inner + rho/2`, and transitions over a band of width `w = rho/4` on each
//! face. The 1-D ramp is the quintic smoothstep `S(t) = 6t^5 - 15t^4 + 10t^3`,
//! whose first two derivatives vanish at both seam points, so the tensor
//! product is C^2. The recorded constants
//! `C1 = max |S'| = 15/8` and `C2 = max |S''| = 10 sqrt(3)/3`
//! give `|ramp'| <= C1 / w` and `|ramp''| <= C2 / w^2`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::CoreError;
use crate::math;
use crate::Result;

/// `max |S'|` of the quintic smoothstep.
pub const C1: f64 = 15.0 / 8.0;

/// `max |S''|` of the quintic smoothstep (`10 sqrt(3) / 3`).
pub const C2: f64 = 5.773502691896257;

/// Quintic smoothstep on `[0,1]`.
#[inline]
pub fn smoothstep(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        t * t * t * (t * (6.0 * t - 15.0) + 10.0)
    }
}

/// First derivative of the quintic smoothstep.
#[inline]
pub fn smoothstep_d1(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        30.0 * t * t * (t - 1.0) * (t - 1.0)
    }
}

/// Second derivative of the quintic smoothstep.
#[inline]
pub fn smoothstep_d2(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        60.0 * t * (2.0 * t - 1.0) * (t - 1.0)
    }
}

/// Axis-aligned cutoff profile.
#[derive(Debug, Clone)]
pub struct CutoffProfile {
    center: Vec<f64>,
    inner_side: f64,
    /// Per-face transition width `rho / 4`.
    width: f64,
}

impl CutoffProfile {
    /// Profile that is 1 on the cube `Q(center, inner_side)` and 0 outside
    /// `Q(center, inner_side + rho/2)`.
    pub fn new(center: Vec<f64>, inner_side: f64, rho: f64) -> Result<Self> {
        if !(inner_side > 0.0 && rho > 0.0) {
            return Err(CoreError::invalid(
                "cutoff needs positive inner side and gap",
            ));
        }
        Ok(CutoffProfile {
            center,
            inner_side,
            width: rho / 4.0,
        })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn inner_side(&self) -> f64 {
        self.inner_side
    }

    pub fn outer_side(&self) -> f64 {
        self.inner_side + 2.0 * self.width
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    /// 1-D ramp as a function of the distance `d` from the center along one
    /// axis (even in `d`).
    #[inline]
    pub fn ramp(&self, d: f64) -> f64 {
        let t = (self.inner_side / 2.0 + self.width - math::abs(d)) / self.width;
        smoothstep(t)
    }

    /// Derivative of [`Self::ramp`] with respect to `d`.
    #[inline]
    pub fn ramp_d1(&self, d: f64) -> f64 {
        let a = math::abs(d);
        let t = (self.inner_side / 2.0 + self.width - a) / self.width;
        let sign = if d >= 0.0 { 1.0 } else { -1.0 };
        -sign * smoothstep_d1(t) / self.width
    }

    /// Value of the tensor-product profile at offset `d` from the center.
    pub fn value(&self, d: &[f64]) -> f64 {
        d.iter().map(|&x| self.ramp(x)).product()
    }

    /// Gradient of the profile at offset `d`.
    pub fn gradient(&self, d: &[f64]) -> Vec<f64> {
        let ramps: Vec<f64> = d.iter().map(|&x| self.ramp(x)).collect();
        let mut grad = vec![0.0; d.len()];
        for a in 0..d.len() {
            let mut g = self.ramp_d1(d[a]);
            for (b, r) in ramps.iter().enumerate() {
                if b != a {
                    g *= r;
                }
            }
            grad[a] = g;
        }
        grad
    }

    /// True when `d` lies strictly outside the support.
    pub fn outside(&self, d: &[f64]) -> bool {
        let half = self.inner_side / 2.0 + self.width;
        d.iter().any(|&x| math::abs(x) >= half)
    }

    /// True when `d` lies in the plateau (value exactly 1, gradient 0).
    pub fn on_plateau(&self, d: &[f64]) -> bool {
        let half = self.inner_side / 2.0;
        d.iter().all(|&x| math::abs(x) <= half)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn smoothstep_is_c2_at_seams() {
        for (f, df, eps) in [
            (
                smoothstep as fn(f64) -> f64,
                smoothstep_d1 as fn(f64) -> f64,
                1e-6,
            ),
            (smoothstep_d1, smoothstep_d2, 1e-5),
        ] {
            for t0 in [0.0, 1.0] {
                let h = 1e-7;
                let fd = (f(t0 + h) - f(t0 - h)) / (2.0 * h);
                assert!((fd - df(t0)).abs() < eps);
            }
        }
        assert_eq!(smoothstep(0.5), 0.5);
    }

    #[test]
    fn derivative_constants_are_attained() {
        // C1 at t = 1/2, C2 at t = (1 - 1/sqrt(3))/2.
        assert!((smoothstep_d1(0.5) - C1).abs() < 1e-15);
        let t2 = (1.0 - 1.0 / 3f64.sqrt()) / 2.0;
        assert!((smoothstep_d2(t2).abs() - C2).abs() < 1e-12);
        let mut max1: f64 = 0.0;
        let mut max2: f64 = 0.0;
        for i in 0..100_000 {
            let t = i as f64 / 99_999.0;
            max1 = max1.max(smoothstep_d1(t).abs());
            max2 = max2.max(smoothstep_d2(t).abs());
        }
        assert!(max1 <= C1 + 1e-12 && max1 > C1 * 0.99);
        assert!(max2 <= C2 + 1e-9 && max2 > C2 * 0.99);
    }

    #[test]
    fn profile_plateau_support_and_bounds() {
        let rho = 0.04;
        let p = CutoffProfile::new(vec![0.0, 0.0], 0.2, rho).unwrap();
        // 1 at the center, 0 past the outer cube.
        assert_eq!(p.value(&[0.0, 0.0]), 1.0);
        assert_eq!(p.value(&[0.09, -0.05]), 1.0);
        let beyond = p.outer_side() / 2.0 + 1e-12;
        assert_eq!(p.value(&[beyond, 0.0]), 0.0);
        assert!(p.outside(&[beyond, beyond]));

        // Sampled gradient magnitude obeys sqrt(k) C1 / w.
        let mut rng = crate::rng::substream(3, &[9]);
        let mut max_g: f64 = 0.0;
        for _ in 0..100_000 {
            let d = [rng.gen_range(-0.15..0.15), rng.gen_range(-0.15..0.15)];
            let g = p.gradient(&d);
            max_g = max_g.max(crate::math::norm(&g));
        }
        let w = rho / 4.0;
        assert!(max_g <= 2f64.sqrt() * C1 / w + 1e-9);
        // The 1-D max |ramp'| is within 1% of C1 / w under dense sampling.
        let mut max_1d: f64 = 0.0;
        for i in 0..100_000 {
            let d = 0.1 + w * i as f64 / 99_999.0;
            max_1d = max_1d.max(p.ramp_d1(d).abs());
        }
        assert!((max_1d - C1 / w).abs() < 0.01 * C1 / w);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(CutoffProfile::new(vec![0.0], 0.0, 0.1).is_err());
        assert!(CutoffProfile::new(vec![0.0], 0.1, -1.0).is_err());
    }
}

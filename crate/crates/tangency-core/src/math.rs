//! Float helpers that work with and without `std`.
//!
//! With `std` these forward to the intrinsic-backed methods; without it they
//! fall back to `libm`. All call sites in the crate route through this module
//! so the `no_std` build stays warning-free.

#![allow(dead_code)]

#[cfg(feature = "std")]
mod imp {
    pub fn abs(x: f64) -> f64 {
        x.abs()
    }
    pub fn sqrt(x: f64) -> f64 {
        x.sqrt()
    }
    pub fn powf(x: f64, y: f64) -> f64 {
        x.powf(y)
    }
    pub fn exp(x: f64) -> f64 {
        x.exp()
    }
    pub fn ln(x: f64) -> f64 {
        x.ln()
    }
    pub fn log2(x: f64) -> f64 {
        x.log2()
    }
    pub fn floor(x: f64) -> f64 {
        x.floor()
    }
    pub fn sin(x: f64) -> f64 {
        x.sin()
    }
    pub fn cos(x: f64) -> f64 {
        x.cos()
    }
    pub fn exp2i(n: i32) -> f64 {
        (2.0f64).powi(n)
    }
}

#[cfg(not(feature = "std"))]
mod imp {
    pub fn abs(x: f64) -> f64 {
        libm::fabs(x)
    }
    pub fn sqrt(x: f64) -> f64 {
        libm::sqrt(x)
    }
    pub fn powf(x: f64, y: f64) -> f64 {
        libm::pow(x, y)
    }
    pub fn exp(x: f64) -> f64 {
        libm::exp(x)
    }
    pub fn ln(x: f64) -> f64 {
        libm::log(x)
    }
    pub fn log2(x: f64) -> f64 {
        libm::log2(x)
    }
    pub fn floor(x: f64) -> f64 {
        libm::floor(x)
    }
    pub fn sin(x: f64) -> f64 {
        libm::sin(x)
    }
    pub fn cos(x: f64) -> f64 {
        libm::cos(x)
    }
    pub fn exp2i(n: i32) -> f64 {
        libm::scalbn(1.0, n)
    }
}

pub use imp::*;

/// Euclidean norm of a slice.
pub fn norm(v: &[f64]) -> f64 {
    sqrt(v.iter().map(|x| x * x).sum())
}

/// Max norm of a slice.
pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, &x| {
        let a = abs(x);
        if a > m {
            a
        } else {
            m
        }
    })
}

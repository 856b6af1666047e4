//! Classification of `(s, alpha, q)` triples into rigidity and
//! counterexample regions.
//!
//! The threshold is `tau(s, q) = 1 - (2 - 1/q) s` with `1/inf = 0`. Above it
//! (for `0 < s <= 1/2`) or for any `s > 1/2`, tangency sets of the given
//! regularity must be null; strictly below it (with `s < 1/2`) positive-
//! measure constructions exist, with `s = 0` covered by the extremal
//! construction for every `alpha < 1`. Points on the threshold, and
//! sub-threshold points at exactly `s = 1/2`, are undecided.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::CoreError;
use crate::Result;

/// Integrability exponent `q in [1, inf]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Q {
    Finite(f64),
    Inf,
}

impl Q {
    pub fn parse(text: &str) -> Result<Q> {
        let t = text.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") || t == "∞" {
            return Ok(Q::Inf);
        }
        let v: f64 = t
            .parse()
            .map_err(|_| CoreError::invalid("q must be a number >= 1 or 'inf'"))?;
        Q::finite(v)
    }

    pub fn finite(v: f64) -> Result<Q> {
        if !(v >= 1.0) {
            return Err(CoreError::invalid("q must be >= 1"));
        }
        Ok(if v.is_infinite() {
            Q::Inf
        } else {
            Q::Finite(v)
        })
    }

    /// `1/q`, with the convention `1/inf = 0`.
    pub fn inverse(&self) -> f64 {
        match self {
            Q::Finite(v) => 1.0 / v,
            Q::Inf => 0.0,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Q::Finite(v) => alloc::format!("{v}"),
            Q::Inf => "inf".into(),
        }
    }
}

/// Region labels of the phase diagram.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseLabel {
    Frobenius,
    Counterexample,
    BoundaryOpen,
}

impl PhaseLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            PhaseLabel::Frobenius => "frobenius",
            PhaseLabel::Counterexample => "counterexample",
            PhaseLabel::BoundaryOpen => "boundary-open",
        }
    }
}

/// A classified parameter triple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub s: f64,
    pub alpha: f64,
    pub q: Q,
    pub tau: f64,
    pub label: PhaseLabel,
}

/// `tau(s, q) = 1 - (2 - 1/q) s`.
pub fn threshold(s: f64, q: Q) -> f64 {
    1.0 - (2.0 - q.inverse()) * s
}

/// The `s` at which the threshold crosses zero: `q / (2q - 1)`.
pub fn threshold_zero(q: Q) -> f64 {
    match q {
        Q::Finite(v) => v / (2.0 * v - 1.0),
        Q::Inf => 0.5,
    }
}

/// Classify a parameter triple.
pub fn classify(s: f64, alpha: f64, q: Q) -> Result<PhasePoint> {
    if !(0.0..1.0).contains(&s) {
        return Err(CoreError::invalid("s must lie in [0, 1)"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(CoreError::invalid("alpha must lie in (0, 1)"));
    }
    let tau = threshold(s, q);
    let label = if s > 0.5 || (s > 0.0 && alpha > tau) {
        PhaseLabel::Frobenius
    } else if s == 0.0 {
        // tau(0, q) = 1 and alpha < 1 always: the extremal construction.
        PhaseLabel::Counterexample
    } else if s < 0.5 && alpha < tau {
        PhaseLabel::Counterexample
    } else {
        PhaseLabel::BoundaryOpen
    };
    Ok(PhasePoint {
        s,
        alpha,
        q,
        tau,
        label,
    })
}

/// One cell of the phase figure.
#[derive(Debug, Clone, Copy)]
pub struct GridCell {
    pub s: f64,
    pub alpha: f64,
    pub tau: f64,
    pub label: PhaseLabel,
}

/// Regular grid of cell-center classifications over `(s, alpha) in
/// (0,1) x (0,1)`.
pub fn figure_grid(q: Q, resolution: usize) -> Result<Vec<GridCell>> {
    if resolution < 16 {
        return Err(CoreError::invalid("grid resolution must be >= 16"));
    }
    let mut out = Vec::with_capacity(resolution * resolution);
    for i in 0..resolution {
        let s = (i as f64 + 0.5) / resolution as f64;
        for j in 0..resolution {
            let alpha = (j as f64 + 0.5) / resolution as f64;
            let p = classify(s, alpha, q)?;
            out.push(GridCell {
                s,
                alpha,
                tau: p.tau,
                label: p.label,
            });
        }
    }
    Ok(out)
}

/// Location (cell boundary estimate) where `tau` changes sign along the
/// `s` axis of a grid with the given resolution; the grid right edge when
/// `tau` stays positive throughout.
pub fn grid_tau_zero_crossing(q: Q, resolution: usize) -> f64 {
    for i in 0..resolution {
        let s = (i as f64 + 0.5) / resolution as f64;
        if threshold(s, q) <= 0.0 {
            return i as f64 / resolution as f64;
        }
    }
    1.0
}

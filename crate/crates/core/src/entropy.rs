//! Relative entropy between finite pattern laws and per-site entropy
//! sequences between finite-volume Gibbs measures.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::defaults::{ABS_ENTROPY_SLACK, EXACT_TOLERANCE};
use crate::distribution::PatternDistribution;
use crate::error::{invalid, Error, Result};
use crate::lattice::{Boundary, Window};
use crate::potential::Potential;
use crate::specification::FiniteGibbsMeasure;

/// `H(ν|μ) = Σ ν log(ν/μ)` in nats; fails on `ν ≪ μ` violations.
pub fn relative_entropy(nu: &PatternDistribution, mu: &PatternDistribution) -> Result<f64> {
    nu.check_same_shape(mu)?;
    let mut h = 0.0;
    for (key, p) in nu.support() {
        let q = mu.prob(&key);
        if q <= 0.0 {
            return Err(Error::AbsoluteContinuity {
                pattern: format!("{key:?}"),
            });
        }
        h += p * (p / q).ln();
    }
    Ok(h.max(0.0))
}

/// `H(ν|μ)` for two probability vectors over the same index set.
pub fn relative_entropy_tables(nu: &[f64], mu: &[f64]) -> Result<f64> {
    if nu.len() != mu.len() {
        return Err(Error::ShapeMismatch(format!("{} vs {} entries", nu.len(), mu.len())));
    }
    let mut h = 0.0;
    for (i, (&p, &q)) in nu.iter().zip(mu).enumerate() {
        if p > 0.0 {
            if q <= 0.0 {
                return Err(Error::AbsoluteContinuity {
                    pattern: i.to_string(),
                });
            }
            h += p * (p / q).ln();
        }
    }
    Ok(h.max(0.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbsEntropyCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

/// `Σ ν |log(ν/μ)| ≤ H(ν|μ) + 2/e`.
pub fn abs_entropy_bound_check(
    nu: &PatternDistribution,
    mu: &PatternDistribution,
) -> Result<AbsEntropyCheck> {
    let h = relative_entropy(nu, mu)?;
    let lhs: f64 = nu
        .support()
        .iter()
        .map(|(k, p)| p * (p / mu.prob(k)).ln().abs())
        .sum();
    let rhs = h + ABS_ENTROPY_SLACK;
    Ok(AbsEntropyCheck {
        lhs,
        rhs,
        ok: lhs <= rhs + EXACT_TOLERANCE,
    })
}

/// One window of a per-site entropy sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyPoint {
    /// Window radius as printed in headers (`(side-1)/2`).
    pub n: String,
    pub side: usize,
    pub volume: usize,
    #[serde(rename = "H_n")]
    pub h: f64,
    pub per_site: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Trend {
    Decreasing,
    Increasing,
    Constant,
    Mixed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub points: Vec<EntropyPoint>,
    pub trend: Trend,
    /// Least-squares slope of `per_site` against `1/side`.
    pub slope_vs_inverse_side: Option<f64>,
    /// Intercept of that fit: a descriptive extrapolation, never asserted.
    pub extrapolated_per_site: Option<f64>,
}

impl EntropyReport {
    pub fn from_points(points: Vec<EntropyPoint>) -> Self {
        let ys: Vec<f64> = points.iter().map(|p| p.per_site).collect();
        let tol = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300);
        let trend = if ys.windows(2).all(|w| tol(w[0], w[1])) {
            Trend::Constant
        } else if ys.windows(2).all(|w| w[1] < w[0] || tol(w[0], w[1])) {
            Trend::Decreasing
        } else if ys.windows(2).all(|w| w[1] > w[0] || tol(w[0], w[1])) {
            Trend::Increasing
        } else {
            Trend::Mixed
        };
        let (slope, intercept) = if points.len() >= 2 {
            let xs: Vec<f64> = points.iter().map(|p| 1.0 / p.side as f64).collect();
            let (mx, my) = (crate::stats::mean(&xs), crate::stats::mean(&ys));
            let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
            let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
            if sxx > 0.0 {
                let b = sxy / sxx;
                (Some(b), Some(my - b * mx))
            } else {
                (None, None)
            }
        } else {
            (None, None)
        };
        EntropyReport {
            points,
            trend,
            slope_vs_inverse_side: slope,
            extrapolated_per_site: intercept,
        }
    }

    /// CSV with columns `n,volume,H_n,per_site`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,volume,H_n,per_site\n");
        for p in &self.points {
            let _ = writeln!(out, "{},{},{},{}", p.n, p.volume, p.h, p.per_site);
        }
        out
    }
}

/// One side of an entropy comparison: a potential with its boundary
/// condition; windows are built with the given geometry.
#[derive(Clone, Debug)]
pub struct MeasureSpec<'a> {
    pub potential: &'a Potential,
    pub boundary: Boundary,
}

/// `H(ν_Λ|μ_Λ)/|Λ|` over windows of the given sides, from exact
/// finite-volume measures on the full windows.
pub fn per_site_entropy_sequence(
    nu: &MeasureSpec<'_>,
    mu: &MeasureSpec<'_>,
    dim: usize,
    geometry: crate::lattice::Geometry,
    sides: &[usize],
) -> Result<EntropyReport> {
    if nu.potential.alphabet() != mu.potential.alphabet() {
        return Err(invalid("both measures need the same alphabet"));
    }
    let points = sides
        .par_iter()
        .map(|&side| {
            let w = Window::with_side(dim, side, geometry, nu.potential.alphabet())?;
            let a = FiniteGibbsMeasure::exact(nu.potential, &w, &nu.boundary)?;
            let b = FiniteGibbsMeasure::exact(mu.potential, &w, &mu.boundary)?;
            let h = relative_entropy_tables(a.probs(), b.probs())?;
            Ok(EntropyPoint {
                n: w.header().split_whitespace().nth(1).unwrap_or("").to_string(),
                side,
                volume: w.volume(),
                h,
                per_site: h / w.volume() as f64,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EntropyReport::from_points(points))
}

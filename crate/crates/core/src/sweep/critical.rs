//! Critical-point location on one parameter axis and log-log exponent fits.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::AxisName;
use crate::error::{Error, Result};
use crate::gaussian::{analyze, energy_gap_with, PointAnalysis};
use crate::model::{classify_phase, ModelParams, Phase};
use crate::solver::SolverOptions;

/// Default fit window in |χ − χ_c|.
pub const DEFAULT_FIT_WINDOW: (f64, f64) = (1e-4, 1e-2);
/// Intervals used to count phase changes inside a bracket.
const BRACKET_SAMPLES: usize = 1024;
/// Bisection stops once the bracket is this narrow (relative to max(1, |x|)).
const BISECTION_WIDTH: f64 = 1e-12;
/// Half-width of the gap-minimum search around the boundary, as a fraction
/// of the bracket.
const GAP_SEARCH_FRACTION: f64 = 0.01;
const GOLDEN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransitionOrder {
    First,
    Second,
}

impl fmt::Display for TransitionOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TransitionOrder::First => "first",
            TransitionOrder::Second => "second",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub axis: AxisName,
    /// Midpoint of the final bisection interval.
    pub value: f64,
    /// Width of the final bisection interval.
    pub width: f64,
    pub lower_phase: Phase,
    pub upper_phase: Phase,
    pub order: TransitionOrder,
    /// Location and value of the smallest Δ_min found near `value`; only
    /// searched for continuous transitions, where the gap must close.
    pub gap_minimum_at: Option<f64>,
    pub gap_minimum: Option<f64>,
}

fn phase_at(base: &ModelParams, axis: AxisName, x: f64) -> Phase {
    classify_phase(&axis.apply(base, x)).phase
}

/// The single analytic phase boundary inside `[lo, hi]` along `axis`.
///
/// The bracket is sampled to make sure it holds exactly one phase change,
/// the change is bisected on the analytic classification, and for a
/// continuous transition the minimum of Δ_min is located independently by a
/// golden-section search so callers can compare the two.
pub fn locate_critical(base: &ModelParams, axis: AxisName, lo: f64, hi: f64) -> Result<CriticalPoint> {
    locate_critical_with(base, axis, lo, hi, &SolverOptions::default())
}

pub fn locate_critical_with(
    base: &ModelParams,
    axis: AxisName,
    lo: f64,
    hi: f64,
    opts: &SolverOptions,
) -> Result<CriticalPoint> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidSpec(format!("bracket must satisfy lo < hi, got [{lo}, {hi}]")));
    }
    axis.apply(base, lo).validate()?;
    axis.apply(base, hi).validate()?;

    let step = (hi - lo) / BRACKET_SAMPLES as f64;
    let mut changes = 0;
    let mut prev = phase_at(base, axis, lo);
    let mut at = (lo, hi);
    for i in 1..=BRACKET_SAMPLES {
        let x = if i == BRACKET_SAMPLES { hi } else { lo + i as f64 * step };
        let here = phase_at(base, axis, x);
        if here != prev {
            changes += 1;
            at = (x - step, x);
        }
        prev = here;
    }
    match changes {
        0 => return Err(Error::NoBoundaryInBracket { lo, hi }),
        1 => {}
        n => return Err(Error::MultipleBoundaries { lo, hi, count: n }),
    }

    let (mut a, mut b) = (at.0.max(lo), at.1.min(hi));
    let lower_phase = phase_at(base, axis, a);
    let upper_phase = phase_at(base, axis, b);
    loop {
        let m = a + 0.5 * (b - a);
        if b - a <= BISECTION_WIDTH * m.abs().max(1.0) || m <= a || m >= b {
            break;
        }
        if phase_at(base, axis, m) == lower_phase {
            a = m;
        } else {
            b = m;
        }
    }
    let value = a + 0.5 * (b - a);

    let first_order = matches!(
        (lower_phase, upper_phase),
        (Phase::FerromagneticSuperradiant, Phase::AntiferromagneticNormal)
            | (Phase::AntiferromagneticNormal, Phase::FerromagneticSuperradiant)
    );
    let (order, gap_minimum_at, gap_minimum) = if first_order {
        (TransitionOrder::First, None, None)
    } else {
        let half = GAP_SEARCH_FRACTION * (hi - lo);
        let gap = |x: f64| match energy_gap_with(&axis.apply(base, x), opts) {
            Ok(g) => Ok(g),
            // a mode that has just gone soft is a closed gap
            Err(Error::UnstableMode { .. }) => Ok(0.0),
            Err(e) => Err(e),
        };
        let (x, g) = golden_minimum(gap, (value - half).max(lo), (value + half).min(hi))?;
        (TransitionOrder::Second, Some(x), Some(g))
    };
    Ok(CriticalPoint { axis, value, width: b - a, lower_phase, upper_phase, order, gap_minimum_at, gap_minimum })
}

fn golden_minimum<F>(f: F, mut a: f64, mut b: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while b - a > GOLDEN_TOL {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc <= fd { (c, fc) } else { (d, fd) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope.
    pub stderr: f64,
    pub points: usize,
}

pub const MIN_FIT_POINTS: usize = 5;

/// Least-squares line through `(ln d, ln v)` for the points with
/// `window.0 <= d <= window.1`.
pub fn fit_exponent(series: &[(f64, f64)], window: (f64, f64)) -> Result<ExponentFit> {
    let (dmin, dmax) = window;
    if !(dmin > 0.0 && dmin < dmax && dmax.is_finite()) {
        return Err(Error::InvalidSpec(format!("fit window must satisfy 0 < min < max, got [{dmin}, {dmax}]")));
    }
    let mut pts = Vec::new();
    for &(d, v) in series.iter().filter(|(d, _)| (dmin..=dmax).contains(d)) {
        if !(v > 0.0) {
            return Err(Error::NonPositiveValue { distance: d, value: v });
        }
        if !v.is_finite() {
            return Err(Error::InvalidSpec(format!("non-finite value {v} at distance {d}")));
        }
        pts.push((d.ln(), v.ln()));
    }
    let n = pts.len();
    if n < MIN_FIT_POINTS {
        return Err(Error::InsufficientPoints { found: n, required: MIN_FIT_POINTS });
    }
    let nf = n as f64;
    let xm = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - xm).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - xm) * (p.1 - ym)).sum();
    if !(sxx > 0.0) {
        return Err(Error::InvalidSpec("all distances in the fit window coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let ssr: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let stderr = (ssr / (nf - 2.0) / sxx).sqrt();
    Ok(ExponentFit { slope, intercept, stderr, points: n })
}

/// Which side of the critical value a series approaches from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Below,
    Above,
}

impl FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "below" => Ok(Side::Below),
            "above" => Ok(Side::Above),
            _ => Err(Error::InvalidSpec(format!("side must be below or above, got {s:?}"))),
        }
    }
}

/// Observable sampled by [`critical_series`]. Mode indices are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeriesQuantity {
    Gap,
    Dx2(usize),
    Dp2(usize),
    Entropy(usize),
}

impl SeriesQuantity {
    pub fn extract(&self, a: &PointAnalysis) -> Result<f64> {
        Ok(match *self {
            SeriesQuantity::Gap => a.spectrum.gap(),
            SeriesQuantity::Dx2(i) => a.fluctuations.dx2[i],
            SeriesQuantity::Dp2(i) => a.fluctuations.dp2[i],
            SeriesQuantity::Entropy(i) => a.fluctuations.entropies()?[i],
        })
    }
}

/// `gap`, `dx2_1` … `dx2_3`, `dp2_1` … `dp2_3`, `S1` … `S3`.
impl FromStr for SeriesQuantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mode = |rest: &str| match rest {
            "1" => Some(0),
            "2" => Some(1),
            "3" => Some(2),
            _ => None,
        };
        let q = if s == "gap" {
            Some(SeriesQuantity::Gap)
        } else if let Some(r) = s.strip_prefix("dx2_") {
            mode(r).map(SeriesQuantity::Dx2)
        } else if let Some(r) = s.strip_prefix("dp2_") {
            mode(r).map(SeriesQuantity::Dp2)
        } else if let Some(r) = s.strip_prefix('S') {
            mode(r).map(SeriesQuantity::Entropy)
        } else {
            None
        };
        q.ok_or_else(|| Error::InvalidSpec(format!("unknown series quantity {s:?}")))
    }
}

/// `(distance, value)` pairs at `count` log-spaced distances from `critical`
/// across `window`, on the requested side.
pub fn critical_series(
    base: &ModelParams,
    axis: AxisName,
    critical: f64,
    side: Side,
    window: (f64, f64),
    count: usize,
    quantity: SeriesQuantity,
) -> Result<Vec<(f64, f64)>> {
    let (dmin, dmax) = window;
    if !(dmin > 0.0 && dmin < dmax && count >= 2) {
        return Err(Error::InvalidSpec(format!("bad series window [{dmin}, {dmax}] with {count} points")));
    }
    let sign = match side {
        Side::Below => -1.0,
        Side::Above => 1.0,
    };
    let ratio = (dmax / dmin).ln();
    (0..count)
        .map(|k| {
            let d = dmin * (ratio * k as f64 / (count - 1) as f64).exp();
            let a = analyze(&axis.apply(base, critical + sign * d), &SolverOptions::default())?;
            Ok((d, quantity.extract(&a)?))
        })
        .collect()
}

//! Parameter grids, critical-point location and power-law fits.
//!
//! A sweep evaluates the mean-field / Gaussian pipeline on a one- or
//! two-dimensional grid. Grid points are independent and run on a rayon pool;
//! the resulting table is always in grid order (axis 1 slowest).

pub mod config;
pub mod critical;
pub mod output;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{build_quadratic, covariance_observables, williamson};
use crate::model::{order_parameters, ModelParams};
use crate::solver::{energy_derivatives_chi, minimize, SolverOptions};
pub use critical::{
    critical_series, fit_exponent, locate_critical, locate_critical_with, CriticalPoint, ExponentFit, SeriesQuantity,
    Side, TransitionOrder, DEFAULT_FIT_WINDOW,
};
pub use output::{format_number, Cell, Format, Table};

/// Step used for the χ finite differences unless a sweep overrides it.
pub const DEFAULT_DERIVATIVE_STEP: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AxisName {
    #[serde(rename = "chi")]
    Chi,
    #[serde(rename = "lambda")]
    Lambda,
    #[serde(rename = "Omega")]
    Omega,
}

impl AxisName {
    pub fn as_str(&self) -> &'static str {
        match self {
            AxisName::Chi => "chi",
            AxisName::Lambda => "lambda",
            AxisName::Omega => "Omega",
        }
    }

    /// `params` with this coordinate replaced by `value`.
    pub fn apply(&self, params: &ModelParams, value: f64) -> ModelParams {
        match self {
            AxisName::Chi => params.with_chi(value),
            AxisName::Lambda => params.with_lambda(value),
            AxisName::Omega => params.with_spin_freq(value),
        }
    }

    pub fn get(&self, params: &ModelParams) -> f64 {
        match self {
            AxisName::Chi => params.chi,
            AxisName::Lambda => params.lambda,
            AxisName::Omega => params.spin_freq,
        }
    }
}

impl fmt::Display for AxisName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AxisName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chi" => Ok(AxisName::Chi),
            "lambda" => Ok(AxisName::Lambda),
            "Omega" => Ok(AxisName::Omega),
            _ => Err(Error::InvalidSpec(format!("unknown axis {s:?} (expected chi, lambda or Omega)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: AxisName,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(name: AxisName, start: f64, stop: f64, count: usize) -> Self {
        Self { name, start, stop, count }
    }

    fn validate(&self) -> Result<()> {
        if self.count < 2 {
            return Err(Error::InvalidSpec(format!("axis {} needs count >= 2, got {}", self.name, self.count)));
        }
        if !(self.start.is_finite() && self.stop.is_finite() && self.start < self.stop) {
            return Err(Error::InvalidSpec(format!(
                "axis {} needs finite start < stop, got [{}, {}]",
                self.name, self.start, self.stop
            )));
        }
        Ok(())
    }

    /// Evenly spaced values; the last one is `stop` exactly.
    pub fn values(&self) -> Vec<f64> {
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count).map(|i| if i + 1 == self.count { self.stop } else { self.start + i as f64 * step }).collect()
    }
}

/// Compact `name:start:stop:count` form, e.g. `chi:-2:2:401`.
impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::InvalidSpec(format!("axis {s:?} is not of the form name:start:stop:count"));
        if parts.len() != 4 {
            return Err(bad());
        }
        let num = |p: &str| p.trim().parse::<f64>().map_err(|_| bad());
        Ok(Axis {
            name: parts[0].trim().parse()?,
            start: num(parts[1])?,
            stop: num(parts[2])?,
            count: parts[3].trim().parse().map_err(|_| bad())?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Quantity {
    #[serde(rename = "energy")]
    Energy,
    #[serde(rename = "dE_dchi")]
    DeDchi,
    #[serde(rename = "d2E_dchi2")]
    D2eDchi2,
    #[serde(rename = "jx")]
    Jx,
    #[serde(rename = "b")]
    B,
    #[serde(rename = "nb")]
    Nb,
    #[serde(rename = "deltas")]
    Deltas,
    #[serde(rename = "dx2")]
    Dx2,
    #[serde(rename = "dp2")]
    Dp2,
    #[serde(rename = "entropy")]
    Entropy,
    #[serde(rename = "phase")]
    Phase,
}

impl Quantity {
    pub const ALL: [Quantity; 11] = [
        Quantity::Energy,
        Quantity::DeDchi,
        Quantity::D2eDchi2,
        Quantity::Jx,
        Quantity::B,
        Quantity::Nb,
        Quantity::Deltas,
        Quantity::Dx2,
        Quantity::Dp2,
        Quantity::Entropy,
        Quantity::Phase,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Quantity::Energy => "energy",
            Quantity::DeDchi => "dE_dchi",
            Quantity::D2eDchi2 => "d2E_dchi2",
            Quantity::Jx => "jx",
            Quantity::B => "b",
            Quantity::Nb => "nb",
            Quantity::Deltas => "deltas",
            Quantity::Dx2 => "dx2",
            Quantity::Dp2 => "dp2",
            Quantity::Entropy => "entropy",
            Quantity::Phase => "phase",
        }
    }

    /// Output columns produced by this quantity.
    pub fn columns(&self) -> Vec<String> {
        let three = |p: &str| (1..=3).map(|i| format!("{p}{i}")).collect();
        match self {
            Quantity::Jx => vec!["jx1".into(), "jx2".into()],
            Quantity::Deltas => three("delta"),
            Quantity::Dx2 => three("dx2_"),
            Quantity::Dp2 => three("dp2_"),
            Quantity::Entropy => three("S"),
            q => vec![q.as_str().into()],
        }
    }

    fn needs_derivatives(&self) -> bool {
        matches!(self, Quantity::DeDchi | Quantity::D2eDchi2)
    }

    fn needs_gaussian(&self) -> bool {
        matches!(self, Quantity::Deltas | Quantity::Dx2 | Quantity::Dp2 | Quantity::Entropy)
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Quantity::ALL
            .into_iter()
            .find(|q| q.as_str() == s)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown quantity {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub base: ModelParams,
    pub axis1: Axis,
    pub axis2: Option<Axis>,
    /// Requested quantities; columns always come out in the canonical order.
    pub quantities: BTreeSet<Quantity>,
    /// Worker threads; 0 lets rayon decide.
    pub threads: usize,
    pub derivative_step: f64,
    pub solver: SolverOptions,
}

impl SweepSpec {
    pub fn new(base: ModelParams, axis1: Axis, quantities: impl IntoIterator<Item = Quantity>) -> Self {
        Self {
            base,
            axis1,
            axis2: None,
            quantities: quantities.into_iter().collect(),
            threads: 0,
            derivative_step: DEFAULT_DERIVATIVE_STEP,
            solver: SolverOptions::default(),
        }
    }

    pub fn with_axis2(mut self, axis2: Axis) -> Self {
        self.axis2 = Some(axis2);
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads;
        self
    }

    /// The (χ, λ) phase diagram at Ω = ω = 1: 101 × 101 points over
    /// χ ∈ [−2, 2], λ ∈ [0, 1].
    pub fn phase_diagram() -> Self {
        Self::new(
            ModelParams::default(),
            Axis::new(AxisName::Chi, -2.0, 2.0, 101),
            [Quantity::DeDchi, Quantity::D2eDchi2, Quantity::Jx, Quantity::B],
        )
        .with_axis2(Axis::new(AxisName::Lambda, 0.0, 1.0, 101))
    }

    /// Fluctuation line cut at Ω = ω = 1, λ = 0.3 over χ ∈ [−2, 2].
    pub fn fluctuation_cut() -> Self {
        Self::new(
            ModelParams::default().with_lambda(0.3),
            Axis::new(AxisName::Chi, -2.0, 2.0, 401),
            [Quantity::Deltas, Quantity::Dx2, Quantity::Dp2, Quantity::Entropy],
        )
    }

    pub fn validate(&self) -> Result<()> {
        self.axis1.validate()?;
        if let Some(a2) = &self.axis2 {
            a2.validate()?;
            if a2.name == self.axis1.name {
                return Err(Error::InvalidSpec(format!("both axes sweep {}", a2.name)));
            }
        }
        if self.quantities.is_empty() {
            return Err(Error::InvalidSpec("no quantities requested".into()));
        }
        if !(self.derivative_step > 0.0 && self.derivative_step.is_finite()) {
            return Err(Error::InvalidSpec(format!("derivative step must be > 0, got {}", self.derivative_step)));
        }
        Ok(())
    }

    fn axes(&self) -> Vec<&Axis> {
        std::iter::once(&self.axis1).chain(self.axis2.as_ref()).collect()
    }

    /// Axis columns, then one group per quantity, then `error`.
    pub fn columns(&self) -> Vec<String> {
        let mut cols: Vec<String> = self.axes().iter().map(|a| a.name.to_string()).collect();
        cols.extend(self.quantities.iter().flat_map(|q| q.columns()));
        cols.push("error".into());
        cols
    }

    /// Grid coordinates in output order.
    pub fn grid(&self) -> Vec<Vec<f64>> {
        let v1 = self.axis1.values();
        match &self.axis2 {
            None => v1.into_iter().map(|x| vec![x]).collect(),
            Some(a2) => {
                let v2 = a2.values();
                v1.iter().flat_map(|&x| v2.iter().map(move |&y| vec![x, y])).collect()
            }
        }
    }

    pub fn params_at(&self, coords: &[f64]) -> ModelParams {
        self.axes().iter().zip(coords).fold(self.base, |p, (a, &v)| a.name.apply(&p, v))
    }
}

/// One grid point. `values` lines up with the quantity columns of the spec;
/// a quantity that could not be computed is [`Cell::Empty`].
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub coords: Vec<f64>,
    pub values: Vec<Cell>,
    pub error: Option<Error>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub columns: Vec<String>,
    pub records: Vec<SweepRecord>,
}

impl SweepOutput {
    pub fn to_table(&self) -> Table {
        let rows = self
            .records
            .iter()
            .map(|r| {
                let mut row: Vec<Cell> = r.coords.iter().map(|&x| Cell::Num(x)).collect();
                row.extend(r.values.iter().cloned());
                row.push(match &r.error {
                    Some(e) => Cell::Text(format!("{}: {e}", e.kind())),
                    None => Cell::Empty,
                });
                row
            })
            .collect();
        Table { columns: self.columns.clone(), rows }
    }
}

/// Evaluates `spec` at every grid point. Per-point failures land in the
/// `error` column; only an invalid spec fails the whole sweep.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepOutput> {
    spec.validate()?;
    let grid = spec.grid();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.threads)
        .build()
        .map_err(|e| Error::InvalidSpec(format!("cannot start worker pool: {e}")))?;
    let records = pool.install(|| grid.into_par_iter().map(|coords| evaluate_point(spec, coords)).collect());
    Ok(SweepOutput { columns: spec.columns(), records })
}

pub fn evaluate_point(spec: &SweepSpec, coords: Vec<f64>) -> SweepRecord {
    let params = spec.params_at(&coords);
    let width: usize = spec.quantities.iter().map(|q| q.columns().len()).sum();
    let mut values = Vec::with_capacity(width);
    let mut error = None;

    let solution = match minimize(&params, &spec.solver) {
        Ok(s) => Some(s),
        Err(e) => {
            error = Some(e);
            None
        }
    };
    let derivatives = match (&solution, spec.quantities.iter().any(Quantity::needs_derivatives)) {
        (Some(_), true) => energy_derivatives_chi(&params, spec.derivative_step, &spec.solver)
            .map_err(|e| error.get_or_insert(e).clone())
            .ok(),
        _ => None,
    };
    let spectrum = match (&solution, spec.quantities.iter().any(Quantity::needs_gaussian)) {
        (Some(s), true) => {
            build_quadratic(&params, s).and_then(|q| williamson(&q)).map_err(|e| error.get_or_insert(e).clone()).ok()
        }
        _ => None,
    };
    let fluct = spectrum.as_ref().map(covariance_observables);
    let entropies = match (&fluct, spec.quantities.contains(&Quantity::Entropy)) {
        (Some(f), true) => f.entropies().map_err(|e| error.get_or_insert(e).clone()).ok(),
        _ => None,
    };

    let num = |x: Option<f64>| x.map_or(Cell::Empty, Cell::Num);
    for q in &spec.quantities {
        let n = q.columns().len();
        let op = solution.as_ref().map(|s| order_parameters(&s.config));
        match q {
            Quantity::Energy => values.push(num(solution.map(|s| s.energy))),
            Quantity::DeDchi => values.push(num(derivatives.map(|d| d.de_dchi))),
            Quantity::D2eDchi2 => values.push(num(derivatives.map(|d| d.d2e_dchi2))),
            Quantity::Jx => {
                values.push(num(op.map(|o| o.jx1)));
                values.push(num(op.map(|o| o.jx2)));
            }
            Quantity::B => values.push(num(op.map(|o| o.b))),
            Quantity::Nb => values.push(num(op.map(|o| o.nb))),
            Quantity::Deltas => (0..n).for_each(|i| values.push(num(spectrum.as_ref().map(|s| s.deltas[i])))),
            Quantity::Dx2 => (0..n).for_each(|i| values.push(num(fluct.map(|f| f.dx2[i])))),
            Quantity::Dp2 => (0..n).for_each(|i| values.push(num(fluct.map(|f| f.dp2[i])))),
            Quantity::Entropy => (0..n).for_each(|i| values.push(num(entropies.map(|s| s[i])))),
            Quantity::Phase => values.push(match &solution {
                Some(s) => Cell::Text(s.branch.phase.roman().into()),
                None => Cell::Empty,
            }),
        }
    }
    SweepRecord { coords, values, error }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::analyze;

    #[test]
    fn axis_values_hit_both_ends() {
        let a = Axis::new(AxisName::Chi, -2.0, 2.0, 401);
        let v = a.values();
        assert_eq!(v.len(), 401);
        assert_eq!(v[0], -2.0);
        assert_eq!(v[400], 2.0);
        assert!(v.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn axis_parses_compact_form() {
        let a: Axis = "chi:-2:2:401".parse().unwrap();
        assert_eq!(a, Axis::new(AxisName::Chi, -2.0, 2.0, 401));
        assert!("chi:-2:2".parse::<Axis>().is_err());
        assert!("mu:0:1:3".parse::<Axis>().is_err());
    }

    #[test]
    fn spec_validation() {
        let base = ModelParams::default();
        let bad_count = SweepSpec::new(base, Axis::new(AxisName::Chi, 0.0, 1.0, 1), [Quantity::Energy]);
        assert!(matches!(run_sweep(&bad_count), Err(Error::InvalidSpec(_))));
        let reversed = SweepSpec::new(base, Axis::new(AxisName::Chi, 1.0, 0.0, 5), [Quantity::Energy]);
        assert!(matches!(reversed.validate(), Err(Error::InvalidSpec(_))));
        let empty = SweepSpec::new(base, Axis::new(AxisName::Chi, 0.0, 1.0, 5), []);
        assert!(matches!(empty.validate(), Err(Error::InvalidSpec(_))));
        let same = SweepSpec::new(base, Axis::new(AxisName::Chi, 0.0, 1.0, 5), [Quantity::Energy])
            .with_axis2(Axis::new(AxisName::Chi, 0.0, 1.0, 5));
        assert!(same.validate().is_err());
        assert!("entanglement".parse::<Quantity>().is_err());
    }

    #[test]
    fn columns_follow_canonical_order() {
        let spec = SweepSpec::new(
            ModelParams::default(),
            Axis::new(AxisName::Chi, 0.0, 1.0, 2),
            [Quantity::Phase, Quantity::Deltas, Quantity::Jx, Quantity::Energy],
        )
        .with_axis2(Axis::new(AxisName::Lambda, 0.0, 1.0, 2));
        assert_eq!(
            spec.columns(),
            ["chi", "lambda", "energy", "jx1", "jx2", "delta1", "delta2", "delta3", "phase", "error"]
        );
    }

    #[test]
    fn grid_is_row_major_and_sorted() {
        let spec = SweepSpec::new(ModelParams::default(), Axis::new(AxisName::Chi, 0.0, 1.0, 3), [Quantity::Energy])
            .with_axis2(Axis::new(AxisName::Lambda, 0.0, 0.5, 2));
        let out = run_sweep(&spec.with_threads(3)).unwrap();
        let coords: Vec<Vec<f64>> = out.records.iter().map(|r| r.coords.clone()).collect();
        assert_eq!(coords, [[0.0, 0.0], [0.0, 0.5], [0.5, 0.0], [0.5, 0.5], [1.0, 0.0], [1.0, 0.5]]);
    }

    #[test]
    fn record_matches_direct_calls_bitwise() {
        let spec = SweepSpec::new(
            ModelParams::default().with_lambda(0.3),
            Axis::new(AxisName::Chi, -0.3, 1.7, 3),
            Quantity::ALL,
        );
        let out = run_sweep(&spec).unwrap();
        let r = &out.records[1];
        assert!(r.error.is_none(), "{:?}", r.error);
        let params = spec.params_at(&r.coords);
        let a = analyze(&params, &SolverOptions::default()).unwrap();
        let d = energy_derivatives_chi(&params, DEFAULT_DERIVATIVE_STEP, &SolverOptions::default()).unwrap();
        let o = order_parameters(&a.solution.config);
        let s = a.fluctuations.entropies().unwrap();
        let f = a.fluctuations;
        let dl = a.spectrum.deltas;
        let expect = [
            a.solution.energy,
            d.de_dchi,
            d.d2e_dchi2,
            o.jx1,
            o.jx2,
            o.b,
            o.nb,
            dl[0],
            dl[1],
            dl[2],
            f.dx2[0],
            f.dx2[1],
            f.dx2[2],
            f.dp2[0],
            f.dp2[1],
            f.dp2[2],
            s[0],
            s[1],
            s[2],
        ];
        for (i, e) in expect.iter().enumerate() {
            assert_eq!(r.values[i], Cell::Num(*e), "column {}", out.columns[i + 1]);
        }
        assert_eq!(r.values[19], Cell::Text(a.solution.branch.phase.roman().into()));
    }

    #[test]
    fn point_errors_do_not_stop_the_sweep() {
        // λ < 0 is rejected per point
        let spec =
            SweepSpec::new(ModelParams::default(), Axis::new(AxisName::Lambda, -0.2, 0.2, 3), [Quantity::Energy]);
        let out = run_sweep(&spec).unwrap();
        assert_eq!(out.records.len(), 3);
        assert!(matches!(out.records[0].error, Some(Error::InvalidParams(_))));
        assert_eq!(out.records[0].values, [Cell::Empty]);
        assert!(out.records[1].error.is_none());
        assert!(out.records[2].error.is_none());
    }
}

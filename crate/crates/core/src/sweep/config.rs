//! Flat TOML sweep description.
//!
//! ```toml
//! Omega = 1.0
//! omega = 1.0
//! lambda = 0.3
//! axis1_name = "chi"
//! axis1_start = -2.0
//! axis1_stop = 2.0
//! axis1_count = 401
//! quantities = ["deltas", "dx2", "dp2", "entropy"]
//! threads = 4
//! ```
//!
//! Omitted couplings default to Ω = ω = 1, χ = λ = 0.

use serde::Deserialize;

use super::{Axis, AxisName, Quantity, SweepSpec, DEFAULT_DERIVATIVE_STEP};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::solver::SolverOptions;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(rename = "Omega")]
    pub spin_freq: Option<f64>,
    pub omega: Option<f64>,
    pub chi: Option<f64>,
    pub lambda: Option<f64>,
    pub axis1_name: AxisName,
    pub axis1_start: f64,
    pub axis1_stop: f64,
    pub axis1_count: usize,
    pub axis2_name: Option<AxisName>,
    pub axis2_start: Option<f64>,
    pub axis2_stop: Option<f64>,
    pub axis2_count: Option<usize>,
    pub quantities: Vec<Quantity>,
    pub threads: Option<usize>,
    pub derivative_step: Option<f64>,
}

impl SweepConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidSpec(e.message().to_string()))
    }

    pub fn into_spec(self) -> Result<SweepSpec> {
        let d = ModelParams::default();
        let base = ModelParams::new(
            self.spin_freq.unwrap_or(d.spin_freq),
            self.omega.unwrap_or(d.boson_freq),
            self.chi.unwrap_or(d.chi),
            self.lambda.unwrap_or(d.lambda),
        )?;
        let axis2 = match (self.axis2_name, self.axis2_start, self.axis2_stop, self.axis2_count) {
            (None, None, None, None) => None,
            (Some(name), Some(start), Some(stop), Some(count)) => Some(Axis { name, start, stop, count }),
            _ => return Err(Error::InvalidSpec("axis2 needs all of name, start, stop and count".into())),
        };
        let spec = SweepSpec {
            base,
            axis1: Axis::new(self.axis1_name, self.axis1_start, self.axis1_stop, self.axis1_count),
            axis2,
            quantities: self.quantities.into_iter().collect(),
            threads: self.threads.unwrap_or(0),
            derivative_step: self.derivative_step.unwrap_or(DEFAULT_DERIVATIVE_STEP),
            solver: SolverOptions::default(),
        };
        spec.validate()?;
        Ok(spec)
    }
}

pub fn load_spec(text: &str) -> Result<SweepSpec> {
    SweepConfig::parse(text)?.into_spec()
}

//! Scenario files.
//!
//! A scenario names one model (inline or by file) or one observed field, a
//! utility grid, and an ordered list of analyses. Numbers may be JSON numbers
//! or decimal/fraction strings; in rational mode strings are read exactly.

use std::path::{Path, PathBuf};

use arum_core::grid::parse_axis;
use arum_core::models::ModelFile;
use arum_core::{ChoiceProbField, Model, ModelClass, Scalar, SimplexVector, UtilityGrid, UtilityPoint};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, Result};

pub const SCENARIO_SCHEMA_VERSION: u32 = 1;
pub const SCENARIO_SCHEMA: &str = include_str!("../scenario.schema.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arithmetic {
    Rational,
    Float,
}

impl Arithmetic {
    pub fn as_str(&self) -> &'static str {
        match self {
            Arithmetic::Rational => "rational",
            Arithmetic::Float => "float",
        }
    }
}

impl std::str::FromStr for Arithmetic {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "rational" => Ok(Arithmetic::Rational),
            "float" => Ok(Arithmetic::Float),
            other => Err(format!("unknown arithmetic mode {other:?} (expected rational or float)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub model: Option<ModelFile>,
    #[serde(default)]
    pub model_file: Option<String>,
    #[serde(default)]
    pub field: Option<FieldSpec>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    pub analyses: Vec<Analysis>,
    #[serde(default)]
    pub output_dir: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_arithmetic")]
    pub arithmetic: Arithmetic,
}

fn default_arithmetic() -> Arithmetic {
    Arithmetic::Rational
}

/// Either explicit points or one `"lo:hi:step"` axis per alternative.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default)]
    pub points: Option<Vec<Vec<Value>>>,
    #[serde(default)]
    pub axes: Option<Vec<String>>,
}

/// An observed field: grid points with one probability vector each.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub points: Vec<Vec<Value>>,
    pub probs: Vec<Vec<Value>>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Analysis {
    /// Fields of the model and its three representation images; optionally a
    /// Monte Carlo cross-check at every grid point.
    Equivalence {
        #[serde(default)]
        monte_carlo_draws: Option<usize>,
        #[serde(default)]
        plot: Option<bool>,
    },
    Identify {
        #[serde(default)]
        k: Option<usize>,
        #[serde(default)]
        plot: Option<bool>,
    },
    /// Nested boxes `[-s, s]^K` with the given step.
    Discontinuity {
        k: usize,
        scales: Vec<Value>,
        #[serde(default)]
        step: Option<Value>,
        #[serde(default)]
        plot: Option<bool>,
    },
    Counterfactual {
        k: usize,
        u_c: Vec<Value>,
        atom_grid: String,
        #[serde(default)]
        model_classes: Option<Vec<ModelClass>>,
        #[serde(default)]
        plot: Option<bool>,
    },
    Attention {
        #[serde(default)]
        k: Option<usize>,
        #[serde(default)]
        plot: Option<bool>,
    },
    Welfare {
        u: Vec<Value>,
        u_tilde: Vec<Value>,
        #[serde(default)]
        panels: Option<usize>,
        #[serde(default)]
        k: Option<usize>,
        #[serde(default)]
        target_gain: Option<Value>,
        #[serde(default)]
        witness_point: Option<Vec<Value>>,
        #[serde(default)]
        extremely_attractive: bool,
        #[serde(default)]
        envelope_step: Option<Value>,
        #[serde(default)]
        plot: Option<bool>,
    },
    Diagnostics {
        #[serde(default)]
        plot: Option<bool>,
    },
}

impl Analysis {
    pub fn kind(&self) -> &'static str {
        match self {
            Analysis::Equivalence { .. } => "equivalence",
            Analysis::Identify { .. } => "identify",
            Analysis::Discontinuity { .. } => "discontinuity",
            Analysis::Counterfactual { .. } => "counterfactual",
            Analysis::Attention { .. } => "attention",
            Analysis::Welfare { .. } => "welfare",
            Analysis::Diagnostics { .. } => "diagnostics",
        }
    }

    fn plot_flag(&self) -> Option<bool> {
        match self {
            Analysis::Equivalence { plot, .. }
            | Analysis::Identify { plot, .. }
            | Analysis::Discontinuity { plot, .. }
            | Analysis::Counterfactual { plot, .. }
            | Analysis::Attention { plot, .. }
            | Analysis::Welfare { plot, .. }
            | Analysis::Diagnostics { plot } => *plot,
        }
    }

    pub fn supports_plot(&self) -> bool {
        matches!(
            self,
            Analysis::Discontinuity { .. }
                | Analysis::Attention { .. }
                | Analysis::Welfare { .. }
                | Analysis::Diagnostics { .. }
        )
    }

    /// Plot data is on by default wherever it is supported.
    pub fn wants_plot(&self) -> bool {
        self.plot_flag().unwrap_or(self.supports_plot())
    }
}

pub(crate) fn number<T: Scalar>(v: &Value, what: &str) -> Result<T> {
    let r = match v {
        Value::Number(n) => T::parse(&n.to_string()),
        Value::String(s) => T::parse(s),
        other => return Err(CliError::Parse(format!("{what}: expected a number, got {other}"))),
    };
    r.map_err(|e| CliError::Parse(format!("{what}: {e}")))
}

pub(crate) fn point<T: Scalar>(vals: &[Value], what: &str) -> Result<UtilityPoint<T>> {
    let xs = vals.iter().map(|v| number(v, what)).collect::<Result<Vec<T>>>()?;
    UtilityPoint::new(xs).map_err(|e| CliError::Validation(format!("{what}: {e}")))
}

/// Where the model or field comes from, resolved and typed.
#[derive(Debug, Clone)]
pub enum Source<T: Scalar> {
    Model(Model<T>),
    Field(ChoiceProbField<T>),
}

#[derive(Debug, Clone)]
pub struct Loaded<T: Scalar> {
    pub source: Source<T>,
    pub grid: UtilityGrid<T>,
}

impl<T: Scalar> Loaded<T> {
    pub fn model(&self) -> Option<&Model<T>> {
        match &self.source {
            Source::Model(m) => Some(m),
            Source::Field(_) => None,
        }
    }

    pub fn num_alternatives(&self) -> usize {
        self.grid.num_alternatives()
    }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        if s.schema_version != SCENARIO_SCHEMA_VERSION {
            return Err(CliError::Parse(format!("unsupported scenario schema_version {}", s.schema_version)));
        }
        Ok(s)
    }

    /// Checks that do not need the model: source and grid shape, nonempty
    /// analyses, plot requests.
    pub fn check_structure(&self) -> Result<()> {
        if self.analyses.is_empty() {
            return Err(CliError::Validation("analyses list is empty".into()));
        }
        let sources = [self.model.is_some(), self.model_file.is_some(), self.field.is_some()];
        if sources.iter().filter(|&&b| b).count() != 1 {
            return Err(CliError::Validation("give exactly one of model, model_file or field".into()));
        }
        if self.field.is_some() && self.grid.is_some() {
            return Err(CliError::Validation("a field carries its own grid; omit grid".into()));
        }
        if self.field.is_none() && self.grid.is_none() {
            return Err(CliError::Validation("grid is required with a model".into()));
        }
        for (i, a) in self.analyses.iter().enumerate() {
            if a.plot_flag() == Some(true) && !a.supports_plot() {
                return Err(CliError::Validation(format!(
                    "analysis {i} ({}): unsupported analysis for plot data",
                    a.kind()
                )));
            }
        }
        Ok(())
    }

    /// Model file text referenced by `model_file`, resolved against `base`.
    pub fn model_file_text(&self, base: &Path) -> Result<Option<(PathBuf, String)>> {
        match &self.model_file {
            None => Ok(None),
            Some(rel) => {
                let path = base.join(rel);
                let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
                Ok(Some((path, text)))
            }
        }
    }

    pub fn load<T: Scalar>(&self, model_text: Option<&str>) -> Result<Loaded<T>> {
        self.check_structure()?;
        if let Some(f) = &self.field {
            if f.points.len() != f.probs.len() {
                return Err(CliError::Validation("field points and probs differ in length".into()));
            }
            let points = f.points.iter().map(|p| point(p, "field point")).collect::<Result<Vec<_>>>()?;
            let grid = UtilityGrid::new(points)?;
            let probs = f
                .probs
                .iter()
                .map(|p| {
                    let xs = p.iter().map(|v| number(v, "field probability")).collect::<Result<Vec<T>>>()?;
                    Ok(SimplexVector::new(xs)?)
                })
                .collect::<Result<Vec<_>>>()?;
            let field = ChoiceProbField::new(grid.clone(), probs)?;
            return Ok(Loaded { source: Source::Field(field), grid });
        }
        let file = match (&self.model, model_text) {
            (Some(m), _) => m.clone(),
            (None, Some(text)) => ModelFile::from_json(text)?,
            (None, None) => return Err(CliError::Validation("model_file was not read".into())),
        };
        let model: Model<T> = file.to_model()?;
        let grid = self.grid.as_ref().expect("checked above").build::<T>()?;
        if grid.num_alternatives() != file.k {
            return Err(CliError::Validation(format!(
                "grid has {} coordinates but the model has K = {}",
                grid.num_alternatives(),
                file.k
            )));
        }
        Ok(Loaded { source: Source::Model(model), grid })
    }
}

impl GridSpec {
    pub fn build<T: Scalar>(&self) -> Result<UtilityGrid<T>> {
        match (&self.points, &self.axes) {
            (Some(points), None) => {
                let pts = points.iter().map(|p| point(p, "grid point")).collect::<Result<Vec<_>>>()?;
                Ok(UtilityGrid::new(pts)?)
            }
            (None, Some(axes)) => {
                let values = axes.iter().map(|a| parse_axis::<T>(a)).collect::<arum_core::Result<Vec<_>>>()?;
                Ok(UtilityGrid::rectangular(&values)?)
            }
            _ => Err(CliError::Validation("grid needs exactly one of points or axes".into())),
        }
    }
}

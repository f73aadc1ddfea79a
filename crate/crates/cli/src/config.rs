//! Experiment configuration: JSON with unknown keys rejected, dotted
//! `--set` overrides and field-path diagnostics.

use std::path::PathBuf;

use frac_orlicz::domain::{make_test_function, TestKind};
use frac_orlicz::fracspace::{Coverage, FracParams};
use frac_orlicz::solver::SolverConfig;
use frac_orlicz::{Domain, GridFunction, NFunctionSpec, QuadratureRule};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub seed: u64,
    pub nfunction: NFunctionConfig,
    pub domain: DomainConfig,
    pub s: f64,
    pub quadrature: QuadratureRule,
    pub coverage: Coverage,
    /// The function for `norm`, `apply` and the single-function checks.
    pub function: FunctionConfig,
    /// Right-hand side for `solve`.
    pub rhs: FunctionConfig,
    pub solver: SolverConfig,
    pub nfun: NfunConfig,
    pub reduce_p: ReducePConfig,
    pub verify: VerifyConfig,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: 0,
            nfunction: NFunctionConfig::default(),
            domain: DomainConfig::default(),
            s: 0.3,
            quadrature: QuadratureRule::default(),
            coverage: Coverage::Interior,
            function: FunctionConfig::default(),
            rhs: FunctionConfig { kind: FunctionKind::Constant, value: 1.0, ..FunctionConfig::default() },
            solver: SolverConfig::default(),
            nfun: NfunConfig::default(),
            reduce_p: ReducePConfig::default(),
            verify: VerifyConfig::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyName {
    Power,
    PowerLog,
    ExpQuad,
    Tabulated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NFunctionConfig {
    pub family: FamilyName,
    /// Exponent for `power` and `power_log`.
    pub p: f64,
    /// Two-column `t,m(t)` CSV for `tabulated`.
    pub table: Option<PathBuf>,
    pub scale: f64,
    pub cap: Option<f64>,
}

impl Default for NFunctionConfig {
    fn default() -> Self {
        NFunctionConfig { family: FamilyName::Power, p: 2.0, table: None, scale: 1.0, cap: None }
    }
}

impl NFunctionConfig {
    pub fn build(&self) -> Result<NFunctionSpec, CliError> {
        let base = match self.family {
            FamilyName::Power => NFunctionSpec::power(self.p)?,
            FamilyName::PowerLog => NFunctionSpec::power_log(self.p)?,
            FamilyName::ExpQuad => NFunctionSpec::exp_quad(),
            FamilyName::Tabulated => {
                let path = self
                    .table
                    .as_ref()
                    .ok_or_else(|| CliError::Validation("nfunction.table: required for the tabulated family".into()))?;
                NFunctionSpec::from_csv_path(path)?
            }
        };
        let spec = base.with_scale(self.scale)?;
        Ok(match self.cap {
            Some(c) => spec.with_cap(c)?,
            None => spec,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DomainConfig {
    /// One entry per axis (1 or 2 axes).
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub nodes: Vec<usize>,
    /// Exterior band width; defaults to the diameter.
    pub halo: Option<f64>,
}

impl Default for DomainConfig {
    fn default() -> Self {
        DomainConfig { lower: vec![0.0], upper: vec![1.0], nodes: vec![64], halo: None }
    }
}

impl DomainConfig {
    pub fn build(&self) -> Result<Domain, CliError> {
        let dims = [self.lower.len(), self.upper.len(), self.nodes.len()];
        let dom = match dims {
            [1, 1, 1] => Domain::interval(self.lower[0], self.upper[0], self.nodes[0])?,
            [2, 2, 2] => Domain::rectangle(
                [self.lower[0], self.upper[0]],
                [self.lower[1], self.upper[1]],
                [self.nodes[0], self.nodes[1]],
            )?,
            _ => {
                return Err(CliError::Validation(format!(
                    "domain: lower, upper and nodes need 1 or 2 entries each, got {dims:?}"
                )))
            }
        };
        Ok(match self.halo {
            Some(h) => dom.with_halo(h)?,
            None => dom,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionKind {
    Bump,
    Hat,
    Linear,
    Random,
    Constant,
    Zero,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FunctionConfig {
    pub kind: FunctionKind,
    /// Generator seed; the top-level seed when absent.
    pub seed: Option<u64>,
    /// Multiplier applied after generation.
    pub scale: f64,
    /// Value of a `constant` function.
    pub value: f64,
}

impl Default for FunctionConfig {
    fn default() -> Self {
        FunctionConfig { kind: FunctionKind::Bump, seed: None, scale: 1.0, value: 1.0 }
    }
}

impl FunctionConfig {
    pub fn build(&self, dom: &Domain, seed: u64) -> GridFunction {
        let seed = self.seed.unwrap_or(seed);
        let u = match self.kind {
            FunctionKind::Bump => make_test_function(TestKind::Bump, dom, seed),
            FunctionKind::Hat => make_test_function(TestKind::Hat, dom, seed),
            FunctionKind::Linear => make_test_function(TestKind::Linear, dom, seed),
            FunctionKind::Random => make_test_function(TestKind::Random, dom, seed),
            FunctionKind::Constant => GridFunction::constant(*dom, self.value),
            FunctionKind::Zero => GridFunction::zeros(*dom),
        };
        if self.scale == 1.0 {
            u
        } else {
            u.scale(self.scale)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NfunConfig {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
    /// Dimension N for the Sobolev conjugate.
    pub dim: usize,
    /// Upper end of the sampled Δ2 range.
    pub delta2_upper: f64,
}

impl Default for NfunConfig {
    fn default() -> Self {
        NfunConfig { t_min: 1e-3, t_max: 10.0, points: 61, dim: 1, delta2_upper: 10.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReducePConfig {
    pub p_values: Vec<f64>,
    pub s_values: Vec<f64>,
    /// Largest accepted relative discrepancy.
    pub tolerance: f64,
}

impl Default for ReducePConfig {
    fn default() -> Self {
        ReducePConfig { p_values: vec![1.5, 2.0, 3.0], s_values: vec![0.3, 0.5], tolerance: 1e-2 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Poincare,
    Embedding,
    NormEquivalence,
    Ws1,
    Lipschitz,
    Mollifier,
    Compactness,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub suites: Vec<Suite>,
    /// Number of seeded bumps in family sweeps.
    pub family_size: usize,
    pub eps_ladder: Vec<f64>,
    /// Truncation level as a fraction of max |u|.
    pub cutoff_fraction: f64,
    /// Target space L_B of the compactness check.
    pub target: NFunctionConfig,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            suites: vec![
                Suite::Poincare,
                Suite::Embedding,
                Suite::NormEquivalence,
                Suite::Ws1,
                Suite::Lipschitz,
                Suite::Mollifier,
                Suite::Compactness,
            ],
            family_size: 20,
            eps_ladder: vec![0.2, 0.1, 0.05, 0.025],
            cutoff_fraction: 0.5,
            target: NFunctionConfig { p: 1.5, ..NFunctionConfig::default() },
        }
    }
}

impl Config {
    pub fn params(&self) -> Result<FracParams, CliError> {
        Ok(FracParams::new(self.s, self.nfunction.build()?)?
            .with_rule(self.quadrature)?
            .with_coverage(self.coverage))
    }

    /// Parse JSON text, apply `key=value` overrides and deserialize.
    pub fn load(text: Option<&str>, overrides: &[String]) -> Result<Config, CliError> {
        let mut value = match text {
            Some(t) => serde_json::from_str::<Value>(t).map_err(|e| CliError::Validation(format!("config: {e}")))?,
            None => Value::Object(Default::default()),
        };
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        serde_path_to_error::deserialize(value).map_err(|e| CliError::Validation(format!("{}: {}", e.path(), e.inner())))
    }
}

/// Set a dotted path such as `nfunction.p=3` or `domain.nodes=[128]`.
/// The value is read as JSON, falling back to a plain string.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<(), CliError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Validation(format!("--set expects key=value, got `{assignment}`")))?;
    let parsed = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        if part.is_empty() {
            return Err(CliError::Validation(format!("--set: empty segment in `{key}`")));
        }
        let Value::Object(map) = node else {
            return Err(CliError::Validation(format!("--set: `{}` is not an object", parts[..i].join("."))));
        };
        if i + 1 == parts.len() {
            map.insert(part.to_string(), parsed);
            return Ok(());
        }
        node = map.entry(part.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    Ok(())
}

//! Experiment configuration as read from JSON.

use std::fmt;
use std::path::Path;

use latlab_core::extrapolation::{
    multiplication_generator, neumann_laplacian_1d, periodic_laplacian_1d, GeneratorMatrix,
};
use latlab_core::sobolev_grid::GridDomain;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{LabError, LabResult};

pub const MIN_TOL: f64 = 1e-12;
pub const MAX_TOL: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Experiment {
    SupConstruct,
    SupConstructDual,
    NormalityScan,
    MollifierRate,
    BoundaryChartAudit,
    PushinAudit,
    Prop35Demo,
    ExtrapolationDemo,
    RenormAudit,
}

impl Experiment {
    pub const ALL: [Experiment; 9] = [
        Experiment::SupConstruct,
        Experiment::SupConstructDual,
        Experiment::NormalityScan,
        Experiment::MollifierRate,
        Experiment::BoundaryChartAudit,
        Experiment::PushinAudit,
        Experiment::Prop35Demo,
        Experiment::ExtrapolationDemo,
        Experiment::RenormAudit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::SupConstruct => "sup-construct",
            Experiment::SupConstructDual => "sup-construct-dual",
            Experiment::NormalityScan => "normality-scan",
            Experiment::MollifierRate => "mollifier-rate",
            Experiment::BoundaryChartAudit => "boundary-chart-audit",
            Experiment::PushinAudit => "pushin-audit",
            Experiment::Prop35Demo => "prop35-demo",
            Experiment::ExtrapolationDemo => "extrapolation-demo",
            Experiment::RenormAudit => "renorm-audit",
        }
    }

    pub fn parse(s: &str) -> Option<Experiment> {
        Experiment::ALL.into_iter().find(|e| e.name() == s)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKindConfig {
    Interval,
    Torus,
    Square,
}

/// Unit interval, unit torus or unit square with `n` points per axis. `h`
/// is optional and only checked against the value implied by `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub kind: DomainKindConfig,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
}

impl Default for DomainConfig {
    fn default() -> Self {
        DomainConfig { kind: DomainKindConfig::Interval, n: 65, h: None }
    }
}

impl DomainConfig {
    pub fn build(&self) -> LabResult<GridDomain> {
        let d = match self.kind {
            DomainKindConfig::Interval => GridDomain::unit_interval(self.n),
            DomainKindConfig::Torus => GridDomain::unit_torus(self.n),
            DomainKindConfig::Square => GridDomain::unit_square(self.n),
        }
        .map_err(|e| LabError::usage("domain.n", e.to_string()))?;
        if let Some(h) = self.h {
            if (h - d.h()).abs() > 1e-12 * d.h() {
                return Err(LabError::usage("domain.h", format!("h = {h} does not match n = {} (h = {})", self.n, d.h())));
            }
        }
        Ok(d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeFamily {
    Mollifier,
    Resolvent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    #[serde(default = "default_family")]
    pub family: SchemeFamily,
    /// Largest index of the mollifier scheme; the resolvent scheme picks its own range.
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_family() -> SchemeFamily {
    SchemeFamily::Mollifier
}

fn default_n_max() -> usize {
    1 << 20
}

fn default_tol() -> f64 {
    1e-8
}

impl Default for SchemeConfig {
    fn default() -> Self {
        SchemeConfig { family: default_family(), n_max: default_n_max(), tol: default_tol() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    NeumannLaplacian,
    PeriodicLaplacian,
    Multiplication,
}

/// Generator file format: `{"n", "h", "kind", "m", "lambda"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    pub kind: GeneratorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

impl GeneratorConfig {
    pub fn from_json(text: &str) -> LabResult<Self> {
        serde_json::from_str(text).map_err(|e| LabError::usage("generator", e.to_string()))
    }

    pub fn build(&self) -> LabResult<GeneratorMatrix> {
        let laplacian = |f: fn(usize, f64) -> latlab_core::Result<GeneratorMatrix>| {
            let n = self.n.ok_or_else(|| LabError::usage("generator.n", "required for a Laplacian"))?;
            let h = self.h.unwrap_or(1.0 / (n - 1).max(1) as f64);
            f(n, h).map_err(|e| LabError::usage("generator", e.to_string()))
        };
        match self.kind {
            GeneratorKind::NeumannLaplacian => laplacian(neumann_laplacian_1d),
            GeneratorKind::PeriodicLaplacian => laplacian(periodic_laplacian_1d),
            GeneratorKind::Multiplication => {
                let m = self.m.as_ref().ok_or_else(|| LabError::usage("generator.m", "required for a multiplication generator"))?;
                if let Some(n) = self.n {
                    if n != m.len() {
                        return Err(LabError::usage("generator.n", format!("n = {n} but m has {} entries", m.len())));
                    }
                }
                multiplication_generator(m).map_err(|e| LabError::usage("generator.m", e.to_string()))
            }
        }
    }
}

/// One run of one experiment. Unset fields take per-experiment defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    #[serde(default)]
    pub domain: DomainConfig,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default)]
    pub scheme: SchemeConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Experiment-specific list: scales for `normality-scan` and
    /// `mollifier-rate`, indices for `pushin-audit`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub params: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorConfig>,
    /// Grid function CSV used instead of generated test functions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

fn default_k() -> usize {
    1
}

fn default_p() -> f64 {
    2.0
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        ExperimentConfig {
            experiment: experiment.name().to_string(),
            domain: DomainConfig::default(),
            k: default_k(),
            p: default_p(),
            scheme: SchemeConfig::default(),
            seed: 0,
            samples: None,
            params: Vec::new(),
            generator: None,
            input: None,
            output: None,
        }
    }

    pub fn from_json(text: &str) -> LabResult<Self> {
        serde_json::from_str(text).map_err(|e| LabError::usage("config", e.to_string()))
    }

    pub fn load(path: &Path) -> LabResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| LabError::Io { path: path.to_path_buf(), source })?;
        Self::from_json(&text)
    }

    /// Field-level checks that do not depend on the experiment.
    pub fn validate(&self) -> LabResult<Experiment> {
        if self.experiment.is_empty() {
            return Err(LabError::usage("experiment", "no experiment given"));
        }
        let exp = Experiment::parse(&self.experiment).ok_or_else(|| {
            let names: Vec<&str> = Experiment::ALL.iter().map(|e| e.name()).collect();
            LabError::usage("experiment", format!("unknown experiment `{}` (expected one of {})", self.experiment, names.join(", ")))
        })?;
        let tol = self.scheme.tol;
        if !(MIN_TOL..=MAX_TOL).contains(&tol) {
            return Err(LabError::usage("scheme.tol", format!("{tol:e} is outside [{MIN_TOL:e}, {MAX_TOL:e}]")));
        }
        if !(self.p.is_finite() && self.p >= 1.0) {
            return Err(LabError::usage("p", format!("exponent {} must be finite and at least 1", self.p)));
        }
        if self.samples == Some(0) {
            return Err(LabError::usage("samples", "must be positive"));
        }
        if self.params.iter().any(|v| !v.is_finite()) {
            return Err(LabError::usage("params", "entries must be finite"));
        }
        self.domain.build()?;
        Ok(exp)
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn run_id(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(canonical.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_in() {
        let c = ExperimentConfig::from_json(r#"{"experiment": "prop35-demo"}"#).unwrap();
        assert_eq!(c.validate().unwrap(), Experiment::Prop35Demo);
        assert_eq!(c.domain.n, 65);
        assert_eq!(c.scheme.tol, 1e-8);
    }

    #[test]
    fn field_diagnostics() {
        let field = |json: &str| match ExperimentConfig::from_json(json).and_then(|c| c.validate()) {
            Err(LabError::Usage { field, .. }) => field,
            other => panic!("{other:?}"),
        };
        assert_eq!(field(r#"{"experiment": ""}"#), "experiment");
        assert_eq!(field(r#"{"experiment": "nope"}"#), "experiment");
        assert_eq!(field(r#"{"experiment": "sup-construct", "scheme": {"tol": 0.1}}"#), "scheme.tol");
        assert_eq!(field(r#"{"experiment": "sup-construct", "scheme": {"tol": 1e-13}}"#), "scheme.tol");
        assert_eq!(field(r#"{"experiment": "sup-construct", "domain": {"kind": "torus", "n": 8, "h": 0.1}}"#), "domain.h");
        assert_eq!(field(r#"{"experiment": "sup-construct", "bogus": 1}"#), "config");
    }

    #[test]
    fn tolerance_bounds_are_inclusive() {
        for tol in [MIN_TOL, MAX_TOL] {
            let mut c = ExperimentConfig::new(Experiment::SupConstruct);
            c.scheme.tol = tol;
            assert!(c.validate().is_ok());
        }
    }

    #[test]
    fn run_id_tracks_content() {
        let a = ExperimentConfig::new(Experiment::RenormAudit);
        let mut b = a.clone();
        assert_eq!(a.run_id(), b.run_id());
        b.seed = 1;
        assert_ne!(a.run_id(), b.run_id());
        assert_eq!(a.run_id().len(), 64);
    }

    #[test]
    fn generator_json() {
        let g = GeneratorConfig::from_json(r#"{"n": 3, "h": 1.0, "kind": "neumann_laplacian"}"#).unwrap();
        assert_eq!(g.build().unwrap().dim(), 3);
        let m = GeneratorConfig::from_json(r#"{"kind": "multiplication", "m": [0, 1, 3], "lambda": 1}"#).unwrap();
        assert_eq!(m.build().unwrap().dim(), 3);
        assert_eq!(m.lambda, Some(1.0));
        let bad = GeneratorConfig::from_json(r#"{"kind": "multiplication", "n": 2, "m": [0, 1, 3]}"#).unwrap();
        assert!(bad.build().is_err());
        assert!(GeneratorConfig::from_json(r#"{"kind": "neumann_laplacian"}"#).unwrap().build().is_err());
    }
}

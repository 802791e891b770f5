use std::path::Path;

use qfocus_core::congruence::{CongruenceBackground, DEFAULT_BLOWUP_THRESHOLD, DEFAULT_ZERO_TOL};
use qfocus_core::qstat::Conventions;
use qfocus_core::{CouplingWindow, McSettings, ProperTimeGrid, RenormConstants, TestFunction};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// One JSON document describing a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: ProperTimeGrid,
    #[serde(default)]
    pub background: BackgroundSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classical: Option<ClassicalSettings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smearing: Option<TestFunction>,
    #[serde(default = "adiabatic")]
    pub coupling: CouplingWindow,
    #[serde(default)]
    pub renorm: RenormConstants,
    #[serde(default)]
    pub conventions: Conventions,
    #[serde(default = "unit")]
    pub phi0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc: Option<McSettings>,
    #[serde(default)]
    pub diagnostics: DiagnosticsSettings,
}

fn adiabatic() -> CouplingWindow {
    CouplingWindow::Adiabatic
}

fn unit() -> f64 {
    1.0
}

/// `"flat"` or `{"samples": {...}}` with one value per grid point.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackgroundSpec {
    #[default]
    Flat,
    Samples(CongruenceBackground),
}

impl BackgroundSpec {
    pub fn resolve(&self, grid: &ProperTimeGrid) -> CongruenceBackground {
        match self {
            BackgroundSpec::Flat => CongruenceBackground::flat(grid),
            BackgroundSpec::Samples(bg) => bg.clone(),
        }
    }

    pub fn is_flat(&self) -> bool {
        matches!(self, BackgroundSpec::Flat)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalSettings {
    pub theta0: f64,
    #[serde(default = "blowup")]
    pub blowup_threshold: f64,
    #[serde(default = "zero_tol")]
    pub zero_tol: f64,
}

fn blowup() -> f64 {
    DEFAULT_BLOWUP_THRESHOLD
}

fn zero_tol() -> f64 {
    DEFAULT_ZERO_TOL
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticsSettings {
    /// Replaces the background-derived potential by a constant.
    pub constant_potential: Option<f64>,
    pub refinement_levels: usize,
    /// Points of the coarsest refinement grid.
    pub coarse_points: usize,
}

impl Default for DiagnosticsSettings {
    fn default() -> Self {
        Self {
            constant_potential: None,
            refinement_levels: 4,
            coarse_points: 201,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let field = if path == "." {
                "config".to_string()
            } else {
                path
            };
            CliError::Config {
                field,
                message: e.into_inner().to_string(),
            }
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config {
            field: "--config".into(),
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::from_json(&text)
    }

    pub fn require_classical(&self) -> Result<ClassicalSettings, CliError> {
        self.classical
            .ok_or_else(|| CliError::missing("classical", "needs {\"theta0\": ...}"))
    }

    pub fn require_smearing(&self) -> Result<&TestFunction, CliError> {
        self.smearing
            .as_ref()
            .ok_or_else(|| CliError::missing("smearing", "needs a test function"))
    }

    pub fn require_mc(&self) -> Result<McSettings, CliError> {
        self.mc
            .ok_or_else(|| CliError::missing("mc", "needs {\"tau\": ..., \"n_trials\": ...}"))
    }
}

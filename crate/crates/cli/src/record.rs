use chrono::{DateTime, Utc};
use qfocus_core::green::RefinementStudy;
use qfocus_core::qstat::MeanBreakdown;
use qfocus_core::{CollapseReport, GaussianModel};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunKind {
    Classical,
    Moments,
    Mc,
    Diagnostics,
}

impl RunKind {
    pub fn name(self) -> &'static str {
        match self {
            RunKind::Classical => "classical",
            RunKind::Moments => "moments",
            RunKind::Mc => "mc",
            RunKind::Diagnostics => "diagnostics",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub tool: String,
    pub version: String,
    pub timestamp: DateTime<Utc>,
    pub command: RunKind,
    pub config: RunConfig,
    pub results: Results,
}

impl RunRecord {
    pub fn new(command: RunKind, config: RunConfig, results: Results) -> Self {
        Self {
            tool: "qfocus".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            timestamp: Utc::now(),
            command,
            config,
            results,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Results {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classical: Option<ClassicalSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moments: Option<MomentsSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc: Option<CollapseReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<DiagnosticsSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalSummary {
    pub theta0: f64,
    pub diverged: bool,
    pub divergence_time: Option<f64>,
    /// First zero of the linearized `φ` with `3 φ̇/φ = θ0` at the start.
    pub phi_collapse_time: Option<f64>,
    pub samples: usize,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentsSummary {
    pub mean: MeanBreakdown,
    /// `(φ0²/π²)(1/7!) ∫_0^∞ p³ |f^|² dp`, evaluated as written.
    pub variance: f64,
    /// `2 φ0² N² / (7! τ⁴)` for Gaussian smearing, as quoted in closed form.
    pub variance_quoted: Option<f64>,
    /// `variance_quoted / variance`.
    pub variance_ratio: Option<f64>,
    /// Set when the two constants differ.
    pub variance_constant_mismatch: bool,
    pub gaussian_model: Option<GaussianModel>,
    pub collapse_probability: f64,
    /// `τ` with `mean / sigma = τ²`.
    pub tau_equivalent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsSummary {
    pub potential: String,
    pub green_residual: f64,
    pub residual_bound: f64,
    pub residual_within_bound: bool,
    pub antisymmetry_defect: f64,
    pub slope_defect: f64,
    /// Largest deviation from the closed-form bi-solution, for constant potentials.
    pub closed_form_error: Option<f64>,
    pub refinement: RefinementStudy,
    pub order_in_range: bool,
}

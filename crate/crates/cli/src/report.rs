//! JSON run report and the flat trace CSV.

use ccca::separation::IterationRecord;
use ccca::{AlphaUpdate, Contrast, SeparationConfig, StepRule};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentEcho>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<FileEcho>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truth: Option<FileEcho>,
    pub config: ConfigEcho,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<CoefficientsEcho>,
    /// Diagnostics of the observed mixture before separation.
    pub observations: MixtureEcho,
    pub runs: Vec<RunEcho>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentEcho {
    pub family: String,
    pub alpha: f64,
    pub samples: usize,
    pub mixing: Vec<Vec<f64>>,
    pub noise_std: f64,
    pub seed: u64,
    pub margins: String,
    pub method: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct FileEcho {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoefficientsEcho {
    pub path: String,
    pub sha256: String,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub alpha_min: f64,
    pub alpha_max: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub family: String,
    pub mu: f64,
    pub epsilon: f64,
    pub max_iter: usize,
    pub fd_step: f64,
    pub alpha_update: &'static str,
    pub step_rule: &'static str,
    pub contrast: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub contrast_grid: Option<usize>,
}

impl From<&SeparationConfig<f64>> for ConfigEcho {
    fn from(c: &SeparationConfig<f64>) -> Self {
        let (contrast, contrast_grid) = match c.contrast {
            Contrast::Smoothed { grid } => ("smoothed", Some(grid)),
            Contrast::Integrated { grid } => ("integrated", Some(grid)),
            Contrast::Plugin => ("plugin", None),
        };
        Self {
            family: c.family.to_string(),
            mu: c.mu,
            epsilon: c.epsilon,
            max_iter: c.max_iter,
            fd_step: c.fd_step,
            alpha_update: match c.alpha_update {
                AlphaUpdate::PerIteration => "per-iteration",
                AlphaUpdate::OnceFromObservations => "once-from-observations",
            },
            step_rule: match c.step_rule {
                StepRule::Adaptive => "adaptive",
                StepRule::Fixed => "fixed",
            },
            contrast,
            contrast_grid,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MixtureEcho {
    pub cos: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunEcho {
    pub method: String,
    pub status: String,
    pub iterations: usize,
    pub final_kl: f64,
    pub final_alpha: f64,
    pub final_cos: f64,
    pub demixing: Vec<Vec<f64>>,
    /// `W A` for synthetic runs, least-squares `Y ≈ G S` otherwise.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gain: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub isr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<Vec<f64>>,
    pub wall_time_s: f64,
    pub trace: Vec<TraceRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub kl: f64,
    pub cos: f64,
    pub alpha: f64,
    pub step_norm: f64,
    pub mu: f64,
    pub accepted: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<Vec<f64>>,
}

impl From<&IterationRecord<f64>> for TraceRow {
    fn from(r: &IterationRecord<f64>) -> Self {
        Self {
            iteration: r.iteration,
            kl: r.kl,
            cos: r.cos,
            alpha: r.alpha,
            step_norm: r.step_norm,
            mu: r.mu,
            accepted: r.accepted,
            snr_db: r.snr_db.clone(),
        }
    }
}

/// One line per iteration and method; SNR columns are empty without truth.
pub fn trace_csv(runs: &[RunEcho]) -> String {
    let mut out = String::from("method,iteration,kl,cos,alpha,step_norm,mu,accepted,snr_db_1,snr_db_2\n");
    for run in runs {
        for r in &run.trace {
            let snr = match &r.snr_db {
                Some(v) => v.iter().map(f64::to_string).collect::<Vec<_>>().join(","),
                None => ",".to_string(),
            };
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                run.method, r.iteration, r.kl, r.cos, r.alpha, r.step_norm, r.mu, r.accepted, snr
            ));
        }
    }
    out
}

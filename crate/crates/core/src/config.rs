//! Experiment configuration: the strict JSON document a run is driven by,
//! with one parameter block per command. Shared between the CLI and the C
//! interface so both front ends resolve identical runs.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hull::BoundaryCurve;
use crate::plateau::InitSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    JacobiCheck,
    EquidistantSpectrum,
    PhiTable,
    HullCheck,
    PlateauSolve,
    Uniqueness,
    HessianCheck,
    PinchingCheck,
}

impl CommandName {
    pub fn as_str(&self) -> &'static str {
        match self {
            CommandName::JacobiCheck => "jacobi-check",
            CommandName::EquidistantSpectrum => "equidistant-spectrum",
            CommandName::PhiTable => "phi-table",
            CommandName::HullCheck => "hull-check",
            CommandName::PlateauSolve => "plateau-solve",
            CommandName::Uniqueness => "uniqueness",
            CommandName::HessianCheck => "hessian-check",
            CommandName::PinchingCheck => "pinching-check",
        }
    }
}

impl fmt::Display for CommandName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Top-level run document. `params` is re-parsed strictly against the block
/// matching `command`, so unknown keys are rejected at either level.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: CommandName,
    #[serde(default)]
    pub params: serde_json::Value,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; `None` defers to AFP_THREADS, then to the runtime.
    #[serde(default)]
    pub threads: Option<usize>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("afp-out")
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("config: {e}")))
    }

    /// Strictly typed parameter block with defaults filled in.
    pub fn typed_params(&self) -> Result<Params> {
        fn block<T: serde::de::DeserializeOwned + Default>(v: &serde_json::Value) -> Result<T> {
            if v.is_null() {
                return Ok(T::default());
            }
            serde_json::from_value(v.clone()).map_err(|e| Error::Parse(format!("params: {e}")))
        }
        Ok(match self.command {
            CommandName::JacobiCheck => Params::Jacobi(block(&self.params)?),
            CommandName::EquidistantSpectrum => Params::Spectrum(block(&self.params)?),
            CommandName::PhiTable => Params::Phi(block(&self.params)?),
            CommandName::HullCheck => Params::Hull(block(&self.params)?),
            CommandName::PlateauSolve => Params::Plateau(block(&self.params)?),
            CommandName::Uniqueness => Params::Uniqueness(block(&self.params)?),
            CommandName::HessianCheck => Params::Hessian(block(&self.params)?),
            CommandName::PinchingCheck => Params::Pinching(block(&self.params)?),
        })
    }
}

/// Resolved parameter block, one variant per command.
#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Params {
    Jacobi(JacobiParams),
    Spectrum(SpectrumParams),
    Phi(PhiParams),
    Hull(HullParams),
    Plateau(PlateauParams),
    Uniqueness(UniquenessParams),
    Hessian(HessianParams),
    Pinching(PinchingParams),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JacobiParams {
    pub kappa: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Transfer horizon.
    #[serde(rename = "T")]
    pub horizon: f64,
}

impl Default for JacobiParams {
    fn default() -> Self {
        JacobiParams { kappa: 1.0, alpha: 1.0, beta: 0.0, horizon: 3.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumParams {
    pub lambda_max: f64,
    pub lambda_steps: usize,
    pub t_max: f64,
    pub t_steps: usize,
}

impl Default for SpectrumParams {
    fn default() -> Self {
        SpectrumParams { lambda_max: 0.95, lambda_steps: 50, t_max: 10.0, t_steps: 100 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhiParams {
    pub k: usize,
    pub sup_ii: f64,
    pub d_max: f64,
    pub steps: usize,
}

impl Default for PhiParams {
    fn default() -> Self {
        PhiParams { k: 2, sup_ii: 0.5, d_max: 0.6, steps: 60 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HullParams {
    pub boundary: BoundaryCurve,
    pub samples: usize,
    /// Seeded geodesic chords probed for convexity.
    pub probes: usize,
}

impl Default for HullParams {
    fn default() -> Self {
        HullParams { boundary: BoundaryCurve::Circle, samples: 256, probes: 64 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlateauParams {
    pub boundary: BoundaryCurve,
    /// Truncation radius.
    #[serde(rename = "R")]
    pub radius: f64,
    pub rings: usize,
    pub sectors: usize,
    pub tau_h: f64,
    pub max_iterations: usize,
    pub init: InitSpec,
    pub hull_samples: usize,
    pub hull_tol: f64,
}

impl Default for PlateauParams {
    fn default() -> Self {
        PlateauParams {
            boundary: BoundaryCurve::Circle,
            radius: 4.0,
            rings: 32,
            sectors: 64,
            tau_h: 1e-4,
            max_iterations: 20_000,
            init: InitSpec::Cone,
            hull_samples: 256,
            hull_tol: 2e-3,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UniquenessParams {
    pub boundary: BoundaryCurve,
    #[serde(rename = "R")]
    pub radius: f64,
    pub rings: usize,
    pub sectors: usize,
    pub tau_h: f64,
    pub max_iterations: usize,
    pub starts: usize,
}

impl Default for UniquenessParams {
    fn default() -> Self {
        UniquenessParams {
            boundary: BoundaryCurve::Wavy { m: 3, amp: 0.1 },
            radius: 4.0,
            rings: 32,
            sectors: 64,
            tau_h: 1e-4,
            max_iterations: 20_000,
            starts: 3,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HessianParams {
    pub kappa: f64,
    pub distances: Vec<f64>,
    /// Curvature window [-beta^2, -alpha^2] the comparison bracket is taken in.
    pub alpha: f64,
    pub beta: f64,
    pub tol: f64,
}

impl Default for HessianParams {
    fn default() -> Self {
        HessianParams {
            kappa: 4.0,
            distances: vec![0.5, 1.0, 2.0],
            alpha: 1.0,
            beta: 2.0,
            tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PinchingParams {
    pub boundary: BoundaryCurve,
    #[serde(rename = "R")]
    pub radius: f64,
    pub rings: usize,
    pub sectors: usize,
    pub tau_h: f64,
    pub max_iterations: usize,
    pub gauss_tol: f64,
}

impl Default for PinchingParams {
    fn default() -> Self {
        PinchingParams {
            boundary: BoundaryCurve::Wavy { m: 3, amp: 0.1 },
            radius: 4.0,
            rings: 32,
            sectors: 64,
            tau_h: 1e-4,
            max_iterations: 20_000,
            gauss_tol: 5e-3,
        }
    }
}

/// Flag spelling of an initial surface: `cone`, `geodesic-graph`, or
/// `perturbed:SEED:AMPLITUDE`.
pub fn parse_init_spec(s: &str) -> Result<InitSpec> {
    let t = s.trim();
    match t {
        "cone" => return Ok(InitSpec::Cone),
        "geodesic-graph" | "geodesic_graph" => return Ok(InitSpec::GeodesicGraph),
        _ => {}
    }
    if let Some(rest) = t.strip_prefix("perturbed:") {
        let mut it = rest.split(':');
        let seed = it
            .next()
            .and_then(|x| x.parse::<u64>().ok())
            .ok_or_else(|| Error::Parse(format!("init spec `{s}`: bad seed")))?;
        let amplitude = it
            .next()
            .and_then(|x| x.parse::<f64>().ok())
            .ok_or_else(|| Error::Parse(format!("init spec `{s}`: bad amplitude")))?;
        if it.next().is_some() {
            return Err(Error::Parse(format!("init spec `{s}`: trailing fields")));
        }
        return Ok(InitSpec::Perturbed { seed, amplitude });
    }
    Err(Error::Parse(format!(
        "init spec `{s}`: expected cone, geodesic-graph, or perturbed:SEED:AMP"
    )))
}

/// Thread count for the run: explicit config value, else AFP_THREADS, else 0
/// (let the runtime pick).
pub fn resolve_threads(configured: Option<usize>) -> Result<usize> {
    if let Some(n) = configured {
        return Ok(n);
    }
    match std::env::var("AFP_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::Parse(format!("AFP_THREADS `{v}` is not an integer"))),
        Err(_) => Ok(0),
    }
}

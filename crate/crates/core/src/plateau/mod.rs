//! Disc-type minimal-surface solver and its verification companions.
//!
//! The solver fills a curve at infinity with a polar grid truncated at
//! hyperbolic radius R and relaxes interior vertices along the mean-curvature
//! direction until sup |H| drops below the flow tolerance. The companion
//! submodules measure distances between converged surfaces, certify the
//! subharmonicity of squared distance, and aggregate multi-start runs.

mod distance;
mod experiment;
mod fast;
mod solve;
mod subharmonic;

pub use distance::{
    bounded_distance_check, directed_hausdorff, distance_to_patch, hausdorff, FootedDistance,
};
pub use experiment::{uniqueness_experiment, StartSummary, UniquenessReport, REGIME_FLAG};
pub use solve::solve;
pub use subharmonic::{
    c_estimate, interior_max_check, phi_inf, subharmonicity_check, SubharmonicityReport,
};

use std::f64::consts::TAU;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hull::BoundaryCurve;
use crate::space::{HyperboloidPoint, IdealPoint, ModelSpace, TangentVector};
use crate::surface::{ParametricPatch, PinchingReport};

/// Step-size policy and termination thresholds for the normal flow.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlowPolicy {
    /// Convergence threshold on sup |H|.
    pub tau_h: f64,
    pub max_iterations: usize,
}

impl Default for FlowPolicy {
    fn default() -> Self {
        FlowPolicy {
            tau_h: 1e-4,
            max_iterations: 20_000,
        }
    }
}

/// A truncated asymptotic Plateau problem: fill `boundary` at infinity with a
/// disc, represented on a polar grid pinned at hyperbolic radius `radius`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlateauProblem {
    space: ModelSpace,
    boundary: BoundaryCurve,
    radius: f64,
    rings: usize,
    sectors: usize,
    flow: FlowPolicy,
}

impl PlateauProblem {
    pub fn new(
        space: ModelSpace,
        boundary: BoundaryCurve,
        radius: f64,
        rings: usize,
        sectors: usize,
        flow: FlowPolicy,
    ) -> Result<Self> {
        if space.dimension() != 3 {
            return Err(Error::invalid(format!(
                "disc solver runs in ambient dimension 3, got {}",
                space.dimension()
            )));
        }
        if !(radius > 0.0 && radius <= 20.0) {
            return Err(Error::invalid(format!(
                "truncation radius {radius} must lie in (0, 20]"
            )));
        }
        if rings < 4 || sectors < 8 {
            return Err(Error::invalid(format!(
                "grid {rings}x{sectors} too coarse; need at least 4 rings and 8 sectors"
            )));
        }
        if sectors % 2 != 0 {
            return Err(Error::invalid(
                "sector count must be even so every spoke has a diametral partner",
            ));
        }
        if !(flow.tau_h > 0.0) || flow.max_iterations == 0 {
            return Err(Error::invalid("flow policy needs tau_h > 0 and iterations > 0"));
        }
        Ok(PlateauProblem {
            space,
            boundary,
            radius,
            rings,
            sectors,
            flow,
        })
    }

    pub fn space(&self) -> ModelSpace {
        self.space
    }

    pub fn boundary(&self) -> &BoundaryCurve {
        &self.boundary
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn rings(&self) -> usize {
        self.rings
    }

    pub fn sectors(&self) -> usize {
        self.sectors
    }

    pub fn flow(&self) -> &FlowPolicy {
        &self.flow
    }

    /// Unit tangents at the origin toward the sampled ideal boundary.
    fn spoke_directions(&self) -> Result<Vec<TangentVector>> {
        (0..self.sectors)
            .map(|j| {
                let theta = j as f64 / self.sectors as f64 * TAU;
                let ideal = IdealPoint::new(self.boundary.at(theta))?;
                self.space.direction_to_ideal(&ideal)
            })
            .collect()
    }

    /// Assembles the polar grid for a given initial surface. Row 0 holds the
    /// (replicated) center vertex, row `rings` the pinned boundary ring.
    pub fn initial_patch(&self, init: &InitSpec) -> Result<ParametricPatch> {
        let spokes = self.spoke_directions()?;
        let origin = self.space.origin();
        let n_rows = self.rings + 1;
        let mut points = Vec::with_capacity(n_rows * self.sectors);
        let mut mask = Vec::with_capacity(n_rows * self.sectors);
        let radial = |dir: &TangentVector, r: f64| -> Result<HyperboloidPoint> {
            if r == 0.0 {
                Ok(origin.clone())
            } else {
                self.space.geodesic(&origin, dir, r)
            }
        };
        let flat_spokes: Option<Vec<TangentVector>> = match init {
            InitSpec::GeodesicGraph => {
                let mut flat = Vec::with_capacity(self.sectors);
                for j in 0..self.sectors {
                    let theta = j as f64 / self.sectors as f64 * TAU;
                    let u = self.boundary.at(theta);
                    let mut w = DVector::from_column_slice(&[u[0], u[1], 0.0]);
                    let n = w.norm();
                    if n < 1e-9 {
                        return Err(Error::invalid(
                            "boundary direction is vertical; no graph over the equator",
                        ));
                    }
                    w /= n;
                    flat.push(self.space.direction_to_ideal(&IdealPoint::new(w)?)?);
                }
                Some(flat)
            }
            _ => None,
        };
        for i in 0..n_rows {
            let r = self.radius * i as f64 / self.rings as f64;
            for j in 0..self.sectors {
                let pinned = i == self.rings;
                let dir = match (&flat_spokes, pinned) {
                    (Some(flat), false) => &flat[j],
                    _ => &spokes[j],
                };
                points.push(radial(dir, r)?);
                mask.push(pinned);
            }
        }
        let patch = ParametricPatch::new(
            self.space,
            vec![n_rows, self.sectors],
            vec![self.radius / self.rings as f64, TAU / self.sectors as f64],
            vec![false, true],
            points,
            mask,
        )?;
        match init {
            InitSpec::Perturbed { seed, amplitude } => {
                perturb_patch(patch, self.rings, self.sectors, *seed, *amplitude)
            }
            _ => Ok(patch),
        }
    }
}

/// Initial surface fed to the flow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitSpec {
    /// Radial geodesics from the origin to the boundary ring.
    Cone,
    /// Equatorial geodesic disc under the boundary ring.
    GeodesicGraph,
    /// Cone displaced by a seeded smooth low-mode vertical field supported
    /// on the inner 60% of the radius; `amplitude` is the maximum geodesic
    /// displacement. The outer annulus keeps its cone position: angular
    /// spacing grows like sinh(r), and kicking the under-resolved outer
    /// rings parks them on stray near-equilibria instead of testing the
    /// flow's contraction.
    Perturbed { seed: u64, amplitude: f64 },
}

/// Smooth random displacement: a few angular modes under a radial sine bump
/// supported on f = r/R in [0, 0.6), scaled so the largest vertex moves
/// exactly `amplitude`.
fn perturb_patch(
    mut patch: ParametricPatch,
    rings: usize,
    sectors: usize,
    seed: u64,
    amplitude: f64,
) -> Result<ParametricPatch> {
    if !(amplitude.is_finite() && amplitude >= 0.0) {
        return Err(Error::invalid(format!("bad perturbation amplitude {amplitude}")));
    }
    if amplitude == 0.0 {
        return Ok(patch);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes: Vec<(f64, f64)> = (0..4)
        .map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    const SUPPORT: f64 = 0.6;
    let field = |i: usize, j: usize| -> f64 {
        let f = i as f64 / rings as f64;
        if f >= SUPPORT {
            return 0.0;
        }
        let theta = j as f64 / sectors as f64 * TAU;
        let bump = (std::f64::consts::PI * f / SUPPORT).sin();
        let angular: f64 = modes
            .iter()
            .enumerate()
            .map(|(m, (a, b))| a * (m as f64 * theta).cos() + b * (m as f64 * theta).sin())
            .sum();
        bump * angular
    };
    let mut peak: f64 = 0.0;
    for i in 1..rings {
        for j in 0..sectors {
            peak = peak.max(field(i, j).abs());
        }
    }
    if peak == 0.0 {
        return Ok(patch);
    }
    let space = patch.space();
    let mut e3 = DVector::zeros(space.ambient_len());
    e3[3] = 1.0;
    for i in 1..rings {
        for j in 0..sectors {
            let flat = patch.flatten(&[i, j]);
            let x = patch.point(flat).clone();
            let mut v = space.project_to_tangent(&x, &e3);
            let n = crate::space::mink_inner(&v, &v)?.max(0.0).sqrt();
            if n < 1e-12 {
                continue;
            }
            v *= amplitude * field(i, j) / (peak * n);
            let moved = space.exp_map(&TangentVector::new(x, v))?;
            patch.set_point(flat, moved);
        }
    }
    Ok(patch)
}

/// Why the flow stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowOutcome {
    Converged,
    MaxIterations,
    Stagnated,
}

/// One accepted step of the flow.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub iteration: usize,
    pub residual: f64,
    pub max_displacement: f64,
    pub area: f64,
}

/// Terminal state of one flow run. The boundary ring of `patch` is identical
/// to the problem's pinned ring; `residual` is sup |H| over the free vertices.
#[derive(Debug, Clone, Serialize)]
pub struct FlowState {
    pub patch: ParametricPatch,
    pub residual: f64,
    pub iteration: usize,
    pub history: Vec<HistoryEntry>,
    pub outcome: FlowOutcome,
    pub area: f64,
    pub init: InitSpec,
    /// sup |II| over interior vertices; attached on convergence.
    pub sup_second_form: Option<f64>,
    /// Curvature-pinching verdict; attached on convergence.
    pub pinching: Option<PinchingReport>,
    pub diagnostics: Option<String>,
}

impl FlowState {
    pub fn is_converged(&self) -> bool {
        self.outcome == FlowOutcome::Converged
    }
}

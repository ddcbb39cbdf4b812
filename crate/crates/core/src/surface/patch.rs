//! Structured-grid representation of an immersed k-submanifold.
//!
//! A patch stores one hyperboloid point per grid vertex together with per-axis
//! parameter steps, per-axis periodicity, and a Dirichlet mask of vertices
//! that are held fixed and never report curvature. All curvature quantities
//! are defined only at interior vertices, where full central-difference
//! stencils exist; one-sided stencils are deliberately unsupported.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::space::{apply_lorentz, HyperboloidPoint, ModelSpace};

/// Minimum eigenvalue of the first fundamental form for the patch to count
/// as immersed at a vertex.
pub const IMMERSION_EIG_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParametricPatch {
    space: ModelSpace,
    grid_shape: Vec<usize>,
    spacing: Vec<f64>,
    periodic: Vec<bool>,
    points: Vec<HyperboloidPoint>,
    boundary_mask: Vec<bool>,
}

impl ParametricPatch {
    pub fn new(
        space: ModelSpace,
        grid_shape: Vec<usize>,
        spacing: Vec<f64>,
        periodic: Vec<bool>,
        points: Vec<HyperboloidPoint>,
        boundary_mask: Vec<bool>,
    ) -> Result<Self> {
        let k = grid_shape.len();
        if k < 1 || k >= space.dimension() {
            return Err(Error::invalid(format!(
                "submanifold dimension {k} must lie in 1..{}",
                space.dimension()
            )));
        }
        if spacing.len() != k || periodic.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: spacing.len().min(periodic.len()),
            });
        }
        if spacing.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
            return Err(Error::invalid("grid spacing must be positive and finite"));
        }
        let total: usize = grid_shape.iter().product();
        if total == 0 {
            return Err(Error::invalid("empty grid"));
        }
        if points.len() != total || boundary_mask.len() != total {
            return Err(Error::DimensionMismatch {
                expected: total,
                got: points.len(),
            });
        }
        for p in &points {
            if p.ambient_len() != space.ambient_len() {
                return Err(Error::DimensionMismatch {
                    expected: space.ambient_len(),
                    got: p.ambient_len(),
                });
            }
        }
        Ok(ParametricPatch {
            space,
            grid_shape,
            spacing,
            periodic,
            points,
            boundary_mask,
        })
    }

    pub fn space(&self) -> ModelSpace {
        self.space
    }

    /// Submanifold dimension k.
    pub fn k(&self) -> usize {
        self.grid_shape.len()
    }

    pub fn grid_shape(&self) -> &[usize] {
        &self.grid_shape
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn periodic(&self) -> &[bool] {
        &self.periodic
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, flat: usize) -> &HyperboloidPoint {
        &self.points[flat]
    }

    pub fn points(&self) -> &[HyperboloidPoint] {
        &self.points
    }

    pub(crate) fn set_point(&mut self, flat: usize, p: HyperboloidPoint) {
        self.points[flat] = p;
    }

    pub fn is_masked(&self, flat: usize) -> bool {
        self.boundary_mask[flat]
    }

    pub fn mask(&self) -> &[bool] {
        &self.boundary_mask
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.k());
        let mut flat = 0;
        for (a, &i) in idx.iter().enumerate() {
            debug_assert!(i < self.grid_shape[a]);
            flat = flat * self.grid_shape[a] + i;
        }
        flat
    }

    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.k()];
        for a in (0..self.k()).rev() {
            idx[a] = flat % self.grid_shape[a];
            flat /= self.grid_shape[a];
        }
        idx
    }

    /// Grid neighbor `step` cells along `axis`, respecting periodic axes.
    pub fn neighbor(&self, flat: usize, axis: usize, step: isize) -> Option<usize> {
        let mut idx = self.unflatten(flat);
        let n = self.grid_shape[axis] as isize;
        let mut c = idx[axis] as isize + step;
        if self.periodic[axis] {
            c = c.rem_euclid(n);
        } else if c < 0 || c >= n {
            return None;
        }
        idx[axis] = c as usize;
        Some(self.flatten(&idx))
    }

    /// Neighbor offset by one step in each of two distinct axes.
    pub fn neighbor2(&self, flat: usize, a: usize, sa: isize, b: usize, sb: isize) -> Option<usize> {
        self.neighbor(flat, a, sa)
            .and_then(|m| self.neighbor(m, b, sb))
    }

    /// Interior = unmasked with a full one-ring central stencil.
    pub fn is_interior(&self, flat: usize) -> bool {
        if self.boundary_mask[flat] {
            return false;
        }
        (0..self.k()).all(|a| {
            self.neighbor(flat, a, 1).is_some() && self.neighbor(flat, a, -1).is_some()
        })
    }

    /// Interior with stencils out to +/- depth in every axis.
    pub fn has_stencil_depth(&self, flat: usize, depth: isize) -> bool {
        if self.boundary_mask[flat] {
            return false;
        }
        (0..self.k()).all(|a| {
            self.neighbor(flat, a, depth).is_some() && self.neighbor(flat, a, -depth).is_some()
        })
    }

    pub fn interior_vertices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.is_interior(i)).collect()
    }

    /// Grid-graph hop count from each vertex to the nearest masked vertex
    /// (used to carve collars off sup/inf distance statistics). Unreachable
    /// vertices get usize::MAX.
    pub fn mask_hop_distance(&self) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.len()];
        let mut queue = VecDeque::new();
        for i in 0..self.len() {
            if self.boundary_mask[i] {
                dist[i] = 0;
                queue.push_back(i);
            }
        }
        while let Some(i) = queue.pop_front() {
            for a in 0..self.k() {
                for s in [-1, 1] {
                    if let Some(j) = self.neighbor(i, a, s) {
                        if dist[j] == usize::MAX {
                            dist[j] = dist[i] + 1;
                            queue.push_back(j);
                        }
                    }
                }
            }
        }
        dist
    }

    /// Applies an ambient Lorentz isometry to every vertex.
    pub fn apply_isometry(&self, m: &DMatrix<f64>) -> Result<ParametricPatch> {
        let mut out = self.clone();
        for p in &mut out.points {
            *p = apply_lorentz(&self.space, m, p)?;
        }
        Ok(out)
    }

    /// Verifies the hyperboloid constraint on every vertex.
    pub fn check_points(&self) -> Result<()> {
        for (i, p) in self.points.iter().enumerate() {
            if self.space.check_point(p).is_err() {
                return Err(Error::MeshDegenerate(format!(
                    "vertex {i} violates the hyperboloid constraint by {:.3e}",
                    self.space.constraint_residual(p)
                )));
            }
        }
        Ok(())
    }
}

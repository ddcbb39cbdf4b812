//! Closest-point distance from a point to a discrete surface, and Hausdorff
//! distances between two surfaces built on it.
//!
//! The surface between grid vertices is filled in by bilinear geodesic
//! interpolation: across a face, both radial edges are subdivided at the
//! same fraction and the two subdivision points are joined by a geodesic.
//! Adjacent faces share their edge geodesics, so the interpolant is a
//! continuous map over the whole (u, v) grid rectangle. The squared distance
//! to that map is minimized by a coarse vertex scan followed by a damped
//! Newton search in the global face coordinates.

use nalgebra::DVector;
use rayon::prelude::*;

use super::fast::{as_v4, dist2, geo_lerp, V4};
use crate::error::{Error, Result};
use crate::normal_flow::convexity_radius;
use crate::report::{CheckItem, CheckReport};
use crate::space::HyperboloidPoint;
use crate::surface::{sup_second_form, ParametricPatch};

const NEWTON_STEP: f64 = 1e-5;
const NEWTON_ITERS: usize = 100;
const PARAM_TOL: f64 = 1e-10;
/// Feet this close to a truncation edge count as clipped.
const EDGE_BAND: f64 = 1e-6;
/// Fraction of the largest hop-to-boundary count carved off as a collar
/// when taking sup statistics over a pinned patch.
const COLLAR_FRACTION: f64 = 0.1;

/// Result of a closest-point search: the minimizing face, the global grid
/// parameters of the foot, and whether the minimum sits on a truncation
/// edge of the patch (in which case the true distance to the underlying
/// complete surface may be smaller).
#[derive(Debug, Clone)]
pub struct FootedDistance {
    pub distance: f64,
    pub foot_cell: [usize; 2],
    pub foot_param: [f64; 2],
    pub foot_point: HyperboloidPoint,
    pub clipped: bool,
}

struct FaceEval<'a> {
    kappa: f64,
    pts: &'a [HyperboloidPoint],
    n: [usize; 2],
    periodic: [bool; 2],
}

impl<'a> FaceEval<'a> {
    fn new(patch: &'a ParametricPatch) -> Result<Self> {
        if patch.k() != 2 || patch.space().dimension() != 3 {
            return Err(Error::invalid(
                "closest-point search expects a 2-parameter patch in 3-dimensional space",
            ));
        }
        let shape = patch.grid_shape();
        if shape[0] < 2 || shape[1] < 2 {
            return Err(Error::invalid("patch has no faces"));
        }
        Ok(FaceEval {
            kappa: patch.space().curvature_scale(),
            pts: patch.points(),
            n: [shape[0], shape[1]],
            periodic: [patch.periodic()[0], patch.periodic()[1]],
        })
    }

    /// Domain length of an axis in grid units.
    fn extent(&self, axis: usize) -> f64 {
        if self.periodic[axis] {
            self.n[axis] as f64
        } else {
            (self.n[axis] - 1) as f64
        }
    }

    /// Splits a global coordinate into (face index, local fraction).
    fn cell(&self, axis: usize, u: f64) -> (usize, f64) {
        let n = self.n[axis];
        if self.periodic[axis] {
            let w = u.rem_euclid(n as f64);
            let i = (w.floor() as usize).min(n - 1);
            (i, w - i as f64)
        } else {
            let c = u.clamp(0.0, (n - 1) as f64);
            let i = (c.floor() as usize).min(n - 2);
            (i, c - i as f64)
        }
    }

    #[inline]
    fn vertex(&self, i: usize, j: usize) -> &V4 {
        as_v4(self.pts[i * self.n[1] + j].coords().as_slice())
    }

    fn surface_point(&self, u: f64, v: f64) -> ([usize; 2], V4) {
        let (i, s) = self.cell(0, u);
        let (j, t) = self.cell(1, v);
        let ip = if self.periodic[0] { (i + 1) % self.n[0] } else { i + 1 };
        let jp = if self.periodic[1] { (j + 1) % self.n[1] } else { j + 1 };
        let q1 = geo_lerp(self.kappa, self.vertex(i, j), self.vertex(ip, j), s);
        let q2 = geo_lerp(self.kappa, self.vertex(i, jp), self.vertex(ip, jp), s);
        ([i, j], geo_lerp(self.kappa, &q1, &q2, t))
    }

    fn f(&self, x: &V4, u: f64, v: f64) -> f64 {
        dist2(self.kappa, x, &self.surface_point(u, v).1)
    }

    /// True when every vertex of the given edge row coincides (a cone point,
    /// e.g. the replicated center of a polar grid), so the edge is not a
    /// truncation boundary.
    fn edge_collapsed(&self, axis: usize, edge: usize) -> bool {
        let first = if axis == 0 {
            self.vertex(edge, 0)
        } else {
            self.vertex(0, edge)
        };
        let count = if axis == 0 { self.n[1] } else { self.n[0] };
        (0..count).all(|k| {
            let p = if axis == 0 {
                self.vertex(edge, k)
            } else {
                self.vertex(k, edge)
            };
            let d: f64 = (0..4).map(|c| (p[c] - first[c]).powi(2)).sum();
            d < 1e-24
        })
    }
}

/// Geodesic distance from `x` to the interpolated surface of `patch`.
pub fn distance_to_patch(x: &HyperboloidPoint, patch: &ParametricPatch) -> Result<FootedDistance> {
    let eval = FaceEval::new(patch)?;
    patch.space().check_point(x)?;
    let xv = as_v4(x.coords().as_slice());

    // Coarse pass: nearest grid vertex.
    let (best_flat, best_f) = (0..patch.len())
        .map(|flat| (flat, dist2(eval.kappa, xv, eval.vertex(flat / eval.n[1], flat % eval.n[1]))))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("patch is non-empty");
    let (bi, bj) = (best_flat / eval.n[1], best_flat % eval.n[1]);

    // Start the local search from the best of the surrounding face centers
    // (vertices are corners of up to four faces and sit on derivative kinks).
    let mut u = bi as f64;
    let mut v = bj as f64;
    let mut f0 = best_f;
    for du in [-0.5, 0.5] {
        for dv in [-0.5, 0.5] {
            let (cu, cv) = (bi as f64 + du, bj as f64 + dv);
            let fc = eval.f(xv, cu, cv);
            if fc < f0 {
                (u, v, f0) = (cu, cv, fc);
            }
        }
    }

    let h = NEWTON_STEP;
    for _ in 0..NEWTON_ITERS {
        let fpu = eval.f(xv, u + h, v);
        let fmu = eval.f(xv, u - h, v);
        let fpv = eval.f(xv, u, v + h);
        let fmv = eval.f(xv, u, v - h);
        let gu = (fpu - fmu) / (2.0 * h);
        let gv = (fpv - fmv) / (2.0 * h);
        let huu = (fpu - 2.0 * f0 + fmu) / (h * h);
        let hvv = (fpv - 2.0 * f0 + fmv) / (h * h);
        let fpp = eval.f(xv, u + h, v + h);
        let fmm = eval.f(xv, u - h, v - h);
        let fpm = eval.f(xv, u + h, v - h);
        let fmp = eval.f(xv, u - h, v + h);
        let huv = (fpp + fmm - fpm - fmp) / (4.0 * h * h);

        let det = huu * hvv - huv * huv;
        let (mut du, mut dv) = if det > 1e-30 && huu > 0.0 {
            (-(hvv * gu - huv * gv) / det, -(huu * gv - huv * gu) / det)
        } else {
            let g = gu.hypot(gv).max(1e-300);
            (-gu / g * 0.25, -gv / g * 0.25)
        };
        // Never jump more than one face per iteration.
        let norm = du.hypot(dv);
        if norm > 1.0 {
            du /= norm;
            dv /= norm;
        }
        let mut gamma = 1.0;
        let mut moved = 0.0;
        let mut accepted = false;
        while gamma > 1e-8 {
            let nu = clamp_axis(&eval, 0, u + gamma * du);
            let nv = clamp_axis(&eval, 1, v + gamma * dv);
            let fn_ = eval.f(xv, nu, nv);
            if fn_ < f0 {
                moved = (nu - u).hypot(nv - v);
                (u, v, f0) = (nu, nv, fn_);
                accepted = true;
                break;
            }
            gamma *= 0.5;
        }
        if !accepted || moved < PARAM_TOL {
            break;
        }
    }

    // A corner minimum can beat the face-center descent path.
    if best_f < f0 {
        (u, v, f0) = (bi as f64, bj as f64, best_f);
    }

    let u = clamp_axis(&eval, 0, u);
    let v = clamp_axis(&eval, 1, v);
    let (cellv, p) = eval.surface_point(u, v);
    let mut clipped = false;
    for (axis, w) in [(0usize, u), (1usize, v)] {
        if eval.periodic[axis] {
            continue;
        }
        let hi = eval.extent(axis);
        if w <= EDGE_BAND && !eval.edge_collapsed(axis, 0) {
            clipped = true;
        }
        if w >= hi - EDGE_BAND && !eval.edge_collapsed(axis, eval.n[axis] - 1) {
            clipped = true;
        }
    }
    Ok(FootedDistance {
        distance: f0.max(0.0).sqrt(),
        foot_cell: cellv,
        foot_param: [u, v],
        foot_point: HyperboloidPoint::from_coords(DVector::from_column_slice(&p)),
        clipped,
    })
}

fn clamp_axis(eval: &FaceEval, axis: usize, w: f64) -> f64 {
    if eval.periodic[axis] {
        w.rem_euclid(eval.n[axis] as f64)
    } else {
        w.clamp(0.0, eval.extent(axis))
    }
}

/// Interior vertices used for sup/inf distance statistics: pinned patches
/// lose a collar of COLLAR_FRACTION of the maximal hop count next to the
/// pinned ring, where the discrete surface is dominated by the Dirichlet
/// data rather than the flow.
pub(crate) fn core_vertices(patch: &ParametricPatch) -> Vec<usize> {
    let hops = patch.mask_hop_distance();
    let max_hop = hops.iter().filter(|&&h| h != usize::MAX).max().copied();
    let collar = match max_hop {
        Some(m) if m > 0 => (COLLAR_FRACTION * m as f64).ceil() as usize,
        _ => 0,
    };
    patch
        .interior_vertices()
        .into_iter()
        .filter(|&vtx| hops[vtx] == usize::MAX || hops[vtx] > collar)
        .collect()
}

/// sup over the core vertices of `from` of the distance to `to`.
pub fn directed_hausdorff(from: &ParametricPatch, to: &ParametricPatch) -> Result<f64> {
    let core = core_vertices(from);
    if core.is_empty() {
        return Err(Error::invalid("no core vertices for Hausdorff statistic"));
    }
    let sups: Vec<f64> = core
        .par_iter()
        .map(|&vtx| distance_to_patch(from.point(vtx), to).map(|fd| fd.distance))
        .collect::<Result<_>>()?;
    Ok(sups.into_iter().fold(0.0, f64::max))
}

/// Symmetric Hausdorff distance between the core regions of two patches.
pub fn hausdorff(a: &ParametricPatch, b: &ParametricPatch) -> Result<f64> {
    Ok(directed_hausdorff(a, b)?.max(directed_hausdorff(b, a)?))
}

/// Checks that every core vertex of `z` stays within the convexity radius
/// of the tube around `y`, the radius coming from sup |II| of `y`. Feet on
/// a truncation edge are a separate failure: they mean the distance to the
/// complete surface is not the computed one.
pub fn bounded_distance_check(
    z: &ParametricPatch,
    y: &ParametricPatch,
    tol: f64,
) -> Result<CheckReport> {
    let sup = sup_second_form(y)?.sup;
    let radii = convexity_radius(sup)?;
    let bound = radii.r_paper.max(radii.r_spectral);
    let core = core_vertices(z);
    if core.is_empty() {
        return Err(Error::invalid("no core vertices for distance bound"));
    }
    let feet: Vec<FootedDistance> = core
        .par_iter()
        .map(|&vtx| distance_to_patch(z.point(vtx), y))
        .collect::<Result<_>>()?;
    let max_d = feet.iter().map(|f| f.distance).fold(0.0, f64::max);
    let clipped = feet.iter().filter(|f| f.clipped).count();

    let mut report = CheckReport::new("bounded_distance");
    report.push(CheckItem::from_margin(
        "max_distance_within_convexity_radius",
        bound + tol - max_d,
        format!(
            "max distance {max_d:.6e} over {} core vertices against bound {bound:.6e} \
             (sup |II| = {sup:.6e})",
            feet.len()
        ),
    ));
    report.push(CheckItem::from_margin(
        "feet_unclipped",
        -(clipped as f64),
        format!("{clipped} of {} feet on a truncation edge", feet.len()),
    ));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{apply_lorentz, random_lorentz, ModelSpace, TangentVector};
    use crate::surface::{equidistant_patch, geodesic_plane_patch};
    use nalgebra::DVector;
    use rand::SeedableRng;

    fn lift(space: &ModelSpace, e: usize, t: f64) -> HyperboloidPoint {
        let mut w = DVector::zeros(4);
        w[e] = t;
        space
            .exp_map(&TangentVector::new(space.origin(), w))
            .unwrap()
    }

    #[test]
    fn vertex_of_the_patch_is_at_distance_zero() {
        let y = equidistant_patch(0.5, 17, 1.0).unwrap();
        let fd = distance_to_patch(y.point(y.flatten(&[8, 8])), &y).unwrap();
        assert!(fd.distance <= 1e-8, "distance {:.3e}", fd.distance);
        assert!(!fd.clipped);
    }

    #[test]
    fn normal_probe_recovers_its_height() {
        for kappa in [1.0, 2.0] {
            let y = geodesic_plane_patch(kappa, 33, 1.5).unwrap();
            let space = y.space();
            for t in [0.3, 1.0] {
                let x = lift(&space, 3, t);
                let fd = distance_to_patch(&x, &y).unwrap();
                assert!(
                    (fd.distance - t).abs() <= 1e-6,
                    "kappa {kappa} t {t}: got {:.8}",
                    fd.distance
                );
                assert!(!fd.clipped);
                let foot_err = (fd.foot_point.coords() - space.origin().coords()).norm();
                assert!(foot_err <= 1e-5, "foot off origin by {foot_err:.3e}");
            }
        }
    }

    #[test]
    fn distance_is_isometry_equivariant() {
        let y = equidistant_patch(0.4, 17, 1.2).unwrap();
        let space = y.space();
        let x = lift(&space, 1, 0.8);
        let d0 = distance_to_patch(&x, &y).unwrap().distance;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let g = random_lorentz(4, &mut rng);
        let y2 = y.apply_isometry(&g).unwrap();
        let x2 = apply_lorentz(&space, &g, &x).unwrap();
        let d1 = distance_to_patch(&x2, &y2).unwrap().distance;
        assert!((d0 - d1).abs() <= 1e-8, "d0 {d0:.10} d1 {d1:.10}");
    }

    #[test]
    fn equidistant_pair_realizes_its_offset() {
        let plane = geodesic_plane_patch(1.0, 33, 1.5).unwrap();
        let equi = equidistant_patch(0.5, 33, 1.5).unwrap();
        let d_to_plane = directed_hausdorff(&equi, &plane).unwrap();
        assert!((d_to_plane - 0.5).abs() <= 1e-6, "got {d_to_plane:.8}");
        let h = hausdorff(&plane, &equi).unwrap();
        assert!((h - 0.5).abs() <= 1e-3, "got {h:.6}");
    }

    #[test]
    fn probe_past_the_patch_edge_reports_clipping() {
        let y = geodesic_plane_patch(1.0, 17, 0.5).unwrap();
        let space = y.space();
        let base = lift(&space, 1, 1.2);
        let mut w = DVector::zeros(4);
        w[3] = 0.2;
        let v = space.project_to_tangent(&base, &w);
        let x = space.exp_map(&TangentVector::new(base, v)).unwrap();
        let fd = distance_to_patch(&x, &y).unwrap();
        assert!(fd.clipped, "foot param {:?}", fd.foot_param);
    }

    #[test]
    fn collapsed_center_row_is_not_a_truncation_edge() {
        use crate::hull::BoundaryCurve;
        use crate::plateau::{FlowPolicy, InitSpec, PlateauProblem};
        let problem = PlateauProblem::new(
            ModelSpace::hyperbolic(3),
            BoundaryCurve::Circle,
            4.0,
            8,
            16,
            FlowPolicy::default(),
        )
        .unwrap();
        let y = problem.initial_patch(&InitSpec::Cone).unwrap();
        let x = lift(&problem.space(), 3, 0.01);
        let fd = distance_to_patch(&x, &y).unwrap();
        assert!((fd.distance - 0.01).abs() <= 1e-6, "got {:.8}", fd.distance);
        assert!(!fd.clipped, "foot param {:?}", fd.foot_param);
    }

    #[test]
    fn separated_surface_fails_the_radius_bound() {
        let y = equidistant_patch(0.5, 25, 1.2).unwrap();
        let same = bounded_distance_check(&y, &y, 1e-9).unwrap();
        assert!(same.pass, "{same:?}");

        let radii = convexity_radius(0.5f64.tanh()).unwrap();
        let far = 0.5 + 2.0 * radii.r_paper.max(radii.r_spectral);
        let z = equidistant_patch(far, 25, 1.2).unwrap();
        let report = bounded_distance_check(&z, &y, 1e-9).unwrap();
        assert!(!report.pass);
        let item = report.item("max_distance_within_convexity_radius").unwrap();
        assert!(item.margin < 0.0);
    }
}

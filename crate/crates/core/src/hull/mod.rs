//! Convex hulls of ideal boundary sets in the Klein ball, where hyperbolic
//! convexity coincides with Euclidean convexity, plus the containment and
//! barrier checks built on them. Full-dimensional sets get a facet hull;
//! exactly flat sets (the round circle being the canonical one) keep an
//! explicit affine descriptor with a lower-dimensional hull inside it.

pub mod curve;
pub mod incremental;

use nalgebra::DVector;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::report::{CheckItem, CheckReport};
use crate::space::{IdealPoint, ModelSpace};
use crate::surface::patch::ParametricPatch;

pub use curve::BoundaryCurve;
pub use incremental::{affine_span, convex_hull, AffineSpan, Facet, EPS_CONTAIN};

/// Relative singular-value cut separating flat configurations from
/// full-dimensional ones.
pub const RANK_TOL: f64 = 1e-9;

/// Finitely sampled closed subset of the ideal boundary.
#[derive(Debug, Clone)]
pub struct IdealBoundarySet {
    pub samples: Vec<IdealPoint>,
}

impl IdealBoundarySet {
    pub fn new(samples: Vec<IdealPoint>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("empty ideal sample set"));
        }
        let d = samples[0].direction().len();
        if samples.iter().any(|s| s.direction().len() != d) {
            return Err(Error::BadDimension(d));
        }
        Ok(IdealBoundarySet { samples })
    }

    pub fn from_curve(curve: &BoundaryCurve, n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::invalid("need at least 3 curve samples"));
        }
        let samples = curve
            .sample(n)
            .into_iter()
            .map(IdealPoint::new)
            .collect::<Result<Vec<_>>>()?;
        IdealBoundarySet::new(samples)
    }

    /// Klein coordinates of the samples (unit sphere points).
    pub fn klein_samples(&self) -> Vec<DVector<f64>> {
        self.samples.iter().map(|s| s.direction().clone()).collect()
    }
}

/// Geometry of a hull: full-dimensional facet list, or a flat piece
/// described by its affine span with the hull taken inside the span.
#[derive(Debug, Clone)]
pub enum HullGeometry {
    Full { facets: Vec<Facet> },
    Degenerate {
        span: AffineSpan,
        /// Facets of the hull of the projected samples inside the span;
        /// empty when the span is a single point.
        inner: Vec<Facet>,
    },
}

/// Euclidean-convex hull of Klein-ball points, valid as the Klein image of
/// the hyperbolic convex hull.
#[derive(Debug, Clone)]
pub struct KleinHull {
    pub points: Vec<DVector<f64>>,
    pub geometry: HullGeometry,
    /// Indices of points appearing as facet vertices, sorted.
    pub vertices: Vec<usize>,
}

pub fn build_hull(set: &IdealBoundarySet) -> Result<KleinHull> {
    build_hull_of_points(set.klein_samples())
}

/// Hull of arbitrary closed-ball points (used for idempotence checks and
/// degenerate recursions as well as ideal sets).
pub fn build_hull_of_points(points: Vec<DVector<f64>>) -> Result<KleinHull> {
    if points.is_empty() {
        return Err(Error::invalid("no points to hull"));
    }
    let dim = points[0].len();
    let span = affine_span(&points, RANK_TOL)?;
    let geometry = if span.rank() == dim {
        HullGeometry::Full {
            facets: convex_hull(&points)?,
        }
    } else if span.rank() == 0 {
        HullGeometry::Degenerate {
            span,
            inner: Vec::new(),
        }
    } else {
        let projected: Vec<DVector<f64>> = points.iter().map(|p| span.project(p)).collect();
        HullGeometry::Degenerate {
            span,
            inner: convex_hull(&projected)?,
        }
    };
    let mut vertices: Vec<usize> = match &geometry {
        HullGeometry::Full { facets } => facets.iter().flat_map(|f| f.vertices.clone()).collect(),
        HullGeometry::Degenerate { inner, .. } => {
            inner.iter().flat_map(|f| f.vertices.clone()).collect()
        }
    };
    vertices.sort_unstable();
    vertices.dedup();
    Ok(KleinHull {
        points,
        geometry,
        vertices,
    })
}

impl KleinHull {
    pub fn facet_count(&self) -> usize {
        match &self.geometry {
            HullGeometry::Full { facets } => facets.len(),
            HullGeometry::Degenerate { inner, .. } => inner.len(),
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self.geometry, HullGeometry::Degenerate { .. })
    }

    /// Signed containment margin of a Klein-ball point. Full hulls report the
    /// worst facet excess (negative inside); flat hulls report the Euclidean
    /// distance to the flat convex piece (zero on it).
    pub fn margin_klein(&self, p: &DVector<f64>) -> f64 {
        match &self.geometry {
            HullGeometry::Full { facets } => facets
                .iter()
                .map(|f| f.margin(p))
                .fold(f64::NEG_INFINITY, f64::max),
            HullGeometry::Degenerate { span, inner } => {
                let off = span.off_distance(p);
                let lateral = if inner.is_empty() {
                    span.project(p).norm()
                } else {
                    inner
                        .iter()
                        .map(|f| f.margin(&span.project(p)))
                        .fold(f64::NEG_INFINITY, f64::max)
                        .max(0.0)
                };
                (off * off + lateral * lateral).sqrt()
            }
        }
    }

    /// Containment of a hyperboloid point after Klein projection.
    pub fn contains(
        &self,
        space: &ModelSpace,
        x: &crate::space::HyperboloidPoint,
        tol: f64,
    ) -> Result<(bool, f64)> {
        let p = space.to_klein(x)?;
        if p.len() != self.points[0].len() {
            return Err(Error::BadDimension(p.len()));
        }
        let margin = self.margin_klein(&p);
        Ok((margin <= tol, margin))
    }
}

/// Verifies that every interior vertex of a patch lies inside the hull of
/// its boundary data within `tol`.
pub fn barrier_check(hull: &KleinHull, patch: &ParametricPatch, tol: f64) -> Result<CheckReport> {
    let space = patch.space();
    let interior = patch.interior_vertices();
    if interior.is_empty() {
        return Err(Error::invalid("patch has no interior vertices"));
    }
    let margins: Result<Vec<(usize, f64)>> = interior
        .par_iter()
        .map(|&flat| {
            let p = space.to_klein(patch.point(flat))?;
            Ok((flat, hull.margin_klein(&p)))
        })
        .collect();
    let margins = margins?;
    let (worst_at, worst) = margins
        .iter()
        .cloned()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty");
    let violations = margins.iter().filter(|&&(_, m)| m > tol).count();
    let mut report = CheckReport::new("convex_hull_barrier");
    report.push(CheckItem::from_margin(
        "interior_inside_hull",
        tol - worst,
        format!(
            "worst margin {worst:.3e} at vertex {:?}; {violations} of {} outside",
            patch.unflatten(worst_at),
            margins.len()
        ),
    ));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{apply_lorentz_ideal, random_lorentz, HyperboloidPoint, TangentVector};
    use crate::surface::canned::geodesic_plane_patch;
    use nalgebra::DVector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ideal(v: &[f64]) -> IdealPoint {
        IdealPoint::new(DVector::from_column_slice(v)).unwrap()
    }

    #[test]
    fn tetrahedron_hull() {
        let s = 1.0 / 3.0f64.sqrt();
        let set = IdealBoundarySet::new(vec![
            ideal(&[s, s, s]),
            ideal(&[s, -s, -s]),
            ideal(&[-s, s, -s]),
            ideal(&[-s, -s, s]),
        ])
        .unwrap();
        let hull = build_hull(&set).unwrap();
        assert!(!hull.is_degenerate());
        assert_eq!(hull.facet_count(), 4);
        assert_eq!(hull.vertices, vec![0, 1, 2, 3]);
    }

    #[test]
    fn equatorial_circle_is_flat_disc() {
        let set = IdealBoundarySet::from_curve(&BoundaryCurve::Circle, 256).unwrap();
        let hull = build_hull(&set).unwrap();
        assert!(hull.is_degenerate());
        let space = ModelSpace::new(3, 1.0).unwrap();
        let origin = space.origin();
        let (inside, m) = hull.contains(&space, &origin, 1e-12).unwrap();
        assert!(inside);
        assert!(m.abs() < 1e-12, "origin margin {m}");
        let off = space
            .from_klein(&DVector::from_column_slice(&[0.0, 0.0, 0.5]))
            .unwrap();
        let (inside, m) = hull.contains(&space, &off, 1e-12).unwrap();
        assert!(!inside);
        assert!((m - 0.5).abs() < 1e-12, "off-plane margin {m}");
    }

    #[test]
    fn geodesic_plane_sits_inside_circle_hull() {
        let set = IdealBoundarySet::from_curve(&BoundaryCurve::Circle, 256).unwrap();
        let hull = build_hull(&set).unwrap();
        let space = ModelSpace::new(3, 1.0).unwrap();
        let o = space.origin();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        use rand::Rng;
        for _ in 0..10_000 {
            let r = rng.random_range(0.0..3.0);
            let th = rng.random_range(0.0..std::f64::consts::TAU);
            let mut v = DVector::zeros(4);
            v[1] = r * th.cos();
            v[2] = r * th.sin();
            let x = space.exp_map(&TangentVector::new(o.clone(), v)).unwrap();
            let (inside, m) = hull.contains(&space, &x, 1e-9).unwrap();
            assert!(inside, "margin {m} at r={r}");
        }
    }

    #[test]
    fn drum_hull_is_full_dimensional() {
        let n = 256;
        let z = 0.5f64;
        let r = (1.0 - z * z).sqrt();
        let mut samples = Vec::new();
        for i in 0..n {
            let th = i as f64 / n as f64 * std::f64::consts::TAU;
            samples.push(ideal(&[r * th.cos(), r * th.sin(), z]));
            samples.push(ideal(&[-r * th.cos(), -r * th.sin(), -z]));
        }
        let hull = build_hull(&IdealBoundarySet::new(samples).unwrap()).unwrap();
        assert!(!hull.is_degenerate());
        assert!(hull.facet_count() >= n);
        for p in &hull.points {
            assert!(hull.margin_klein(p).abs() <= 1e-9, "sample not on boundary");
        }
    }

    #[test]
    fn hull_idempotence_on_vertices() {
        let mut pts = Vec::new();
        for x in [-0.5, 0.5] {
            for y in [-0.5, 0.5] {
                for z in [-0.5, 0.5] {
                    pts.push(DVector::from_column_slice(&[x, y, z]));
                }
            }
        }
        let h1 = build_hull_of_points(pts.clone()).unwrap();
        let vpts: Vec<DVector<f64>> = h1.vertices.iter().map(|&i| h1.points[i].clone()).collect();
        let h2 = build_hull_of_points(vpts).unwrap();
        assert_eq!(h1.facet_count(), h2.facet_count());
        // Same supporting planes up to ordering.
        let mut planes1: Vec<(i64, i64, i64, i64)> = Vec::new();
        let key = |f: &Facet| {
            let s = if f.normal[0].abs() > 1e-12 {
                f.normal[0].signum()
            } else if f.normal[1].abs() > 1e-12 {
                f.normal[1].signum()
            } else {
                f.normal[2].signum()
            };
            (
                ((f.normal[0] * s) / 1e-6).round() as i64,
                ((f.normal[1] * s) / 1e-6).round() as i64,
                ((f.normal[2] * s) / 1e-6).round() as i64,
                ((f.offset * s) / 1e-6).round() as i64,
            )
        };
        let (HullGeometry::Full { facets: f1 }, HullGeometry::Full { facets: f2 }) =
            (&h1.geometry, &h2.geometry)
        else {
            panic!("expected full hulls");
        };
        for f in f1 {
            planes1.push(key(f));
        }
        planes1.sort_unstable();
        planes1.dedup();
        let mut planes2: Vec<_> = f2.iter().map(key).collect();
        planes2.sort_unstable();
        planes2.dedup();
        assert_eq!(planes1, planes2);
    }

    #[test]
    fn verdict_is_isometry_equivariant() {
        let set = IdealBoundarySet::from_curve(&BoundaryCurve::Wavy { m: 3, amp: 0.2 }, 128)
            .unwrap();
        let hull = build_hull(&set).unwrap();
        let space = ModelSpace::new(3, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let iso = random_lorentz(space.ambient_len(), &mut rng);
        let probes = [
            DVector::from_column_slice(&[0.0, 0.0, 0.0]),
            DVector::from_column_slice(&[0.3, 0.1, 0.0]),
            DVector::from_column_slice(&[0.0, 0.0, 0.6]),
            DVector::from_column_slice(&[0.8, 0.0, 0.15]),
        ];
        let moved_set = IdealBoundarySet::new(
            set.samples
                .iter()
                .map(|s| apply_lorentz_ideal(&iso, s).unwrap())
                .collect(),
        )
        .unwrap();
        let moved_hull = build_hull(&moved_set).unwrap();
        for p in &probes {
            let x = space.from_klein(p).unwrap();
            let moved_x = crate::space::apply_lorentz(&space, &iso, &x).unwrap();
            let (v1, _) = hull.contains(&space, &x, 1e-9).unwrap();
            let (v2, _) = moved_hull.contains(&space, &moved_x, 1e-9).unwrap();
            assert_eq!(v1, v2, "verdict changed under isometry at {p:?}");
        }
    }

    #[test]
    fn monotone_under_sample_growth() {
        let small = IdealBoundarySet::from_curve(&BoundaryCurve::Wavy { m: 3, amp: 0.15 }, 64)
            .unwrap();
        let mut samples = small.samples.clone();
        samples.push(ideal(&[0.0, 0.0, 1.0]));
        samples.push(ideal(&[0.0, 0.0, -1.0]));
        let big = IdealBoundarySet::new(samples).unwrap();
        let h_small = build_hull(&small).unwrap();
        let h_big = build_hull(&big).unwrap();
        let space = ModelSpace::new(3, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        use rand::Rng;
        for _ in 0..200 {
            let p = DVector::from_fn(3, |_, _| rng.random_range(-0.9..0.9));
            if p.norm() >= 0.95 {
                continue;
            }
            let x = space.from_klein(&p).unwrap();
            let (in_small, _) = h_small.contains(&space, &x, 1e-10).unwrap();
            if in_small {
                let (in_big, m) = h_big.contains(&space, &x, 1e-10).unwrap();
                assert!(in_big, "lost containment after adding samples: {m}");
            }
        }
    }

    #[test]
    fn barrier_detects_bulge() {
        let set = IdealBoundarySet::from_curve(&BoundaryCurve::Circle, 128).unwrap();
        let hull = build_hull(&set).unwrap();
        // The geodesic plane is the hull of its circle: barrier passes.
        let plane = geodesic_plane_patch(1.0, 17, 0.6).unwrap();
        let rep = barrier_check(&hull, &plane, 2e-3).unwrap();
        assert!(rep.pass, "{rep:?}");
        // Push one interior vertex off the plane: violation detected.
        let mut bulged = plane.clone();
        let space = bulged.space();
        let mid = bulged.flatten(&[8, 8]);
        let x = bulged.point(mid).clone();
        let mut v = DVector::zeros(4);
        v[3] = 0.3;
        let moved = space
            .exp_map(&TangentVector::new(x.clone(), space.project_to_tangent(&x, &v)))
            .unwrap();
        bulged.set_point(mid, moved);
        let rep = barrier_check(&hull, &bulged, 2e-3).unwrap();
        assert!(!rep.pass, "bulge went undetected: {rep:?}");
    }

    #[test]
    fn degenerate_point_and_segment_hulls() {
        let one = build_hull_of_points(vec![
            DVector::from_column_slice(&[0.2, 0.3, -0.1]),
            DVector::from_column_slice(&[0.2, 0.3, -0.1]),
        ])
        .unwrap();
        assert!(one.is_degenerate());
        assert!(one.margin_klein(&DVector::from_column_slice(&[0.2, 0.3, -0.1])) < 1e-12);
        assert!(
            (one.margin_klein(&DVector::from_column_slice(&[0.2, 0.3, 0.4])) - 0.5).abs() < 1e-12
        );
        let seg = build_hull_of_points(vec![
            DVector::from_column_slice(&[-0.5, 0.0, 0.0]),
            DVector::from_column_slice(&[0.5, 0.0, 0.0]),
            DVector::from_column_slice(&[0.0, 0.0, 0.0]),
        ])
        .unwrap();
        assert!(seg.is_degenerate());
        assert!(seg.margin_klein(&DVector::from_column_slice(&[0.25, 0.0, 0.0])) < 1e-12);
        let m = seg.margin_klein(&DVector::from_column_slice(&[0.8, 0.0, 0.0]));
        assert!((m - 0.3).abs() < 1e-12, "beyond-endpoint margin {m}");
    }

    #[test]
    fn rejects_undersized_input() {
        assert!(IdealBoundarySet::new(vec![]).is_err());
        let set = IdealBoundarySet::new(vec![ideal(&[1.0, 0.0, 0.0])]).unwrap();
        let hull = build_hull(&set).unwrap();
        assert!(hull.is_degenerate());
        assert_eq!(hull.facet_count(), 0);
        let p = HyperboloidPoint::from_coords(DVector::from_column_slice(&[1.0, 0.0, 0.0, 0.0]));
        let space = ModelSpace::new(3, 1.0).unwrap();
        let (inside, m) = hull.contains(&space, &p, 1e-9).unwrap();
        assert!(!inside);
        assert!((m - 1.0).abs() < 1e-12);
    }
}

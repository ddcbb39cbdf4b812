//! Closed-form test surfaces in H^3 (curvature -1) used to calibrate the
//! discrete curvature pipeline: a totally geodesic plane (II = 0), its
//! equidistant surfaces (II = tanh(t) g), and a horosphere (II = g).

use nalgebra::DVector;

use crate::error::Result;
use crate::space::{HyperboloidPoint, ModelSpace, TangentVector};
use crate::surface::patch::ParametricPatch;

fn square_grid<F>(n: usize, half_extent: f64, mut at: F) -> (Vec<HyperboloidPoint>, Vec<bool>, f64)
where
    F: FnMut(f64, f64) -> HyperboloidPoint,
{
    assert!(n >= 3, "need at least a 3x3 grid");
    let h = 2.0 * half_extent / (n - 1) as f64;
    let mut pts = Vec::with_capacity(n * n);
    let mut mask = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let u = -half_extent + i as f64 * h;
            let v = -half_extent + j as f64 * h;
            pts.push(at(u, v));
            mask.push(i == 0 || j == 0 || i == n - 1 || j == n - 1);
        }
    }
    (pts, mask, h)
}

/// Totally geodesic plane exp_o(u E1 + v E2) in curvature -kappa.
pub fn geodesic_plane_patch(kappa: f64, n: usize, half_extent: f64) -> Result<ParametricPatch> {
    let space = ModelSpace::new(3, kappa)?;
    let o = space.origin();
    let (pts, mask, h) = square_grid(n, half_extent, |u, v| {
        let mut w = DVector::zeros(4);
        w[1] = u;
        w[2] = v;
        space
            .exp_map(&TangentVector::new(o.clone(), w))
            .expect("extent within cap")
    });
    ParametricPatch::new(space, vec![n, n], vec![h, h], vec![false, false], pts, mask)
}

/// Surface at constant distance t from the z=0 geodesic plane (kappa = 1):
/// y = cosh(t) x + sinh(t) e3 over plane points x. Principal curvatures are
/// tanh(t); the parameter grid is the plane's own exponential chart.
pub fn equidistant_patch(t: f64, n: usize, half_extent: f64) -> Result<ParametricPatch> {
    let space = ModelSpace::hyperbolic(3);
    let o = space.origin();
    let (ct, st) = (t.cosh(), t.sinh());
    let (pts, mask, h) = square_grid(n, half_extent, |u, v| {
        let mut w = DVector::zeros(4);
        w[1] = u;
        w[2] = v;
        let x = space
            .exp_map(&TangentVector::new(o.clone(), w))
            .expect("extent within cap");
        let mut c = x.coords() * ct;
        c[3] += st;
        let mut p = HyperboloidPoint::from_coords(c);
        space.renormalize_point(&mut p).expect("on sheet");
        p
    });
    ParametricPatch::new(space, vec![n, n], vec![h, h], vec![false, false], pts, mask)
}

/// Horosphere through the origin with ideal point (1,0,0,1) (kappa = 1):
/// x(u,v) = o + u e1 + v e2 + ((u^2+v^2)/2) l with l null. Flat induced
/// metric, umbilic with principal curvatures 1.
pub fn horosphere_patch(n: usize, half_extent: f64) -> Result<ParametricPatch> {
    let space = ModelSpace::hyperbolic(3);
    let (pts, mask, h) = square_grid(n, half_extent, |u, v| {
        let w = (u * u + v * v) / 2.0;
        let c = DVector::from_vec(vec![1.0 + w, u, v, w]);
        let mut p = HyperboloidPoint::from_coords(c);
        space.renormalize_point(&mut p).expect("on sheet");
        p
    });
    ParametricPatch::new(space, vec![n, n], vec![h, h], vec![false, false], pts, mask)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canned_surfaces_satisfy_constraint() {
        for p in [
            geodesic_plane_patch(1.0, 9, 0.5).unwrap(),
            geodesic_plane_patch(2.0, 9, 0.5).unwrap(),
            equidistant_patch(0.7, 9, 0.5).unwrap(),
            horosphere_patch(9, 0.5).unwrap(),
        ] {
            p.check_points().unwrap();
        }
    }

    #[test]
    fn equidistant_lies_at_constant_distance_from_plane() {
        let t = 0.6;
        let plane = geodesic_plane_patch(1.0, 9, 0.5).unwrap();
        let eq = equidistant_patch(t, 9, 0.5).unwrap();
        let s = plane.space();
        // Each equidistant vertex sits distance t from its plane footpoint.
        for i in 0..plane.len() {
            let d = s.distance(plane.point(i), eq.point(i)).unwrap();
            assert!((d - t).abs() < 1e-12, "d = {d}");
        }
    }
}

//! Finite-difference probe of the Hessian of a distance function.
//!
//! For a fixed pole p the function f = d(., p) has, at a point x with
//! f = d(x, p) > 0, covariant Hessian zero in the radial direction and
//! sqrt(kappa) coth(sqrt(kappa) f) times the metric on the orthocomplement.
//! The probe recovers the Hessian numerically in normal coordinates and a
//! window check brackets the orthocomplement spectrum by the comparison
//! values a coth(a f) and b coth(b f).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::report::{CheckItem, CheckReport};
use crate::space::{HyperboloidPoint, ModelSpace, TangentVector};

/// Probe points closer to the pole than this are rejected: the FD stencil
/// would straddle a region where f is nearly singular.
pub const MIN_PROBE_SEPARATION: f64 = 0.05;

/// Default FD step for the Hessian stencil.
pub const DEFAULT_HESSIAN_STEP: f64 = 1e-3;

/// Numerical spectrum of the distance Hessian at one probe point.
#[derive(Debug, Clone)]
pub struct HessianProbe {
    /// Distance from probe to pole.
    pub distance: f64,
    /// Eigenvalue whose eigenvector is closest to the radial direction.
    pub radial_eigenvalue: f64,
    /// Remaining eigenvalues, ascending.
    pub orthogonal_eigenvalues: Vec<f64>,
    /// sqrt(kappa) coth(sqrt(kappa) f), the exact orthocomplement value.
    pub expected_orthogonal: f64,
}

/// Hessian of y -> d(y, p) at x in an orthonormal frame with the radial
/// direction first. Central differences at step h with one Richardson level.
pub fn distance_hessian_matrix(
    space: &ModelSpace,
    pole: &HyperboloidPoint,
    x: &HyperboloidPoint,
    step: f64,
) -> Result<(f64, DMatrix<f64>, Vec<DVector<f64>>)> {
    let f = space.distance(x, pole)?;
    if f < MIN_PROBE_SEPARATION {
        return Err(Error::ProbeTooClose(f, MIN_PROBE_SEPARATION));
    }
    let radial = space.log_map(x, pole)?;
    let frame = space.complete_tangent_frame(x, &[radial.vec / f])?;
    let n = frame.len();
    let eval = |coeffs: &[(usize, f64)]| -> Result<f64> {
        let mut w = DVector::zeros(space.ambient_len());
        for &(i, c) in coeffs {
            w += &frame[i] * c;
        }
        let y = space.exp_map(&TangentVector::new(x.clone(), w))?;
        space.distance(&y, pole)
    };
    let at_step = |h: f64| -> Result<DMatrix<f64>> {
        let f0 = eval(&[])?;
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            let fp = eval(&[(i, h)])?;
            let fm = eval(&[(i, -h)])?;
            m[(i, i)] = (fp + fm - 2.0 * f0) / (h * h);
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let pp = eval(&[(i, h), (j, h)])?;
                let mm = eval(&[(i, -h), (j, -h)])?;
                let pm = eval(&[(i, h), (j, -h)])?;
                let mp = eval(&[(i, -h), (j, h)])?;
                let v = (pp + mm - pm - mp) / (4.0 * h * h);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Ok(m)
    };
    let h1 = at_step(step)?;
    let h2 = at_step(2.0 * step)?;
    let refined = (h1 * 4.0 - h2) / 3.0;
    Ok((f, refined, frame))
}

/// Eigen-spectrum of the probe Hessian split into radial / orthocomplement parts.
pub fn distance_hessian_probe(
    space: &ModelSpace,
    pole: &HyperboloidPoint,
    x: &HyperboloidPoint,
    step: f64,
) -> Result<HessianProbe> {
    let (f, h, _frame) = distance_hessian_matrix(space, pole, x, step)?;
    let n = h.nrows();
    let eig = nalgebra::SymmetricEigen::new(h);
    // The frame has the radial direction first, so the radial eigenvector is
    // the one with the largest first component.
    let mut radial_idx = 0;
    let mut best = -1.0;
    for j in 0..n {
        let c = eig.eigenvectors[(0, j)].abs();
        if c > best {
            best = c;
            radial_idx = j;
        }
    }
    let mut ortho: Vec<f64> = (0..n)
        .filter(|&j| j != radial_idx)
        .map(|j| eig.eigenvalues[j])
        .collect();
    ortho.sort_by(|a, b| a.total_cmp(b));
    let rk = space.curvature_scale().sqrt();
    Ok(HessianProbe {
        distance: f,
        radial_eigenvalue: eig.eigenvalues[radial_idx],
        orthogonal_eigenvalues: ortho,
        expected_orthogonal: rk / (rk * f).tanh(),
    })
}

/// Checks that every orthocomplement eigenvalue of the distance Hessian at x
/// lies in [alpha coth(alpha f), beta coth(beta f)] up to `tol`, and that the
/// radial eigenvalue vanishes to the same tolerance.
pub fn hessian_window_check(
    space: &ModelSpace,
    pole: &HyperboloidPoint,
    x: &HyperboloidPoint,
    alpha: f64,
    beta: f64,
    tol: f64,
) -> Result<CheckReport> {
    if !(alpha > 0.0 && beta >= alpha) {
        return Err(Error::SlopeOutOfRange { alpha, beta });
    }
    let probe = distance_hessian_probe(space, pole, x, DEFAULT_HESSIAN_STEP)?;
    let f = probe.distance;
    let lo = alpha / (alpha * f).tanh();
    let hi = beta / (beta * f).tanh();
    let mut report = CheckReport::new("distance_hessian_window");
    report.push(CheckItem::from_margin(
        "radial_flat",
        tol - probe.radial_eigenvalue.abs(),
        format!("radial eigenvalue {:.3e}", probe.radial_eigenvalue),
    ));
    let mut low_margin = f64::INFINITY;
    let mut high_margin = f64::INFINITY;
    for &ev in &probe.orthogonal_eigenvalues {
        low_margin = low_margin.min(ev - (lo - tol));
        high_margin = high_margin.min((hi + tol) - ev);
    }
    report.push(CheckItem::from_margin(
        "spectrum_above_lower_slope",
        low_margin,
        format!("window low {lo:.6}, min eigenvalue {:.6}", probe.orthogonal_eigenvalues.first().copied().unwrap_or(f64::NAN)),
    ));
    report.push(CheckItem::from_margin(
        "spectrum_below_upper_slope",
        high_margin,
        format!("window high {hi:.6}, max eigenvalue {:.6}", probe.orthogonal_eigenvalues.last().copied().unwrap_or(f64::NAN)),
    ));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::DVector;

    fn probe_at(space: &ModelSpace, f: f64) -> HessianProbe {
        let o = space.origin();
        let mut e1 = DVector::zeros(space.ambient_len());
        e1[1] = 1.0;
        let v = TangentVector::new(o.clone(), space.project_to_tangent(&o, &e1));
        let x = space.geodesic(&o, &v, f).unwrap();
        distance_hessian_probe(space, &o, &x, DEFAULT_HESSIAN_STEP).unwrap()
    }

    #[test]
    fn unit_curvature_spectrum_is_coth() {
        let s = ModelSpace::hyperbolic(3);
        for f in [0.5, 1.0, 2.0] {
            let p = probe_at(&s, f);
            let want = 1.0 / f.tanh();
            assert!(p.radial_eigenvalue.abs() < 1e-6, "radial {:.3e}", p.radial_eigenvalue);
            for &ev in &p.orthogonal_eigenvalues {
                assert_relative_eq!(ev, want, max_relative = 1e-6);
            }
        }
        // coth(1) = 1.3130...
        let p = probe_at(&s, 1.0);
        assert!((p.orthogonal_eigenvalues[0] - 1.3130352854993315).abs() < 1e-6);
    }

    #[test]
    fn scaled_curvature_spectrum() {
        let s = ModelSpace::new(3, 4.0).unwrap();
        let p = probe_at(&s, 1.0);
        // 2 coth(2) = 2.0746294414550963...
        let want = 2.0 / 2f64.tanh();
        assert!((want - 2.074_629_441_455_096).abs() < 1e-12);
        for &ev in &p.orthogonal_eigenvalues {
            assert_relative_eq!(ev, want, max_relative = 1e-6);
        }
        assert_relative_eq!(p.expected_orthogonal, want, epsilon = 1e-12);
    }

    #[test]
    fn probe_rejects_near_pole() {
        let s = ModelSpace::hyperbolic(3);
        let o = s.origin();
        let mut e1 = DVector::zeros(4);
        e1[1] = 1.0;
        let v = TangentVector::new(o.clone(), s.project_to_tangent(&o, &e1));
        let x = s.geodesic(&o, &v, 0.01).unwrap();
        assert!(matches!(
            distance_hessian_probe(&s, &o, &x, DEFAULT_HESSIAN_STEP),
            Err(Error::ProbeTooClose(..))
        ));
    }

    #[test]
    fn window_check_brackets_spectrum() {
        let s = ModelSpace::new(3, 4.0).unwrap();
        let o = s.origin();
        let mut e1 = DVector::zeros(4);
        e1[1] = 1.0;
        let v = TangentVector::new(o.clone(), s.project_to_tangent(&o, &e1));
        let x = s.geodesic(&o, &v, 1.0).unwrap();
        let ok = hessian_window_check(&s, &o, &x, 1.0, 2.0, 1e-4).unwrap();
        assert!(ok.pass, "window (1,2) should bracket 2 coth(2): {ok:?}");
        let bad = hessian_window_check(&s, &o, &x, 1.5, 1.9, 1e-4).unwrap();
        assert!(!bad.pass, "window (1.5,1.9) excludes 2 coth(2)");
        assert!(matches!(
            hessian_window_check(&s, &o, &x, 2.0, 1.0, 1e-4),
            Err(Error::SlopeOutOfRange { .. })
        ));
    }
}

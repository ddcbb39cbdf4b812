//! Allocation-free kernels on the 4-dimensional ambient of H^3, shared by
//! the flow sweep and the closest-point search. All formulas go through the
//! chordal gap q = kappa <y-x, y-x>, so nearby points lose no precision.

pub(super) type V4 = [f64; 4];

#[inline]
pub(super) fn mink4(a: &V4, b: &V4) -> f64 {
    -a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

#[inline]
pub(super) fn axpy(y: &mut V4, a: f64, x: &V4) {
    for k in 0..4 {
        y[k] += a * x[k];
    }
}

/// Log map on the curvature -kappa hyperboloid; the result's Minkowski norm
/// is the geodesic distance.
#[inline]
pub(super) fn log4(kappa: f64, x: &V4, y: &V4) -> V4 {
    let d = [y[0] - x[0], y[1] - x[1], y[2] - x[2], y[3] - x[3]];
    let q = (kappa * mink4(&d, &d)).max(0.0);
    let s2 = q * (1.0 + 0.25 * q);
    let g = if s2 < 1e-12 {
        1.0 - s2 / 6.0
    } else {
        let s = s2.sqrt();
        s.asinh() / s
    };
    let mut out = d;
    axpy(&mut out, -0.5 * q, x);
    for k in 0..4 {
        out[k] *= g;
    }
    out
}

/// exp_x(w) for a tangent step w whose Minkowski norm is the arc length.
/// The result is rescaled onto the constraint surface.
#[inline]
pub(super) fn exp4(kappa: f64, x: &V4, w: &V4) -> V4 {
    let l2 = mink4(w, w).max(0.0);
    if l2 < 1e-32 {
        return *x;
    }
    let rk = kappa.sqrt();
    let l = l2.sqrt();
    let dt = rk * l;
    let (ch, sh) = (dt.cosh(), dt.sinh());
    let mut p = [0.0; 4];
    for k in 0..4 {
        p[k] = x[k] * ch + w[k] * (sh / (l * rk));
    }
    let s = -kappa * mink4(&p, &p);
    let c = 1.0 / s.sqrt();
    for v in &mut p {
        *v *= c;
    }
    p
}

/// Point at parameter s along the geodesic from a towards b (s = 1 lands
/// on b).
#[inline]
pub(super) fn geo_lerp(kappa: f64, a: &V4, b: &V4, s: f64) -> V4 {
    let l = log4(kappa, a, b);
    let mut w = [0.0; 4];
    axpy(&mut w, s, &l);
    exp4(kappa, a, &w)
}

/// Squared geodesic distance, exact to machine precision near zero.
#[inline]
pub(super) fn dist2(kappa: f64, x: &V4, y: &V4) -> f64 {
    let d = [y[0] - x[0], y[1] - x[1], y[2] - x[2], y[3] - x[3]];
    let q = (kappa * mink4(&d, &d)).max(0.0);
    let s = (q * (1.0 + 0.25 * q)).sqrt();
    let dt = s.asinh();
    dt * dt / kappa
}

/// Minkowski-orthogonal complement of span{a, b, c} in the 4-dimensional
/// ambient: <w, z> = det[a; b; c; z] for every z.
#[inline]
pub(super) fn mink_cross(a: &V4, b: &V4, c: &V4) -> V4 {
    let det3 = |c0: usize, c1: usize, c2: usize| -> f64 {
        a[c0] * (b[c1] * c[c2] - b[c2] * c[c1]) - a[c1] * (b[c0] * c[c2] - b[c2] * c[c0])
            + a[c2] * (b[c0] * c[c1] - b[c1] * c[c0])
    };
    [
        det3(1, 2, 3),
        det3(0, 2, 3),
        -det3(0, 1, 3),
        det3(0, 1, 2),
    ]
}

#[inline]
pub(super) fn as_v4(slice: &[f64]) -> &V4 {
    slice.try_into().expect("ambient length 4")
}

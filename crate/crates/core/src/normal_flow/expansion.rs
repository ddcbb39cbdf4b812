//! Lower bound of the normal exponential map against the comparison metric
//! h = dt^2  (+)  cosh^2(t) g_Y  (+)  sinh^2(t) g_sphere:
//! |D exp(w)|^2 >= delta^2 h(w,w) with delta = 1 - sup|II|, which makes the
//! inverse of exp a 1/delta-Lipschitz map. Derivatives of exp are measured by
//! central differences; the slack 2e-2 covers the differencing error.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::report::{CheckItem, CheckReport};
use crate::space::{mink_inner, HyperboloidPoint, ModelSpace, TangentVector};
use crate::surface::forms::{fundamental_forms, sup_second_form};
use crate::surface::patch::ParametricPatch;

/// One-sided slack absorbing finite-difference error in the ratio checks.
pub const EXPANSION_SLACK: f64 = 2e-2;

/// Step for differencing exp in the radial and sphere variables.
const PARAM_STEP: f64 = 1e-4;

fn normal_exp(
    space: &ModelSpace,
    x: &HyperboloidPoint,
    dir: &DVector<f64>,
    t: f64,
) -> Result<HyperboloidPoint> {
    let tv = TangentVector::new(x.clone(), dir.clone());
    let unit = TangentVector::new(x.clone(), &tv.vec / tv.norm());
    space.geodesic(x, &unit, t)
}

struct ClassMin {
    ratio: f64,
    detail: String,
}

impl ClassMin {
    fn new() -> Self {
        Self {
            ratio: f64::INFINITY,
            detail: String::new(),
        }
    }
    fn update(&mut self, ratio: f64, detail: impl FnOnce() -> String) {
        if ratio < self.ratio {
            self.ratio = ratio;
            self.detail = detail();
        }
    }
    fn into_item(self, name: &str) -> CheckItem {
        CheckItem::from_margin(name, self.ratio - (1.0 - EXPANSION_SLACK), self.detail)
    }
}

/// Compares |D exp(w)|^2 against delta^2 h(w,w) for radial, tangential and
/// normal-sphere directions w over sampled base vertices and times.
/// Tangential differencing needs an unambiguous normal line, so that class is
/// exercised in codimension one; codimension >= 2 exercises the sphere block.
/// `direction_samples` caps the number of base vertices visited.
pub fn exp_metric_lower_bound(
    patch: &ParametricPatch,
    t_samples: &[f64],
    direction_samples: usize,
) -> Result<CheckReport> {
    if t_samples.is_empty() || direction_samples == 0 {
        return Err(Error::invalid("empty sample plan"));
    }
    if t_samples.iter().any(|&t| !(0.0..=20.0).contains(&t)) {
        return Err(Error::invalid("time samples must lie in [0, 20]"));
    }
    let summary = sup_second_form(patch)?;
    if !(summary.sup < 1.0) {
        return Err(Error::EigenvalueOutOfRange(summary.sup));
    }
    let delta = 1.0 - summary.sup;
    let d2 = delta * delta;
    let space = patch.space();
    let codim = space.dimension() - patch.k();

    let interior: Vec<usize> = patch.interior_vertices();
    if interior.is_empty() {
        return Err(Error::invalid("patch has no interior vertices"));
    }
    let stride = (interior.len() / direction_samples).max(1);

    let mut radial = ClassMin::new();
    let mut tangential = ClassMin::new();
    let mut sphere = ClassMin::new();

    for &flat in interior.iter().step_by(stride) {
        let forms = fundamental_forms(patch, flat)?;
        let x = patch.point(flat);
        for (m, nu) in forms.normal_frame.iter().enumerate() {
            for &t in t_samples {
                // Radial: d/ds exp_x((t+s) nu), exact isometry of the flow.
                let s = PARAM_STEP;
                if t >= s {
                    let p_plus = normal_exp(&space, x, nu, t + s)?;
                    let p_minus = normal_exp(&space, x, nu, t - s)?;
                    let v = (p_plus.coords() - p_minus.coords()) / (2.0 * s);
                    let ratio = mink_inner(&v, &v)? / d2;
                    radial.update(ratio, || {
                        format!("radial at vertex {flat}, t = {t}, ratio {ratio:.6}")
                    });
                }
                // Sphere block: rotate nu towards a later frame vector.
                if t > 0.0 {
                    for mu in forms.normal_frame.iter().skip(m + 1) {
                        let dir_p = nu * s.cos() + mu * s.sin();
                        let dir_m = nu * s.cos() - mu * s.sin();
                        let p_plus = normal_exp(&space, x, &dir_p, t)?;
                        let p_minus = normal_exp(&space, x, &dir_m, t)?;
                        let v = (p_plus.coords() - p_minus.coords()) / (2.0 * s);
                        let ratio = mink_inner(&v, &v)? / (d2 * t.sinh() * t.sinh());
                        sphere.update(ratio, || {
                            format!("sphere at vertex {flat}, t = {t}, ratio {ratio:.6}")
                        });
                    }
                }
            }
        }
        if codim == 1 {
            let nu = &forms.normal_frame[0];
            for axis in 0..patch.k() {
                let (ip, im) = match (
                    patch.neighbor(flat, axis, 1),
                    patch.neighbor(flat, axis, -1),
                ) {
                    (Some(a), Some(b)) => (a, b),
                    _ => continue,
                };
                let h_a = patch.spacing()[axis];
                let e_aa = forms.first[(axis, axis)];
                let nu_p = fundamental_forms(patch, ip).map(|f| f.normal_frame[0].clone());
                let nu_m = fundamental_forms(patch, im).map(|f| f.normal_frame[0].clone());
                let (Ok(mut nu_p), Ok(mut nu_m)) = (nu_p, nu_m) else {
                    continue;
                };
                // Frames are sign-ambiguous per vertex; align to the center
                // and probe both normal rays (the contracting side is the
                // extremal one).
                if mink_inner(&nu_p, nu)? < 0.0 {
                    nu_p = -nu_p;
                }
                if mink_inner(&nu_m, nu)? < 0.0 {
                    nu_m = -nu_m;
                }
                for sign in [1.0, -1.0] {
                    for &t in t_samples {
                        let p_plus = normal_exp(&space, patch.point(ip), &(&nu_p * sign), t)?;
                        let p_minus = normal_exp(&space, patch.point(im), &(&nu_m * sign), t)?;
                        let v = (p_plus.coords() - p_minus.coords()) / (2.0 * h_a);
                        let ratio = mink_inner(&v, &v)? / (d2 * t.cosh() * t.cosh() * e_aa);
                        tangential.update(ratio, || {
                            format!("axis {axis} at vertex {flat}, t = {t}, ratio {ratio:.6}")
                        });
                    }
                }
            }
        }
    }

    let mut report = CheckReport::new("exp_metric_lower_bound");
    if radial.ratio.is_finite() {
        report.push(radial.into_item("radial_directions"));
    }
    if tangential.ratio.is_finite() {
        report.push(tangential.into_item("tangential_directions"));
    }
    if sphere.ratio.is_finite() {
        report.push(sphere.into_item("sphere_directions"));
    }
    if report.items.is_empty() {
        return Err(Error::invalid("sample plan produced no comparisons"));
    }
    Ok(report)
}

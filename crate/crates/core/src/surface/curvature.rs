//! Induced curvature of immersed patches: the Gauss-equation route through
//! the second fundamental form, an independent intrinsic route (Brioschi
//! formula on the first-form coefficients alone), and the curvature-pinching
//! window for almost-fuchsian immersions.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::report::{CheckItem, CheckReport};
use crate::space::mink_inner;
use crate::surface::forms::{
    fundamental_forms, shape_spectra, sup_second_form, FundamentalForms,
};
use crate::surface::patch::ParametricPatch;

/// Tolerance of the pinching window checks.
pub const PINCH_TOL: f64 = 1e-3;

/// Sectional curvature of the tangent plane spanned by two parameter-space
/// directions, via the Gauss equation
/// K = -kappa + sum_m [ S_m(u,u) S_m(v,v) - S_m(u,v)^2 ]
/// after I-orthonormalizing the pair.
pub fn induced_sectional_curvature(
    patch: &ParametricPatch,
    flat: usize,
    dir_a: &[f64],
    dir_b: &[f64],
) -> Result<f64> {
    let forms = fundamental_forms(patch, flat)?;
    sectional_from_forms(patch.space().curvature_scale(), &forms, dir_a, dir_b)
}

pub fn sectional_from_forms(
    kappa: f64,
    forms: &FundamentalForms,
    dir_a: &[f64],
    dir_b: &[f64],
) -> Result<f64> {
    let k = forms.first.nrows();
    if dir_a.len() != k || dir_b.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: dir_a.len().min(dir_b.len()),
        });
    }
    let a = DVector::from_column_slice(dir_a);
    let b = DVector::from_column_slice(dir_b);
    let ip = |x: &DVector<f64>, y: &DVector<f64>| (x.transpose() * &forms.first * y)[(0, 0)];
    let na = ip(&a, &a).sqrt();
    if !(na > 1e-12) {
        return Err(Error::invalid("degenerate plane: zero first direction"));
    }
    let a = a / na;
    let mut b = b.clone_owned();
    let proj = ip(&a, &b);
    b -= &a * proj;
    let nb = ip(&b, &b).sqrt();
    if !(nb > 1e-10) {
        return Err(Error::invalid("degenerate plane: directions are parallel"));
    }
    let b = b / nb;
    let mut k_val = -kappa;
    for s in &forms.second {
        let saa = (a.transpose() * s * &a)[(0, 0)];
        let sbb = (b.transpose() * s * &b)[(0, 0)];
        let sab = (a.transpose() * s * &b)[(0, 0)];
        k_val += saa * sbb - sab * sab;
    }
    Ok(k_val)
}

/// Gauss curvature of a 2-dimensional patch at a vertex (coordinate plane).
pub fn gauss_curvature(patch: &ParametricPatch, flat: usize) -> Result<f64> {
    if patch.k() != 2 {
        return Err(Error::invalid("gauss_curvature expects a 2-dimensional patch"));
    }
    induced_sectional_curvature(patch, flat, &[1.0, 0.0], &[0.0, 1.0])
}

/// First-form coefficients E, F, G at any vertex with a one-ring, mask or not
/// (ring values feed derivative stencils of interior vertices).
fn first_form_coeffs(patch: &ParametricPatch, flat: usize) -> Result<(f64, f64, f64)> {
    let space = patch.space();
    let x = patch.point(flat);
    let mut tangents = Vec::with_capacity(2);
    for a in 0..2 {
        let h = patch.spacing()[a];
        let ip = patch
            .neighbor(flat, a, 1)
            .ok_or_else(|| Error::NoInteriorStencil(patch.unflatten(flat)))?;
        let im = patch
            .neighbor(flat, a, -1)
            .ok_or_else(|| Error::NoInteriorStencil(patch.unflatten(flat)))?;
        let lp = space.log_map(x, patch.point(ip))?.vec;
        let lm = space.log_map(x, patch.point(im))?.vec;
        tangents.push((lp - lm) / (2.0 * h));
    }
    Ok((
        mink_inner(&tangents[0], &tangents[0])?,
        mink_inner(&tangents[0], &tangents[1])?,
        mink_inner(&tangents[1], &tangents[1])?,
    ))
}

/// Intrinsic Gauss curvature from the first fundamental form alone, by the
/// Brioschi determinant formula on central differences of E, F, G. This route
/// never touches the normal bundle, making it an independent cross-check of
/// the Gauss-equation value.
pub fn brioschi_curvature(patch: &ParametricPatch, flat: usize) -> Result<f64> {
    if patch.k() != 2 {
        return Err(Error::invalid("brioschi_curvature expects a 2-dimensional patch"));
    }
    if !patch.has_stencil_depth(flat, 2) {
        return Err(Error::NoInteriorStencil(patch.unflatten(flat)));
    }
    let hu = patch.spacing()[0];
    let hv = patch.spacing()[1];
    let at = |du: isize, dv: isize| -> Result<(f64, f64, f64)> {
        let mut id = flat;
        if du != 0 {
            id = patch
                .neighbor(id, 0, du)
                .ok_or_else(|| Error::NoInteriorStencil(patch.unflatten(flat)))?;
        }
        if dv != 0 {
            id = patch
                .neighbor(id, 1, dv)
                .ok_or_else(|| Error::NoInteriorStencil(patch.unflatten(flat)))?;
        }
        first_form_coeffs(patch, id)
    };
    let c = at(0, 0)?;
    let pu = at(1, 0)?;
    let mu = at(-1, 0)?;
    let pv = at(0, 1)?;
    let mv = at(0, -1)?;
    let pp = at(1, 1)?;
    let mm = at(-1, -1)?;
    let pm = at(1, -1)?;
    let mp = at(-1, 1)?;
    let (e, f, g) = c;
    let du = |p: (f64, f64, f64), m: (f64, f64, f64), pick: fn((f64, f64, f64)) -> f64| {
        (pick(p) - pick(m)) / (2.0 * hu)
    };
    let pick_e = |t: (f64, f64, f64)| t.0;
    let pick_f = |t: (f64, f64, f64)| t.1;
    let pick_g = |t: (f64, f64, f64)| t.2;
    let e_u = du(pu, mu, pick_e);
    let f_u = du(pu, mu, pick_f);
    let g_u = du(pu, mu, pick_g);
    let e_v = (pick_e(pv) - pick_e(mv)) / (2.0 * hv);
    let f_v = (pick_f(pv) - pick_f(mv)) / (2.0 * hv);
    let g_v = (pick_g(pv) - pick_g(mv)) / (2.0 * hv);
    let e_vv = (pick_e(pv) + pick_e(mv) - 2.0 * e) / (hv * hv);
    let g_uu = (pick_g(pu) + pick_g(mu) - 2.0 * g) / (hu * hu);
    let f_uv = (pick_f(pp) + pick_f(mm) - pick_f(pm) - pick_f(mp)) / (4.0 * hu * hv);
    let m1 = DMatrix::from_row_slice(
        3,
        3,
        &[
            -0.5 * e_vv + f_uv - 0.5 * g_uu,
            0.5 * e_u,
            f_u - 0.5 * e_v,
            f_v - 0.5 * g_u,
            e,
            f,
            0.5 * g_v,
            f,
            g,
        ],
    );
    let m2 = DMatrix::from_row_slice(
        3,
        3,
        &[0.0, 0.5 * e_v, 0.5 * g_u, 0.5 * e_v, e, f, 0.5 * g_u, f, g],
    );
    let den = e * g - f * f;
    if !(den > 1e-16) {
        return Err(Error::NotImmersed(den));
    }
    Ok((m1.determinant() - m2.determinant()) / (den * den))
}

/// Worst disagreement between the Gauss-equation curvature and the intrinsic
/// Brioschi value over all depth-2 interior vertices.
pub fn gauss_consistency_check(patch: &ParametricPatch, tol: f64) -> Result<CheckReport> {
    if patch.k() != 2 {
        return Err(Error::invalid("consistency check expects a 2-dimensional patch"));
    }
    let mut worst = f64::INFINITY;
    let mut worst_at = 0;
    let mut count = 0usize;
    for flat in 0..patch.len() {
        if !patch.has_stencil_depth(flat, 2) {
            continue;
        }
        let kg = gauss_curvature(patch, flat)?;
        let kb = brioschi_curvature(patch, flat)?;
        let m = tol - (kg - kb).abs();
        if m < worst {
            worst = m;
            worst_at = flat;
        }
        count += 1;
    }
    if count == 0 {
        return Err(Error::invalid("no vertex admits a depth-2 stencil"));
    }
    let mut report = CheckReport::new("gauss_vs_intrinsic_curvature");
    report.push(CheckItem::from_margin(
        "max_abs_difference",
        worst,
        format!("{count} vertices, worst at {:?}", patch.unflatten(worst_at)),
    ));
    Ok(report)
}

/// Curvature-pinching summary for an almost-fuchsian patch.
#[derive(Debug, Clone, serde::Serialize)]
pub struct PinchingReport {
    pub report: CheckReport,
    pub sup_abs: f64,
    pub eps: f64,
    pub k_min: f64,
    pub k_max: f64,
    /// Whether the stronger 2-dimensional minimal-surface window was applied.
    pub surface_case: bool,
}

fn sample_planes(k: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
    let axis = |i: usize| {
        let mut v = vec![0.0; k];
        v[i] = 1.0;
        v
    };
    let mut planes = Vec::new();
    for a in 0..k {
        for b in (a + 1)..k {
            planes.push((axis(a), axis(b)));
            if k > 2 {
                // Diagonal mixtures exercise off-axis sections.
                let mut p = axis(a);
                p[b] = 1.0;
                let mut q = axis(a);
                q[b] = -1.0;
                planes.push((p, q));
            }
        }
    }
    planes
}

/// Checks the two-sided sectional-curvature window
/// K <= -eps(2-eps) + tol and K >= -kappa - 2(1-eps)^2 - tol, eps = 1 - sup|II|,
/// at every interior vertex over sampled tangent planes. Two-dimensional
/// patches in H^3 that are numerically minimal additionally get the stronger
/// window K <= -1 and K >= -kappa - (1-eps)^2.
pub fn pinching_check(patch: &ParametricPatch) -> Result<PinchingReport> {
    let kappa = patch.space().curvature_scale();
    let summary = sup_second_form(patch)?;
    let sup = summary.sup;
    let eps = 1.0 - sup;
    let planes = sample_planes(patch.k());
    let mut k_min = f64::INFINITY;
    let mut k_max = f64::NEG_INFINITY;
    let mut max_trace: f64 = 0.0;
    for flat in patch.interior_vertices() {
        let forms = fundamental_forms(patch, flat)?;
        for sp in shape_spectra(&forms)? {
            max_trace = max_trace.max(sp.trace().abs());
        }
        for (a, b) in &planes {
            let k_val = sectional_from_forms(kappa, &forms, a, b)?;
            k_min = k_min.min(k_val);
            k_max = k_max.max(k_val);
        }
    }
    let mut report = CheckReport::new("curvature_pinching");
    report.push(CheckItem::from_margin(
        "almost_fuchsian",
        1.0 - sup,
        format!("sup |II| = {sup:.6}"),
    ));
    let upper = -eps * (2.0 - eps);
    let lower = -kappa - 2.0 * (1.0 - eps) * (1.0 - eps);
    report.push(CheckItem::from_margin(
        "upper_window",
        upper + PINCH_TOL - k_max,
        format!("K_max = {k_max:.6}, bound {upper:.6}"),
    ));
    report.push(CheckItem::from_margin(
        "lower_window",
        k_min - (lower - PINCH_TOL),
        format!("K_min = {k_min:.6}, bound {lower:.6}"),
    ));
    let surface_case =
        patch.k() == 2 && patch.space().dimension() == 3 && max_trace < 1e-3 && sup < 1.0;
    if surface_case {
        let lower2 = -kappa - (1.0 - eps) * (1.0 - eps);
        report.push(CheckItem::from_margin(
            "surface_upper",
            -1.0 + PINCH_TOL - k_max,
            format!("minimal-surface bound: K_max = {k_max:.6} vs -1"),
        ));
        report.push(CheckItem::from_margin(
            "surface_lower",
            k_min - (lower2 - PINCH_TOL),
            format!("minimal-surface bound: K_min = {k_min:.6} vs {lower2:.6}"),
        ));
    }
    Ok(PinchingReport {
        report,
        sup_abs: sup,
        eps,
        k_min,
        k_max,
        surface_case,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::canned::{equidistant_patch, geodesic_plane_patch, horosphere_patch};

    #[test]
    fn plane_sections_have_ambient_curvature() {
        let p = geodesic_plane_patch(1.0, 17, 0.4).unwrap();
        let mid = p.flatten(&[8, 8]);
        let k = gauss_curvature(&p, mid).unwrap();
        assert!((k + 1.0).abs() < 1e-4, "K = {k}");
        let p2 = geodesic_plane_patch(2.5, 17, 0.4).unwrap();
        let k2 = gauss_curvature(&p2, p2.flatten(&[8, 8])).unwrap();
        assert!((k2 + 2.5).abs() < 1e-3, "K = {k2}");
    }

    #[test]
    fn equidistant_curvature_matches_closed_form() {
        let t = 0.5;
        let p = equidistant_patch(t, 33, 0.5).unwrap();
        let want = -1.0 + t.tanh() * t.tanh();
        let mid = p.flatten(&[16, 16]);
        let kg = gauss_curvature(&p, mid).unwrap();
        assert!((kg - want).abs() < 1e-3, "gauss {kg} want {want}");
        let kb = brioschi_curvature(&p, mid).unwrap();
        assert!((kb - want).abs() < 5e-3, "brioschi {kb} want {want}");
    }

    #[test]
    fn horosphere_is_intrinsically_flat() {
        let p = horosphere_patch(49, 0.35).unwrap();
        let mid = p.flatten(&[24, 24]);
        assert!(gauss_curvature(&p, mid).unwrap().abs() < 1e-4);
        assert!(brioschi_curvature(&p, mid).unwrap().abs() < 1e-6);
    }

    #[test]
    fn gauss_and_brioschi_agree_on_curved_patch() {
        let p = equidistant_patch(0.4, 33, 0.5).unwrap();
        let rep = gauss_consistency_check(&p, 5e-3).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn pinching_window_behaviour() {
        // Totally geodesic: eps = 1, window [-kappa, -1]; passes.
        let plane = geodesic_plane_patch(1.0, 17, 0.4).unwrap();
        let rep = pinching_check(&plane).unwrap();
        assert!(rep.report.pass, "{:?}", rep.report);
        assert!(rep.surface_case, "plane is numerically minimal");
        // Equidistant surfaces saturate the upper window bound exactly.
        let eq = equidistant_patch(0.3, 17, 0.4).unwrap();
        let rep = pinching_check(&eq).unwrap();
        assert!(rep.report.pass, "{:?}", rep.report);
        assert!(!rep.surface_case, "equidistant is not minimal");
        let up = rep.report.item("upper_window").unwrap();
        assert!(up.margin < 2.0 * PINCH_TOL, "saturation expected: {up:?}");
        // Horosphere: sup |II| = 1 fails the almost-fuchsian gate.
        let horo = horosphere_patch(17, 0.4).unwrap();
        let rep = pinching_check(&horo).unwrap();
        assert!(!rep.report.pass);
    }

    #[test]
    fn sectional_rejects_degenerate_plane() {
        let p = geodesic_plane_patch(1.0, 9, 0.4).unwrap();
        let mid = p.flatten(&[4, 4]);
        assert!(induced_sectional_curvature(&p, mid, &[1.0, 0.0], &[2.0, 0.0]).is_err());
    }
}

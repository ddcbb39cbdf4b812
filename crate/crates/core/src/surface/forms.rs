//! First/second fundamental forms and shape spectra at grid vertices.
//!
//! Tangents come from central differences of log maps, the second form from
//! covariant second differences projected onto a deterministic orthonormal
//! normal frame. Everything here is second-order accurate in the grid step.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::space::{mink_inner, HyperboloidPoint, TangentVector};
use crate::surface::patch::{ParametricPatch, IMMERSION_EIG_FLOOR};

/// Fundamental forms of a patch at one interior vertex.
#[derive(Debug, Clone)]
pub struct FundamentalForms {
    /// Induced metric in parameter coordinates, k x k SPD.
    pub first: DMatrix<f64>,
    /// One k x k symmetric matrix per normal-frame direction.
    pub second: Vec<DMatrix<f64>>,
    /// Parameter partials as ambient vectors.
    pub tangents: Vec<DVector<f64>>,
    /// Orthonormal basis of the normal space, ambient coordinates.
    pub normal_frame: Vec<DVector<f64>>,
    /// The vertex the forms are attached to.
    pub base: HyperboloidPoint,
}

/// Principal curvatures with respect to one unit normal, ascending.
#[derive(Debug, Clone)]
pub struct ShapeSpectrum {
    pub eigenvalues: Vec<f64>,
}

impl ShapeSpectrum {
    pub fn trace(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |m, &l| m.max(l.abs()))
    }
}

/// Covariant central differences of the immersion at an interior vertex.
pub fn fundamental_forms(patch: &ParametricPatch, flat: usize) -> Result<FundamentalForms> {
    if !patch.is_interior(flat) {
        return Err(Error::NoInteriorStencil(patch.unflatten(flat)));
    }
    let space = patch.space();
    let k = patch.k();
    let x = patch.point(flat);
    let log_to = |other: usize| -> Result<DVector<f64>> {
        Ok(space.log_map(x, patch.point(other))?.vec)
    };
    let mut tangents = Vec::with_capacity(k);
    let mut pure_second = Vec::with_capacity(k);
    for a in 0..k {
        let h = patch.spacing()[a];
        let lp = log_to(patch.neighbor(flat, a, 1).expect("interior"))?;
        let lm = log_to(patch.neighbor(flat, a, -1).expect("interior"))?;
        tangents.push((&lp - &lm) / (2.0 * h));
        pure_second.push((&lp + &lm) / (h * h));
    }
    // Mixed covariant second differences from the diagonal 4-point stencil.
    let mut cross = vec![vec![DVector::zeros(space.ambient_len()); k]; k];
    for a in 0..k {
        for b in (a + 1)..k {
            let ha = patch.spacing()[a];
            let hb = patch.spacing()[b];
            let pp = log_to(patch.neighbor2(flat, a, 1, b, 1).expect("interior"))?;
            let mm = log_to(patch.neighbor2(flat, a, -1, b, -1).expect("interior"))?;
            let pm = log_to(patch.neighbor2(flat, a, 1, b, -1).expect("interior"))?;
            let mp = log_to(patch.neighbor2(flat, a, -1, b, 1).expect("interior"))?;
            let c = (pp + mm - pm - mp) / (4.0 * ha * hb);
            cross[a][b] = c.clone();
            cross[b][a] = c;
        }
    }
    let second_vec = |a: usize, b: usize| -> &DVector<f64> {
        if a == b {
            &pure_second[a]
        } else {
            &cross[a][b]
        }
    };
    let mut first = DMatrix::zeros(k, k);
    for a in 0..k {
        for b in a..k {
            let v = mink_inner(&tangents[a], &tangents[b])?;
            first[(a, b)] = v;
            first[(b, a)] = v;
        }
    }
    let eig = first.clone().symmetric_eigen();
    let min_eig = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(min_eig > IMMERSION_EIG_FLOOR) {
        return Err(Error::NotImmersed(min_eig));
    }
    let frame = space
        .complete_tangent_frame(x, &tangents)
        .map_err(|_| Error::DegenerateFrame(patch.unflatten(flat)))?;
    let normal_frame: Vec<DVector<f64>> = frame[k..].to_vec();
    let mut second = Vec::with_capacity(normal_frame.len());
    for nu in &normal_frame {
        let mut s = DMatrix::zeros(k, k);
        for a in 0..k {
            for b in a..k {
                let v = mink_inner(second_vec(a, b), nu)?;
                s[(a, b)] = v;
                s[(b, a)] = v;
            }
        }
        second.push(s);
    }
    Ok(FundamentalForms {
        first,
        second,
        tangents,
        normal_frame,
        base: x.clone(),
    })
}

/// Symmetrized shape-operator eigenvalues for one normal direction:
/// with first = L L^T, the spectrum of first^{-1} second equals that of
/// L^{-1} second L^{-T}, which stays symmetric.
pub fn shape_spectrum(forms: &FundamentalForms, normal_index: usize) -> Result<ShapeSpectrum> {
    let s = forms
        .second
        .get(normal_index)
        .ok_or_else(|| Error::invalid(format!("normal index {normal_index} out of range")))?;
    let chol = nalgebra::Cholesky::new(forms.first.clone())
        .ok_or(Error::NotImmersed(f64::NAN))?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or(Error::NotImmersed(f64::NAN))?;
    let w = &linv * s * linv.transpose();
    let sym = (&w + w.transpose()) * 0.5;
    let mut ev: Vec<f64> = sym.symmetric_eigen().eigenvalues.iter().cloned().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    Ok(ShapeSpectrum { eigenvalues: ev })
}

/// Shape spectra for every normal-frame direction.
pub fn shape_spectra(forms: &FundamentalForms) -> Result<Vec<ShapeSpectrum>> {
    (0..forms.normal_frame.len())
        .map(|m| shape_spectrum(forms, m))
        .collect()
}

/// |II| at one vertex: max over the normal frame of the spectral radius.
pub fn vertex_second_form_sup(forms: &FundamentalForms) -> Result<f64> {
    let mut sup: f64 = 0.0;
    for sp in shape_spectra(forms)? {
        sup = sup.max(sp.spectral_radius());
    }
    Ok(sup)
}

/// Patch-wide second-form summary.
#[derive(Debug, Clone)]
pub struct SecondFormSummary {
    /// sup over interior vertices of |II|.
    pub sup: f64,
    /// delta = 1 - sup (the quasi-isometry constant when positive).
    pub delta: f64,
    /// eps with sup = 1 - eps; equal to delta, kept for readability at call sites.
    pub eps: f64,
    /// Vertex attaining the sup.
    pub argmax: usize,
}

/// sup_{interior} |II| with the derived constants delta and eps.
pub fn sup_second_form(patch: &ParametricPatch) -> Result<SecondFormSummary> {
    let interior = patch.interior_vertices();
    if interior.is_empty() {
        return Err(Error::invalid("patch has no interior vertices"));
    }
    let per: Result<Vec<(usize, f64)>> = interior
        .par_iter()
        .map(|&i| Ok((i, vertex_second_form_sup(&fundamental_forms(patch, i)?)?)))
        .collect();
    let per = per?;
    let mut sup = -1.0;
    let mut argmax = per[0].0;
    for (i, v) in per {
        if v > sup {
            sup = v;
            argmax = i;
        }
    }
    Ok(SecondFormSummary {
        sup,
        delta: 1.0 - sup,
        eps: 1.0 - sup,
        argmax,
    })
}

/// Mean curvature vector H = sum_m tr(first^{-1} second_m) nu_m at a vertex.
pub fn mean_curvature_vector(patch: &ParametricPatch, flat: usize) -> Result<TangentVector> {
    let forms = fundamental_forms(patch, flat)?;
    mean_curvature_from_forms(&forms)
}

pub fn mean_curvature_from_forms(forms: &FundamentalForms) -> Result<TangentVector> {
    let inv = forms
        .first
        .clone()
        .try_inverse()
        .ok_or(Error::NotImmersed(f64::NAN))?;
    let mut h = DVector::zeros(forms.base.ambient_len());
    for (m, s) in forms.second.iter().enumerate() {
        let tr = (&inv * s).trace();
        h += &forms.normal_frame[m] * tr;
    }
    Ok(TangentVector::new(forms.base.clone(), h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::canned::{equidistant_patch, geodesic_plane_patch, horosphere_patch};
    use approx::assert_relative_eq;

    #[test]
    fn geodesic_plane_has_zero_second_form() {
        let p = geodesic_plane_patch(1.0, 33, 0.5).unwrap();
        let s = sup_second_form(&p).unwrap();
        assert!(s.sup < 1e-6, "sup |II| = {:.3e}", s.sup);
        assert!((s.delta - 1.0).abs() < 1e-6);
        let mid = p.flatten(&[16, 16]);
        let h = mean_curvature_vector(&p, mid).unwrap();
        assert!(h.norm() < 1e-5, "|H| = {:.3e}", h.norm());
    }

    #[test]
    fn equidistant_surface_shape_is_tanh() {
        let t = 0.3;
        let p = equidistant_patch(t, 33, 0.5).unwrap();
        let mid = p.flatten(&[16, 16]);
        let forms = fundamental_forms(&p, mid).unwrap();
        let sp = shape_spectrum(&forms, 0).unwrap();
        for &l in &sp.eigenvalues {
            assert!((l.abs() - t.tanh()).abs() < 1e-4, "lambda {l}");
        }
        // second ~ tanh(t) * first entrywise (up to normal sign).
        let ratio = forms.second[0][(0, 0)] / forms.first[(0, 0)];
        assert!((ratio.abs() - t.tanh()).abs() < 1e-4);
        let h = mean_curvature_vector(&p, mid).unwrap();
        assert_relative_eq!(h.norm(), 2.0 * t.tanh(), epsilon = 1e-3);
        let s = sup_second_form(&p).unwrap();
        assert!((s.sup - t.tanh()).abs() < 1e-4);
    }

    #[test]
    fn horosphere_is_umbilic_with_unit_curvature() {
        let p = horosphere_patch(33, 0.25).unwrap();
        let mid = p.flatten(&[16, 16]);
        let forms = fundamental_forms(&p, mid).unwrap();
        let sp = shape_spectrum(&forms, 0).unwrap();
        for &l in &sp.eigenvalues {
            assert!((l.abs() - 1.0).abs() < 1e-4, "lambda {l}");
        }
        let h = mean_curvature_vector(&p, mid).unwrap();
        assert_relative_eq!(h.norm(), 2.0, epsilon = 1e-3);
        // Horospheres saturate the almost-fuchsian bound.
        let s = sup_second_form(&p).unwrap();
        assert!((s.sup - 1.0).abs() < 1e-4);
        assert!(s.delta.abs() < 1e-4);
    }

    #[test]
    fn boundary_vertex_refuses_forms() {
        let p = geodesic_plane_patch(1.0, 9, 0.4).unwrap();
        let corner = p.flatten(&[0, 0]);
        assert!(matches!(
            fundamental_forms(&p, corner),
            Err(Error::NoInteriorStencil(_))
        ));
    }

    #[test]
    fn refinement_improves_equidistant_shape() {
        let t = 0.4;
        let coarse = equidistant_patch(t, 17, 0.5).unwrap();
        let fine = equidistant_patch(t, 49, 0.5).unwrap();
        let err = |p: &ParametricPatch| {
            let s = sup_second_form(p).unwrap();
            (s.sup - t.tanh()).abs()
        };
        let (ec, ef) = (err(&coarse), err(&fine));
        // Grid step shrinks 3x; second-order stencils should gain >= 3x.
        assert!(
            ef * 3.0 <= ec + 1e-12,
            "coarse err {ec:.3e}, fine err {ef:.3e}"
        );
    }

    #[test]
    fn minimality_matches_trace_identity() {
        let p = equidistant_patch(0.25, 17, 0.4).unwrap();
        let mid = p.flatten(&[8, 8]);
        let forms = fundamental_forms(&p, mid).unwrap();
        let h = mean_curvature_from_forms(&forms).unwrap();
        let tr: f64 = shape_spectra(&forms)
            .unwrap()
            .iter()
            .map(|s| s.trace().abs())
            .sum();
        assert!((h.norm() - tr).abs() < 1e-8, "|H| vs |sum lambda|");
    }
}

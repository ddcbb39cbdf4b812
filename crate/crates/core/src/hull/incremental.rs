//! Incremental convex hull over float points in R^d, d >= 1. Deterministic:
//! a greedy max-residual initial simplex, then lexicographic insertion with
//! an epsilon visibility predicate, followed by brute-force repair passes
//! that re-insert any sample left outside. Inputs are float-sampled, so
//! epsilon predicates plus repair replace exact arithmetic.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Visibility threshold of the insertion predicate.
const EPS_VISIBLE: f64 = 1e-12;

/// Certification threshold: no sample may exceed a facet plane by more.
pub const EPS_CONTAIN: f64 = 1e-10;

const MAX_REPAIR_PASSES: usize = 32;

/// Oriented supporting half-space ⟨normal, p⟩ <= offset of a hull facet.
#[derive(Debug, Clone)]
pub struct Facet {
    pub normal: DVector<f64>,
    pub offset: f64,
    /// Indices into the input points, d per facet.
    pub vertices: Vec<usize>,
}

impl Facet {
    pub fn margin(&self, p: &DVector<f64>) -> f64 {
        self.normal.dot(p) - self.offset
    }
}

/// Affine hull of a point set: base point, orthonormal basis, and the
/// largest residual (`thickness`) discarded by the rank cut.
#[derive(Debug, Clone)]
pub struct AffineSpan {
    pub base: DVector<f64>,
    pub basis: Vec<DVector<f64>>,
    pub thickness: f64,
}

impl AffineSpan {
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Coordinates of p in the basis.
    pub fn project(&self, p: &DVector<f64>) -> DVector<f64> {
        let rel = p - &self.base;
        DVector::from_iterator(self.basis.len(), self.basis.iter().map(|b| b.dot(&rel)))
    }

    /// Euclidean distance from p to the affine subspace.
    pub fn off_distance(&self, p: &DVector<f64>) -> f64 {
        let mut rel = p - &self.base;
        for b in &self.basis {
            let c = b.dot(&rel);
            rel -= b * c;
        }
        rel.norm()
    }
}

/// Detects the affine span with a relative singular-value cut.
pub fn affine_span(points: &[DVector<f64>], rel_tol: f64) -> Result<AffineSpan> {
    let n = points.len();
    if n == 0 {
        return Err(Error::invalid("empty point set"));
    }
    let d = points[0].len();
    let mut base = DVector::zeros(d);
    for p in points {
        base += p;
    }
    base /= n as f64;
    let mut m = DMatrix::zeros(n, d);
    for (i, p) in points.iter().enumerate() {
        m.row_mut(i).copy_from(&(p - &base).transpose());
    }
    let svd = m.svd(false, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let cut = rel_tol * smax.max(1e-300);
    let v_t = svd.v_t.as_ref().expect("requested V^T");
    let mut basis = Vec::new();
    let mut thickness = 0.0f64;
    for (j, &s) in svd.singular_values.iter().enumerate() {
        if s > cut && smax > 0.0 {
            basis.push(v_t.row(j).transpose());
        } else {
            thickness = thickness.max(s);
        }
    }
    Ok(AffineSpan {
        base,
        basis,
        thickness,
    })
}

/// Unit normal of the hyperplane through `pts` (d points in R^d): the
/// eigenvector of the smallest eigenvalue of the edge Gram matrix. Rejects
/// slivers whose edge set is itself rank-deficient.
fn hyperplane_normal(pts: &[&DVector<f64>]) -> Result<DVector<f64>> {
    let d = pts[0].len();
    if d == 1 {
        return Ok(DVector::from_element(1, 1.0));
    }
    let mut m = DMatrix::zeros(d - 1, d);
    for i in 1..d {
        m.row_mut(i - 1).copy_from(&(pts[i] - pts[0]).transpose());
    }
    let gram = m.transpose() * &m;
    let eig = gram.symmetric_eigen();
    let mut idx: Vec<usize> = (0..d).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let lam_max = eig.eigenvalues[idx[d - 1]].max(1e-300);
    if d >= 2 && eig.eigenvalues[idx[1]] < 1e-20 * lam_max {
        return Err(Error::HullConstruction("degenerate facet normal".into()));
    }
    let normal: DVector<f64> = eig.eigenvectors.column(idx[0]).into_owned();
    let n = normal.norm();
    Ok(normal / n)
}

fn oriented_facet(
    points: &[DVector<f64>],
    vertices: Vec<usize>,
    interior: &DVector<f64>,
) -> Result<Facet> {
    let pts: Vec<&DVector<f64>> = vertices.iter().map(|&i| &points[i]).collect();
    let mut normal = hyperplane_normal(&pts)?;
    let mut offset = normal.dot(pts[0]);
    if normal.dot(interior) - offset > 0.0 {
        normal = -normal;
        offset = -offset;
    }
    Ok(Facet {
        normal,
        offset,
        vertices,
    })
}

/// Greedy affinely-independent seed of d+1 indices, starting from the
/// lexicographically smallest point and maximizing span residual.
fn initial_simplex(points: &[DVector<f64>]) -> Result<Vec<usize>> {
    let d = points[0].len();
    let first = (0..points.len())
        .min_by(|&a, &b| lex_cmp(&points[a], &points[b]))
        .expect("nonempty");
    let mut chosen = vec![first];
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let scale = points
        .iter()
        .map(|p| (p - &points[first]).norm())
        .fold(0.0f64, f64::max)
        .max(1e-300);
    while chosen.len() < d + 1 {
        let mut best = None;
        let mut best_res = 0.0;
        for i in 0..points.len() {
            if chosen.contains(&i) {
                continue;
            }
            let mut rel = &points[i] - &points[first];
            for b in &basis {
                let c = b.dot(&rel);
                rel -= b * c;
            }
            let r = rel.norm();
            if r > best_res {
                best_res = r;
                best = Some((i, rel));
            }
        }
        match best {
            Some((i, rel)) if best_res > 1e-12 * scale => {
                basis.push(rel / best_res);
                chosen.push(i);
            }
            _ => {
                return Err(Error::TooFewSamples {
                    needed: d + 1,
                    rank: chosen.len(),
                })
            }
        }
    }
    Ok(chosen)
}

fn lex_cmp(a: &DVector<f64>, b: &DVector<f64>) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            other => return other,
        }
    }
    std::cmp::Ordering::Equal
}

fn ridge_key(vertices: &[usize], skip: usize) -> Vec<usize> {
    let mut r: Vec<usize> = vertices
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != skip)
        .map(|(_, &v)| v)
        .collect();
    r.sort_unstable();
    r
}

/// Inserts point `idx` if it is outside the current facet set. Returns
/// whether the facet set changed.
fn insert_point(
    points: &[DVector<f64>],
    facets: &mut Vec<Facet>,
    interior: &DVector<f64>,
    idx: usize,
) -> Result<bool> {
    let p = &points[idx];
    let visible: Vec<usize> = (0..facets.len())
        .filter(|&f| facets[f].margin(p) > EPS_VISIBLE)
        .collect();
    if visible.is_empty() {
        return Ok(false);
    }
    let mut ridge_count: HashMap<Vec<usize>, usize> = HashMap::new();
    for &f in &visible {
        for skip in 0..facets[f].vertices.len() {
            *ridge_count
                .entry(ridge_key(&facets[f].vertices, skip))
                .or_insert(0) += 1;
        }
    }
    let mut new_facets = Vec::new();
    for (ridge, count) in ridge_count {
        if count != 1 {
            continue;
        }
        let mut verts = ridge;
        verts.push(idx);
        match oriented_facet(points, verts, interior) {
            Ok(f) => new_facets.push(f),
            // A flat sliver (p affinely dependent with the ridge): dropping
            // it leaves a hole the repair passes will close from the side.
            Err(_) => continue,
        }
    }
    if new_facets.is_empty() {
        return Ok(false);
    }
    let mut keep = 0usize;
    let visible_set: std::collections::HashSet<usize> = visible.into_iter().collect();
    facets.retain(|_| {
        let k = keep;
        keep += 1;
        !visible_set.contains(&k)
    });
    facets.extend(new_facets);
    Ok(true)
}

/// Convex hull of a full-dimensional point set; facets are certified to
/// contain every sample within `EPS_CONTAIN`.
pub fn convex_hull(points: &[DVector<f64>]) -> Result<Vec<Facet>> {
    let d = points[0].len();
    let simplex = initial_simplex(points)?;
    let mut interior = DVector::zeros(d);
    for &i in &simplex {
        interior += &points[i];
    }
    interior /= simplex.len() as f64;
    let mut facets = Vec::with_capacity(d + 1);
    for skip in 0..simplex.len() {
        let verts: Vec<usize> = simplex
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != skip)
            .map(|(_, &v)| v)
            .collect();
        facets.push(oriented_facet(points, verts, &interior)?);
    }
    let mut order: Vec<usize> = (0..points.len()).filter(|i| !simplex.contains(i)).collect();
    order.sort_by(|&a, &b| lex_cmp(&points[a], &points[b]));
    for idx in order {
        insert_point(points, &mut facets, &interior, idx)?;
    }
    for _ in 0..MAX_REPAIR_PASSES {
        let worst = (0..points.len())
            .map(|i| {
                let m = facets
                    .iter()
                    .map(|f| f.margin(&points[i]))
                    .fold(f64::NEG_INFINITY, f64::max);
                (i, m)
            })
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty");
        if worst.1 <= EPS_CONTAIN {
            return Ok(facets);
        }
        insert_point(points, &mut facets, &interior, worst.0)?;
    }
    Err(Error::HullConstruction(
        "repair passes exhausted without certification".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(s)
    }

    #[test]
    fn simplex_hull_has_four_facets() {
        let pts = vec![
            v(&[1.0, 1.0, 1.0]),
            v(&[1.0, -1.0, -1.0]),
            v(&[-1.0, 1.0, -1.0]),
            v(&[-1.0, -1.0, 1.0]),
        ];
        let facets = convex_hull(&pts).unwrap();
        assert_eq!(facets.len(), 4);
        for f in &facets {
            for p in &pts {
                assert!(f.margin(p) <= EPS_CONTAIN);
            }
        }
    }

    #[test]
    fn cube_with_interior_point() {
        let mut pts = Vec::new();
        for x in [-1.0, 1.0] {
            for y in [-1.0, 1.0] {
                for z in [-1.0, 1.0] {
                    pts.push(v(&[x, y, z]));
                }
            }
        }
        pts.push(v(&[0.1, 0.0, -0.05]));
        let facets = convex_hull(&pts).unwrap();
        // Triangulated cube: 12 facets, interior point never a vertex.
        assert_eq!(facets.len(), 12);
        assert!(facets.iter().all(|f| !f.vertices.contains(&8)));
        let inside = v(&[0.3, -0.2, 0.4]);
        assert!(facets.iter().all(|f| f.margin(&inside) < 0.0));
        let outside = v(&[1.2, 0.0, 0.0]);
        assert!(facets.iter().any(|f| f.margin(&outside) > 0.1));
    }

    #[test]
    fn planar_rank_detection() {
        let n = 64;
        let pts: Vec<_> = (0..n)
            .map(|i| {
                let th = i as f64 / n as f64 * std::f64::consts::TAU;
                v(&[th.cos(), th.sin(), 0.0])
            })
            .collect();
        let span = affine_span(&pts, 1e-9).unwrap();
        assert_eq!(span.rank(), 2);
        assert!(span.thickness < 1e-12);
        assert!(span.off_distance(&v(&[0.0, 0.0, 0.7])) - 0.7 < 1e-12);
        // Projected points are full-dimensional in the plane.
        let proj: Vec<_> = pts.iter().map(|p| span.project(p)).collect();
        let inner = convex_hull(&proj).unwrap();
        assert_eq!(inner.len(), n, "polygon hull has one edge per sample");
    }

    #[test]
    fn one_dimensional_hull_is_interval() {
        let pts = vec![v(&[0.3]), v(&[-1.5]), v(&[0.9]), v(&[0.0])];
        let facets = convex_hull(&pts).unwrap();
        assert_eq!(facets.len(), 2);
        let mut offs: Vec<f64> = facets.iter().map(|f| f.offset * f.normal[0].signum()).collect();
        offs.sort_by(f64::total_cmp);
        assert!((offs[0] - -1.5).abs() < 1e-14 || (offs[0] - 0.9).abs() < 1e-14);
    }

    #[test]
    fn near_coplanar_drum_is_certified() {
        let n = 128;
        let z = 0.5f64;
        let r = (1.0 - z * z).sqrt();
        let mut pts = Vec::new();
        for i in 0..n {
            let th = i as f64 / n as f64 * std::f64::consts::TAU;
            pts.push(v(&[r * th.cos(), r * th.sin(), z]));
            pts.push(v(&[-r * th.cos(), -r * th.sin(), -z]));
        }
        let facets = convex_hull(&pts).unwrap();
        assert!(facets.len() >= n, "expected at least {n} facets, got {}", facets.len());
        for p in &pts {
            let m = facets
                .iter()
                .map(|f| f.margin(p))
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(m.abs() <= 1e-9, "sample off the boundary by {m}");
        }
    }
}

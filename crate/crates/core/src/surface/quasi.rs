//! Quasi-isometry check: the inclusion of an almost-fuchsian patch into the
//! ambient space distorts distances by at most 1/delta, delta = 1 - sup|II|.
//! Intrinsic distances are measured by shortest paths on the grid graph with
//! ambient geodesic edge lengths; a 16-neighbourhood (all primitive offsets
//! in {-2..2}^k) keeps the zigzag over-estimate under 2.8% on flat grids,
//! absorbed by the one-sided 5% slack.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::report::{CheckItem, CheckReport};
use crate::surface::forms::sup_second_form;
use crate::surface::patch::ParametricPatch;

/// One-sided multiplicative slack on the upper inequality, covering the
/// grid-graph over-estimate of intrinsic distance.
pub const GRAPH_SLACK: f64 = 0.05;

#[derive(Debug, Clone)]
pub struct QuasiIsometryReport {
    pub report: CheckReport,
    pub sup_abs: f64,
    pub delta: f64,
    /// Largest observed d_graph / d_ambient over the sampled pairs.
    pub max_ratio: f64,
    pub pairs_checked: usize,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Primitive offsets in {-2..2}^k; primitivity drops redundant collinear
/// edges like (2,0) whose paths are already exact along (1,0).
fn primitive_offsets(k: usize) -> Vec<Vec<isize>> {
    let mut out = Vec::new();
    let mut cur = vec![-2isize; k];
    loop {
        let g = cur.iter().fold(0usize, |acc, &c| gcd(acc, c.unsigned_abs()));
        if g == 1 {
            out.push(cur.clone());
        }
        let mut axis = 0;
        loop {
            if axis == k {
                return out;
            }
            cur[axis] += 1;
            if cur[axis] <= 2 {
                break;
            }
            cur[axis] = -2;
            axis += 1;
        }
    }
}

fn apply_offset(patch: &ParametricPatch, flat: usize, offset: &[isize]) -> Option<usize> {
    let mut id = flat;
    for (axis, &d) in offset.iter().enumerate() {
        if d != 0 {
            id = patch.neighbor(id, axis, d)?;
        }
    }
    Some(id)
}

struct Cand(f64, usize);
impl PartialEq for Cand {
    fn eq(&self, other: &Self) -> bool {
        self.0.total_cmp(&other.0).is_eq() && self.1 == other.1
    }
}
impl Eq for Cand {}
impl PartialOrd for Cand {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cand {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

fn dijkstra(adj: &[Vec<(usize, f64)>], source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adj.len()];
    dist[source] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(Reverse(Cand(0.0, source)));
    while let Some(Reverse(Cand(d, u))) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, w) in &adj[u] {
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Reverse(Cand(nd, v)));
            }
        }
    }
    dist
}

/// Verifies d_X <= d_graph <= (1/delta)(1+slack) d_X over sampled vertex
/// pairs, plus exactness on single-edge pairs. Sources are strided so the
/// number of checked pairs is close to `sample_pairs`.
pub fn quasi_isometry_check(
    patch: &ParametricPatch,
    sample_pairs: usize,
) -> Result<QuasiIsometryReport> {
    let summary = sup_second_form(patch)?;
    let sup = summary.sup;
    if !(sup < 1.0) {
        return Err(Error::EigenvalueOutOfRange(sup));
    }
    let delta = 1.0 - sup;
    let space = patch.space();
    let n = patch.len();
    let offsets = primitive_offsets(patch.k());
    let adj: Result<Vec<Vec<(usize, f64)>>> = (0..n)
        .into_par_iter()
        .map(|u| {
            let mut edges = Vec::with_capacity(offsets.len());
            for off in &offsets {
                if let Some(v) = apply_offset(patch, u, off) {
                    if v != u {
                        let w = space.distance(patch.point(u), patch.point(v))?;
                        edges.push((v, w));
                    }
                }
            }
            Ok(edges)
        })
        .collect();
    let adj = adj?;

    let n_sources = (sample_pairs.div_ceil(n.max(1))).clamp(1, n);
    let stride = n / n_sources;
    let sources: Vec<usize> = (0..n_sources).map(|i| i * stride).collect();

    struct Local {
        lower: f64,
        upper: f64,
        max_ratio: f64,
        pairs: usize,
        unreachable: bool,
    }
    let bound = (1.0 + GRAPH_SLACK) / delta;
    let locals: Vec<Local> = sources
        .par_iter()
        .map(|&s| {
            let dist = dijkstra(&adj, s);
            let mut loc = Local {
                lower: f64::INFINITY,
                upper: f64::INFINITY,
                max_ratio: 0.0,
                pairs: 0,
                unreachable: false,
            };
            for t in 0..n {
                if t == s {
                    continue;
                }
                let dg = dist[t];
                if !dg.is_finite() {
                    loc.unreachable = true;
                    continue;
                }
                let dx = space.distance(patch.point(s), patch.point(t)).unwrap_or(f64::NAN);
                loc.lower = loc.lower.min(dg - dx);
                loc.upper = loc.upper.min(bound * dx - dg);
                if dx > 0.0 {
                    loc.max_ratio = loc.max_ratio.max(dg / dx);
                }
                loc.pairs += 1;
            }
            loc
        })
        .collect();
    if locals.iter().any(|l| l.unreachable) {
        return Err(Error::invalid("grid graph is disconnected"));
    }
    let lower = locals.iter().fold(f64::INFINITY, |a, l| a.min(l.lower));
    let upper = locals.iter().fold(f64::INFINITY, |a, l| a.min(l.upper));
    let max_ratio = locals.iter().fold(0.0f64, |a, l| a.max(l.max_ratio));
    let pairs: usize = locals.iter().map(|l| l.pairs).sum();

    // Adjacent vertices are joined by a single edge whose weight is the
    // ambient distance, so the ratio must be 1 up to round-off.
    let mut adj_dev: f64 = 0.0;
    let probe = dijkstra(&adj, 0);
    for &(v, w) in &adj[0] {
        if probe[v].is_finite() && w > 0.0 {
            adj_dev = adj_dev.max((probe[v] / w - 1.0).abs());
        }
    }

    let mut report = CheckReport::new("quasi_isometry");
    report.push(CheckItem::from_margin(
        "ambient_below_intrinsic",
        lower + 1e-9,
        format!("min(d_graph - d_X) = {lower:.3e} over {pairs} pairs"),
    ));
    report.push(CheckItem::from_margin(
        "intrinsic_below_scaled_ambient",
        upper,
        format!(
            "bound (1+{GRAPH_SLACK})/delta = {bound:.4}, max ratio = {max_ratio:.4}, delta = {delta:.4}"
        ),
    ));
    report.push(CheckItem::from_margin(
        "single_edge_exact",
        1e-6 - adj_dev,
        format!("max |ratio - 1| on edges = {adj_dev:.3e}"),
    ));
    Ok(QuasiIsometryReport {
        report,
        sup_abs: sup,
        delta,
        max_ratio,
        pairs_checked: pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::canned::{equidistant_patch, geodesic_plane_patch, horosphere_patch};

    #[test]
    fn offsets_form_sixteen_neighbourhood_in_dim_two() {
        let offs = primitive_offsets(2);
        assert_eq!(offs.len(), 16);
        assert!(offs.iter().all(|o| o.iter().any(|&c| c != 0)));
        assert!(!offs.contains(&vec![2, 0]), "collinear offsets dropped");
        assert!(offs.contains(&vec![2, 1]));
    }

    #[test]
    fn totally_geodesic_ratios_stay_within_slack() {
        let p = geodesic_plane_patch(1.0, 21, 0.6).unwrap();
        let rep = quasi_isometry_check(&p, 1200).unwrap();
        assert!(rep.report.pass, "{:?}", rep.report);
        assert!((rep.delta - 1.0).abs() < 1e-6);
        assert!(rep.max_ratio >= 1.0 - 1e-9 && rep.max_ratio <= 1.05, "ratio {}", rep.max_ratio);
    }

    #[test]
    fn equidistant_patch_respects_scaled_bound() {
        let t = 0.4;
        let p = equidistant_patch(t, 21, 0.6).unwrap();
        let rep = quasi_isometry_check(&p, 800).unwrap();
        assert!(rep.report.pass, "{:?}", rep.report);
        let delta_want = 1.0 - t.tanh();
        assert!((rep.delta - delta_want).abs() < 1e-3, "delta {}", rep.delta);
        assert!(rep.max_ratio <= (1.0 + GRAPH_SLACK) / delta_want);
    }

    #[test]
    fn horosphere_fails_precondition() {
        let p = horosphere_patch(13, 0.4).unwrap();
        match quasi_isometry_check(&p, 100) {
            Err(Error::EigenvalueOutOfRange(s)) => assert!(s >= 0.99),
            other => panic!("expected precondition failure, got {other:?}"),
        }
    }
}

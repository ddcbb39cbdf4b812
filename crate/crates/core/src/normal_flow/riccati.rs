//! Shape operators of equidistant hypersurfaces N_t(Y). In curvature -1 each
//! principal curvature evolves by the Riccati equation lambda' = 1 - lambda^2,
//! whose flow is the Mobius action lambda -> (lambda + tanh t)/(1 + lambda tanh t);
//! the normal-sphere block contributes coth(t). The integrator is the check,
//! the closed form is the oracle — both are carried side by side.

use crate::error::{Error, Result};
use crate::report::{CheckItem, CheckReport};
use crate::space::DISTANCE_CAP;
use crate::surface::forms::ShapeSpectrum;

/// Fixed step of the Riccati integrator.
pub const RICCATI_STEP: f64 = 1e-3;

/// Closed-form time-t principal curvature of an equidistant hypersurface.
pub fn mobius_shift(lambda: f64, t: f64) -> f64 {
    let th = t.tanh();
    (lambda + th) / (1.0 + lambda * th)
}

/// Integrates lambda' = 1 - lambda^2 from `lambda` over [0, t] with classical
/// fourth-order steps.
pub fn riccati_evolve(lambda: f64, t: f64) -> Result<f64> {
    if !(lambda.abs() < 1.0) {
        return Err(Error::EigenvalueOutOfRange(lambda));
    }
    if !(0.0..=DISTANCE_CAP).contains(&t) {
        return Err(Error::invalid(format!("evolution time {t} outside [0, {DISTANCE_CAP}]")));
    }
    if t == 0.0 {
        return Ok(lambda);
    }
    let n_steps = (t / RICCATI_STEP).ceil() as usize;
    let h = t / n_steps as f64;
    let mut l = lambda;
    let rhs = |l: f64| 1.0 - l * l;
    for _ in 0..n_steps {
        let k1 = rhs(l);
        let k2 = rhs(l + 0.5 * h * k1);
        let k3 = rhs(l + 0.5 * h * k2);
        let k4 = rhs(l + h * k3);
        l += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    Ok(l)
}

/// Spectrum of the second fundamental form of the equidistant hypersurface
/// N_t(Y) induced by a base spectrum at (x, v).
#[derive(Debug, Clone)]
pub struct EquidistantSpectrum {
    pub t: f64,
    pub base_spectrum: ShapeSpectrum,
    /// Tangential entries by Riccati integration, in base eigenvalue order.
    pub tangential_numeric: Vec<f64>,
    /// Tangential entries by the Mobius closed form, same order.
    pub tangential_closed: Vec<f64>,
    /// coth(t) for each normal-sphere direction; `None` when t = 0 and the
    /// block would be singular (tangential-only result).
    pub normal_value: Option<f64>,
    pub normal_directions: usize,
    /// Full ascending (k + normal_directions)-vector of numeric entries;
    /// tangential-only when `normal_value` is `None`.
    pub lambda_t: Vec<f64>,
}

/// Evolves a base spectrum to distance t. `normal_directions` is the number
/// of normal-sphere directions n - k - 1 of the ambient configuration.
pub fn equidistant_spectrum(
    spectrum: &ShapeSpectrum,
    t: f64,
    normal_directions: usize,
) -> Result<EquidistantSpectrum> {
    let mut tangential_numeric = Vec::with_capacity(spectrum.eigenvalues.len());
    let mut tangential_closed = Vec::with_capacity(spectrum.eigenvalues.len());
    for &l in &spectrum.eigenvalues {
        tangential_numeric.push(riccati_evolve(l, t)?);
        tangential_closed.push(mobius_shift(l, t));
    }
    let normal_value = if t > 0.0 && normal_directions > 0 {
        Some(1.0 / t.tanh())
    } else {
        None
    };
    let mut lambda_t = tangential_numeric.clone();
    if let Some(c) = normal_value {
        lambda_t.extend(std::iter::repeat_n(c, normal_directions));
    }
    lambda_t.sort_by(f64::total_cmp);
    Ok(EquidistantSpectrum {
        t,
        base_spectrum: spectrum.clone(),
        tangential_numeric,
        tangential_closed,
        normal_value,
        normal_directions,
        lambda_t,
    })
}

/// Checks that every tangential entry of the evolved spectrum stays at most 1
/// and at least its closed-form value.
pub fn bounded_slice_check(spectrum: &ShapeSpectrum, t: f64) -> Result<CheckReport> {
    if t < 0.0 {
        return Err(Error::invalid("negative slice distance"));
    }
    let es = equidistant_spectrum(spectrum, t, 0)?;
    let mut report = CheckReport::new("bounded_slice");
    let max_t = es
        .tangential_numeric
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    report.push(CheckItem::from_margin(
        "at_most_one",
        1.0 - max_t,
        format!("max tangential entry {max_t:.9} at t = {t}"),
    ));
    let worst_gap = es
        .tangential_numeric
        .iter()
        .zip(&es.tangential_closed)
        .map(|(n, c)| n - (c - 1e-9))
        .fold(f64::INFINITY, f64::min);
    report.push(CheckItem::from_margin(
        "above_closed_form",
        worst_gap,
        "numeric entries against Mobius values".to_string(),
    ));
    Ok(report)
}

/// Partial-sum convexity of the evolved spectrum: for i <= k the i smallest
/// entries dominate the closed-form tangential sums, for i > k each extra
/// entry adds coth(t); the k smallest entries sum to a positive number once
/// t clears the spectral convexity radius.
pub fn k_convexity_check(
    spectrum: &ShapeSpectrum,
    t: f64,
    normal_directions: usize,
) -> Result<CheckReport> {
    let k = spectrum.eigenvalues.len();
    if spectrum.trace().abs() > 1e-6 {
        return Err(Error::invalid(format!(
            "base spectrum is not minimal: trace {}",
            spectrum.trace()
        )));
    }
    if !(spectrum.spectral_radius() < 1.0) {
        return Err(Error::EigenvalueOutOfRange(spectrum.spectral_radius()));
    }
    if !(t > 0.0) {
        return Err(Error::invalid("k-convexity needs t > 0"));
    }
    let es = equidistant_spectrum(spectrum, t, normal_directions)?;
    let mut closed_sorted = es.tangential_closed.clone();
    closed_sorted.sort_by(f64::total_cmp);
    let coth = 1.0 / t.tanh();
    let mut report = CheckReport::new("k_convexity");
    let mut partial = 0.0;
    let mut worst = f64::INFINITY;
    for (i, &l) in es.lambda_t.iter().enumerate() {
        partial += l;
        let bound = if i < k {
            closed_sorted[..=i].iter().sum::<f64>()
        } else {
            closed_sorted.iter().sum::<f64>() + (i + 1 - k) as f64 * coth
        };
        worst = worst.min(partial - (bound - 1e-7));
    }
    report.push(CheckItem::from_margin(
        "partial_sums_dominate",
        worst,
        format!("{} entries, worst slack {worst:.3e}", es.lambda_t.len()),
    ));
    let k_sum: f64 = es.lambda_t[..k].iter().sum();
    let radius = spectrum.spectral_radius().atanh();
    if t > radius {
        report.push(CheckItem::from_margin(
            "k_smallest_sum_positive",
            k_sum,
            format!("sum of {k} smallest = {k_sum:.7} at t = {t} > radius {radius:.4}"),
        ));
    }
    Ok(report)
}

/// Both convexity radii derived from sup |II|: the stated value
/// atanh(1 - sup) and the spectral threshold atanh(sup) above which every
/// evolved tangential entry is nonnegative. They agree only at sup = 1/2;
/// `flagged` marks configurations where the stated radius is below the
/// spectral one. Saturated at the distance cap when sup = 0.
#[derive(Debug, Clone, Copy)]
pub struct ConvexityRadii {
    pub r_paper: f64,
    pub r_spectral: f64,
    pub flagged: bool,
}

impl ConvexityRadii {
    /// Conservative radius for downstream experiments.
    pub fn safe(&self) -> f64 {
        self.r_paper.max(self.r_spectral)
    }
}

pub fn convexity_radius(sup_ii: f64) -> Result<ConvexityRadii> {
    if !(0.0..1.0).contains(&sup_ii) {
        return Err(Error::EigenvalueOutOfRange(sup_ii));
    }
    let r_paper = (1.0 - sup_ii).atanh().min(DISTANCE_CAP);
    let r_spectral = sup_ii.atanh();
    Ok(ConvexityRadii {
        r_paper,
        r_spectral,
        flagged: r_paper < r_spectral - 1e-12,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec_of(ls: &[f64]) -> ShapeSpectrum {
        ShapeSpectrum {
            eigenvalues: ls.to_vec(),
        }
    }

    #[test]
    fn zero_base_evolves_to_tanh() {
        let es = equidistant_spectrum(&spec_of(&[0.0]), 1.0, 0).unwrap();
        assert!((es.tangential_numeric[0] - 0.761_594_155_955_764_9).abs() < 1e-6);
    }

    #[test]
    fn long_time_limit_is_one() {
        let es = equidistant_spectrum(&spec_of(&[0.5]), 15.0, 0).unwrap();
        assert!((es.tangential_numeric[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn cancellation_time_hits_zero() {
        let t = 0.5f64.atanh();
        let es = equidistant_spectrum(&spec_of(&[-0.5]), t, 0).unwrap();
        assert!(es.tangential_numeric[0].abs() < 1e-8);
    }

    #[test]
    fn integrator_tracks_mobius_flow() {
        for &l in &[-0.95, -0.5, 0.0, 0.3, 0.95] {
            for &t in &[0.1, 0.7, 2.0, 5.0, 10.0] {
                let num = riccati_evolve(l, t).unwrap();
                let closed = mobius_shift(l, t);
                assert!(
                    (num - closed).abs() < 1e-7,
                    "lambda={l} t={t}: {num} vs {closed}"
                );
            }
        }
    }

    #[test]
    fn semigroup_property() {
        let (s, t) = (0.6, 1.3);
        for &l in &[-0.8, -0.2, 0.4, 0.9] {
            let two_step = riccati_evolve(riccati_evolve(l, s).unwrap(), t).unwrap();
            let one_step = riccati_evolve(l, s + t).unwrap();
            assert!((two_step - one_step).abs() < 1e-7);
        }
    }

    #[test]
    fn bounded_slice_holds_near_degenerate() {
        let rep = bounded_slice_check(&spec_of(&[0.99]), 5.0).unwrap();
        assert!(rep.pass, "{rep:?}");
        let rep = bounded_slice_check(&spec_of(&[0.0]), 0.0).unwrap();
        assert!(rep.pass);
        for l in [-0.9, -0.5, 0.0, 0.5, 0.9] {
            for t in [0.1, 1.0, 2.0, 3.0] {
                assert!(bounded_slice_check(&spec_of(&[l]), t).unwrap().pass);
            }
        }
    }

    #[test]
    fn minimal_pair_partial_sums() {
        let spec = spec_of(&[-0.5, 0.5]);
        let rep = k_convexity_check(&spec, 1.0, 1).unwrap();
        assert!(rep.pass, "{rep:?}");
        // Sum of the two tangential entries at t = 1.
        let es = equidistant_spectrum(&spec, 1.0, 1).unwrap();
        let sum: f64 = es.tangential_numeric.iter().sum();
        assert!((sum - 1.336_140_122_495_195).abs() < 1e-7, "sum {sum}");
        // The normal block adds coth(1) per direction.
        assert!((es.normal_value.unwrap() - 1.313_035_285_499_331_5).abs() < 1e-12);
        // Fuchsian base: the smallest entry is tanh t.
        let es0 = equidistant_spectrum(&spec_of(&[0.0, 0.0]), 0.7, 1).unwrap();
        assert!((es0.lambda_t[0] - 0.7f64.tanh()).abs() < 1e-7);
    }

    #[test]
    fn convexity_radii_agree_only_at_half() {
        let r = convexity_radius(0.5).unwrap();
        assert!((r.r_paper - 0.5f64.atanh()).abs() < 1e-12);
        assert!((r.r_paper - r.r_spectral).abs() < 1e-12);
        assert!(!r.flagged);
        let r = convexity_radius(0.3).unwrap();
        assert!((r.r_paper - 0.7f64.atanh()).abs() < 1e-12);
        assert!((r.r_spectral - 0.3f64.atanh()).abs() < 1e-12);
        assert!(!r.flagged);
        // Evolved spectrum at the stated radius is nonnegative here.
        let at_r = mobius_shift(-0.3, r.r_paper);
        assert!(at_r >= 0.0);
        let r = convexity_radius(0.8).unwrap();
        assert!(r.flagged, "stated radius below spectral one");
        let r = convexity_radius(0.0).unwrap();
        assert!((r.r_paper - DISTANCE_CAP).abs() < 1e-12, "saturates the cap");
        assert!(r.r_spectral == 0.0);
        assert!(convexity_radius(1.0).is_err());
    }

    #[test]
    fn monotone_in_time() {
        for &l in &[-0.9, 0.0, 0.7] {
            let mut prev = l;
            for i in 1..=30 {
                let t = i as f64 * 0.1;
                let cur = riccati_evolve(l, t).unwrap();
                assert!(cur > prev, "lambda^t not increasing at t={t}");
                prev = cur;
            }
        }
    }
}

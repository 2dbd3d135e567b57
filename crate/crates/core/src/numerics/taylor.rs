//! Root-test diagnostics on Taylor coefficients.
//!
//! For coefficients `a_n` the root-test magnitudes are `c_n = |a_n|^{1/n}` and
//! the radius estimate is `R̂ = 1 / limsup c_n`, approximated by the largest
//! `c_n` among the last three orders. Over the upper half of the orders the
//! diagnostic fits the slope of `log c_n` against `log n`: a geometric series
//! (times any polynomial) has slope `≤ 0` asymptotically while factorial-type
//! growth `a_n ~ (n!)^s` has slope `≈ s`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fit::linear_fit;
use crate::{GfError, Result};

/// Slope of `log c_n` vs `log n` at or above which increasing `c_n` count as
/// growth evidence.
pub const GROWTH_SLOPE: f64 = 0.5;
/// Slope at or below which `c_n` count as bounded.
pub const BOUNDED_SLOPE: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnalyticityVerdict {
    AnalyticEvidence,
    GrowthEvidence,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AnalyticityReport {
    /// Taylor coefficients `a_0 … a_{n_max}`.
    pub coefficients: Vec<Complex64>,
    /// `c_n = |a_n|^{1/n}` for `n ≥ 1` (index 0 holds `|a_0|`); coefficients
    /// under their noise floor count as zero.
    pub root_magnitudes: Vec<f64>,
    /// Per-order noise floor used, if any.
    pub noise_floor: Option<Vec<f64>>,
    /// Estimated radius of convergence; `None` means no finite radius seen.
    pub radius: Option<f64>,
    /// Fitted slope of `log c_n` vs `log n` on the upper half of the orders.
    pub tail_slope: Option<f64>,
    pub monotone_tail: bool,
    pub verdict: AnalyticityVerdict,
}

impl AnalyticityReport {
    pub fn n_max(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn radius_or_inf(&self) -> f64 {
        self.radius.unwrap_or(f64::INFINITY)
    }
}

pub fn classify_analyticity(coefficients: &[Complex64]) -> Result<AnalyticityReport> {
    classify_with_floor(coefficients, None)
}

/// Classifies after zeroing every coefficient whose magnitude is below its
/// floor entry.
pub fn classify_with_floor(
    coefficients: &[Complex64],
    floor: Option<&[f64]>,
) -> Result<AnalyticityReport> {
    let n_max = coefficients.len().saturating_sub(1);
    if n_max < 8 {
        return Err(GfError::invalid(format!(
            "need at least 9 coefficients (n_max >= 8), got {}",
            coefficients.len()
        )));
    }
    if let Some(fl) = floor {
        if fl.len() != coefficients.len() {
            return Err(GfError::invalid(
                "noise floor length differs from coefficient count",
            ));
        }
    }
    if coefficients
        .iter()
        .any(|a| !a.re.is_finite() || !a.im.is_finite())
    {
        return Err(GfError::NonFinite("Taylor coefficients".into()));
    }
    let mag = |n: usize| -> f64 {
        let m = coefficients[n].norm();
        match floor {
            Some(fl) if m <= fl[n] => 0.0,
            _ => m,
        }
    };
    let mut root = Vec::with_capacity(n_max + 1);
    root.push(mag(0));
    for n in 1..=n_max {
        root.push(mag(n).powf(1.0 / n as f64));
    }

    let lo = n_max / 2;
    let tail: Vec<(f64, f64)> = (lo.max(1)..=n_max)
        .filter(|&n| root[n] > 0.0)
        .map(|n| ((n as f64).ln(), root[n].ln()))
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = tail.iter().cloned().unzip();
    let tail_slope = linear_fit(&xs, &ys).map(|f| f.slope);

    let window = &root[lo.max(1)..=n_max];
    let monotone_tail = window.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12)) && window[0] > 0.0;

    let limsup = root[n_max.saturating_sub(2)..=n_max]
        .iter()
        .cloned()
        .fold(0.0, f64::max);
    let radius = if limsup > 0.0 {
        Some(1.0 / limsup)
    } else {
        None
    };

    let verdict = match tail_slope {
        None if tail.is_empty() => AnalyticityVerdict::AnalyticEvidence,
        None => AnalyticityVerdict::Inconclusive,
        Some(s) if s >= GROWTH_SLOPE && monotone_tail => AnalyticityVerdict::GrowthEvidence,
        Some(s) if s <= BOUNDED_SLOPE => AnalyticityVerdict::AnalyticEvidence,
        Some(_) => AnalyticityVerdict::Inconclusive,
    };

    Ok(AnalyticityReport {
        coefficients: coefficients.to_vec(),
        root_magnitudes: root,
        noise_floor: floor.map(|f| f.to_vec()),
        radius,
        tail_slope,
        monotone_tail,
        verdict,
    })
}

/// Natural log of `n!`.
pub fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(v: impl IntoIterator<Item = f64>) -> Vec<Complex64> {
        v.into_iter().map(|x| Complex64::new(x, 0.0)).collect()
    }

    #[test]
    fn exponential_series_is_analytic_with_large_radius() {
        let a = real((0..=20).map(|n| (-ln_factorial(n)).exp()));
        let r = classify_analyticity(&a).unwrap();
        assert_eq!(r.verdict, AnalyticityVerdict::AnalyticEvidence);
        assert!(r.radius.unwrap() > 5.0);
    }

    #[test]
    fn geometric_series_has_unit_radius() {
        let r = classify_analyticity(&real(vec![1.0; 21])).unwrap();
        assert_eq!(r.verdict, AnalyticityVerdict::AnalyticEvidence);
        assert!((r.radius.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn factorial_coefficients_show_growth() {
        let a = real((0..=20).map(|n| ln_factorial(n).exp()));
        let r = classify_analyticity(&a).unwrap();
        assert_eq!(r.verdict, AnalyticityVerdict::GrowthEvidence);
    }

    #[test]
    fn zero_series_has_infinite_radius() {
        let r = classify_analyticity(&real(vec![0.0; 21])).unwrap();
        assert_eq!(r.verdict, AnalyticityVerdict::AnalyticEvidence);
        assert!(r.radius.is_none());
    }

    #[test]
    fn too_few_coefficients_rejected() {
        assert!(classify_analyticity(&real(vec![1.0; 8])).is_err());
    }

    #[test]
    fn noise_floor_zeroes_coefficients() {
        let a = real((0..=20).map(|n| 1e-20 * ln_factorial(n).exp()));
        let floor = vec![1.0; 21];
        let r = classify_with_floor(&a, Some(&floor)).unwrap();
        assert!(r.radius.is_none());
        assert_eq!(r.verdict, AnalyticityVerdict::AnalyticEvidence);
    }
}

use serde::{Deserialize, Serialize};

use crate::mollifier::HSchedule;
use crate::numerics::linear_fit;
use crate::{GfError, Result};

/// Slope of the log-product above which the gate fails.
pub const GATE_SLOPE_TOL: f64 = 1e-6;

/// `C = Σ_α c_α sup|a_α|` with `c_0 = 1`; `c_alpha[α-1]` holds `c_α`.
pub fn growth_constant(sup_coefficients: &[f64], c_alpha: &[f64]) -> Result<f64> {
    if sup_coefficients.len() != c_alpha.len() + 1 {
        return Err(GfError::invalid(format!(
            "{} coefficient bounds need {} values of c_alpha, got {}",
            sup_coefficients.len(),
            sup_coefficients.len().saturating_sub(1),
            c_alpha.len()
        )));
    }
    if sup_coefficients
        .iter()
        .chain(c_alpha)
        .any(|v| !(v.is_finite() && *v >= 0.0))
    {
        return Err(GfError::invalid(
            "coefficient bounds and c_alpha must be finite and non-negative",
        ));
    }
    Ok(sup_coefficients[0]
        + sup_coefficients[1..]
            .iter()
            .zip(c_alpha)
            .map(|(a, c)| a * c)
            .sum::<f64>())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GateRow {
    pub p: usize,
    /// `C h(ε)^{-m} + p ln ε` along the ladder.
    pub log_products: Vec<f64>,
    /// Fitted slope against `ln(1/ε)` over the last half of the ladder.
    pub slope: f64,
    pub passes: bool,
}

/// Whether `e^{C h(ε)^{-m}} = O(ε^{-p})` holds along a ladder, for each
/// candidate `p`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GrowthReport {
    pub schedule: HSchedule,
    pub constant: f64,
    pub order: usize,
    pub epsilons: Vec<f64>,
    pub h_values: Vec<f64>,
    /// `C h(ε)^{-m}`, the log of the growth factor.
    pub log_growth: Vec<f64>,
    pub rows: Vec<GateRow>,
    pub minimal_p: Option<usize>,
}

impl GrowthReport {
    pub fn passed(&self) -> bool {
        self.minimal_p.is_some()
    }

    /// `Err(Gate)` unless some `p` passes.
    pub fn require(&self) -> Result<usize> {
        self.minimal_p.ok_or_else(|| {
            GfError::Gate(format!(
                "{} schedule: exp(C h^-{}) with C = {:.4} is not O(eps^-p) for p <= {}",
                self.schedule.tag(),
                self.order,
                self.constant,
                self.rows.len().saturating_sub(1)
            ))
        })
    }
}

/// Tests `p = 0..=p_max` in order; the last half of the ladder (at least
/// three values) decides through the fitted slope of the log-product.
pub fn check_h_condition(
    schedule: HSchedule,
    constant: f64,
    order: usize,
    ladder: &[f64],
    p_max: usize,
) -> Result<GrowthReport> {
    if ladder.len() < 3 {
        return Err(GfError::invalid(
            "the gate needs a ladder of at least 3 values",
        ));
    }
    if !(constant.is_finite() && constant >= 0.0) || order == 0 {
        return Err(GfError::invalid("gate needs C >= 0 and order m >= 1"));
    }
    schedule.validate(ladder)?;
    let h_values: Vec<f64> = ladder.iter().map(|&e| schedule.eval(e)).collect();
    let log_growth: Vec<f64> = h_values
        .iter()
        .map(|h| constant * h.powi(-(order as i32)))
        .collect();
    let take = (ladder.len() / 2).max(3).min(ladder.len());
    let start = ladder.len() - take;
    let xs: Vec<f64> = ladder[start..].iter().map(|e| (1.0 / e).ln()).collect();
    let mut rows = Vec::new();
    let mut minimal_p = None;
    for p in 0..=p_max {
        let log_products: Vec<f64> = ladder
            .iter()
            .zip(&log_growth)
            .map(|(e, g)| g + p as f64 * e.ln())
            .collect();
        let fit = linear_fit(&xs, &log_products[start..])
            .ok_or_else(|| GfError::invalid("degenerate ladder"))?;
        let passes = fit.slope <= GATE_SLOPE_TOL;
        if passes && minimal_p.is_none() {
            minimal_p = Some(p);
        }
        rows.push(GateRow {
            p,
            log_products,
            slope: fit.slope,
            passes,
        });
    }
    Ok(GrowthReport {
        schedule,
        constant,
        order,
        epsilons: ladder.to_vec(),
        h_values,
        log_growth,
        rows,
        minimal_p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::make_ladder;

    #[test]
    fn log_schedule_needs_p_at_least_c() {
        let l = make_ladder(0.1, 0.5, 8).unwrap();
        let r = check_h_condition(HSchedule::Log, 2.0, 1, &l.values, 6).unwrap();
        assert_eq!(r.minimal_p, Some(2));
        let r = check_h_condition(HSchedule::Log, 1.3, 1, &l.values, 6).unwrap();
        assert_eq!(r.minimal_p, Some(2));
    }

    #[test]
    fn linear_schedule_fails() {
        let l = make_ladder(0.5, 0.5, 10).unwrap();
        let r = check_h_condition(HSchedule::Linear, 2.0, 1, &l.values, 12).unwrap();
        assert!(r.minimal_p.is_none());
        assert!(matches!(r.require(), Err(GfError::Gate(_))));
    }

    #[test]
    fn zero_constant_passes_at_zero() {
        let l = make_ladder(0.1, 0.5, 5).unwrap();
        assert_eq!(
            check_h_condition(HSchedule::Linear, 0.0, 1, &l.values, 3)
                .unwrap()
                .minimal_p,
            Some(0)
        );
    }

    #[test]
    fn growth_constant_sums_weighted_bounds() {
        assert_eq!(growth_constant(&[0.5, 2.0], &[1.5]).unwrap(), 3.5);
        assert!(growth_constant(&[0.5, 2.0], &[]).is_err());
    }
}

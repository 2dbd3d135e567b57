use serde::{Deserialize, Serialize};

use crate::{GfError, Result};

/// Non-decreasing scale map `h: (0,1) → (0,1)` with `h(ε) → 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum HSchedule {
    /// `h(ε) = ε`.
    Linear,
    /// `h(ε) = 1/ln(1/ε)`, defined for `ε < 1/e`.
    Log,
    /// `h(ε) = coeff · ε^exponent`.
    Custom { coeff: f64, exponent: f64 },
}

impl HSchedule {
    pub fn eval(&self, eps: f64) -> f64 {
        match *self {
            HSchedule::Linear => eps,
            HSchedule::Log => 1.0 / (1.0 / eps).ln(),
            HSchedule::Custom { coeff, exponent } => coeff * eps.powf(exponent),
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            HSchedule::Linear => "linear",
            HSchedule::Log => "log",
            HSchedule::Custom { .. } => "custom",
        }
    }

    /// Checks `h(ε) ∈ (0,1)`, monotonicity and a vanishing trend on a
    /// strictly decreasing ladder.
    pub fn validate(&self, ladder: &[f64]) -> Result<()> {
        if let HSchedule::Custom { coeff, exponent } = *self {
            if !(coeff > 0.0 && exponent > 0.0) {
                return Err(GfError::invalid(
                    "custom schedule needs coeff > 0 and exponent > 0",
                ));
            }
        }
        let hs: Vec<f64> = ladder.iter().map(|&e| self.eval(e)).collect();
        for (&e, &h) in ladder.iter().zip(&hs) {
            if !(h > 0.0 && h < 1.0) {
                return Err(GfError::invalid(format!(
                    "{} schedule gives h({e}) = {h}, outside (0, 1)",
                    self.tag()
                )));
            }
        }
        if hs.windows(2).any(|w| w[1] > w[0]) {
            return Err(GfError::invalid(format!(
                "{} schedule is not non-decreasing in epsilon",
                self.tag()
            )));
        }
        if hs.len() >= 2 && hs[hs.len() - 1] >= hs[0] {
            return Err(GfError::invalid(format!(
                "{} schedule does not decrease along the ladder",
                self.tag()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedules_evaluate() {
        assert_eq!(HSchedule::Linear.eval(0.25), 0.25);
        assert!((HSchedule::Log.eval((-2.0f64).exp()) - 0.5).abs() < 1e-15);
        assert!(
            (HSchedule::Custom {
                coeff: 0.5,
                exponent: 2.0
            }
            .eval(0.1)
                - 0.005)
                .abs()
                < 1e-15
        );
    }

    #[test]
    fn validation() {
        let ladder = [0.2, 0.1, 0.05];
        assert!(HSchedule::Linear.validate(&ladder).is_ok());
        assert!(HSchedule::Log.validate(&ladder).is_ok());
        assert!(HSchedule::Log.validate(&[0.5, 0.25, 0.1]).is_err());
        assert!(HSchedule::Custom {
            coeff: 2.0,
            exponent: 1.0
        }
        .validate(&[0.9, 0.5, 0.1])
        .is_err());
    }
}

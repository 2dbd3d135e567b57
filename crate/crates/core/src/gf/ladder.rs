use serde::{Deserialize, Serialize};

use crate::{GfError, Result};

/// Strictly decreasing finite sample of ε values in `(0, 1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonLadder {
    pub values: Vec<f64>,
    pub count: usize,
}

impl EpsilonLadder {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let l = Self {
            count: values.len(),
            values,
        };
        l.validate()?;
        Ok(l)
    }

    pub fn validate(&self) -> Result<()> {
        if self.count != self.values.len() {
            return Err(GfError::invalid("ladder count does not match its values"));
        }
        if self.count < 3 {
            return Err(GfError::invalid(format!(
                "ladder needs at least 3 values, got {}",
                self.count
            )));
        }
        if let Some(v) = self.values.iter().find(|&&v| !(v > 0.0 && v < 1.0)) {
            return Err(GfError::invalid(format!("ladder value {v} outside (0, 1)")));
        }
        if self.values.windows(2).any(|w| w[1] >= w[0]) {
            return Err(GfError::invalid("ladder must be strictly decreasing"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn smallest(&self) -> f64 {
        self.values[self.count - 1]
    }

    pub fn largest(&self) -> f64 {
        self.values[0]
    }
}

/// `values[k] = e0 · ratio^k`, `k < count`.
pub fn make_ladder(e0: f64, ratio: f64, count: usize) -> Result<EpsilonLadder> {
    if !(e0 > 0.0 && e0 < 1.0) {
        return Err(GfError::invalid(format!("e0 must lie in (0, 1), got {e0}")));
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(GfError::invalid(format!(
            "ratio must lie in (0, 1), got {ratio}"
        )));
    }
    let values: Vec<f64> = (0..count).map(|k| e0 * ratio.powi(k as i32)).collect();
    if values.last().is_some_and(|&v| v <= 0.0) {
        return Err(GfError::invalid("ladder underflows to zero"));
    }
    EpsilonLadder::new(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_values() {
        assert_eq!(
            make_ladder(0.5, 0.5, 3).unwrap().values,
            vec![0.5, 0.25, 0.125]
        );
        let l = make_ladder(0.9, 0.3, 5).unwrap();
        assert_eq!(l.count, 5);
        assert!(l.values.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(make_ladder(0.1, 0.1, 2).is_err());
        assert!(make_ladder(1.0, 0.5, 4).is_err());
        assert!(make_ladder(0.5, 1.0, 4).is_err());
        assert!(EpsilonLadder::new(vec![0.5, 0.5, 0.1]).is_err());
    }
}

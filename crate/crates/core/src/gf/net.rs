use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::EpsilonLadder;
use crate::mollifier::fmt17;
use crate::numerics::GridSpec;
use crate::{GfError, Result};

/// Representative `(u_ε)` of a generalized function: one sampled field per
/// ladder value, all on the same grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Net {
    pub label: String,
    pub ladder: EpsilonLadder,
    pub grid: GridSpec,
    pub samples: Vec<Vec<Complex64>>,
    /// How a distribution was embedded, when the net came from one.
    #[serde(default)]
    pub embedding: Option<String>,
}

impl Net {
    pub fn new(
        label: impl Into<String>,
        ladder: EpsilonLadder,
        grid: GridSpec,
        samples: Vec<Vec<Complex64>>,
    ) -> Result<Self> {
        let net = Self {
            label: label.into(),
            ladder,
            grid,
            samples,
            embedding: None,
        };
        net.validate()?;
        Ok(net)
    }

    pub fn validate(&self) -> Result<()> {
        self.ladder.validate()?;
        if self.samples.len() != self.ladder.count {
            return Err(GfError::invalid(format!(
                "net has {} sample arrays for {} ladder values",
                self.samples.len(),
                self.ladder.count
            )));
        }
        let n = self.grid.len();
        if let Some(bad) = self.samples.iter().position(|s| s.len() != n) {
            return Err(GfError::invalid(format!(
                "sample array {bad} does not match the grid size {n}"
            )));
        }
        if self
            .samples
            .iter()
            .flatten()
            .any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(GfError::NonFinite(format!("net '{}'", self.label)));
        }
        Ok(())
    }

    /// Net built from `f(ε, point)` evaluated on every grid point.
    pub fn from_fn(
        label: impl Into<String>,
        ladder: EpsilonLadder,
        grid: GridSpec,
        f: impl Fn(f64, &[f64]) -> Complex64,
    ) -> Result<Self> {
        let samples = ladder
            .values
            .iter()
            .map(|&eps| (0..grid.len()).map(|i| f(eps, &grid.point(i))).collect())
            .collect();
        Self::new(label, ladder, grid, samples)
    }

    /// `a·self + b·other` on a shared ladder and grid.
    pub fn linear_combination(&self, a: Complex64, other: &Net, b: Complex64) -> Result<Net> {
        self.check_compatible(other)?;
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(u, v)| u.iter().zip(v).map(|(x, y)| a * x + b * y).collect())
            .collect();
        Net::new(
            format!("({a})*{} + ({b})*{}", self.label, other.label),
            self.ladder.clone(),
            self.grid.clone(),
            samples,
        )
    }

    pub fn sub(&self, other: &Net) -> Result<Net> {
        let one = Complex64::new(1.0, 0.0);
        let mut d = self.linear_combination(one, other, -one)?;
        d.label = format!("{} - {}", self.label, other.label);
        Ok(d)
    }

    pub fn check_compatible(&self, other: &Net) -> Result<()> {
        if self.ladder != other.ladder {
            return Err(GfError::invalid("nets live on different ladders"));
        }
        if self.grid != other.grid {
            return Err(GfError::invalid("nets live on different grids"));
        }
        Ok(())
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_vec_pretty(self)?)?;
        Ok(())
    }

    pub fn read_json(path: &Path) -> Result<Net> {
        let net: Net = serde_json::from_slice(&std::fs::read(path)?)?;
        net.validate()?;
        Ok(net)
    }

    /// One CSV per ladder value is often unwieldy; this writes a single long
    /// table `(epsilon, point coordinates..., re, im)`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["epsilon".to_string()];
        header.extend(if self.grid.dim() == 1 {
            vec!["x".to_string()]
        } else {
            vec!["t".into(), "x".into()]
        });
        header.extend(["re".to_string(), "im".to_string()]);
        w.write_record(&header)?;
        for (eps, field) in self.ladder.values.iter().zip(&self.samples) {
            for (i, v) in field.iter().enumerate() {
                let mut rec = vec![fmt17(*eps)];
                rec.extend(self.grid.point(i).into_iter().map(fmt17));
                rec.push(fmt17(v.re));
                rec.push(fmt17(v.im));
                w.write_record(&rec)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Net;
use crate::mollifier::fmt17;
use crate::numerics::fd::derivative_2d;
use crate::numerics::{derivative_1d, linear_fit, quadratic_curvature, GridSpec, Window};
use crate::{GfError, Result};

/// Finite-difference accuracy used for derivatives of nets.
pub const FD_ACCURACY: usize = 6;
/// RMS log-residual above which a power law is rejected.
pub const RESIDUAL_LIMIT: f64 = 0.1;
/// Slack on the decay order when testing `O(ε^q)`.
pub const ORDER_SLACK: f64 = 0.2;
/// Sup-norms at or below this level count as vanished.
pub const DEFAULT_NOISE_FLOOR: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Moderation {
    Moderate,
    NotModerate,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModerationReport {
    pub label: String,
    pub alpha: Vec<usize>,
    pub epsilons: Vec<f64>,
    pub sup_norms: Vec<f64>,
    /// Slope `m̂` of `log sup` against `log(1/ε)`; `None` when the net vanishes.
    pub exponent: Option<f64>,
    /// Steepest slope between consecutive ladder points.
    pub max_local_slope: Option<f64>,
    pub residual: f64,
    pub curvature: Option<f64>,
    pub verdict: Moderation,
    pub embedding: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NegligibilityReport {
    pub label: String,
    pub alpha: Vec<usize>,
    pub epsilons: Vec<f64>,
    pub sup_norms: Vec<f64>,
    pub noise_floor: f64,
    /// Fitted `d` in `sup ≈ C ε^d`; `None` when every sup-norm vanished.
    pub decay_order: Option<f64>,
    pub q_max: usize,
    /// `(q, pass)` for `q = 1..=q_max`.
    pub passes: Vec<(usize, bool)>,
    /// `max sup/ε^q` along the ladder, per probed `q`.
    pub constants: Vec<f64>,
    pub embedding: Option<String>,
}

impl NegligibilityReport {
    pub fn passes_at(&self, q: usize) -> bool {
        self.passes
            .iter()
            .find(|(k, _)| *k == q)
            .map(|p| p.1)
            .unwrap_or(q == 0)
    }

    /// Largest probed `q` that passes (0 if none).
    pub fn max_passing(&self) -> usize {
        self.passes
            .iter()
            .filter(|p| p.1)
            .map(|p| p.0)
            .max()
            .unwrap_or(0)
    }
}

#[derive(Clone, Debug)]
pub struct NegligibilityOptions {
    pub window: Option<Window>,
    pub noise_floor: f64,
}

impl Default for NegligibilityOptions {
    fn default() -> Self {
        Self {
            window: None,
            noise_floor: DEFAULT_NOISE_FLOOR,
        }
    }
}

fn derivative_field(
    grid: &GridSpec,
    field: &[Complex64],
    alpha: &[usize],
) -> Result<Vec<Complex64>> {
    match grid {
        GridSpec::One(g) => derivative_1d(field, g.spacing(), alpha[0], FD_ACCURACY, g.periodic),
        GridSpec::Two(g) => {
            let (rows, cols) = g.shape();
            let dt = derivative_2d(
                field,
                rows,
                cols,
                0,
                g.t.spacing(),
                alpha[0],
                FD_ACCURACY,
                g.t.periodic,
            )?;
            derivative_2d(
                &dt,
                rows,
                cols,
                1,
                g.x.spacing(),
                alpha[1],
                FD_ACCURACY,
                g.x.periodic,
            )
        }
    }
}

/// Per-ε sup-norms of `∂^α u_ε` over `window`.
pub fn sup_norms(net: &Net, alpha: &[usize], window: &Window) -> Result<Vec<f64>> {
    if alpha.len() != net.grid.dim() {
        return Err(GfError::invalid(format!(
            "multi-index {alpha:?} does not match a {}-d grid",
            net.grid.dim()
        )));
    }
    window.check_inside(&net.grid)?;
    let idx = window.flat_indices(&net.grid);
    net.samples
        .par_iter()
        .map(|field| {
            let d = derivative_field(&net.grid, field, alpha)?;
            let s = idx.iter().map(|&i| d[i].norm()).fold(0.0, f64::max);
            if s.is_finite() {
                Ok(s)
            } else {
                Err(GfError::NonFinite(format!(
                    "derivative {alpha:?} of '{}'",
                    net.label
                )))
            }
        })
        .collect()
}

fn log_pairs(eps: &[f64], sups: &[f64], floor: f64) -> (Vec<f64>, Vec<f64>) {
    eps.iter()
        .zip(sups)
        .filter(|(_, &s)| s > floor)
        .map(|(&e, &s)| ((1.0 / e).ln(), s.ln()))
        .unzip()
}

pub fn estimate_moderateness(
    net: &Net,
    alpha: &[usize],
    window: &Window,
) -> Result<ModerationReport> {
    let sups = sup_norms(net, alpha, window)?;
    let eps = &net.ladder.values;
    let (x, y) = log_pairs(eps, &sups, 0.0);
    let fit = linear_fit(&x, &y);
    let curvature = quadratic_curvature(&x, &y);
    let max_local_slope = x
        .windows(2)
        .zip(y.windows(2))
        .map(|(a, b)| (b[1] - b[0]) / (a[1] - a[0]))
        .reduce(f64::max);
    let (exponent, residual) = match fit {
        Some(f) => (Some(f.slope), f.residual),
        None => (None, 0.0),
    };
    let verdict = if residual > RESIDUAL_LIMIT && curvature.is_some_and(|c| c > 0.0) {
        Moderation::NotModerate
    } else {
        Moderation::Moderate
    };
    Ok(ModerationReport {
        label: net.label.clone(),
        alpha: alpha.to_vec(),
        epsilons: eps.clone(),
        sup_norms: sups,
        exponent,
        max_local_slope,
        residual,
        curvature,
        verdict,
        embedding: net.embedding.clone(),
    })
}

/// Negligibility probe over the default interior window.
pub fn test_negligibility(net: &Net, alpha: &[usize], q_max: usize) -> Result<NegligibilityReport> {
    test_negligibility_with(net, alpha, q_max, &NegligibilityOptions::default())
}

/// Passes at `q` when the sup-norms decay with fitted order `d ≥ q − 0.2`, or
/// when all of them sit under the noise floor. The first vanished sup-norm
/// enters the fit at the floor value, which can only understate `d`.
pub fn test_negligibility_with(
    net: &Net,
    alpha: &[usize],
    q_max: usize,
    opts: &NegligibilityOptions,
) -> Result<NegligibilityReport> {
    let window = opts
        .window
        .clone()
        .unwrap_or_else(|| Window::interior(&net.grid, 0.1));
    let sups = sup_norms(net, alpha, &window)?;
    let eps = &net.ladder.values;
    let floor = opts.noise_floor;
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (&e, &s) in eps.iter().zip(&sups) {
        if s > floor {
            x.push((1.0 / e).ln());
            y.push(s.ln());
        } else {
            if !x.is_empty() {
                x.push((1.0 / e).ln());
                y.push(floor.ln());
            }
            break;
        }
    }
    // after the first vanished entry, later ones must stay near the floor
    let vanished_tail = sups.iter().skip(x.len()).all(|&s| s <= 100.0 * floor);
    let all_vanished = sups.iter().all(|&s| s <= floor);
    let decay_order = if all_vanished {
        None
    } else {
        linear_fit(&x, &y).map(|f| -f.slope)
    };
    let passes = (1..=q_max)
        .map(|q| {
            let ok = all_vanished
                || (vanished_tail && decay_order.is_some_and(|d| d >= q as f64 - ORDER_SLACK));
            (q, ok)
        })
        .collect();
    let constants = (1..=q_max)
        .map(|q| {
            eps.iter()
                .zip(&sups)
                .map(|(e, s)| s / e.powi(q as i32))
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(NegligibilityReport {
        label: net.label.clone(),
        alpha: alpha.to_vec(),
        epsilons: eps.clone(),
        sup_norms: sups,
        noise_floor: floor,
        decay_order,
        q_max,
        passes,
        constants,
        embedding: net.embedding.clone(),
    })
}

fn write_sup_csv(path: &Path, eps: &[f64], sups: &[f64], alpha: &[usize]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["epsilon", "sup_norm", "alpha"])?;
    let a = alpha
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(";");
    for (e, s) in eps.iter().zip(sups) {
        w.write_record([fmt17(*e), fmt17(*s), a.clone()])?;
    }
    w.flush()?;
    Ok(())
}

impl ModerationReport {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_sup_csv(path, &self.epsilons, &self.sup_norms, &self.alpha)
    }
}

impl NegligibilityReport {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_sup_csv(path, &self.epsilons, &self.sup_norms, &self.alpha)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::make_ladder;
    use crate::numerics::Grid1D;

    fn planted(s: f64) -> Net {
        let ladder = make_ladder(0.5, 0.5, 6).unwrap();
        let grid = GridSpec::One(Grid1D::symmetric(1.0, 101).unwrap());
        Net::from_fn("planted", ladder, grid, |e, p| {
            Complex64::new(e.powf(s) * (-p[0] * p[0]).exp(), 0.0)
        })
        .unwrap()
    }

    #[test]
    fn planted_exponents_are_recovered() {
        for s in [-3.0, -1.0, 0.0, 2.0] {
            let net = planted(s);
            let w = Window::interior(&net.grid, 0.1);
            let m = estimate_moderateness(&net, &[0], &w).unwrap();
            assert!((m.exponent.unwrap() + s).abs() < 0.2, "s = {s}");
            assert_eq!(m.verdict, Moderation::Moderate);
            let n = test_negligibility(&net, &[0], 4).unwrap();
            if s > 0.0 {
                assert!((n.decay_order.unwrap() - s).abs() < 0.2);
            }
        }
    }

    #[test]
    fn exponential_growth_is_not_moderate() {
        let ladder = make_ladder(0.5, 0.7, 8).unwrap();
        let grid = GridSpec::One(Grid1D::symmetric(1.0, 21).unwrap());
        let net = Net::from_fn("exp", ladder, grid, |e, _| {
            Complex64::new((1.0 / e).exp(), 0.0)
        })
        .unwrap();
        let m = estimate_moderateness(&net, &[0], &Window::interior(&net.grid, 0.1)).unwrap();
        assert_eq!(m.verdict, Moderation::NotModerate);
    }

    #[test]
    fn negligibility_levels() {
        let net = planted(2.0);
        let r = test_negligibility(&net, &[0], 4).unwrap();
        assert!(r.passes_at(1) && r.passes_at(2) && !r.passes_at(3));
        let zero = planted(2.0)
            .linear_combination(
                Complex64::new(0.0, 0.0),
                &planted(2.0),
                Complex64::new(0.0, 0.0),
            )
            .unwrap();
        let z = test_negligibility(&zero, &[0], 6).unwrap();
        assert!(z.passes.iter().all(|p| p.1));
    }
}

use std::cell::Cell;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CoefficientB, Source};
use crate::numerics::fd::derivative_1d;
use crate::numerics::quad::adaptive;
use crate::numerics::{Grid1D, SpectralPlan};
use crate::{GfError, Result};

/// Exponents above this count as positive (and abort the solve).
pub const EXPONENT_SLACK: f64 = 1e-12;
const REL_TOL: f64 = 1e-12;
const ABS_SCALE: f64 = 1e-15;
const MAX_SEGMENTS: usize = 2000;

/// Which integral representation produced a node value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    /// `ξ < 0`: `∫_0^t`.
    FromZero,
    /// `ξ > 0`, `t > 0`: `-∫_t^∞`.
    UpperTail,
    /// `ξ > 0`, `t < 0`: `∫_{-∞}^t`.
    LowerTail,
    /// `ξ > 0`, `t = 0`: mean of the one-sided limits.
    Interface,
    /// `ξ = 0`: mean of the `ξ < 0` and `ξ > 0` formulas.
    ZeroMode,
}

/// `û(t, ξ)` on the `t` grid and the FFT frequencies of the `x` grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BranchSolution {
    pub t: Grid1D,
    pub xi: Vec<f64>,
    /// Row-major over `(t, ξ)`; the `t = 0` row holds the mean of the
    /// one-sided limits.
    pub values: Vec<Complex64>,
    pub zero_index: usize,
    pub u_plus: Vec<Complex64>,
    pub u_minus: Vec<Complex64>,
    /// `û(0⁺) − û(0⁻)`.
    pub jump: Vec<Complex64>,
    /// `G(ξ) = ∫ e^{-B(s)ξ} f̂(s, ξ) ds` for `ξ ≥ 0`, zero for `ξ < 0`.
    pub obstruction: Vec<Complex64>,
    /// Largest exponent `(B(t) − B(s))ξ` met by the quadratures.
    pub max_exponent: f64,
}

impl BranchSolution {
    pub fn at(&self, it: usize, k: usize) -> Complex64 {
        self.values[it * self.xi.len() + k]
    }

    pub fn branch(&self, it: usize, k: usize) -> Branch {
        let xi = self.xi[k];
        if xi < 0.0 {
            Branch::FromZero
        } else if xi == 0.0 {
            Branch::ZeroMode
        } else if it > self.zero_index {
            Branch::UpperTail
        } else if it < self.zero_index {
            Branch::LowerTail
        } else {
            Branch::Interface
        }
    }

    /// Rows of `û(t, ·)` transformed back to `x` on `x_grid`.
    pub fn to_physical(&self, x_grid: &Grid1D) -> Vec<Complex64> {
        let plan = SpectralPlan::new(x_grid);
        self.values
            .par_chunks(self.xi.len())
            .flat_map_iter(|row| plan.inverse(row))
            .collect()
    }
}

struct Panel<'a> {
    source: &'a dyn Source,
    coeff: &'a CoefficientB,
    xi: f64,
    support: (f64, f64),
    scale: f64,
}

impl Panel<'_> {
    /// `∫_a^b e^{(B(t_ref) − B(s))ξ} f̂(s, ξ) ds` restricted to the support.
    fn integral(&self, a: f64, b: f64, t_ref: f64, b_ref: f64) -> Result<Complex64> {
        let lo = a.max(self.support.0);
        let hi = b.min(self.support.1);
        if lo >= hi {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let worst = Cell::new(f64::NEG_INFINITY);
        let f = |s: f64| {
            let e = (b_ref - self.coeff.big_b(s)) * self.xi;
            if e > worst.get() {
                worst.set(e);
            }
            self.source.hat(s, self.xi) * e.exp()
        };
        let abs_tol = ABS_SCALE * self.scale * (hi - lo) / (self.support.1 - self.support.0);
        let r = adaptive(f, lo, hi, abs_tol, REL_TOL, MAX_SEGMENTS)?;
        if worst.get() > EXPONENT_SLACK {
            return Err(GfError::PositiveExponent {
                t: t_ref,
                xi: self.xi,
                exponent: worst.get(),
            });
        }
        Ok(r.value)
    }
}

fn step_factor(db: f64, xi: f64, t: f64) -> Result<f64> {
    let e = db * xi;
    if e > EXPONENT_SLACK {
        return Err(GfError::PositiveExponent { t, xi, exponent: e });
    }
    Ok(e.exp())
}

/// `G(ξ) = ∫ e^{-B(s)ξ} f̂(s, ξ) ds` and `∫ e^{-B(s)ξ} |f̂(s, ξ)| ds`.
pub(crate) fn obstruction_integrals(
    source: &dyn Source,
    coeff: &CoefficientB,
    xi: f64,
) -> Result<(Complex64, f64)> {
    let (lo, hi) = source.t_support();
    if lo >= hi || xi < 0.0 {
        return Ok((Complex64::new(0.0, 0.0), 0.0));
    }
    let weight = |s: f64| (-coeff.big_b(s) * xi).exp();
    let abs = adaptive(
        |s| weight(s) * source.hat(s, xi).norm(),
        lo,
        hi,
        1e-300,
        1e-8,
        MAX_SEGMENTS,
    )?
    .value;
    if abs == 0.0 {
        return Ok((Complex64::new(0.0, 0.0), 0.0));
    }
    let g = adaptive(
        |s| source.hat(s, xi) * weight(s),
        lo,
        hi,
        1e-14 * abs,
        0.0,
        MAX_SEGMENTS,
    )?
    .value;
    Ok((g, abs))
}

/// Jump `û(0⁺, ξ) − û(0⁻, ξ) = −∫ e^{-B(s)ξ} f̂(s, ξ) ds` for `ξ > 0`, zero
/// for `ξ < 0` and half the `ξ > 0` formula at `ξ = 0`.
pub fn jump_at_zero(source: &dyn Source, coeff: &CoefficientB, xi: f64) -> Result<Complex64> {
    if xi < 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (g, _) = obstruction_integrals(source, coeff, xi)?;
    Ok(if xi == 0.0 { -0.5 * g } else { -g })
}

/// Solves `∂_t û − b(t)ξû = f̂` mode by mode with the branch choice that keeps
/// every exponent non-positive. `t_grid` must contain 0 as a node and `xi`
/// are the frequencies to solve for.
pub fn solve_hat(
    source: &dyn Source,
    coeff: &CoefficientB,
    t_grid: &Grid1D,
    xi: &[f64],
) -> Result<BranchSolution> {
    let ts = t_grid.coords();
    let zero_index = t_grid.nearest(0.0);
    if ts[zero_index].abs() > 1e-12 * t_grid.spacing() {
        return Err(GfError::invalid("t grid must contain 0 as a node"));
    }
    let bs: Vec<f64> = ts.iter().map(|&t| coeff.big_b(t)).collect();
    let support = source.t_support();
    let m = ts.len();
    let z = zero_index;

    let columns: Vec<Result<(Vec<Complex64>, Complex64, Complex64, Complex64, f64)>> = xi
        .par_iter()
        .map(|&xi| {
            let panel = Panel {
                source,
                coeff,
                xi,
                support,
                scale: source.hat_bound(xi),
            };
            let mut worst = f64::NEG_INFINITY;
            let mut track = |db: f64| worst = worst.max(db * xi);
            let zero = Complex64::new(0.0, 0.0);

            // ξ ≤ 0 representation: ∫_0^t
            let from_zero = |track: &mut dyn FnMut(f64)| -> Result<Vec<Complex64>> {
                let mut a = vec![zero; m];
                for j in z + 1..m {
                    track(bs[j] - bs[j - 1]);
                    a[j] = a[j - 1] * step_factor(bs[j] - bs[j - 1], xi, ts[j])?
                        + panel.integral(ts[j - 1], ts[j], ts[j], bs[j])?;
                }
                for j in (0..z).rev() {
                    track(bs[j] - bs[j + 1]);
                    a[j] = a[j + 1] * step_factor(bs[j] - bs[j + 1], xi, ts[j])?
                        - panel.integral(ts[j], ts[j + 1], ts[j], bs[j])?;
                }
                Ok(a)
            };
            // ξ ≥ 0 representation: −∫_t^∞ above 0, ∫_{-∞}^t below
            let tails =
                |track: &mut dyn FnMut(f64)| -> Result<(Vec<Complex64>, Complex64, Complex64)> {
                    let mut p = vec![zero; m];
                    p[m - 1] = -panel.integral(
                        ts[m - 1],
                        support.1.max(ts[m - 1]),
                        ts[m - 1],
                        bs[m - 1],
                    )?;
                    for j in (z..m - 1).rev() {
                        track(bs[j] - bs[j + 1]);
                        p[j] = p[j + 1] * step_factor(bs[j] - bs[j + 1], xi, ts[j])?
                            - panel.integral(ts[j], ts[j + 1], ts[j], bs[j])?;
                    }
                    let mut q = vec![zero; m];
                    q[0] = panel.integral(support.0.min(ts[0]), ts[0], ts[0], bs[0])?;
                    for j in 1..=z {
                        track(bs[j] - bs[j - 1]);
                        q[j] = q[j - 1] * step_factor(bs[j] - bs[j - 1], xi, ts[j])?
                            + panel.integral(ts[j - 1], ts[j], ts[j], bs[j])?;
                    }
                    let (up, down) = (p[z], q[z]);
                    let mut col = p;
                    col[..z].copy_from_slice(&q[..z]);
                    col[z] = 0.5 * (up + down);
                    Ok((col, up, down))
                };

            let (col, up, down, g) = if xi < 0.0 {
                let a = from_zero(&mut track)?;
                let v = a[z];
                (a, v, v, zero)
            } else if xi > 0.0 {
                let (col, up, down) = tails(&mut track)?;
                (col, up, down, down - up)
            } else {
                let a = from_zero(&mut track)?;
                let (c, up, down) = tails(&mut track)?;
                let col: Vec<Complex64> = a.iter().zip(&c).map(|(x, y)| 0.5 * (x + y)).collect();
                (col, 0.5 * (a[z] + up), 0.5 * (a[z] + down), down - up)
            };
            Ok((col, up, down, g, worst))
        })
        .collect();

    let nxi = xi.len();
    let mut values = vec![Complex64::new(0.0, 0.0); m * nxi];
    let mut u_plus = Vec::with_capacity(nxi);
    let mut u_minus = Vec::with_capacity(nxi);
    let mut obstruction = Vec::with_capacity(nxi);
    let mut max_exponent = f64::NEG_INFINITY;
    for (k, c) in columns.into_iter().enumerate() {
        let (col, up, down, g, worst) = c?;
        for (j, v) in col.into_iter().enumerate() {
            values[j * nxi + k] = v;
        }
        u_plus.push(up);
        u_minus.push(down);
        obstruction.push(g);
        max_exponent = max_exponent.max(worst);
    }
    if values
        .iter()
        .any(|v| !v.re.is_finite() || !v.im.is_finite())
    {
        return Err(GfError::NonFinite("branch solution".into()));
    }
    let jump = u_plus.iter().zip(&u_minus).map(|(a, b)| a - b).collect();
    Ok(BranchSolution {
        t: t_grid.clone(),
        xi: xi.to_vec(),
        values,
        zero_index,
        u_plus,
        u_minus,
        jump,
        obstruction,
        max_exponent,
    })
}

/// `max |∂_t û − b ξ û − f̂|` by 8th-order differences in `t`, over nodes whose
/// stencil does not reach `t = 0`.
pub fn ode_residual(
    sol: &BranchSolution,
    source: &dyn Source,
    coeff: &CoefficientB,
) -> Result<f64> {
    let ts = sol.t.coords();
    let dt = sol.t.spacing();
    let z = sol.zero_index;
    let nxi = sol.xi.len();
    let band = 5;
    let mut worst = 0.0f64;
    for (lo, hi) in [(0, z), (z + 1, ts.len())] {
        if hi - lo < 10 {
            continue;
        }
        for k in 0..nxi {
            let col: Vec<Complex64> = (lo..hi).map(|j| sol.at(j, k)).collect();
            let d = derivative_1d(&col, dt, 1, 8, false)?;
            for (i, j) in (lo..hi).enumerate() {
                if j + band > z && j < z + band {
                    continue;
                }
                let t = ts[j];
                let r = d[i] - coeff.b(t) * sol.xi[k] * col[i] - source.hat(t, sol.xi[k]);
                worst = worst.max(r.norm());
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mizohata::source::{solver_grid, SeparableSource};

    fn setup() -> (SeparableSource, CoefficientB, crate::numerics::Grid2D) {
        let c = CoefficientB::linear();
        (
            SeparableSource::separable(0.2, 0.5, 0.5).unwrap(),
            c,
            solver_grid(1.0, 257, 4.0, 64).unwrap(),
        )
    }

    #[test]
    fn exponents_stay_non_positive_and_ode_holds() {
        let (src, c, _) = setup();
        let g = solver_grid(1.0, 513, 4.0, 64).unwrap();
        let plan = SpectralPlan::new(&g.x);
        let sol = solve_hat(&src, &c, &g.t, plan.xi()).unwrap();
        assert!(sol.max_exponent <= EXPONENT_SLACK);
        let r = ode_residual(&sol, &src, &c).unwrap();
        assert!(r < 1e-6, "ode residual {r}");
    }

    #[test]
    fn jump_matches_direct_integral() {
        let (src, c, g) = setup();
        let plan = SpectralPlan::new(&g.x);
        let sol = solve_hat(&src, &c, &g.t, plan.xi()).unwrap();
        for (k, &xi) in sol.xi.iter().enumerate() {
            let j = jump_at_zero(&src, &c, xi).unwrap();
            assert!(
                (sol.jump[k] - j).norm() < 1e-10,
                "xi = {xi}: {} vs {j}",
                sol.jump[k]
            );
        }
        assert!(sol
            .jump
            .iter()
            .zip(&sol.xi)
            .any(|(j, &x)| x > 0.0 && j.norm() > 1e-3));
    }

    #[test]
    fn negative_modes_are_continuous() {
        let (src, c, g) = setup();
        let plan = SpectralPlan::new(&g.x);
        let sol = solve_hat(&src, &c, &g.t, plan.xi()).unwrap();
        for (k, &xi) in sol.xi.iter().enumerate() {
            if xi < 0.0 {
                assert_eq!(sol.jump[k], Complex64::new(0.0, 0.0));
                assert_eq!(sol.branch(0, k), Branch::FromZero);
            }
        }
    }
}

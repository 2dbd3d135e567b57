use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::branch::{obstruction_integrals, BranchSolution};
use super::{CoefficientB, Source};
use crate::numerics::quad::{composite_gauss, CompensatedSum};
use crate::numerics::taylor::ln_factorial;
use crate::numerics::{classify_with_floor, AnalyticityReport};
use crate::{GfError, Result};

/// Physical-space jump of `u` at `t = 0` is `−KF_SCALE · Kf`.
pub const KF_SCALE: f64 = 1.0 / (2.0 * PI);
pub const DEFAULT_N_MAX: usize = 20;
/// Coefficients below `COEFF_FLOOR · (1/n!) ∫ ξ^n |G|` are treated as zero.
pub const COEFF_FLOOR: f64 = 1e-12;
const GL_ORDER: usize = 20;
const PANEL_RATIO: f64 = 1.15;
const PROBE_START: f64 = 1e-3;

/// Normalization statement written next to every `Kf` export.
pub const KF_NORMALIZATION: &str =
    "Kf(x) = int_0^inf exp(i x xi) G(xi) dxi, G(xi) = int exp(-B(s) xi) fhat(s, xi) ds; jump of u at t = 0 is -Kf/(2 pi)";

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KfOptions {
    pub n_max: usize,
    /// Target for the neglected `ξ`-tail of the value integral.
    pub tol: f64,
    /// Overrides the automatic truncation of the `ξ` integral.
    pub xi_max: Option<f64>,
    /// Largest `ξ` the automatic truncation may reach.
    pub xi_budget: f64,
}

impl Default for KfOptions {
    fn default() -> Self {
        Self {
            n_max: DEFAULT_N_MAX,
            tol: 1e-10,
            xi_max: None,
            xi_budget: 1e7,
        }
    }
}

/// `Kf` on a set of points with its Taylor coefficients at 0 and the
/// analyticity diagnostic.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KfProfile {
    pub x: Vec<f64>,
    pub values: Vec<Complex64>,
    pub xi_max_values: f64,
    pub xi_max_coefficients: f64,
    pub nodes: usize,
    /// Estimate of `∫_{ξ_max}^∞ |G|` for the values.
    pub tail_bound: f64,
    pub analyticity: AnalyticityReport,
    pub normalization: String,
}

/// `G` sampled on composite Gauss nodes over `[0, ξ_end]`.
pub(crate) struct GSamples {
    pub xi: Vec<f64>,
    pub weights: Vec<f64>,
    pub g: Vec<Complex64>,
    pub abs: Vec<f64>,
    pub value_xi: Vec<f64>,
    pub value_w: Vec<f64>,
    pub value_g: Vec<Complex64>,
    pub xi_values: f64,
    pub xi_end: f64,
    pub tail: f64,
}

fn ln_envelope(xi: f64, abs: f64, n: usize) -> f64 {
    (n + 1) as f64 * xi.ln() + abs.ln() - ln_factorial(n)
}

/// Walks geometric probes until both the value integrand `|G|` and the
/// coefficient integrands `ξ^n |G| / n!` have died out.
fn truncation(source: &dyn Source, coeff: &CoefficientB, opts: &KfOptions) -> Result<(f64, f64)> {
    let mut best = vec![f64::NEG_INFINITY; opts.n_max + 1];
    let mut best_value = f64::NEG_INFINITY;
    let mut quiet = 0;
    let mut quiet_values = 0;
    let mut xi_values = None;
    let mut xi = PROBE_START;
    let drop = (1e-16f64).ln();
    let value_drop = (opts.tol * 1e-3).ln();
    loop {
        let (_, abs) = obstruction_integrals(source, coeff, xi)?;
        if abs > 0.0 {
            let lv = xi.ln() + abs.ln();
            best_value = best_value.max(lv);
            quiet_values = if lv - best_value < value_drop {
                quiet_values + 1
            } else {
                0
            };
            let mut all = true;
            for (n, b) in best.iter_mut().enumerate() {
                let e = ln_envelope(xi, abs, n);
                *b = b.max(e);
                all &= e - *b < drop;
            }
            quiet = if all { quiet + 1 } else { 0 };
        } else {
            quiet += 1;
            quiet_values += 1;
        }
        if quiet_values >= 3 && xi_values.is_none() {
            xi_values = Some(xi);
        }
        if quiet >= 3 && xi_values.is_some() {
            return Ok((xi_values.unwrap_or(xi), xi));
        }
        xi *= 2f64.sqrt();
        if xi > opts.xi_budget {
            return Err(GfError::Unresolved {
                what: "xi truncation of Kf".into(),
                detail: format!("G has not decayed by xi = {:.3e}", opts.xi_budget),
            });
        }
    }
}

/// Barycentric weights of a node set.
fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    (0..nodes.len())
        .map(|j| {
            1.0 / (0..nodes.len())
                .filter(|&m| m != j)
                .map(|m| nodes[j] - nodes[m])
                .product::<f64>()
        })
        .collect()
}

fn barycentric(nodes: &[f64], bw: &[f64], values: &[Complex64], x: f64) -> Complex64 {
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    for ((&n, &w), &v) in nodes.iter().zip(bw).zip(values) {
        let d = x - n;
        if d == 0.0 {
            return v;
        }
        num += v * (w / d);
        den += w / d;
    }
    num / den
}

pub(crate) fn sample_g(
    source: &dyn Source,
    coeff: &CoefficientB,
    x_reach: f64,
    opts: &KfOptions,
) -> Result<GSamples> {
    let (xi_values, xi_end) = match opts.xi_max {
        Some(m) if m > 0.0 => (m, m),
        Some(m) => {
            return Err(GfError::invalid(format!(
                "xi_max must be positive, got {m}"
            )))
        }
        None => truncation(source, coeff, opts)?,
    };
    let first = PROBE_START.min(xi_end / 16.0);
    let mut edges = vec![0.0, first];
    while *edges.last().unwrap() < xi_end {
        let next = (edges.last().unwrap() * PANEL_RATIO).min(xi_end);
        edges.push(next);
    }
    let (xi, weights) = composite_gauss(&edges, GL_ORDER);
    let pairs: Result<Vec<(Complex64, f64)>> = xi
        .par_iter()
        .map(|&k| obstruction_integrals(source, coeff, k))
        .collect();
    let (g, abs): (Vec<Complex64>, Vec<f64>) = pairs?.into_iter().unzip();
    let tail = xi
        .iter()
        .zip(&weights)
        .zip(&abs)
        .filter(|((&k, _), _)| k > xi_values)
        .map(|((_, w), a)| w * a)
        .sum::<f64>();

    // value nodes: panels split to half a period of e^{ixξ}, G interpolated
    // from the panel's own Gauss nodes
    let width = PI / x_reach.max(1e-3);
    let (gx, gw) = crate::numerics::gauss_legendre(GL_ORDER);
    let bw = barycentric_weights(&gx);
    let mut value_xi = Vec::new();
    let mut value_w = Vec::new();
    let mut value_g = Vec::new();
    for (p, e) in edges.windows(2).enumerate() {
        let (a, b) = (e[0], e[1]);
        if a >= xi_values {
            break;
        }
        let local = &g[p * GL_ORDER..(p + 1) * GL_ORDER];
        let split = ((b - a) / width).ceil().max(1.0) as usize;
        if split == 1 {
            value_xi.extend_from_slice(&xi[p * GL_ORDER..(p + 1) * GL_ORDER]);
            value_w.extend_from_slice(&weights[p * GL_ORDER..(p + 1) * GL_ORDER]);
            value_g.extend_from_slice(local);
            continue;
        }
        let h = (b - a) / split as f64;
        for j in 0..split {
            let (lo, hi) = (a + h * j as f64, a + h * (j + 1) as f64);
            for (u, w) in gx.iter().zip(&gw) {
                let k = 0.5 * (lo + hi) + 0.5 * h * u;
                let ref_u = (2.0 * k - a - b) / (b - a);
                value_xi.push(k);
                value_w.push(0.5 * h * w);
                value_g.push(barycentric(&gx, &bw, local, ref_u));
            }
        }
    }
    Ok(GSamples {
        xi,
        weights,
        g,
        abs,
        value_xi,
        value_w,
        value_g,
        xi_values,
        xi_end,
        tail,
    })
}

/// `a_n = (1/n!) Σ w (iξ)^n G` and the floors `COEFF_FLOOR·(1/n!) Σ w ξ^n |G|`.
fn taylor_from_samples(
    xi: &[f64],
    weights: &[f64],
    g: &[Complex64],
    abs: &[f64],
    n_max: usize,
) -> (Vec<Complex64>, Vec<f64>) {
    let mut coeffs = Vec::with_capacity(n_max + 1);
    let mut floors = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let lf = ln_factorial(n);
        let phase = Complex64::new(0.0, 1.0).powu(n as u32);
        let mut sum = CompensatedSum::<Complex64>::new();
        let mut mag = CompensatedSum::<f64>::new();
        for j in 0..xi.len() {
            if abs[j] == 0.0 || xi[j] == 0.0 && n > 0 {
                continue;
            }
            let lw = if n == 0 {
                -lf
            } else {
                n as f64 * xi[j].ln() - lf
            };
            let w = weights[j] * lw.exp();
            sum.add(g[j] * w);
            mag.add(abs[j] * w);
        }
        coeffs.push(sum.total() * phase);
        floors.push(COEFF_FLOOR * mag.total());
    }
    (coeffs, floors)
}

pub fn compute_kf(
    source: &dyn Source,
    coeff: &CoefficientB,
    x: &[f64],
    opts: &KfOptions,
) -> Result<KfProfile> {
    let reach = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let s = sample_g(source, coeff, reach, opts)?;
    let values: Vec<Complex64> = x
        .par_iter()
        .map(|&xv| {
            let mut acc = CompensatedSum::<Complex64>::new();
            for j in 0..s.value_xi.len() {
                acc.add(s.value_g[j] * Complex64::from_polar(s.value_w[j], xv * s.value_xi[j]));
            }
            acc.total()
        })
        .collect();
    let (coeffs, floors) = taylor_from_samples(&s.xi, &s.weights, &s.g, &s.abs, opts.n_max);
    let analyticity = classify_with_floor(&coeffs, Some(&floors))?;
    Ok(KfProfile {
        x: x.to_vec(),
        values,
        xi_max_values: s.xi_values,
        xi_max_coefficients: s.xi_end,
        nodes: s.xi.len() + s.value_xi.len(),
        tail_bound: s.tail,
        analyticity,
        normalization: KF_NORMALIZATION.into(),
    })
}

/// `(1/2π) ∫_0^∞ e^{ixξ − dξ²} G(ξ) dξ`: the damped route, which tends to
/// `KF_SCALE · Kf(x)` as `d → 0`.
pub fn compute_kf_damped(
    source: &dyn Source,
    coeff: &CoefficientB,
    damp: f64,
    x: &[f64],
    opts: &KfOptions,
) -> Result<Vec<Complex64>> {
    let reach = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let s = sample_g(source, coeff, reach, opts)?;
    Ok(damped_values(&s, damp, x))
}

fn damped_values(s: &GSamples, damp: f64, x: &[f64]) -> Vec<Complex64> {
    x.par_iter()
        .map(|&xv| {
            let mut acc = CompensatedSum::<Complex64>::new();
            for j in 0..s.value_xi.len() {
                let k = s.value_xi[j];
                acc.add(
                    s.value_g[j]
                        * Complex64::from_polar(s.value_w[j] * (-damp * k * k).exp(), xv * k),
                );
            }
            acc.total() * KF_SCALE
        })
        .collect()
}

/// Damped values at several `d` and their polynomial extrapolation to
/// `d = 0`, rescaled by `2π` to the normalization of [`compute_kf`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DampedLimit {
    pub damps: Vec<f64>,
    pub values: Vec<Vec<Complex64>>,
    pub limit: Vec<Complex64>,
}

pub fn damped_limit(
    source: &dyn Source,
    coeff: &CoefficientB,
    damps: &[f64],
    x: &[f64],
    opts: &KfOptions,
) -> Result<DampedLimit> {
    if damps.len() < 2 || damps.iter().any(|&d| !(d > 0.0)) {
        return Err(GfError::invalid(
            "damped limit needs at least two positive damping values",
        ));
    }
    let reach = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let s = sample_g(source, coeff, reach, opts)?;
    let values: Vec<Vec<Complex64>> = damps.iter().map(|&d| damped_values(&s, d, x)).collect();
    let limit = (0..x.len())
        .map(|i| {
            // Neville at 0
            let mut p: Vec<Complex64> = values.iter().map(|v| v[i]).collect();
            let n = p.len();
            for level in 1..n {
                for j in 0..n - level {
                    let (a, b) = (damps[j], damps[j + level]);
                    p[j] = (p[j] * (-b) - p[j + 1] * (-a)) / (a - b);
                }
            }
            p[0] / KF_SCALE
        })
        .collect();
    Ok(DampedLimit {
        damps: damps.to_vec(),
        values,
        limit,
    })
}

/// `Σ_{m>n} y^m/m!` bounded from above without overflow.
fn exp_tail(y: f64, n: usize) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    let m = n + 1;
    if y < 0.5 * (m + 1) as f64 {
        let ln_first = m as f64 * y.ln() - ln_factorial(m);
        ln_first.exp() / (1.0 - y / (m + 1) as f64)
    } else {
        y.exp()
    }
}

/// Truncated Taylor series of a function `Σ W_k e^{izξ_k}` at 0, with an
/// explicit remainder bound.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TaylorSeries {
    pub coefficients: Vec<Complex64>,
    /// `(ξ_k, |W_k|)` with `ξ_k ≥ 0`.
    pub envelope: Vec<(f64, f64)>,
}

impl TaylorSeries {
    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coefficients
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, a| acc * z + a)
    }

    /// Termwise derivative.
    pub fn derivative(&self, z: Complex64) -> Complex64 {
        self.coefficients
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, (n, a)| {
                acc * z + a * n as f64
            })
    }

    /// Bound on the truncation error at `|z| ≤ r` of the series (`deriv = 0`)
    /// or of its derivative (`deriv = 1`).
    pub fn remainder_bound(&self, r: f64, deriv: usize) -> f64 {
        let n = self.order();
        self.envelope
            .iter()
            .map(|&(xi, w)| match deriv {
                0 => w * exp_tail(r * xi, n),
                _ => w * xi * exp_tail(r * xi, n.saturating_sub(1)),
            })
            .sum()
    }

    /// Largest `r ≤ cap` with derivative remainder `≤ tol`.
    pub fn certified_radius(&self, tol: f64, cap: f64) -> f64 {
        if self.remainder_bound(cap, 1) <= tol {
            return cap;
        }
        let (mut lo, mut hi) = (0.0, cap);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.remainder_bound(mid, 1) <= tol {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

/// Torus-consistent obstruction: `Kf_grid(x) = Δξ Σ_{ξ_k ≥ 0} w_k G(ξ_k) e^{ixξ_k}`
/// with `w_0 = 1/2`, so that the physical jump of the grid solution is exactly
/// `−KF_SCALE · Kf_grid`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridKf {
    pub xi: Vec<f64>,
    /// `Δξ w_k G(ξ_k)`.
    pub weights: Vec<Complex64>,
}

impl GridKf {
    pub fn from_branch(sol: &BranchSolution) -> Result<Self> {
        let dxi = sol
            .xi
            .get(1)
            .copied()
            .ok_or_else(|| GfError::invalid("need at least two frequencies"))?;
        let mut xi = Vec::new();
        let mut weights = Vec::new();
        for (k, &x) in sol.xi.iter().enumerate() {
            if x >= 0.0 {
                let w = if x == 0.0 { 0.5 } else { 1.0 };
                xi.push(x);
                weights.push(sol.obstruction[k] * (w * dxi));
            }
        }
        Ok(Self { xi, weights })
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.xi
            .iter()
            .zip(&self.weights)
            .map(|(&k, w)| w * (Complex64::new(0.0, 1.0) * z * k).exp())
            .sum()
    }

    pub fn eval_derivative(&self, z: Complex64) -> Complex64 {
        let i = Complex64::new(0.0, 1.0);
        self.xi
            .iter()
            .zip(&self.weights)
            .map(|(&k, w)| w * i * k * (i * z * k).exp())
            .sum()
    }

    pub fn taylor(&self, n_max: usize) -> TaylorSeries {
        let coefficients = (0..=n_max)
            .map(|n| {
                let lf = ln_factorial(n);
                let phase = Complex64::new(0.0, 1.0).powu(n as u32);
                let mut s = CompensatedSum::<Complex64>::new();
                for (&k, w) in self.xi.iter().zip(&self.weights) {
                    if n == 0 {
                        s.add(*w);
                    } else if k > 0.0 {
                        s.add(w * (n as f64 * k.ln() - lf).exp());
                    }
                }
                s.total() * phase
            })
            .collect();
        let envelope = self
            .xi
            .iter()
            .zip(&self.weights)
            .map(|(&k, w)| (k, w.norm()))
            .collect();
        TaylorSeries {
            coefficients,
            envelope,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mizohata::source::SeparableSource;
    use crate::numerics::AnalyticityVerdict;

    #[test]
    fn odd_source_has_vanishing_kf() {
        let c = CoefficientB::linear();
        let s = SeparableSource::odd_in_t(0.5, 0.5).unwrap();
        let kf = compute_kf(&s, &c, &[-1.0, 0.0, 0.7], &KfOptions::default()).unwrap();
        assert!(kf.values.iter().all(|v| v.norm() < 1e-12));
        assert_eq!(kf.analyticity.verdict, AnalyticityVerdict::AnalyticEvidence);
    }

    #[test]
    fn separable_source_is_analytic_and_damped_route_agrees() {
        let c = CoefficientB::linear();
        let s = SeparableSource::separable(0.2, 0.5, 0.5).unwrap();
        let xs = [-0.5, 0.0, 0.3, 1.0];
        let kf = compute_kf(&s, &c, &xs, &KfOptions::default()).unwrap();
        assert_eq!(
            kf.analyticity.verdict,
            AnalyticityVerdict::AnalyticEvidence,
            "{:?}",
            kf.analyticity.tail_slope
        );
        let d = damped_limit(&s, &c, &[1e-2, 1e-3, 1e-4], &xs, &KfOptions::default()).unwrap();
        for (a, b) in kf.values.iter().zip(&d.limit) {
            assert!((a - b).norm() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn remainder_bound_covers_truncation() {
        let g = GridKf {
            xi: vec![0.0, 1.0, 2.5, 4.0],
            weights: vec![
                Complex64::new(0.5, 0.0),
                Complex64::new(0.3, -0.1),
                Complex64::new(0.0, 0.2),
                Complex64::new(0.01, 0.0),
            ],
        };
        let t = g.taylor(12);
        for r in [0.1, 0.5, 1.0] {
            let z = Complex64::new(0.6 * r, -0.8 * r);
            let err = (t.derivative(z) - g.eval_derivative(z)).norm();
            assert!(
                err <= t.remainder_bound(r, 1) * (1.0 + 1e-9) + 1e-15,
                "r = {r}"
            );
        }
        let r = t.certified_radius(1e-8, 10.0);
        assert!(t.remainder_bound(r, 1) <= 1e-8 && r > 0.1);
    }
}

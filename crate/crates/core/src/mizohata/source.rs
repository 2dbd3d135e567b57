use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::CoefficientB;
use crate::numerics::quad::adaptive;
use crate::numerics::{forward_x_transform, Grid1D, Grid2D, SpectralPlan, TransformedField};
use crate::{GfError, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Right-hand side `f(t, x)` of the Mizohata equation together with its
/// partial transform `f̂(t, ξ)`.
pub trait Source: Send + Sync {
    fn label(&self) -> String;
    /// Closed `t`-interval outside which `f` vanishes.
    fn t_support(&self) -> (f64, f64);
    fn value(&self, t: f64, x: f64) -> Complex64;
    fn hat(&self, t: f64, xi: f64) -> Complex64;
    /// Upper bound for `∫ |f̂(s, ξ)| ds`.
    fn hat_bound(&self, xi: f64) -> f64;
    /// Samples on a `(t, x)` grid, row-major.
    fn sample_grid(&self, grid: &Grid2D) -> Vec<Complex64> {
        grid.sample(|t, x| self.value(t, x))
    }
    /// Serializable description for manifests.
    fn describe(&self) -> serde_json::Value {
        serde_json::json!({ "label": self.label() })
    }
}

/// Smooth time factor with compact support.
#[derive(Clone)]
pub struct TimeProfile {
    pub label: String,
    pub support: (f64, f64),
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for TimeProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TimeProfile({}, support {:?})", self.label, self.support)
    }
}

fn bump_parts(t: f64, center: f64, radius: f64) -> Option<(f64, f64)> {
    let y = (t - center) / radius;
    if y.abs() >= 1.0 {
        return None;
    }
    let q = 1.0 - y * y;
    Some((y, (1.0 - 1.0 / q).exp()))
}

impl TimeProfile {
    pub fn new(
        label: impl Into<String>,
        support: (f64, f64),
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.into(),
            support,
            f: Arc::new(f),
        }
    }

    /// `exp(1 - 1/(1 - y²))`, `y = (t - center)/radius`; peak 1 at the center.
    pub fn bump(center: f64, radius: f64) -> Self {
        Self::new(
            format!("bump({center}, {radius})"),
            (center - radius, center + radius),
            move |t| bump_parts(t, center, radius).map_or(0.0, |p| p.1),
        )
    }

    pub fn bump_derivative(center: f64, radius: f64) -> Self {
        Self::new(
            format!("bump'({center}, {radius})"),
            (center - radius, center + radius),
            move |t| {
                bump_parts(t, center, radius).map_or(0.0, |(y, g)| {
                    let q = 1.0 - y * y;
                    -2.0 * y / (q * q) * g / radius
                })
            },
        )
    }

    /// `t·bump(0, radius)`, odd in `t`.
    pub fn odd_bump(radius: f64) -> Self {
        Self::new(
            format!("t*bump(0, {radius})"),
            (-radius, radius),
            move |t| bump_parts(t, 0.0, radius).map_or(0.0, |p| t * p.1),
        )
    }

    /// `b(t)·self(t)`.
    pub fn times_coefficient(&self, coeff: &CoefficientB) -> Self {
        let inner = self.f.clone();
        let b = coeff.clone();
        Self::new(
            format!("({})*{}", coeff.label, self.label),
            self.support,
            move |t| b.b(t) * inner(t),
        )
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        if t <= self.support.0 || t >= self.support.1 {
            0.0
        } else {
            (self.f)(t)
        }
    }

    /// `∫ |g|` by adaptive quadrature.
    pub fn l1_norm(&self) -> f64 {
        adaptive(
            |t| self.eval(t).abs(),
            self.support.0,
            self.support.1,
            1e-14,
            1e-10,
            2000,
        )
        .map(|r| r.value)
        .unwrap_or(f64::INFINITY)
    }
}

/// Spatial factor with a closed-form transform.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case")]
pub enum SpaceProfile {
    /// `exp(-x²/(2σ²))`.
    Gaussian { sigma: f64 },
    /// `d/dx exp(-x²/(2σ²))`.
    GaussianDerivative { sigma: f64 },
    /// Even profile with `φ̂(ξ) = exp(κ(1 - (1 + (ξ/k)²)^{1/4}))`: smooth and
    /// exponentially localized, with a spectrum decaying only like
    /// `exp(-κ|ξ/k|^{1/2})`.
    Stretched { k: f64, kappa: f64 },
}

impl SpaceProfile {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            SpaceProfile::Gaussian { sigma } | SpaceProfile::GaussianDerivative { sigma } => {
                sigma > 0.0
            }
            SpaceProfile::Stretched { k, kappa } => k > 0.0 && kappa > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(GfError::invalid(format!("bad space profile {self:?}")))
        }
    }

    pub fn hat(&self, xi: f64) -> Complex64 {
        match *self {
            SpaceProfile::Gaussian { sigma } => Complex64::new(
                sigma * (2.0 * PI).sqrt() * (-0.5 * sigma * sigma * xi * xi).exp(),
                0.0,
            ),
            SpaceProfile::GaussianDerivative { sigma } => {
                I * xi * SpaceProfile::Gaussian { sigma }.hat(xi)
            }
            SpaceProfile::Stretched { k, kappa } => {
                let r = xi / k;
                Complex64::new((kappa * (1.0 - (1.0 + r * r).powf(0.25))).exp(), 0.0)
            }
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        match *self {
            SpaceProfile::Gaussian { sigma } => (-x * x / (2.0 * sigma * sigma)).exp(),
            SpaceProfile::GaussianDerivative { sigma } => {
                -x / (sigma * sigma) * (-x * x / (2.0 * sigma * sigma)).exp()
            }
            SpaceProfile::Stretched { k, kappa } => stretched_value(x, k, kappa),
        }
    }
}

/// Samples of the stretched profile on one period, from an FFT of `φ̂` sampled
/// up to where it drops below `1e-17`; the period is wide enough for the
/// `e^{-k|x|}` decay of `φ`.
struct StretchedTable {
    lower: f64,
    dx: f64,
    values: Vec<f64>,
}

fn stretched_table(k: f64, kappa: f64) -> Arc<StretchedTable> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, u64), Arc<StretchedTable>>>> = OnceLock::new();
    let key = (k.to_bits(), kappa.to_bits());
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = cache.lock().expect("table cache").get(&key) {
        return t.clone();
    }
    let s = 1.0 + 17.0 * 10f64.ln() / kappa;
    let top = k * ((s * s * s * s) - 1.0).sqrt();
    let period = (80.0 / k).max(8.0);
    let n = ((period * top / PI).ceil() as usize).next_power_of_two();
    let grid = Grid1D::periodic(-period / 2.0, period, n).expect("valid table grid");
    let plan = SpectralPlan::new(&grid);
    let p = SpaceProfile::Stretched { k, kappa };
    let spec: Vec<Complex64> = plan.xi().iter().map(|&xi| p.hat(xi)).collect();
    let values = plan.inverse(&spec).iter().map(|v| v.re).collect();
    let table = Arc::new(StretchedTable {
        lower: grid.lower,
        dx: grid.spacing(),
        values,
    });
    cache
        .lock()
        .expect("table cache")
        .insert(key, table.clone());
    table
}

fn stretched_value(x: f64, k: f64, kappa: f64) -> f64 {
    let t = stretched_table(k, kappa);
    let n = t.values.len();
    let u = (x - t.lower) / t.dx;
    if u < 3.0 || u > (n - 5) as f64 {
        return 0.0;
    }
    let base = u.floor() as usize - 3;
    (0..8)
        .map(|j| {
            let w: f64 = (0..8)
                .filter(|&m| m != j)
                .map(|m| (u - (base + m) as f64) / (j as f64 - m as f64))
                .product();
            w * t.values[base + j]
        })
        .sum()
}

/// `c · g(t) · φ(x)`.
#[derive(Clone, Debug)]
pub struct SeparableTerm {
    pub coefficient: Complex64,
    pub time: TimeProfile,
    pub space: SpaceProfile,
}

/// Finite sum of separable terms.
#[derive(Clone, Debug)]
pub struct SeparableSource {
    pub label: String,
    pub terms: Vec<SeparableTerm>,
    l1: Vec<f64>,
}

impl SeparableSource {
    pub fn new(label: impl Into<String>, terms: Vec<SeparableTerm>) -> Result<Self> {
        for t in &terms {
            t.space.validate()?;
            if !(t.time.support.0 < t.time.support.1) {
                return Err(GfError::invalid(format!(
                    "empty time support for {}",
                    t.time.label
                )));
            }
        }
        let l1 = terms.iter().map(|t| t.time.l1_norm()).collect();
        Ok(Self {
            label: label.into(),
            terms,
            l1,
        })
    }

    pub fn zero() -> Self {
        Self {
            label: "zero".into(),
            terms: Vec::new(),
            l1: Vec::new(),
        }
    }

    /// Source `f = M u*` for `u*(t, x) = g(t)·exp(-x²/(2σ²))`, `g` a bump of
    /// the given radius centered at 0.
    pub fn manufactured(coeff: &CoefficientB, radius: f64, sigma: f64) -> Result<Self> {
        let one = Complex64::new(1.0, 0.0);
        Self::new(
            format!(
                "manufactured(radius {radius}, sigma {sigma}, {})",
                coeff.label
            ),
            vec![
                SeparableTerm {
                    coefficient: one,
                    time: TimeProfile::bump_derivative(0.0, radius),
                    space: SpaceProfile::Gaussian { sigma },
                },
                SeparableTerm {
                    coefficient: I,
                    time: TimeProfile::bump(0.0, radius).times_coefficient(coeff),
                    space: SpaceProfile::GaussianDerivative { sigma },
                },
            ],
        )
    }

    /// Single term `bump(center, radius)(t) · exp(-x²/(2σ²))`.
    pub fn separable(center: f64, radius: f64, sigma: f64) -> Result<Self> {
        Self::new(
            format!("separable(center {center}, radius {radius}, sigma {sigma})"),
            vec![SeparableTerm {
                coefficient: Complex64::new(1.0, 0.0),
                time: TimeProfile::bump(center, radius),
                space: SpaceProfile::Gaussian { sigma },
            }],
        )
    }

    /// `t·bump(0, radius)(t) · exp(-x²/(2σ²))`.
    pub fn odd_in_t(radius: f64, sigma: f64) -> Result<Self> {
        Self::new(
            format!("odd-in-t(radius {radius}, sigma {sigma})"),
            vec![SeparableTerm {
                coefficient: Complex64::new(1.0, 0.0),
                time: TimeProfile::odd_bump(radius),
                space: SpaceProfile::Gaussian { sigma },
            }],
        )
    }

    /// Bump in `t` supported in `t > 0` times the stretched profile.
    pub fn growth(center: f64, radius: f64, k: f64, kappa: f64) -> Result<Self> {
        if center - radius < 0.0 {
            return Err(GfError::invalid(
                "growth source must be supported in t >= 0",
            ));
        }
        Self::new(
            format!("growth(center {center}, radius {radius}, k {k}, kappa {kappa})"),
            vec![SeparableTerm {
                coefficient: Complex64::new(1.0, 0.0),
                time: TimeProfile::bump(center, radius),
                space: SpaceProfile::Stretched { k, kappa },
            }],
        )
    }
}

impl Source for SeparableSource {
    fn label(&self) -> String {
        self.label.clone()
    }

    fn t_support(&self) -> (f64, f64) {
        if self.terms.is_empty() {
            return (0.0, 0.0);
        }
        self.terms
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), t| {
                (a.min(t.time.support.0), b.max(t.time.support.1))
            })
    }

    fn value(&self, t: f64, x: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|term| term.coefficient * term.time.eval(t) * term.space.value(x))
            .sum()
    }

    fn hat(&self, t: f64, xi: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|term| term.coefficient * term.time.eval(t) * term.space.hat(xi))
            .sum()
    }

    fn hat_bound(&self, xi: f64) -> f64 {
        self.terms
            .iter()
            .zip(&self.l1)
            .map(|(term, l1)| term.coefficient.norm() * l1 * term.space.hat(xi).norm())
            .sum()
    }

    fn sample_grid(&self, grid: &Grid2D) -> Vec<Complex64> {
        let xs = grid.x.coords();
        let space: Vec<Vec<f64>> = self
            .terms
            .iter()
            .map(|term| xs.iter().map(|&x| term.space.value(x)).collect())
            .collect();
        let mut out = Vec::with_capacity(grid.len());
        for t in grid.t.coords() {
            let gt: Vec<Complex64> = self
                .terms
                .iter()
                .map(|term| term.coefficient * term.time.eval(t))
                .collect();
            for ix in 0..xs.len() {
                out.push(gt.iter().zip(&space).map(|(g, s)| g * s[ix]).sum());
            }
        }
        out
    }

    fn describe(&self) -> serde_json::Value {
        serde_json::json!({
            "label": self.label,
            "terms": self.terms.iter().map(|t| serde_json::json!({
                "coefficient": [t.coefficient.re, t.coefficient.im],
                "time": t.time.label,
                "time_support": [t.time.support.0, t.time.support.1],
                "space": t.space,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Source given by samples on a `(t, x)` grid, treated as periodic in `x`
/// and interpolated by cubic Lagrange polynomials in `t`.
#[derive(Clone, Debug)]
pub struct GridSource {
    pub label: String,
    pub grid: Grid2D,
    pub samples: Vec<Complex64>,
    transformed: Vec<Complex64>,
    xi: Vec<f64>,
    support: (f64, f64),
}

impl GridSource {
    pub fn new(label: impl Into<String>, grid: Grid2D, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(GfError::invalid("source samples do not match the grid"));
        }
        if samples
            .iter()
            .any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(GfError::NonFinite("grid source".into()));
        }
        let plan = SpectralPlan::new(&grid.x);
        let nx = grid.x.points;
        let transformed: Vec<Complex64> = samples
            .chunks(nx)
            .flat_map(|row| plan.forward(row))
            .collect();
        let live: Vec<usize> = samples
            .chunks(nx)
            .enumerate()
            .filter(|(_, r)| r.iter().any(|v| v.norm() > 0.0))
            .map(|(i, _)| i)
            .collect();
        let support = match (live.first(), live.last()) {
            (Some(&a), Some(&b)) => {
                let dt = grid.t.spacing();
                (grid.t.coord(a) - 2.0 * dt, grid.t.coord(b) + 2.0 * dt)
            }
            _ => (0.0, 0.0),
        };
        Ok(Self {
            label: label.into(),
            xi: plan.xi().to_vec(),
            grid,
            samples,
            transformed,
            support,
        })
    }

    /// Row transform at `ξ`: table lookup on the FFT frequencies, direct sum otherwise.
    fn row_hat(&self, it: usize, xi: f64) -> Complex64 {
        let nx = self.grid.x.points;
        let dxi = self.xi[1];
        let k = (xi / dxi).round();
        if (xi - k * dxi).abs() <= 1e-12 * dxi.max(xi.abs()) && k.abs() <= (nx / 2) as f64 {
            let kk = if k >= 0.0 {
                k as usize
            } else {
                (nx as f64 + k) as usize
            };
            if kk < nx && (self.xi[kk] - xi).abs() <= 1e-9 * dxi {
                return self.transformed[it * nx + kk];
            }
        }
        let dx = self.grid.x.spacing();
        self.samples[it * nx..(it + 1) * nx]
            .iter()
            .enumerate()
            .map(|(j, v)| v * Complex64::from_polar(dx, -xi * self.grid.x.coord(j)))
            .sum()
    }

    /// Cubic Lagrange weights in `t` (zero outside the grid).
    fn t_stencil(&self, t: f64) -> Vec<(usize, f64)> {
        let g = &self.grid.t;
        if t < g.lower || t > g.upper {
            return Vec::new();
        }
        let n = g.points;
        let u = (t - g.lower) / g.spacing();
        let base = (u.floor() as i64 - 1).clamp(0, n as i64 - 4) as usize;
        let nodes: Vec<f64> = (0..4).map(|j| (base + j) as f64).collect();
        (0..4)
            .map(|j| {
                let w: f64 = (0..4)
                    .filter(|&m| m != j)
                    .map(|m| (u - nodes[m]) / (nodes[j] - nodes[m]))
                    .product();
                (base + j, w)
            })
            .collect()
    }
}

impl Source for GridSource {
    fn label(&self) -> String {
        self.label.clone()
    }

    fn t_support(&self) -> (f64, f64) {
        (
            self.support.0.max(self.grid.t.lower),
            self.support.1.min(self.grid.t.upper),
        )
    }

    fn value(&self, t: f64, x: f64) -> Complex64 {
        let gx = &self.grid.x;
        let period = gx.period();
        let u = ((x - gx.lower).rem_euclid(period)) / gx.spacing();
        let j0 = u.floor() as usize % gx.points;
        let j1 = (j0 + 1) % gx.points;
        let s = u - u.floor();
        self.t_stencil(t)
            .into_iter()
            .map(|(it, w)| {
                let row = &self.samples[it * gx.points..];
                (row[j0] * (1.0 - s) + row[j1] * s) * w
            })
            .sum()
    }

    fn hat(&self, t: f64, xi: f64) -> Complex64 {
        self.t_stencil(t)
            .into_iter()
            .map(|(it, w)| self.row_hat(it, xi) * w)
            .sum()
    }

    fn hat_bound(&self, xi: f64) -> f64 {
        let dt = self.grid.t.spacing();
        // the cubic interpolant overshoots by at most a modest factor
        2.0 * dt
            * (0..self.grid.t.points)
                .map(|it| self.row_hat(it, xi).norm())
                .sum::<f64>()
    }

    fn sample_grid(&self, grid: &Grid2D) -> Vec<Complex64> {
        if grid == &self.grid {
            return self.samples.clone();
        }
        grid.sample(|t, x| self.value(t, x))
    }
}

/// A source sampled on a `(t, x)` grid together with its partial transform,
/// the sampled support box and the agreement between the closed-form and
/// grid transforms.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SourceF {
    pub label: String,
    pub grid: Grid2D,
    pub samples: Vec<Complex64>,
    pub transformed: TransformedField,
    pub t_support: (f64, f64),
    /// `max |FFT row − f̂(t, ξ)|` relative to `max |f̂|` over the grid.
    pub hat_consistency: f64,
}

/// Relative tail mass allowed in the outer 5% of each sampled row.
pub const SOURCE_TAIL_TOL: f64 = 1e-10;

impl SourceF {
    pub fn new(source: &dyn Source, grid: &Grid2D) -> Result<Self> {
        let samples = source.sample_grid(grid);
        if samples
            .iter()
            .any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(GfError::NonFinite(format!("source '{}'", source.label())));
        }
        let transformed = forward_x_transform(grid, &samples, SOURCE_TAIL_TOL)?;
        let nx = grid.x.points;
        let mut diff = 0.0f64;
        let mut scale = 0.0f64;
        for (it, t) in grid.t.coords().into_iter().enumerate() {
            for (k, &xi) in transformed.xi.iter().enumerate() {
                let exact = source.hat(t, xi);
                diff = diff.max((transformed.values[it * nx + k] - exact).norm());
                scale = scale.max(exact.norm());
            }
        }
        Ok(Self {
            label: source.label(),
            grid: grid.clone(),
            samples,
            transformed,
            t_support: source.t_support(),
            hat_consistency: if scale > 0.0 { diff / scale } else { diff },
        })
    }
}

/// Grid suitable for the distributional solver: `t` symmetric with a node at
/// 0 (odd point count), `x` periodic.
pub fn solver_grid(t_half: f64, t_points: usize, x_half: f64, x_points: usize) -> Result<Grid2D> {
    if t_points % 2 == 0 {
        return Err(GfError::invalid(
            "t grid needs an odd point count so that t = 0 is a node",
        ));
    }
    let t = Grid1D::symmetric(t_half, t_points)?;
    let x = Grid1D::periodic(-x_half, 2.0 * x_half, x_points)?;
    Ok(Grid2D::new(t, x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stretched_profile_inverts_its_transform() {
        let p = SpaceProfile::Stretched { k: 8.0, kappa: 1.0 };
        // forward transform of the even profile by quadrature
        let xi = 3.0;
        let (xs, ws) =
            crate::numerics::quad::composite_gauss(&crate::mollifier::linspace(0.0, 6.0, 600), 8);
        let fwd: f64 = xs
            .iter()
            .zip(&ws)
            .map(|(&x, &w)| 2.0 * w * p.value(x) * (x * xi).cos())
            .sum();
        assert!(
            (fwd - p.hat(xi).re).abs() < 1e-6,
            "{fwd} vs {}",
            p.hat(xi).re
        );
        assert!(p.value(4.0).abs() < 1e-10);
    }

    #[test]
    fn closed_form_transform_matches_fft() {
        let grid = solver_grid(1.0, 33, 4.0, 256).unwrap();
        let src = SeparableSource::separable(0.2, 0.5, 0.5).unwrap();
        let sf = SourceF::new(&src, &grid).unwrap();
        assert!(sf.hat_consistency < 1e-10, "{}", sf.hat_consistency);
        let c = CoefficientB::linear();
        let m = SeparableSource::manufactured(&c, 0.7, 0.15).unwrap();
        assert!(SourceF::new(&m, &grid).unwrap().hat_consistency < 1e-10);
    }

    #[test]
    fn grid_source_reproduces_separable_source() {
        let grid = solver_grid(1.0, 129, 4.0, 128).unwrap();
        let src = SeparableSource::separable(0.2, 0.5, 0.5).unwrap();
        let gs = GridSource::new("sampled", grid.clone(), src.sample_grid(&grid)).unwrap();
        let xi = gs.xi[5];
        for t in [-0.2, 0.013, 0.4] {
            let a = gs.hat(t, xi);
            let b = src.hat(t, xi);
            assert!((a - b).norm() < 1e-3 * src.hat(0.2, xi).norm(), "t = {t}");
        }
        assert!((gs.value(0.2, 0.125) - src.value(0.2, 0.125)).norm() < 1e-3);
    }
}

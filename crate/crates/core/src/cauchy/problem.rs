use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::mizohata::coefficient::HermiteTable;
use crate::mizohata::{CoefficientB, Source};
use crate::numerics::Grid2D;
use crate::{GfError, Result};

type TimeFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;
type FieldFn = Arc<dyn Fn(f64, f64) -> Complex64 + Send + Sync>;

/// Coefficient `a_α(t, x)` of `∂_t u + Σ_α a_α ∂̃^α u = f`.
#[derive(Clone)]
pub enum CoefficientField {
    /// Depends on `t` only; `integral` is `∫_0^t a_α`.
    Time {
        label: String,
        value: TimeFn,
        integral: TimeFn,
    },
    General {
        label: String,
        value: FieldFn,
    },
}

impl fmt::Debug for CoefficientField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CoefficientField({})", self.label())
    }
}

impl CoefficientField {
    /// `a_1 = i b(t)` with `∫_0^t a_1 = i B(t)`.
    pub fn mizohata(b: &CoefficientB) -> Self {
        let (b1, b2) = (b.clone(), b.clone());
        Self::Time {
            label: format!("i*({})", b.label),
            value: Arc::new(move |t| Complex64::new(0.0, b1.b(t))),
            integral: Arc::new(move |t| Complex64::new(0.0, b2.big_b(t))),
        }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::Time {
            label: format!("{c}"),
            value: Arc::new(move |_| c),
            integral: Arc::new(move |t| c * t),
        }
    }

    pub fn zero() -> Self {
        Self::constant(Complex64::new(0.0, 0.0))
    }

    /// Time-dependent coefficient with a tabulated antiderivative on
    /// `[-reach, reach]`.
    pub fn time(
        label: impl Into<String>,
        f: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
        reach: f64,
    ) -> Result<Self> {
        let f: TimeFn = Arc::new(f);
        let (fr, fi) = (f.clone(), f.clone());
        let re = HermiteTable::build(Arc::new(move |t| fr(t).re), reach, 4096)?;
        let im = HermiteTable::build(Arc::new(move |t| fi(t).im), reach, 4096)?;
        Ok(Self::Time {
            label: label.into(),
            value: f,
            integral: Arc::new(move |t| Complex64::new(re.eval(t), im.eval(t))),
        })
    }

    pub fn general(
        label: impl Into<String>,
        f: impl Fn(f64, f64) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Self::General {
            label: label.into(),
            value: Arc::new(f),
        }
    }

    pub fn label(&self) -> &str {
        match self {
            Self::Time { label, .. } | Self::General { label, .. } => label,
        }
    }

    pub fn eval(&self, t: f64, x: f64) -> Complex64 {
        match self {
            Self::Time { value, .. } => value(t),
            Self::General { value, .. } => value(t, x),
        }
    }

    pub fn is_time_only(&self) -> bool {
        matches!(self, Self::Time { .. })
    }

    /// `sup |a|` over the grid nodes.
    pub fn sup(&self, grid: &Grid2D) -> f64 {
        match self {
            Self::Time { value, .. } => grid
                .t
                .coords()
                .iter()
                .map(|&t| value(t).norm())
                .fold(0.0, f64::max),
            Self::General { value, .. } => grid
                .sample(|t, x| value(t, x).norm())
                .into_iter()
                .fold(0.0, f64::max),
        }
    }
}

/// Data at `t = 0`.
#[derive(Clone, Debug)]
pub enum InitialData {
    Zero,
    /// Samples on the `x` grid.
    Samples(Vec<Complex64>),
    /// Transform values on the FFT frequencies of the `x` grid.
    Spectrum(Vec<Complex64>),
}

/// `∂_t u + Σ_{α ≤ m} a_α(t, x) ∂̃^α u = f`, `u(0) = u_0`, on a `(t, x)` grid
/// with `t = 0` as a node and periodic `x`.
#[derive(Clone)]
pub struct CauchyProblem {
    pub label: String,
    /// `a_0, …, a_m`.
    pub coefficients: Vec<CoefficientField>,
    pub source: Option<Arc<dyn Source>>,
    pub initial: InitialData,
    pub grid: Grid2D,
}

impl fmt::Debug for CauchyProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CauchyProblem")
            .field("label", &self.label)
            .field("coefficients", &self.coefficients)
            .field("source", &self.source.as_ref().map(|s| s.label()))
            .field("grid", &self.grid)
            .finish()
    }
}

impl CauchyProblem {
    pub fn new(
        label: impl Into<String>,
        coefficients: Vec<CoefficientField>,
        source: Option<Arc<dyn Source>>,
        initial: InitialData,
        grid: Grid2D,
    ) -> Result<Self> {
        if coefficients.len() < 2 {
            return Err(GfError::invalid("need coefficients a_0..a_m with m >= 1"));
        }
        let z = grid.t.nearest(0.0);
        if grid.t.coord(z).abs() > 1e-12 * grid.t.spacing() {
            return Err(GfError::invalid("t grid must contain 0 as a node"));
        }
        if !grid.x.periodic {
            return Err(GfError::invalid("x grid must be periodic"));
        }
        match &initial {
            InitialData::Samples(v) | InitialData::Spectrum(v) if v.len() != grid.x.points => {
                return Err(GfError::invalid("initial data does not match the x grid"));
            }
            _ => {}
        }
        Ok(Self {
            label: label.into(),
            coefficients,
            source,
            initial,
            grid,
        })
    }

    /// The regularized Mizohata problem `∂_t u + i b ∂̃_x u = f`.
    pub fn mizohata(
        b: &CoefficientB,
        source: Option<Arc<dyn Source>>,
        initial: InitialData,
        grid: Grid2D,
    ) -> Result<Self> {
        Self::new(
            format!("mizohata[{}]", b.label),
            vec![CoefficientField::zero(), CoefficientField::mizohata(b)],
            source,
            initial,
            grid,
        )
    }

    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn separable(&self) -> bool {
        self.coefficients.iter().all(CoefficientField::is_time_only)
    }

    pub fn sup_coefficients(&self) -> Vec<f64> {
        self.coefficients
            .iter()
            .map(|a| a.sup(&self.grid))
            .collect()
    }
}

/// `f + scale·g`.
pub struct SumSource {
    pub base: Option<Arc<dyn Source>>,
    pub extra: Arc<dyn Source>,
    pub scale: f64,
}

impl Source for SumSource {
    fn label(&self) -> String {
        let base = self.base.as_ref().map_or("0".to_string(), |b| b.label());
        format!("{base} + {:e}*{}", self.scale, self.extra.label())
    }

    fn t_support(&self) -> (f64, f64) {
        let e = self.extra.t_support();
        match &self.base {
            Some(b) => {
                let s = b.t_support();
                if s.0 >= s.1 {
                    e
                } else {
                    (s.0.min(e.0), s.1.max(e.1))
                }
            }
            None => e,
        }
    }

    fn value(&self, t: f64, x: f64) -> Complex64 {
        self.base
            .as_ref()
            .map_or(Complex64::new(0.0, 0.0), |b| b.value(t, x))
            + self.extra.value(t, x) * self.scale
    }

    fn hat(&self, t: f64, xi: f64) -> Complex64 {
        self.base
            .as_ref()
            .map_or(Complex64::new(0.0, 0.0), |b| b.hat(t, xi))
            + self.extra.hat(t, xi) * self.scale
    }

    fn hat_bound(&self, xi: f64) -> f64 {
        self.base.as_ref().map_or(0.0, |b| b.hat_bound(xi))
            + self.scale.abs() * self.extra.hat_bound(xi)
    }
}

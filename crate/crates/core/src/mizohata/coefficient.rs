use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::numerics::quad::composite_gauss;
use crate::numerics::Grid1D;
use crate::{GfError, Result};

pub(crate) type Scalar = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Built-in coefficients `b(t)`, each scaled by `scale > 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case")]
pub enum CoefficientSpec {
    /// `b = s·t`, `B = s·t²/2`.
    Linear {
        #[serde(default = "unit")]
        scale: f64,
    },
    /// `b = s·t³`, `B = s·t⁴/4`.
    Cubic {
        #[serde(default = "unit")]
        scale: f64,
    },
    /// `b = s·t·exp(-1/t²)`, `b(0) = 0`; flat to infinite order at 0.
    Flat {
        #[serde(default = "unit")]
        scale: f64,
    },
    /// `b` given as an expression in `t`, e.g. `"t + 0.5*t^3"`; `B` is
    /// tabulated on `[-reach, reach]`.
    Expression {
        expr: String,
        #[serde(default = "default_reach")]
        reach: f64,
    },
}

fn unit() -> f64 {
    1.0
}

fn default_reach() -> f64 {
    4.0
}

impl CoefficientSpec {
    pub fn tag(&self) -> &'static str {
        match self {
            CoefficientSpec::Linear { .. } => "linear",
            CoefficientSpec::Cubic { .. } => "cubic",
            CoefficientSpec::Flat { .. } => "flat",
            CoefficientSpec::Expression { .. } => "expression",
        }
    }
}

/// `b(t)` with its antiderivative `B(t) = ∫_0^t b`.
#[derive(Clone)]
pub struct CoefficientB {
    pub label: String,
    pub spec: Option<CoefficientSpec>,
    b: Scalar,
    big_b: Scalar,
    /// `b` vanishes to infinite order at 0, so `t·b(t)` may underflow to 0
    /// near the origin without violating the sign condition.
    pub flat_at_zero: bool,
    pub closed_form: bool,
}

impl fmt::Debug for CoefficientB {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientB")
            .field("label", &self.label)
            .field("closed_form", &self.closed_form)
            .finish()
    }
}

impl CoefficientB {
    pub fn from_spec(spec: &CoefficientSpec) -> Result<Self> {
        let s = match spec {
            CoefficientSpec::Linear { scale }
            | CoefficientSpec::Cubic { scale }
            | CoefficientSpec::Flat { scale } => *scale,
            CoefficientSpec::Expression { expr, reach } => {
                let mut c = Self::custom(format!("b = {expr}"), parse_expression(expr)?, *reach)?;
                c.spec = Some(spec.clone());
                return Ok(c);
            }
        };
        if !(s > 0.0 && s.is_finite()) {
            return Err(GfError::invalid(format!(
                "coefficient scale must be positive, got {s}"
            )));
        }
        let mut c = match spec {
            CoefficientSpec::Linear { .. } => Self {
                label: format!("b = {s}*t"),
                spec: None,
                b: Arc::new(move |t| s * t),
                big_b: Arc::new(move |t| 0.5 * s * t * t),
                flat_at_zero: false,
                closed_form: true,
            },
            CoefficientSpec::Cubic { .. } => Self {
                label: format!("b = {s}*t^3"),
                spec: None,
                b: Arc::new(move |t| s * t * t * t),
                big_b: Arc::new(move |t| 0.25 * s * t.powi(4)),
                flat_at_zero: false,
                closed_form: true,
            },
            CoefficientSpec::Flat { .. } => {
                let b = move |t: f64| {
                    if t == 0.0 {
                        0.0
                    } else {
                        s * t * (-1.0 / (t * t)).exp()
                    }
                };
                let mut c = Self::custom(format!("b = {s}*t*exp(-1/t^2)"), b, 4.0)?;
                c.flat_at_zero = true;
                c
            }
            CoefficientSpec::Expression { .. } => unreachable!("handled above"),
        };
        c.spec = Some(spec.clone());
        Ok(c)
    }

    pub fn linear() -> Self {
        Self::from_spec(&CoefficientSpec::Linear { scale: 1.0 }).expect("unit scale is valid")
    }

    pub fn cubic() -> Self {
        Self::from_spec(&CoefficientSpec::Cubic { scale: 1.0 }).expect("unit scale is valid")
    }

    /// User-supplied `b`; `B` is tabulated on `[-reach, reach]` by composite
    /// Gauss quadrature and interpolated by cubic Hermite splines using `b` as
    /// the derivative.
    pub fn custom(
        label: impl Into<String>,
        b: impl Fn(f64) -> f64 + Send + Sync + 'static,
        reach: f64,
    ) -> Result<Self> {
        if !(reach > 0.0 && reach.is_finite()) {
            return Err(GfError::invalid("tabulation reach must be positive"));
        }
        let b: Scalar = Arc::new(b);
        let table = HermiteTable::build(b.clone(), reach, 4096)?;
        let bb = b.clone();
        Ok(Self {
            label: label.into(),
            spec: None,
            b: bb,
            big_b: Arc::new(move |t| table.eval(t)),
            flat_at_zero: false,
            closed_form: false,
        })
    }

    #[inline]
    pub fn b(&self, t: f64) -> f64 {
        (self.b)(t)
    }

    #[inline]
    pub fn big_b(&self, t: f64) -> f64 {
        (self.big_b)(t)
    }

    /// `sup |b|` over `[lo, hi]`, sampled on 4097 points.
    pub fn sup_norm(&self, lo: f64, hi: f64) -> f64 {
        (0..=4096)
            .map(|k| self.b(lo + (hi - lo) * k as f64 / 4096.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Compiles an expression in the single variable `t`.
fn parse_expression(expr: &str) -> Result<impl Fn(f64) -> f64 + Send + Sync + 'static> {
    use evalexpr::{ContextWithMutableVariables, HashMapContext, Value};
    let tree = evalexpr::build_operator_tree(expr)
        .map_err(|e| GfError::invalid(format!("coefficient '{expr}': {e}")))?;
    let eval = move |t: f64| -> std::result::Result<f64, evalexpr::EvalexprError> {
        let mut ctx = HashMapContext::new();
        ctx.set_value("t".into(), Value::Float(t))?;
        tree.eval_number_with_context(&ctx)
    };
    for probe in [-0.5, 0.0, 0.5] {
        eval(probe)
            .map_err(|e| GfError::invalid(format!("coefficient '{expr}' at t = {probe}: {e}")))?;
    }
    Ok(move |t: f64| eval(t).unwrap_or(f64::NAN))
}

/// Antiderivative from 0 of a real function, on a uniform table with cubic
/// Hermite interpolation.
pub(crate) struct HermiteTable {
    reach: f64,
    h: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
    b: Scalar,
}

impl HermiteTable {
    pub(crate) fn build(b: Scalar, reach: f64, cells: usize) -> Result<Self> {
        let h = 2.0 * reach / cells as f64;
        let nodes: Vec<f64> = (0..=cells).map(|k| -reach + h * k as f64).collect();
        let (gx, gw) = composite_gauss(&[0.0, 1.0], 12);
        let seg = |a: f64, c: f64| -> f64 {
            gx.iter()
                .zip(&gw)
                .map(|(x, w)| w * b(a + (c - a) * x))
                .sum::<f64>()
                * (c - a)
        };
        let mid = cells / 2;
        let mut values = vec![0.0; cells + 1];
        for k in mid + 1..=cells {
            values[k] = values[k - 1] + seg(nodes[k - 1], nodes[k]);
        }
        for k in (0..mid).rev() {
            values[k] = values[k + 1] - seg(nodes[k], nodes[k + 1]);
        }
        let slopes: Vec<f64> = nodes.iter().map(|&t| b(t)).collect();
        if values.iter().chain(&slopes).any(|v| !v.is_finite()) {
            return Err(GfError::NonFinite("coefficient antiderivative".into()));
        }
        Ok(Self {
            reach,
            h,
            values,
            slopes,
            b,
        })
    }

    pub(crate) fn eval(&self, t: f64) -> f64 {
        if t.abs() > self.reach {
            // outside the table: integrate from the nearest end
            let end = self.reach.copysign(t);
            let (gx, gw) = composite_gauss(&[0.0, 1.0], 24);
            let extra: f64 = gx
                .iter()
                .zip(&gw)
                .map(|(x, w)| w * (self.b)(end + (t - end) * x))
                .sum::<f64>()
                * (t - end);
            return self.eval(end) + extra;
        }
        let u = (t + self.reach) / self.h;
        let k = (u.floor() as usize).min(self.values.len() - 2);
        let s = u - k as f64;
        let (y0, y1) = (self.values[k], self.values[k + 1]);
        let (m0, m1) = (self.slopes[k] * self.h, self.slopes[k + 1] * self.h);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * m0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * m1
    }
}

/// Record of a sign-condition check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoefficientRecord {
    pub label: String,
    pub spec: Option<CoefficientSpec>,
    pub checked_points: usize,
    /// Points where `t·b(t)` underflowed to 0 (only allowed for flat `b`).
    pub underflow_points: usize,
    pub b_sup: f64,
    pub big_b_max: f64,
}

/// Checks `t·b(t) > 0` on the nodes of `t_grid` other than 0, `B(0) = 0`,
/// `B > 0` away from 0 and the monotonicity of `B` on each side.
pub fn validate_coefficient(coeff: &CoefficientB, t_grid: &Grid1D) -> Result<CoefficientRecord> {
    let ts = t_grid.coords();
    let scale = t_grid.spacing();
    let mut underflow = 0;
    let mut checked = 0;
    for &t in &ts {
        if t.abs() < 1e-12 * scale {
            continue;
        }
        checked += 1;
        let tb = t * coeff.b(t);
        if tb < 0.0 || !tb.is_finite() || (tb == 0.0 && !coeff.flat_at_zero) {
            return Err(GfError::SignCondition { t });
        }
        if tb == 0.0 {
            underflow += 1;
        }
        let bb = coeff.big_b(t);
        if bb < 0.0 || (bb == 0.0 && !coeff.flat_at_zero) {
            return Err(GfError::invalid(format!("B({t}) = {bb} is not positive")));
        }
    }
    if coeff.big_b(0.0).abs() > 1e-14 {
        return Err(GfError::invalid(format!(
            "B(0) = {} differs from 0",
            coeff.big_b(0.0)
        )));
    }
    let bs: Vec<f64> = ts.iter().map(|&t| coeff.big_b(t)).collect();
    for w in ts.windows(2).zip(bs.windows(2)) {
        let ((t0, t1), (b0, b1)) = ((w.0[0], w.0[1]), (w.1[0], w.1[1]));
        let slack = 1e-14 * b0.abs().max(b1.abs());
        if (t0 >= 0.0 && b1 < b0 - slack) || (t1 <= 0.0 && b1 > b0 + slack) {
            return Err(GfError::invalid(format!(
                "B is not monotone on [{t0}, {t1}]"
            )));
        }
    }
    Ok(CoefficientRecord {
        label: coeff.label.clone(),
        spec: coeff.spec.clone(),
        checked_points: checked,
        underflow_points: underflow,
        b_sup: coeff.sup_norm(t_grid.lower, t_grid.upper),
        big_b_max: bs.iter().cloned().fold(0.0, f64::max),
    })
}

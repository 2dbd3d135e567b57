use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Net;
use crate::numerics::quad::adaptive;
use crate::numerics::{trapezoid, trapezoid_2d, GridSpec};
use crate::{GfError, Result};

/// Smooth bump `φ(z) = e · exp(-1/(1 - |z-c|²/r²))`, with `φ(c) = 1` and
/// support the closed ball of radius `r` around `c`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub center: Vec<f64>,
    pub radius: f64,
    #[serde(default = "one")]
    pub amplitude: f64,
}

fn one() -> f64 {
    1.0
}

impl TestFunction {
    pub fn bump(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) || center.iter().any(|c| !c.is_finite()) {
            return Err(GfError::invalid(
                "test function needs a finite center and positive radius",
            ));
        }
        Ok(Self {
            center,
            radius,
            amplitude: 1.0,
        })
    }

    pub fn scaled(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    pub fn eval(&self, p: &[f64]) -> f64 {
        let r2: f64 = p
            .iter()
            .zip(&self.center)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            / (self.radius * self.radius);
        if r2 >= 1.0 {
            0.0
        } else {
            self.amplitude * (1.0 - 1.0 / (1.0 - r2)).exp()
        }
    }

    /// Fails unless the support lies strictly inside the grid.
    pub fn check_support(&self, grid: &GridSpec) -> Result<()> {
        if self.center.len() != grid.dim() {
            return Err(GfError::invalid(
                "test function dimension does not match the grid",
            ));
        }
        for (axis, &c) in grid.axes().iter().zip(&self.center) {
            if c - self.radius <= axis.lower || c + self.radius >= axis.upper {
                return Err(GfError::Support(format!(
                    "bump at {:?} radius {} leaves the grid",
                    self.center, self.radius
                )));
            }
        }
        Ok(())
    }

    pub fn sample(&self, grid: &GridSpec) -> Vec<f64> {
        (0..grid.len()).map(|i| self.eval(&grid.point(i))).collect()
    }

    /// `∫φ` by adaptive quadrature (1D) or the separable-radial formula (2D).
    pub fn integral(&self) -> f64 {
        let r = self.radius;
        match self.center.len() {
            1 => adaptive(
                |y: f64| self.eval(&[self.center[0] + y]),
                -r,
                r,
                1e-15,
                1e-13,
                10_000,
            )
            .map(|q| q.value)
            .unwrap_or(f64::NAN),
            _ => {
                // ∫ φ = 2π ∫_0^r φ(s) s ds in the plane
                let c0 = self.center[0];
                let rest: Vec<f64> = self.center[1..].to_vec();
                let radial = |s: f64| {
                    let mut p = vec![c0 + s];
                    p.extend(&rest);
                    self.eval(&p) * s
                };
                2.0 * std::f64::consts::PI
                    * adaptive(radial, 0.0, r, 1e-15, 1e-13, 10_000)
                        .map(|q| q.value)
                        .unwrap_or(f64::NAN)
            }
        }
    }
}

/// `count` bumps inside the ball `B(x0, radius)`: radii `radius/2`, centers
/// drawn uniformly from `B(x0, radius/2)` with a seeded generator.
pub fn local_bumps(x0: &[f64], radius: f64, count: usize, seed: u64) -> Result<Vec<TestFunction>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = 0.5 * radius;
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let offset: Vec<f64> = x0.iter().map(|_| rng.gen_range(-half..half)).collect();
        if offset.iter().map(|v| v * v).sum::<f64>() < half * half {
            let c = x0.iter().zip(&offset).map(|(a, b)| a + b).collect();
            out.push(TestFunction::bump(c, half)?);
        }
    }
    Ok(out)
}

/// Geometric extrapolation of the last three values of a sequence.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Extrapolation {
    pub limit: Option<Complex64>,
    /// `(p3 - p2)/(p2 - p1)`, or `None` when the tail is already flat.
    pub ratio: Option<Complex64>,
    pub diverges: bool,
}

/// Aitken extrapolation on the tail `p1, p2, p3`. A tail whose last difference
/// is below round-off is taken as converged; a non-contracting tail is
/// flagged as divergent.
pub fn extrapolate(values: &[Complex64]) -> Extrapolation {
    let n = values.len();
    assert!(n >= 3, "extrapolation needs three values");
    let (p1, p2, p3) = (values[n - 3], values[n - 2], values[n - 1]);
    let d1 = p2 - p1;
    let d2 = p3 - p2;
    let scale = p3.norm().max(1.0);
    if d2.norm() <= 1e-13 * scale {
        return Extrapolation {
            limit: Some(p3),
            ratio: None,
            diverges: false,
        };
    }
    if d1.norm() == 0.0 {
        return Extrapolation {
            limit: None,
            ratio: None,
            diverges: true,
        };
    }
    let r = d2 / d1;
    if r.norm() >= 1.0 {
        return Extrapolation {
            limit: None,
            ratio: Some(r),
            diverges: true,
        };
    }
    Extrapolation {
        limit: Some(p3 + d2 * r / (Complex64::new(1.0, 0.0) - r)),
        ratio: Some(r),
        diverges: false,
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairingResult {
    pub values: Vec<Complex64>,
    pub extrapolation: Extrapolation,
}

impl PairingResult {
    pub fn limit(&self) -> Option<Complex64> {
        self.extrapolation.limit
    }
}

fn integrate(grid: &GridSpec, integrand: &[Complex64]) -> Complex64 {
    match grid {
        GridSpec::One(g) => trapezoid(integrand, g.spacing()),
        GridSpec::Two(g) => {
            let (rows, cols) = g.shape();
            trapezoid_2d(integrand, rows, cols, g.t.spacing(), g.x.spacing())
        }
    }
}

/// `⟨u_ε, φ⟩` per ladder value plus an extrapolated limit.
pub fn pair(net: &Net, phi: &TestFunction) -> Result<PairingResult> {
    phi.check_support(&net.grid)?;
    let ph = phi.sample(&net.grid);
    let values: Vec<Complex64> = net
        .samples
        .par_iter()
        .map(|u| {
            let prod: Vec<Complex64> = u.iter().zip(&ph).map(|(a, b)| a * b).collect();
            integrate(&net.grid, &prod)
        })
        .collect();
    let extrapolation = extrapolate(&values);
    Ok(PairingResult {
        values,
        extrapolation,
    })
}

/// Distribution a net is compared against.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Target {
    Zero,
    Dirac {
        at: Vec<f64>,
    },
    /// `H(x - at)` in one dimension.
    Heaviside {
        at: f64,
    },
    /// A locally integrable function given by its samples on the net's grid.
    Sampled {
        label: String,
        values: Vec<Complex64>,
    },
}

impl Target {
    pub fn pair(&self, phi: &TestFunction, grid: &GridSpec) -> Result<Complex64> {
        match self {
            Target::Zero => Ok(Complex64::new(0.0, 0.0)),
            Target::Dirac { at } => Ok(Complex64::new(phi.eval(at), 0.0)),
            Target::Heaviside { at } => {
                if phi.center.len() != 1 {
                    return Err(GfError::invalid("heaviside target is one dimensional"));
                }
                let (a, b) = (phi.center[0] - phi.radius, phi.center[0] + phi.radius);
                let lo = a.max(*at);
                if lo >= b {
                    return Ok(Complex64::new(0.0, 0.0));
                }
                let v = adaptive(|x: f64| phi.eval(&[x]), lo, b, 1e-15, 1e-13, 10_000)?.value;
                Ok(Complex64::new(v, 0.0))
            }
            Target::Sampled { values, .. } => {
                if values.len() != grid.len() {
                    return Err(GfError::invalid("sampled target does not match the grid"));
                }
                let ph = phi.sample(grid);
                let prod: Vec<Complex64> = values.iter().zip(&ph).map(|(a, b)| a * b).collect();
                Ok(integrate(grid, &prod))
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            Target::Zero => "0".into(),
            Target::Dirac { at } => format!("delta_{at:?}"),
            Target::Heaviside { at } => format!("H(x - {at})"),
            Target::Sampled { label, .. } => label.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairingEntry {
    pub test_function: TestFunction,
    pub values: Vec<Complex64>,
    pub extrapolated: Option<Complex64>,
    pub target_value: Complex64,
    /// `|limit - target|`, `None` when the pairings diverge.
    pub gap: Option<f64>,
    /// `|raw last value - target|`.
    pub raw_gap: f64,
    pub diverges: bool,
    pub associated: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AssociationVerdict {
    pub net: String,
    pub target: String,
    pub tolerance: f64,
    pub entries: Vec<PairingEntry>,
    pub associated: bool,
    pub any_divergence: bool,
    /// `(x0, radius)` for local checks.
    pub window: Option<(Vec<f64>, f64)>,
    pub embedding: Option<String>,
}

impl AssociationVerdict {
    pub fn max_gap(&self) -> Option<f64> {
        self.entries
            .iter()
            .map(|e| e.gap)
            .try_fold(0.0f64, |m, g| g.map(|g| m.max(g)))
    }
}

/// Associated iff every extrapolated pairing is within `tol` of the target.
pub fn check_association(
    net: &Net,
    target: &Target,
    phis: &[TestFunction],
    tol: f64,
) -> Result<AssociationVerdict> {
    if phis.is_empty() {
        return Err(GfError::invalid(
            "association needs at least one test function",
        ));
    }
    let mut entries = Vec::with_capacity(phis.len());
    for phi in phis {
        let p = pair(net, phi)?;
        let target_value = target.pair(phi, &net.grid)?;
        let gap = p.limit().map(|l| (l - target_value).norm());
        let raw_gap = (p.values[p.values.len() - 1] - target_value).norm();
        entries.push(PairingEntry {
            test_function: phi.clone(),
            values: p.values,
            extrapolated: p.extrapolation.limit,
            target_value,
            gap,
            raw_gap,
            diverges: p.extrapolation.diverges,
            associated: gap.is_some_and(|g| g <= tol),
        });
    }
    Ok(AssociationVerdict {
        net: net.label.clone(),
        target: target.name(),
        tolerance: tol,
        associated: entries.iter().all(|e| e.associated),
        any_divergence: entries.iter().any(|e| e.diverges),
        entries,
        window: None,
        embedding: net.embedding.clone(),
    })
}

/// [`check_association`] with every test function supported in `B(x0, radius)`.
pub fn check_local_association(
    net: &Net,
    target: &Target,
    x0: &[f64],
    radius: f64,
    phis: &[TestFunction],
    tol: f64,
) -> Result<AssociationVerdict> {
    for phi in phis {
        let dist = phi
            .center
            .iter()
            .zip(x0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        if dist + phi.radius > radius * (1.0 + 1e-12) {
            return Err(GfError::Support(format!(
                "test function at {:?} radius {} leaves the ball B({x0:?}, {radius})",
                phi.center, phi.radius
            )));
        }
    }
    let mut v = check_association(net, target, phis, tol)?;
    v.window = Some((x0.to_vec(), radius));
    Ok(v)
}

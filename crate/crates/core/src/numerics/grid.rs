use serde::{Deserialize, Serialize};

use crate::{GfError, Result};

/// Uniform 1D grid with both endpoints included: `spacing = (upper - lower) / (points - 1)`.
///
/// A periodic grid represents one period of length `points * spacing`; the
/// point `upper + spacing` is identified with `lower`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub lower: f64,
    pub upper: f64,
    pub points: usize,
    #[serde(default)]
    pub periodic: bool,
}

impl Grid1D {
    pub fn new(lower: f64, upper: f64, points: usize) -> Result<Self> {
        if points < 2 {
            return Err(GfError::invalid(format!(
                "grid needs at least 2 points, got {points}"
            )));
        }
        if !(lower.is_finite() && upper.is_finite()) || upper <= lower {
            return Err(GfError::invalid(format!(
                "grid bounds must satisfy lower < upper, got [{lower}, {upper}]"
            )));
        }
        Ok(Self {
            lower,
            upper,
            points,
            periodic: false,
        })
    }

    /// Symmetric grid on `[-half_width, half_width]`.
    pub fn symmetric(half_width: f64, points: usize) -> Result<Self> {
        Self::new(-half_width, half_width, points)
    }

    /// One period `[lower, lower + period)` sampled at `points` nodes.
    pub fn periodic(lower: f64, period: f64, points: usize) -> Result<Self> {
        if !(period > 0.0) {
            return Err(GfError::invalid("period must be positive"));
        }
        let spacing = period / points as f64;
        let mut g = Self::new(lower, lower + spacing * (points as f64 - 1.0), points)?;
        g.periodic = true;
        Ok(g)
    }

    /// Same nodes, flagged as one period of a periodic function.
    pub fn as_periodic(&self) -> Self {
        Self {
            periodic: true,
            ..self.clone()
        }
    }

    pub fn spacing(&self) -> f64 {
        (self.upper - self.lower) / (self.points as f64 - 1.0)
    }

    /// Length of the periodic cell used by spectral methods.
    pub fn period(&self) -> f64 {
        self.spacing() * self.points as f64
    }

    pub fn len(&self) -> usize {
        self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points == 0
    }

    pub fn coord(&self, i: usize) -> f64 {
        if i + 1 == self.points {
            self.upper
        } else {
            self.lower + self.spacing() * i as f64
        }
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.coord(i)).collect()
    }

    /// Index of the node nearest to `x` (clamped to the grid).
    pub fn nearest(&self, x: f64) -> usize {
        let r = ((x - self.lower) / self.spacing()).round();
        r.clamp(0.0, self.points as f64 - 1.0) as usize
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lower && x <= self.upper
    }
}

/// Tensor grid in `(t, x)`. Field storage is row-major with one row per `t`
/// node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub t: Grid1D,
    pub x: Grid1D,
}

impl Grid2D {
    pub fn new(t: Grid1D, x: Grid1D) -> Self {
        Self { t, x }
    }

    pub fn len(&self) -> usize {
        self.t.points * self.x.points
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.t.points, self.x.points)
    }

    #[inline]
    pub fn index(&self, it: usize, ix: usize) -> usize {
        it * self.x.points + ix
    }

    /// Samples `f(t, x)` row by row.
    pub fn sample<T>(&self, mut f: impl FnMut(f64, f64) -> T) -> Vec<T> {
        let ts = self.t.coords();
        let xs = self.x.coords();
        let mut out = Vec::with_capacity(self.len());
        for &t in &ts {
            for &x in &xs {
                out.push(f(t, x));
            }
        }
        out
    }
}

/// Grid attached to a net: one or two dimensional.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dim", rename_all = "snake_case")]
pub enum GridSpec {
    One(Grid1D),
    Two(Grid2D),
}

impl GridSpec {
    pub fn len(&self) -> usize {
        match self {
            GridSpec::One(g) => g.len(),
            GridSpec::Two(g) => g.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        match self {
            GridSpec::One(_) => 1,
            GridSpec::Two(_) => 2,
        }
    }

    /// Axes in storage order (`t` then `x` for 2D).
    pub fn axes(&self) -> Vec<&Grid1D> {
        match self {
            GridSpec::One(g) => vec![g],
            GridSpec::Two(g) => vec![&g.t, &g.x],
        }
    }

    /// Volume element of the tensor trapezoid rule.
    pub fn cell_volume(&self) -> f64 {
        self.axes().iter().map(|a| a.spacing()).product()
    }

    /// Coordinates of the flat storage index.
    pub fn point(&self, flat: usize) -> Vec<f64> {
        match self {
            GridSpec::One(g) => vec![g.coord(flat)],
            GridSpec::Two(g) => {
                let it = flat / g.x.points;
                let ix = flat % g.x.points;
                vec![g.t.coord(it), g.x.coord(ix)]
            }
        }
    }
}

/// Axis-aligned compact window, one closed interval per axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub ranges: Vec<(f64, f64)>,
}

impl Window {
    pub fn new(ranges: Vec<(f64, f64)>) -> Result<Self> {
        for &(a, b) in &ranges {
            if !(a <= b) {
                return Err(GfError::invalid(format!(
                    "window range [{a}, {b}] is empty"
                )));
            }
        }
        Ok(Self { ranges })
    }

    /// Interior window keeping `margin` (fraction of each axis length) away
    /// from every boundary.
    pub fn interior(grid: &GridSpec, margin: f64) -> Self {
        let ranges = grid
            .axes()
            .iter()
            .map(|a| {
                let m = margin * (a.upper - a.lower);
                (a.lower + m, a.upper - m)
            })
            .collect();
        Self { ranges }
    }

    /// Checks that the window sits strictly inside the grid.
    pub fn check_inside(&self, grid: &GridSpec) -> Result<()> {
        let axes = grid.axes();
        if axes.len() != self.ranges.len() {
            return Err(GfError::invalid("window dimension does not match the grid"));
        }
        for (a, &(lo, hi)) in axes.iter().zip(&self.ranges) {
            if !(lo > a.lower && hi < a.upper) {
                return Err(GfError::Support(format!(
                    "window [{lo}, {hi}] not strictly inside grid axis [{}, {}]",
                    a.lower, a.upper
                )));
            }
        }
        Ok(())
    }

    /// Index range of grid nodes inside the window along each axis.
    pub fn index_ranges(&self, grid: &GridSpec) -> Vec<std::ops::Range<usize>> {
        grid.axes()
            .iter()
            .zip(&self.ranges)
            .map(|(a, &(lo, hi))| {
                let h = a.spacing();
                let first = ((lo - a.lower) / h - 1e-9).ceil().max(0.0) as usize;
                let last = ((hi - a.lower) / h + 1e-9)
                    .floor()
                    .min(a.points as f64 - 1.0) as usize;
                first..(last + 1).max(first)
            })
            .collect()
    }

    /// Flat storage indices of the nodes inside the window.
    pub fn flat_indices(&self, grid: &GridSpec) -> Vec<usize> {
        let r = self.index_ranges(grid);
        match grid {
            GridSpec::One(_) => r[0].clone().collect(),
            GridSpec::Two(g) => {
                let mut out = Vec::new();
                for it in r[0].clone() {
                    for ix in r[1].clone() {
                        out.push(g.index(it, ix));
                    }
                }
                out
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_includes_endpoints() {
        let g = Grid1D::new(-1.0, 1.0, 5).unwrap();
        assert_eq!(g.spacing(), 0.5);
        assert_eq!(g.coords(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    }

    #[test]
    fn periodic_grid_drops_duplicate_endpoint() {
        let g = Grid1D::periodic(-std::f64::consts::PI, 2.0 * std::f64::consts::PI, 8).unwrap();
        assert!(g.periodic);
        assert!((g.period() - 2.0 * std::f64::consts::PI).abs() < 1e-14);
        assert!((g.upper - (std::f64::consts::PI - g.spacing())).abs() < 1e-14);
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(Grid1D::new(0.0, 1.0, 1).is_err());
        assert!(Grid1D::new(1.0, 0.0, 4).is_err());
    }

    #[test]
    fn interior_window_is_inside() {
        let g = GridSpec::One(Grid1D::new(0.0, 10.0, 101).unwrap());
        let w = Window::interior(&g, 0.1);
        w.check_inside(&g).unwrap();
        let idx = w.flat_indices(&g);
        assert_eq!(idx.first(), Some(&10));
        assert_eq!(idx.last(), Some(&90));
    }
}

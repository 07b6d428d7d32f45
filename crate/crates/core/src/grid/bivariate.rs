use std::f64::consts::PI;

use super::UniformGrid1D;
use crate::error::{Error, Result};

/// Bivariate test functions with a jump across a curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BivariateFunction {
    /// `cos(πx)cos(πy)` inside the circle `(x+½)² + (y−½)² < 1`,
    /// `1 − cos(πx)sin(πy)` outside.
    CircleArc,
    /// `±cos(πx)cos(πy)` plus a constant per quadrant, split at `x = ½`
    /// and `y = ½`.
    Quadrants,
}

/// Mean of `cos(πx)` over `[a, b]`.
fn mean_cos_pi(a: f64, b: f64) -> f64 {
    let w = b - a;
    let m = 0.5 * (a + b);
    let t = 0.5 * PI * w;
    let sinc = if t.abs() < 1e-4 {
        1.0 - t * t / 6.0
    } else {
        t.sin() / t
    };
    (PI * m).cos() * sinc
}

impl BivariateFunction {
    pub fn value(&self, x: f64, y: f64) -> f64 {
        let (cx, cy) = ((PI * x).cos(), (PI * y).cos());
        match self {
            BivariateFunction::CircleArc => {
                let r2 = (x + 0.5) * (x + 0.5) + (y - 0.5) * (y - 0.5);
                if r2 < 1.0 {
                    cx * cy
                } else {
                    1.0 - cx * (PI * y).sin()
                }
            }
            BivariateFunction::Quadrants => {
                let (sign, shift) = Self::quadrant(x >= 0.5, y >= 0.5);
                sign * cx * cy + shift
            }
        }
    }

    fn quadrant(right: bool, top: bool) -> (f64, f64) {
        match (right, top) {
            (false, false) => (1.0, 0.0),
            (true, true) => (-1.0, 4.0),
            _ => (-1.0, 2.0),
        }
    }

    /// Abscissa of the singularity curve crossing the row at height `y`.
    /// For the quadrant function this is the vertical line `x = ½`.
    pub fn curve(&self, y: f64) -> f64 {
        match self {
            BivariateFunction::CircleArc => -0.5 + (1.0 - (y - 0.5) * (y - 0.5)).sqrt(),
            BivariateFunction::Quadrants => 0.5,
        }
    }

    /// Mean over the rectangle `[x0, x1] × [y0, y1]`.
    pub fn cell_average(&self, x0: f64, x1: f64, y0: f64, y1: f64) -> Result<f64> {
        match self {
            BivariateFunction::Quadrants => {
                let split = |a: f64, b: f64| -> Vec<(f64, f64, bool)> {
                    if b <= 0.5 {
                        vec![(a, b, false)]
                    } else if a >= 0.5 {
                        vec![(a, b, true)]
                    } else {
                        vec![(a, 0.5, false), (0.5, b, true)]
                    }
                };
                let area = (x1 - x0) * (y1 - y0);
                let mut total = 0.0;
                for &(xa, xb, right) in &split(x0, x1) {
                    for &(ya, yb, top) in &split(y0, y1) {
                        let (sign, shift) = Self::quadrant(right, top);
                        let mean = sign * mean_cos_pi(xa, xb) * mean_cos_pi(ya, yb) + shift;
                        total += mean * (xb - xa) * (yb - ya);
                    }
                }
                Ok(total / area)
            }
            BivariateFunction::CircleArc => Err(Error::InvalidParameter(
                "cell averages are only provided for the quadrant function".into(),
            )),
        }
    }
}

/// Point values on a tensor grid, row-major with one row per `y` node.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2DSamples {
    x_grid: UniformGrid1D,
    y_grid: UniformGrid1D,
    values: Vec<f64>,
}

impl Grid2DSamples {
    pub fn new(x_grid: UniformGrid1D, y_grid: UniformGrid1D, values: Vec<f64>) -> Result<Self> {
        let expected = x_grid.node_count() * y_grid.node_count();
        if values.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                found: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self {
            x_grid,
            y_grid,
            values,
        })
    }

    pub fn from_fn(
        x_grid: UniformGrid1D,
        y_grid: UniformGrid1D,
        f: impl Fn(f64, f64) -> f64,
    ) -> Self {
        let mut values = Vec::with_capacity(x_grid.node_count() * y_grid.node_count());
        for y in y_grid.nodes() {
            values.extend(x_grid.nodes().map(|x| f(x, y)));
        }
        Self {
            x_grid,
            y_grid,
            values,
        }
    }

    pub fn sample(function: BivariateFunction, n: usize) -> Result<Self> {
        let g = UniformGrid1D::unit(n)?;
        Ok(Self::from_fn(g, g, |x, y| function.value(x, y)))
    }

    pub fn x_grid(&self) -> &UniformGrid1D {
        &self.x_grid
    }

    pub fn y_grid(&self) -> &UniformGrid1D {
        &self.y_grid
    }

    pub fn cols(&self) -> usize {
        self.x_grid.node_count()
    }

    pub fn rows(&self) -> usize {
        self.y_grid.node_count()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols() + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let c = self.cols();
        &self.values[row * c..(row + 1) * c]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.rows()).map(|r| self.get(r, col)).collect()
    }
}

/// Cell averages on a tensor grid, row-major with one row per `y` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2DCells {
    x_grid: UniformGrid1D,
    y_grid: UniformGrid1D,
    averages: Vec<f64>,
}

impl Grid2DCells {
    pub fn new(x_grid: UniformGrid1D, y_grid: UniformGrid1D, averages: Vec<f64>) -> Result<Self> {
        let expected = x_grid.cell_count() * y_grid.cell_count();
        if averages.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                found: averages.len(),
            });
        }
        if let Some(i) = averages.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self {
            x_grid,
            y_grid,
            averages,
        })
    }

    pub fn average(function: BivariateFunction, n: usize) -> Result<Self> {
        let g = UniformGrid1D::unit(n)?;
        let mut averages = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                averages.push(function.cell_average(
                    g.node(c),
                    g.node(c + 1),
                    g.node(r),
                    g.node(r + 1),
                )?);
            }
        }
        Self::new(g, g, averages)
    }

    pub fn x_grid(&self) -> &UniformGrid1D {
        &self.x_grid
    }

    pub fn y_grid(&self) -> &UniformGrid1D {
        &self.y_grid
    }

    pub fn cols(&self) -> usize {
        self.x_grid.cell_count()
    }

    pub fn rows(&self) -> usize {
        self.y_grid.cell_count()
    }

    pub fn averages(&self) -> &[f64] {
        &self.averages
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.averages[row * self.cols() + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let c = self.cols();
        &self.averages[row * c..(row + 1) * c]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.rows()).map(|r| self.get(r, col)).collect()
    }
}

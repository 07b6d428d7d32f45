//! Uniform-grid data model for the two sampling frameworks.
//!
//! Point values live on the nodes `x_j = origin + j h`; cell averages live on
//! the `N` cells `[x_{j-1}, x_j]` bounded by the same `N + 1` nodes. The two
//! are linked through the primitive `F_j = h (f̄_1 + ... + f̄_j)`, which turns
//! cell-average data into point values of a continuous function.

mod bivariate;
mod functions;

pub use bivariate::{BivariateFunction, Grid2DCells, Grid2DSamples};
pub use functions::{FunctionId, Piece, PiecewiseTestFunction, Side};

use crate::error::{Error, Result};

/// Uniform 1D grid with `node_count` nodes starting at `origin`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformGrid1D {
    origin: f64,
    spacing: f64,
    node_count: usize,
}

impl UniformGrid1D {
    pub fn new(origin: f64, spacing: f64, node_count: usize) -> Result<Self> {
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "spacing must be positive, got {spacing}"
            )));
        }
        if !origin.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "origin must be finite, got {origin}"
            )));
        }
        if node_count < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 nodes, got {node_count}"
            )));
        }
        Ok(Self {
            origin,
            spacing,
            node_count,
        })
    }

    /// `n_cells` cells covering `[0, 1]`, i.e. `h = 1 / n_cells`.
    pub fn unit(n_cells: usize) -> Result<Self> {
        if n_cells == 0 {
            return Err(Error::InvalidGrid("need at least one cell".into()));
        }
        Self::new(0.0, 1.0 / n_cells as f64, n_cells + 1)
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn cell_count(&self) -> usize {
        self.node_count - 1
    }

    /// Coordinate of node `j`, computed as one fused multiply-add so that the
    /// same node is bit-identical on every refinement level.
    #[inline]
    pub fn node(&self, j: usize) -> f64 {
        (j as f64).mul_add(self.spacing, self.origin)
    }

    /// Coordinate of a possibly virtual node (negative or past the end).
    #[inline]
    pub fn node_signed(&self, j: isize) -> f64 {
        (j as f64).mul_add(self.spacing, self.origin)
    }

    pub fn end(&self) -> f64 {
        self.node(self.node_count - 1)
    }

    /// Grid with half the spacing over the same interval.
    pub fn refined(&self) -> Self {
        Self {
            origin: self.origin,
            spacing: self.spacing * 0.5,
            node_count: 2 * (self.node_count - 1) + 1,
        }
    }

    pub fn refined_by(&self, levels: usize) -> Self {
        (0..levels).fold(*self, |g, _| g.refined())
    }

    /// Index of the cell `[x_j, x_{j+1})` containing `x`, if inside the grid.
    pub fn cell_containing(&self, x: f64) -> Option<usize> {
        if x < self.origin || x > self.end() {
            return None;
        }
        let j = ((x - self.origin) / self.spacing).floor() as usize;
        Some(j.min(self.cell_count() - 1))
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.node_count).map(move |j| self.node(j))
    }

    /// Midpoint of cell `j` (zero-based, spanning `[x_j, x_{j+1}]`).
    pub fn cell_midpoint(&self, j: usize) -> f64 {
        (j as f64 + 0.5).mul_add(self.spacing, self.origin)
    }
}

fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::NonFinite(i)),
        None => Ok(()),
    }
}

/// Point values `f_j` on the nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSeries {
    grid: UniformGrid1D,
    values: Vec<f64>,
}

impl SampleSeries {
    pub fn new(grid: UniformGrid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::LengthMismatch {
                expected: grid.node_count(),
                found: values.len(),
            });
        }
        check_finite(&values)?;
        Ok(Self { grid, values })
    }

    /// Samples on `[0, 1]` with `values.len() - 1` cells.
    pub fn on_unit_interval(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::TooFewNodes {
                required: 2,
                found: values.len(),
            });
        }
        Self::new(UniformGrid1D::unit(values.len() - 1)?, values)
    }

    pub(crate) fn from_parts_unchecked(grid: UniformGrid1D, values: Vec<f64>) -> Self {
        debug_assert_eq!(grid.node_count(), values.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> &UniformGrid1D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `(x_j, f_j)` pairs.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(j, &v)| (self.grid.node(j), v))
    }
}

/// Cell means `f̄_j` over the cells of a grid (`node_count - 1` values).
#[derive(Debug, Clone, PartialEq)]
pub struct CellAverageSeries {
    grid: UniformGrid1D,
    averages: Vec<f64>,
}

impl CellAverageSeries {
    pub fn new(grid: UniformGrid1D, averages: Vec<f64>) -> Result<Self> {
        if averages.len() != grid.cell_count() {
            return Err(Error::LengthMismatch {
                expected: grid.cell_count(),
                found: averages.len(),
            });
        }
        check_finite(&averages)?;
        Ok(Self { grid, averages })
    }

    /// Averages on `[0, 1]` with one cell per value.
    pub fn on_unit_interval(averages: Vec<f64>) -> Result<Self> {
        Self::new(UniformGrid1D::unit(averages.len())?, averages)
    }

    pub fn grid(&self) -> &UniformGrid1D {
        &self.grid
    }

    pub fn averages(&self) -> &[f64] {
        &self.averages
    }

    pub fn into_averages(self) -> Vec<f64> {
        self.averages
    }

    pub fn len(&self) -> usize {
        self.averages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.averages.is_empty()
    }

    /// `(cell midpoint, f̄_j)` pairs, the plotting convention for cell data.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.averages
            .iter()
            .enumerate()
            .map(move |(j, &v)| (self.grid.cell_midpoint(j), v))
    }
}

/// Point values of the primitive, `F_0 = 0` and `F_j = h (f̄_1 + ... + f̄_j)`.
///
/// The running sum is accumulated strictly left to right and multiplied by
/// `h` per node, so the result is bitwise reproducible.
pub fn primitive(cells: &CellAverageSeries) -> SampleSeries {
    let h = cells.grid.spacing();
    let mut values = Vec::with_capacity(cells.grid.node_count());
    values.push(0.0);
    let mut sum = 0.0;
    for &avg in &cells.averages {
        sum += avg;
        values.push(h * sum);
    }
    SampleSeries::from_parts_unchecked(cells.grid, values)
}

/// Divided differences `(F_j - F_{j-1}) / h`, the inverse of [`primitive`].
pub fn cell_averages_from_primitive(samples: &SampleSeries) -> CellAverageSeries {
    let h = samples.grid.spacing();
    let averages = samples
        .values
        .windows(2)
        .map(|w| (w[1] - w[0]) / h)
        .collect();
    CellAverageSeries {
        grid: samples.grid,
        averages,
    }
}

/// Point samples of a test function. A node sitting exactly on a breakpoint
/// takes the right-hand piece.
pub fn sample(function: &PiecewiseTestFunction, grid: &UniformGrid1D) -> SampleSeries {
    let values = grid.nodes().map(|x| function.value(x)).collect();
    SampleSeries::from_parts_unchecked(*grid, values)
}

/// Exact cell averages of a test function, split at its breakpoints.
pub fn average(function: &PiecewiseTestFunction, grid: &UniformGrid1D) -> CellAverageSeries {
    let averages = (0..grid.cell_count())
        .map(|j| function.cell_average(grid.node(j), grid.node(j + 1)))
        .collect();
    CellAverageSeries {
        grid: *grid,
        averages,
    }
}

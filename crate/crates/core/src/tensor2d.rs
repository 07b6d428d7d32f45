//! Bivariate RC by tensor products.
//!
//! Point values: every row carries one singularity. The rows are corrected
//! and smoothed as in 1D, the smoothed matrix is refined rows-then-columns,
//! and the per-row correction polynomials are evaluated at the fine
//! abscissae and refined along columns. A curve `x = c(y)` fitted through the
//! row crossings decides where the correction applies.
//!
//! Cell averages: one level of the 1D cell pipeline on every row, then on
//! every column, repeated per level.

use crate::detect::DetectionParams;
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::grid::{CellAverageSeries, Grid2DCells, Grid2DSamples, SampleSeries, UniformGrid1D};
use crate::jumps::{estimate_jumps, JumpVector};
use crate::rc::{locate_singularities, rc_cell_averages_with, Framework};
use crate::subdivision::{refine_values, BoundaryPolicy, MIN_NODES};

/// Which side of the curve receives the correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MaskSide {
    /// Correction applies where `x >= c(y)`.
    #[default]
    Right,
    /// Correction applies where `x <= c(y)`.
    Left,
}

/// The singularity curve as a graph `x = c(y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularityCurve {
    /// Row heights and the crossing found in each row.
    pub rows: Vec<(f64, f64)>,
    /// Polynomial coefficients in the scaled variable `t = (y - center) / scale`,
    /// ascending.
    pub coefficients: Vec<f64>,
    pub center: f64,
    pub scale: f64,
    /// Max absolute residual of the fit at the rows.
    pub residual: f64,
}

impl SingularityCurve {
    pub fn value(&self, y: f64) -> f64 {
        let t = (y - self.center) / self.scale;
        self.coefficients
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc * t + c)
    }

    pub fn signed_distance(&self, x: f64, y: f64) -> f64 {
        x - self.value(y)
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }
}

/// Least squares by Householder QR; `a` is `m × n` row-major with `m >= n`.
fn least_squares(mut a: Vec<f64>, m: usize, n: usize, mut b: Vec<f64>) -> Result<Vec<f64>> {
    for k in 0..n {
        let norm = (k..m).map(|i| a[i * n + k].powi(2)).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidParameter(
                "curve fit is rank deficient".into(),
            ));
        }
        let alpha = if a[k * n + k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k..m).map(|i| a[i * n + k]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        for j in k..n {
            let dot: f64 = (k..m).map(|i| v[i - k] * a[i * n + j]).sum();
            let s = 2.0 * dot / vnorm2;
            for i in k..m {
                a[i * n + j] -= s * v[i - k];
            }
        }
        let dot: f64 = (k..m).map(|i| v[i - k] * b[i]).sum();
        let s = 2.0 * dot / vnorm2;
        for i in k..m {
            b[i] -= s * v[i - k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let r = a[k * n + k];
        if r == 0.0 {
            return Err(Error::InvalidParameter(
                "curve fit is rank deficient".into(),
            ));
        }
        x[k] = (b[k] - (k + 1..n).map(|j| a[k * n + j] * x[j]).sum::<f64>()) / r;
    }
    Ok(x)
}

/// Per-row singularity: exactly one hypothesis is required in each row.
fn row_jump(data: &Grid2DSamples, row: usize, params: &DetectionParams) -> Result<JumpVector> {
    let series = SampleSeries::new(*data.x_grid(), data.row(row).to_vec())?;
    let hyps = locate_singularities(&series, params, Framework::Point)
        .map_err(|e| e.in_line(format!("row {row}")))?;
    match hyps.len() {
        0 => Err(Error::RowWithoutSingularity(row)),
        1 => estimate_jumps(&series, &hyps[0]).map_err(|e| e.in_line(format!("row {row}"))),
        count => Err(Error::RowWithMultipleSingularities { row, count }),
    }
}

fn fit_from_rows(rows: Vec<(f64, f64)>, degree: usize) -> Result<SingularityCurve> {
    let m = rows.len();
    let n = (degree + 1).min(m);
    let (lo, hi) = rows
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &(y, _)| {
            (l.min(y), h.max(y))
        });
    let center = 0.5 * (lo + hi);
    let scale = if hi > lo { 0.5 * (hi - lo) } else { 1.0 };
    let mut a = Vec::with_capacity(m * n);
    for &(y, _) in &rows {
        let t = (y - center) / scale;
        let mut p = 1.0;
        for _ in 0..n {
            a.push(p);
            p *= t;
        }
    }
    let b = rows.iter().map(|r| r.1).collect();
    let coefficients = least_squares(a, m, n, b)?;
    let mut curve = SingularityCurve {
        rows,
        coefficients,
        center,
        scale,
        residual: 0.0,
    };
    curve.residual = curve
        .rows
        .iter()
        .map(|&(y, x)| (curve.value(y) - x).abs())
        .fold(0.0, f64::max);
    Ok(curve)
}

/// Fits `x = c(y)` through the per-row singularity locations.
pub fn fit_curve(
    data: &Grid2DSamples,
    params: &DetectionParams,
    degree: usize,
) -> Result<SingularityCurve> {
    fit_curve_with(data, params, degree, Execution::default()).map(|(c, _)| c)
}

fn fit_curve_with(
    data: &Grid2DSamples,
    params: &DetectionParams,
    degree: usize,
    exec: Execution,
) -> Result<(SingularityCurve, Vec<JumpVector>)> {
    match row_jumps(data, params, exec)? {
        Some(jumps) => Ok((curve_through(data, &jumps, degree)?, jumps)),
        None => Err(Error::RowWithoutSingularity(0)),
    }
}

/// One jump vector per row, or `None` when no row has a singularity.
fn row_jumps(
    data: &Grid2DSamples,
    params: &DetectionParams,
    exec: Execution,
) -> Result<Option<Vec<JumpVector>>> {
    let rows = map_indexed(exec, data.rows(), |r| row_jump(data, r, params));
    if rows
        .iter()
        .all(|r| matches!(r, Err(Error::RowWithoutSingularity(_))))
    {
        return Ok(None);
    }
    rows.into_iter().collect::<Result<Vec<_>>>().map(Some)
}

fn curve_through(
    data: &Grid2DSamples,
    jumps: &[JumpVector],
    degree: usize,
) -> Result<SingularityCurve> {
    let rows = jumps
        .iter()
        .enumerate()
        .map(|(r, jv)| (data.y_grid().node(r), jv.location))
        .collect();
    fit_from_rows(rows, degree)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TensorOrder {
    #[default]
    RowsFirst,
    ColumnsFirst,
}

fn refine_rows(
    values: &[f64],
    rows: usize,
    cols: usize,
    policy: BoundaryPolicy,
    exec: Execution,
) -> Vec<f64> {
    map_indexed(exec, rows, |r| {
        refine_values(
            &values[r * cols..(r + 1) * cols],
            policy,
            Execution::Sequential,
        )
    })
    .concat()
}

fn refine_columns(
    values: &[f64],
    rows: usize,
    cols: usize,
    policy: BoundaryPolicy,
    exec: Execution,
) -> Vec<f64> {
    let refined = map_indexed(exec, cols, |c| {
        let col: Vec<f64> = (0..rows).map(|r| values[r * cols + c]).collect();
        refine_values(&col, policy, Execution::Sequential)
    });
    let new_rows = 2 * rows - 1;
    let mut out = vec![0.0; new_rows * cols];
    for (c, col) in refined.iter().enumerate() {
        for (r, &v) in col.iter().enumerate() {
            out[r * cols + c] = v;
        }
    }
    out
}

/// One tensor-product refinement of a matrix of point values.
pub fn dd4_tensor_step(
    data: &Grid2DSamples,
    policy: BoundaryPolicy,
    order: TensorOrder,
    exec: Execution,
) -> Result<Grid2DSamples> {
    let (rows, cols) = (data.rows(), data.cols());
    if rows < MIN_NODES || cols < MIN_NODES {
        return Err(Error::TooFewNodes {
            required: MIN_NODES,
            found: rows.min(cols),
        });
    }
    let values = match order {
        TensorOrder::RowsFirst => {
            let v = refine_rows(data.values(), rows, cols, policy, exec);
            refine_columns(&v, rows, 2 * cols - 1, policy, exec)
        }
        TensorOrder::ColumnsFirst => {
            let v = refine_columns(data.values(), rows, cols, policy, exec);
            refine_rows(&v, 2 * rows - 1, cols, policy, exec)
        }
    };
    Grid2DSamples::new(data.x_grid().refined(), data.y_grid().refined(), values)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rc2DResult {
    /// `None` when no row has a singularity; the run is then plain tensor
    /// refinement.
    pub curve: Option<SingularityCurve>,
    pub row_jumps: Vec<JumpVector>,
    /// Input with the row corrections removed.
    pub smoothed: Grid2DSamples,
    /// Tensor refinement of `smoothed`.
    pub subdivided: Grid2DSamples,
    /// Row correction polynomials at the fine nodes, refined along columns.
    pub correction: Grid2DSamples,
    /// `correction` restricted to the corrected side of the curve.
    pub masked: Grid2DSamples,
    pub output: Grid2DSamples,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rc2DParams {
    pub detection: DetectionParams,
    pub curve_degree: usize,
    pub mask_side: MaskSide,
}

impl Default for Rc2DParams {
    fn default() -> Self {
        Self {
            detection: DetectionParams::default(),
            curve_degree: 4,
            mask_side: MaskSide::Right,
        }
    }
}

pub fn rc2d_point_values(
    data: &Grid2DSamples,
    levels: usize,
    params: &Rc2DParams,
) -> Result<Rc2DResult> {
    rc2d_point_values_with(data, levels, params, Execution::default())
}

pub fn rc2d_point_values_with(
    data: &Grid2DSamples,
    levels: usize,
    params: &Rc2DParams,
    exec: Execution,
) -> Result<Rc2DResult> {
    let (rows, cols) = (data.rows(), data.cols());
    let (curve, row_jumps) = match row_jumps(data, &params.detection, exec)? {
        Some(j) => (Some(curve_through(data, &j, params.curve_degree)?), j),
        None => (None, vec![JumpVector::new(f64::INFINITY, [0.0; 4]); rows]),
    };
    let x_grid = *data.x_grid();

    let mut smooth_values = Vec::with_capacity(rows * cols);
    for (r, jv) in row_jumps.iter().enumerate() {
        smooth_values.extend(
            data.row(r)
                .iter()
                .enumerate()
                .map(|(c, &f)| f - jv.evaluate(x_grid.node(c))),
        );
    }
    let smoothed = Grid2DSamples::new(x_grid, *data.y_grid(), smooth_values)?;

    let policy = BoundaryPolicy::BoundaryAsDiscontinuity;
    let mut subdivided = smoothed.clone();
    for _ in 0..levels {
        subdivided = dd4_tensor_step(&subdivided, policy, TensorOrder::RowsFirst, exec)?;
    }

    let fine_x = x_grid.refined_by(levels);
    let fine_cols = fine_x.node_count();
    let mut corr: Vec<f64> = map_indexed(exec, rows, |r| {
        (0..fine_cols)
            .map(|c| {
                if curve.is_some() {
                    row_jumps[r].cubic(fine_x.node(c))
                } else {
                    0.0
                }
            })
            .collect::<Vec<_>>()
    })
    .concat();
    let mut corr_rows = rows;
    for _ in 0..levels {
        corr = refine_columns(&corr, corr_rows, fine_cols, policy, exec);
        corr_rows = 2 * corr_rows - 1;
    }
    let fine_y = data.y_grid().refined_by(levels);
    let correction = Grid2DSamples::new(fine_x, fine_y, corr)?;

    let mut masked_values = Vec::with_capacity(correction.values().len());
    for r in 0..correction.rows() {
        let c_y = curve
            .as_ref()
            .map_or(f64::INFINITY, |c| c.value(fine_y.node(r)));
        masked_values.extend(correction.row(r).iter().enumerate().map(|(c, &t)| {
            let x = fine_x.node(c);
            let keep = match params.mask_side {
                MaskSide::Right => x >= c_y,
                MaskSide::Left => x <= c_y,
            };
            if keep {
                t
            } else {
                0.0
            }
        }));
    }
    let masked = Grid2DSamples::new(fine_x, fine_y, masked_values)?;
    let out_values = subdivided
        .values()
        .iter()
        .zip(masked.values())
        .map(|(g, t)| g + t)
        .collect();
    let output = Grid2DSamples::new(fine_x, fine_y, out_values)?;
    Ok(Rc2DResult {
        curve,
        row_jumps,
        smoothed,
        subdivided,
        correction,
        masked,
        output,
    })
}

/// One level of the 1D cell pipeline on each line of a row-major matrix.
fn refine_cell_lines(
    values: &[f64],
    lines: usize,
    len: usize,
    grid: UniformGrid1D,
    params: &DetectionParams,
    what: &str,
    exec: Execution,
) -> Result<Vec<Vec<f64>>> {
    map_indexed(exec, lines, |i| {
        let line = CellAverageSeries::new(grid, values[i * len..(i + 1) * len].to_vec())?;
        rc_cell_averages_with(&line, 1, params, Execution::Sequential)
            .map(|r| r.finest().averages().to_vec())
            .map_err(|e| e.in_line(format!("{what} {i}")))
    })
    .into_iter()
    .collect()
}

/// Rows then columns, one level at a time.
pub fn rc2d_cell_averages(
    data: &Grid2DCells,
    levels: usize,
    params: &DetectionParams,
) -> Result<Grid2DCells> {
    rc2d_cell_averages_with(data, levels, params, Execution::default())
}

pub fn rc2d_cell_averages_with(
    data: &Grid2DCells,
    levels: usize,
    params: &DetectionParams,
    exec: Execution,
) -> Result<Grid2DCells> {
    let mut current = data.clone();
    for _ in 0..levels {
        let (rows, cols) = (current.rows(), current.cols());
        let (xg, yg) = (*current.x_grid(), *current.y_grid());
        let by_rows =
            refine_cell_lines(current.averages(), rows, cols, xg, params, "row", exec)?.concat();
        let new_cols = 2 * cols;
        let transposed: Vec<f64> = (0..new_cols)
            .flat_map(|c| (0..rows).map(move |r| (r, c)))
            .map(|(r, c)| by_rows[r * new_cols + c])
            .collect();
        let by_cols = refine_cell_lines(&transposed, new_cols, rows, yg, params, "column", exec)?;
        let new_rows = 2 * rows;
        let mut values = vec![0.0; new_rows * new_cols];
        for (c, col) in by_cols.iter().enumerate() {
            for (r, &v) in col.iter().enumerate() {
                values[r * new_cols + c] = v;
            }
        }
        current = Grid2DCells::new(xg.refined(), yg.refined(), values)?;
    }
    Ok(current)
}

/// The linear tensor scheme on cell averages, through the primitive of
/// each line.
pub fn linear2d_cell_averages(
    data: &Grid2DCells,
    levels: usize,
    exec: Execution,
) -> Result<Grid2DCells> {
    let line = |values: &[f64], grid: UniformGrid1D| -> Result<Vec<f64>> {
        let cells = CellAverageSeries::new(grid, values.to_vec())?;
        Ok(
            crate::rc::linear_cell_averages(&cells, 1, Execution::Sequential)?
                .pop()
                .expect("one level requested")
                .into_averages(),
        )
    };
    let mut current = data.clone();
    for _ in 0..levels {
        let (rows, cols) = (current.rows(), current.cols());
        let (xg, yg) = (*current.x_grid(), *current.y_grid());
        let a = current.averages();
        let by_rows = map_indexed(exec, rows, |r| line(&a[r * cols..(r + 1) * cols], xg))
            .into_iter()
            .collect::<Result<Vec<_>>>()?
            .concat();
        let new_cols = 2 * cols;
        let by_cols = map_indexed(exec, new_cols, |c| {
            let col: Vec<f64> = (0..rows).map(|r| by_rows[r * new_cols + c]).collect();
            line(&col, yg)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        let new_rows = 2 * rows;
        let mut values = vec![0.0; new_rows * new_cols];
        for (c, col) in by_cols.iter().enumerate() {
            for (r, &v) in col.iter().enumerate() {
                values[r * new_cols + c] = v;
            }
        }
        current = Grid2DCells::new(xg.refined(), yg.refined(), values)?;
    }
    Ok(current)
}

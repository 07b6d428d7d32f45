//! Singularity detection from second differences, classification and
//! localization.

use std::fmt;

use crate::error::{Error, Result};
use crate::grid::SampleSeries;
use crate::jumps::jumps_at;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingularityKind {
    Corner,
    FunctionJump,
}

impl fmt::Display for SingularityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SingularityKind::Corner => "corner",
            SingularityKind::FunctionJump => "function_jump",
        })
    }
}

/// A cell `[x_j, x_{j+1}]` suspected to contain a singularity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularityHypothesis {
    pub cell_index: usize,
    pub kind: SingularityKind,
    /// Estimated location `x*`, unset straight out of detection.
    pub location: Option<f64>,
    /// Known breakpoint, for synthetic data.
    pub true_location: Option<f64>,
    /// `|Δ²f|` over its median. Negative once localization had to fall back
    /// to the midpoint.
    pub score: f64,
}

impl SingularityHypothesis {
    pub fn new(cell_index: usize, score: f64) -> Self {
        Self {
            cell_index,
            kind: SingularityKind::Corner,
            location: None,
            true_location: None,
            score,
        }
    }

    pub fn is_degraded(&self) -> bool {
        self.score < 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionParams {
    pub score_threshold: f64,
    pub min_separation_cells: usize,
    pub bisection_tolerance: f64,
}

impl Default for DetectionParams {
    fn default() -> Self {
        Self {
            score_threshold: 3.0,
            min_separation_cells: 8,
            bisection_tolerance: 1e-14,
        }
    }
}

impl DetectionParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.score_threshold > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "score threshold must exceed 1, got {}",
                self.score_threshold
            )));
        }
        if self.min_separation_cells < 8 {
            return Err(Error::InvalidParameter(format!(
                "minimum separation must be at least 8 cells, got {}",
                self.min_separation_cells
            )));
        }
        if !(self.bisection_tolerance > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "bisection tolerance must be positive, got {}",
                self.bisection_tolerance
            )));
        }
        Ok(())
    }
}

/// `h_c = |[f']| / (4 sup|f''|)`.
pub fn critical_scale_corner(jump_f_prime: f64, sup_f2: f64) -> Result<f64> {
    critical_scale(jump_f_prime, sup_f2)
}

/// `h_c = |[f]| / (4 sup|f'|)`.
pub fn critical_scale_jump(jump_f: f64, sup_f1: f64) -> Result<f64> {
    critical_scale(jump_f, sup_f1)
}

fn critical_scale(jump: f64, sup: f64) -> Result<f64> {
    if sup == 0.0 {
        return Err(Error::DegenerateSmoothness);
    }
    Ok(jump.abs() / (4.0 * sup.abs()))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Flags cells from strict local maxima of `d_j = |f_{j-1} - 2 f_j + f_{j+1}|`
/// that exceed `score_threshold` times the median of the `d_j` above the
/// rounding floor.
///
/// A flagged node `j` is turned into a cell by looking at which neighbouring
/// second difference departs more from the linear trend of its own side:
/// the singular cell contaminates both `D_j` and one neighbour. Only cells
/// with four clean nodes on each side (`3 <= j <= N - 4`) are kept.
pub fn detect_cells(
    samples: &SampleSeries,
    params: &DetectionParams,
) -> Result<Vec<SingularityHypothesis>> {
    params.validate()?;
    let f = samples.values();
    if f.len() < 3 {
        return Err(Error::TooFewNodes {
            required: 3,
            found: f.len(),
        });
    }
    let n = f.len() - 1;
    let mut signed = vec![0.0; n + 1];
    for j in 1..n {
        signed[j] = f[j - 1] - 2.0 * f[j] + f[j + 1];
    }
    let d: Vec<f64> = signed.iter().map(|v| v.abs()).collect();
    // Second differences below the floor are rounding noise. With fewer
    // than a handful above it the data is piecewise linear and there is no
    // smooth background to measure against.
    let scale = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = 16.0 * f64::EPSILON * scale;
    let background: Vec<f64> = d[1..n].iter().copied().filter(|&v| v > floor).collect();
    if background.is_empty() {
        return Ok(Vec::new());
    }
    let reference = if background.len() >= MIN_BACKGROUND {
        median(background)
    } else {
        floor
    };

    let mut out: Vec<SingularityHypothesis> = Vec::new();
    for j in 2..n.saturating_sub(1) {
        if !(d[j] > d[j - 1] && d[j] >= d[j + 1] && d[j] > params.score_threshold * reference) {
            continue;
        }
        let (left, right) = if j >= 4 && j + 4 <= n {
            (
                (signed[j - 1] - (2.0 * signed[j - 2] - signed[j - 3])).abs(),
                (signed[j + 1] - (2.0 * signed[j + 2] - signed[j + 3])).abs(),
            )
        } else {
            (d[j - 1], d[j + 1])
        };
        let cell = if right > left { j } else { j - 1 };
        if cell < 3 || cell + 4 > n {
            continue;
        }
        let hyp = SingularityHypothesis::new(cell, d[j] / reference);
        if let Some(prev) = out.last() {
            if cell - prev.cell_index < params.min_separation_cells {
                return Err(Error::MultipleSingularitiesTooClose {
                    first: prev.cell_index,
                    second: cell,
                    min_cells: params.min_separation_cells,
                });
            }
        }
        out.push(hyp);
    }
    Ok(out)
}

/// Fewest above-floor second differences that make a usable median.
const MIN_BACKGROUND: usize = 8;

/// Factor in the corner/jump test `|[f]| > c h (|[f']| + 1)`.
pub const JUMP_CLASS_FACTOR: f64 = 2.0;

/// Decides between a corner and a jump in `f` from jump estimates at the cell
/// midpoint. Anchored off the true corner, a corner shows `|[f]|` up to about
/// `|[f']| h / 2`, while a real jump keeps `[f] = O(1)`.
pub fn classify_kind(
    samples: &SampleSeries,
    hyp: &SingularityHypothesis,
) -> Result<SingularityHypothesis> {
    let h = samples.grid().spacing();
    let mid = samples.grid().cell_midpoint(hyp.cell_index);
    let jv = jumps_at(samples, hyp.cell_index, mid)?;
    let kind = if jv.jump0.abs() > JUMP_CLASS_FACTOR * h * (jv.jump1.abs() + 1.0) {
        SingularityKind::FunctionJump
    } else {
        SingularityKind::Corner
    };
    Ok(SingularityHypothesis { kind, ..*hyp })
}

/// Lagrange cubic through `(t_k, v_k)` evaluated at `t`.
fn lagrange(ts: [f64; 4], vs: [f64; 4], t: f64) -> f64 {
    let mut total = 0.0;
    for k in 0..4 {
        let mut w = 1.0;
        for m in 0..4 {
            if m != k {
                w *= (t - ts[m]) / (ts[k] - ts[m]);
            }
        }
        total += w * vs[k];
    }
    total
}

/// Root in the cell of the difference between the cubic through the four
/// nodes on the left and the cubic through the four nodes on the right.
pub fn locate_corner(
    samples: &SampleSeries,
    hyp: &SingularityHypothesis,
    params: &DetectionParams,
) -> Result<SingularityHypothesis> {
    let f = samples.values();
    let grid = samples.grid();
    let j = hyp.cell_index;
    let last = f.len() - 1;
    if j < 3 || j + 4 > last {
        let index = if j < 3 {
            j as isize - 3
        } else {
            (j + 4) as isize
        };
        return Err(Error::IndexOutOfRange { index, last });
    }
    let h = grid.spacing();
    let left_vals = [f[j - 3], f[j - 2], f[j - 1], f[j]];
    let right_vals = [f[j + 1], f[j + 2], f[j + 3], f[j + 4]];
    // Offsets from x_j in units of h.
    let h_at = |t: f64| {
        lagrange([1.0, 2.0, 3.0, 4.0], right_vals, t)
            - lagrange([-3.0, -2.0, -1.0, 0.0], left_vals, t)
    };
    let x_of = |t: f64| t.mul_add(h, grid.node(j));

    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let (mut h_lo, h_hi) = (h_at(lo), h_at(hi));
    let mut out = SingularityHypothesis {
        kind: SingularityKind::Corner,
        ..*hyp
    };
    if h_lo == 0.0 {
        out.location = Some(grid.node(j));
        return Ok(out);
    }
    if h_hi == 0.0 {
        out.location = Some(grid.node(j + 1));
        return Ok(out);
    }
    if h_lo.signum() == h_hi.signum() {
        // A root sitting on an end node shows up as rounding-level H there.
        let stencil_scale = left_vals
            .iter()
            .chain(&right_vals)
            .fold(0.0f64, |m, v| m.max(v.abs()));
        let noise = 64.0 * f64::EPSILON * stencil_scale.max(f64::MIN_POSITIVE);
        let (a_lo, a_hi) = (h_lo.abs(), h_hi.abs());
        // A root just outside the cell means the singularity sits on the
        // shared node: the far cubic is extrapolated there, so H is only
        // O(h^4) small rather than rounding-level.
        let beyond_left = h_at(-0.5).signum() != h_lo.signum();
        let beyond_right = h_at(1.5).signum() != h_hi.signum();
        if a_lo.min(a_hi) <= noise {
            out.location = Some(if a_lo <= a_hi {
                grid.node(j)
            } else {
                grid.node(j + 1)
            });
        } else if beyond_left && (!beyond_right || a_lo <= a_hi) {
            out.location = Some(grid.node(j));
        } else if beyond_right {
            out.location = Some(grid.node(j + 1));
        } else {
            out.location = Some(grid.cell_midpoint(j));
            out.score = -hyp.score.abs();
        }
        return Ok(out);
    }
    let tol = params.bisection_tolerance / h;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let h_mid = h_at(mid);
        if h_mid == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if h_mid.signum() == h_lo.signum() {
            lo = mid;
            h_lo = h_mid;
        } else {
            hi = mid;
        }
    }
    out.location = Some(x_of(0.5 * (lo + hi)));
    Ok(out)
}

/// Places a jump in `f` at the middle of its cell.
pub fn locate_jump_pointvalues(
    samples: &SampleSeries,
    hyp: &SingularityHypothesis,
) -> SingularityHypothesis {
    SingularityHypothesis {
        kind: SingularityKind::FunctionJump,
        location: Some(samples.grid().cell_midpoint(hyp.cell_index)),
        ..*hyp
    }
}

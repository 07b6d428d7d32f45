//! One-sided cubic Taylor fits, jump estimates and the correction term.
//!
//! The correction for a singularity at `x*` is the cubic
//! `[f] + [f'](x - x*) + [f''](x - x*)²/2 + [f'''](x - x*)³/6` for `x >= x*`
//! and zero to the left. Several singularities simply add up.

use crate::detect::SingularityHypothesis;
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::grid::{SampleSeries, Side};

/// Fits whose normalized offset matrix is worse conditioned than this are
/// rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// Estimated jumps `[f], [f'], [f''], [f''']` at `location`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpVector {
    pub location: f64,
    pub jump0: f64,
    pub jump1: f64,
    pub jump2: f64,
    pub jump3: f64,
    /// `(f⁻(x*), f⁺(x*))` from the two fits.
    pub side_values: Option<(f64, f64)>,
}

impl JumpVector {
    pub fn new(location: f64, jumps: [f64; 4]) -> Self {
        Self {
            location,
            jump0: jumps[0],
            jump1: jumps[1],
            jump2: jumps[2],
            jump3: jumps[3],
            side_values: None,
        }
    }

    pub fn jumps(&self) -> [f64; 4] {
        [self.jump0, self.jump1, self.jump2, self.jump3]
    }

    /// The one-sided cubic at `x`, ignoring the zero branch.
    #[inline]
    pub fn cubic(&self, x: f64) -> f64 {
        let u = x - self.location;
        self.jump0 + u * (self.jump1 + u * (0.5 * self.jump2 + u * (self.jump3 / 6.0)))
    }

    /// The cubic for `x >= location`, zero otherwise.
    #[inline]
    pub fn evaluate(&self, x: f64) -> f64 {
        if x >= self.location {
            self.cubic(x)
        } else {
            0.0
        }
    }
}

/// Sum of one-sided cubics, ordered by location.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CorrectionTerm {
    jumps: Vec<JumpVector>,
}

impl CorrectionTerm {
    pub fn new(jumps: Vec<JumpVector>) -> Result<Self> {
        if jumps.windows(2).any(|w| !(w[0].location < w[1].location)) {
            return Err(Error::InvalidParameter(
                "correction locations must be strictly increasing".into(),
            ));
        }
        if let Some(i) = jumps
            .iter()
            .position(|j| !j.jumps().iter().chain([&j.location]).all(|v| v.is_finite()))
        {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { jumps })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn jumps(&self) -> &[JumpVector] {
        &self.jumps
    }

    pub fn is_empty(&self) -> bool {
        self.jumps.is_empty()
    }

    /// Minimum distance between consecutive locations, if any.
    pub fn min_separation(&self) -> Option<f64> {
        self.jumps
            .windows(2)
            .map(|w| w[1].location - w[0].location)
            .reduce(f64::min)
    }
}

pub fn evaluate_correction(term: &CorrectionTerm, x: f64) -> f64 {
    let mut total = 0.0;
    for jv in &term.jumps {
        if x < jv.location {
            break;
        }
        total += jv.cubic(x);
    }
    total
}

/// `g_j = f_j - T(x_j)`.
pub fn smooth_data(samples: &SampleSeries, term: &CorrectionTerm) -> SampleSeries {
    smooth_data_with(samples, term, Execution::default())
}

pub fn smooth_data_with(
    samples: &SampleSeries,
    term: &CorrectionTerm,
    exec: Execution,
) -> SampleSeries {
    let grid = *samples.grid();
    let f = samples.values();
    let values = map_indexed(exec, f.len(), |j| {
        f[j] - evaluate_correction(term, grid.node(j))
    });
    SampleSeries::from_parts_unchecked(grid, values)
}

/// Solves `a x = b` for a 4×4 system by LU with partial pivoting and returns
/// the solution with an infinity-norm condition estimate.
fn solve4(a: [[f64; 4]; 4], b: [f64; 4]) -> Option<([f64; 4], f64)> {
    let mut lu = a;
    let mut perm = [0usize, 1, 2, 3];
    for k in 0..4 {
        let p = (k..4).max_by(|&i, &j| lu[i][k].abs().total_cmp(&lu[j][k].abs()))?;
        if lu[p][k] == 0.0 {
            return None;
        }
        lu.swap(k, p);
        perm.swap(k, p);
        for i in k + 1..4 {
            let m = lu[i][k] / lu[k][k];
            lu[i][k] = m;
            let pivot_row = lu[k];
            for (a, b) in lu[i][k + 1..].iter_mut().zip(&pivot_row[k + 1..]) {
                *a -= m * b;
            }
        }
    }
    let solve = |rhs: [f64; 4]| -> [f64; 4] {
        let mut y = [0.0; 4];
        for i in 0..4 {
            y[i] = rhs[perm[i]] - (0..i).map(|j| lu[i][j] * y[j]).sum::<f64>();
        }
        let mut x = [0.0; 4];
        for i in (0..4).rev() {
            x[i] = (y[i] - (i + 1..4).map(|j| lu[i][j] * x[j]).sum::<f64>()) / lu[i][i];
        }
        x
    };
    let norm = |m: &[[f64; 4]; 4]| {
        m.iter()
            .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    let mut inv = [[0.0; 4]; 4];
    for c in 0..4 {
        let mut e = [0.0; 4];
        e[c] = 1.0;
        let col = solve(e);
        for r in 0..4 {
            inv[r][c] = col[r];
        }
    }
    Some((solve(b), norm(&a) * norm(&inv)))
}

/// Taylor data `(value, d1, d2, d3)` at `x_star` of the cubic interpolating
/// the four nodes starting at `first`.
pub(crate) fn cubic_fit_from(
    samples: &SampleSeries,
    first: isize,
    x_star: f64,
) -> Result<[f64; 4]> {
    let grid = samples.grid();
    let last = samples.len() - 1;
    for idx in [first, first + 3] {
        if idx < 0 || idx as usize > last {
            return Err(Error::IndexOutOfRange { index: idx, last });
        }
    }
    let h = grid.spacing();
    let f = samples.values();
    let mut a = [[0.0; 4]; 4];
    let mut b = [0.0; 4];
    for i in 0..4 {
        let node = first as usize + i;
        let t = (grid.node(node) - x_star) / h;
        a[i] = [1.0, t, t * t, t * t * t];
        b[i] = f[node];
    }
    let (c, cond) = solve4(a, b).ok_or(Error::IllConditioned(f64::INFINITY))?;
    if !(cond <= MAX_CONDITION) {
        return Err(Error::IllConditioned(cond));
    }
    Ok([
        c[0],
        c[1] / h,
        2.0 * c[2] / (h * h),
        6.0 * c[3] / (h * h * h),
    ])
}

/// One-sided fit at `x_star` for the singular cell `[x_j, x_{j+1}]`: the left
/// side interpolates `f_{j-3..=j}`, the right side `f_{j+1..=j+4}`.
pub fn one_sided_cubic_fit(
    samples: &SampleSeries,
    anchor_index: usize,
    x_star: f64,
    side: Side,
) -> Result<[f64; 4]> {
    let j = anchor_index as isize;
    match side {
        Side::Left => cubic_fit_from(samples, j - 3, x_star),
        Side::Right => cubic_fit_from(samples, j + 1, x_star),
    }
}

/// Right fit minus left fit at the hypothesis location.
pub fn estimate_jumps(samples: &SampleSeries, hyp: &SingularityHypothesis) -> Result<JumpVector> {
    let x = hyp.location.ok_or_else(|| {
        Error::InvalidParameter(format!(
            "hypothesis in cell {} is not located",
            hyp.cell_index
        ))
    })?;
    jumps_at(samples, hyp.cell_index, x)
}

pub(crate) fn jumps_at(samples: &SampleSeries, cell: usize, x: f64) -> Result<JumpVector> {
    let left = one_sided_cubic_fit(samples, cell, x, Side::Left)?;
    let right = one_sided_cubic_fit(samples, cell, x, Side::Right)?;
    let mut jv = JumpVector::new(x, std::array::from_fn(|k| right[k] - left[k]));
    jv.side_values = Some((left[0], right[0]));
    Ok(jv)
}

/// Boundary discontinuities against a zero exterior: at the left end the
/// data fit itself, at the right end its negative.
pub fn boundary_jumps(samples: &SampleSeries) -> Result<[JumpVector; 2]> {
    let grid = samples.grid();
    let n = samples.len() as isize - 1;
    let (a, b) = (grid.origin(), grid.end());
    let left = cubic_fit_from(samples, 0, a)?;
    let right = cubic_fit_from(samples, n - 3, b)?;
    let mut lo = JumpVector::new(a, left);
    lo.side_values = Some((0.0, left[0]));
    let mut hi = JumpVector::new(b, right.map(|v| -v));
    hi.side_values = Some((right[0], 0.0));
    Ok([lo, hi])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::UniformGrid1D;
    use approx::assert_abs_diff_eq;

    fn sampled(n: usize, f: impl Fn(f64) -> f64) -> SampleSeries {
        let g = UniformGrid1D::unit(n).unwrap();
        let v = g.nodes().map(f).collect();
        SampleSeries::new(g, v).unwrap()
    }

    #[test]
    fn cubic_fit_is_exact() {
        let s = sampled(32, |x| x * x * x);
        let x = 0.51;
        for side in [Side::Left, Side::Right] {
            let fit = one_sided_cubic_fit(&s, 16, x, side).unwrap();
            assert_abs_diff_eq!(fit[0], x * x * x, epsilon = 1e-9);
            assert_abs_diff_eq!(fit[1], 3.0 * x * x, epsilon = 1e-9);
            assert_abs_diff_eq!(fit[2], 6.0 * x, epsilon = 1e-9);
            assert_abs_diff_eq!(fit[3], 6.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn constant_fit() {
        let s = sampled(20, |_| 2.25);
        let fit = one_sided_cubic_fit(&s, 10, 0.52, Side::Left).unwrap();
        assert_abs_diff_eq!(fit[0], 2.25, epsilon = 1e-13);
        for d in &fit[1..] {
            assert_abs_diff_eq!(*d, 0.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn stencil_out_of_range() {
        let s = sampled(10, |x| x);
        assert!(matches!(
            one_sided_cubic_fit(&s, 1, 0.15, Side::Left),
            Err(Error::IndexOutOfRange {
                index: -2,
                last: 10
            })
        ));
        assert!(one_sided_cubic_fit(&s, 7, 0.75, Side::Right).is_err());
    }

    #[test]
    fn heaviside_correction() {
        let t = CorrectionTerm::new(vec![JumpVector::new(0.0, [1.0, 0.0, 0.0, 0.0])]).unwrap();
        assert_eq!(evaluate_correction(&t, 5.0), 1.0);
        assert_eq!(evaluate_correction(&t, -1e-300), 0.0);
        assert_eq!(evaluate_correction(&t, 0.0), 1.0);
    }

    #[test]
    fn two_terms_add() {
        let a = JumpVector::new(0.2, [1.0, -2.0, 3.0, 0.5]);
        let b = JumpVector::new(0.6, [-0.5, 1.0, 0.25, -4.0]);
        let t = CorrectionTerm::new(vec![a, b]).unwrap();
        let x: f64 = 0.9;
        let (ua, ub) = (x - 0.2, x - 0.6);
        let oracle = (1.0 - 2.0 * ua + 1.5 * ua * ua + 0.5 / 6.0 * ua.powi(3))
            + (-0.5 + ub + 0.125 * ub * ub - 4.0 / 6.0 * ub.powi(3));
        assert_abs_diff_eq!(evaluate_correction(&t, x), oracle, epsilon = 1e-14);
        assert_eq!(evaluate_correction(&t, 0.1), 0.0);
        assert!(CorrectionTerm::new(vec![b, a]).is_err());
    }

    #[test]
    fn zero_jumps_leave_data_unchanged() {
        let s = sampled(16, |x| (3.0 * x).sin());
        let t = CorrectionTerm::new(vec![JumpVector::new(0.4, [0.0; 4])]).unwrap();
        assert_eq!(smooth_data(&s, &t), s);
    }

    #[test]
    fn boundary_jumps_are_end_fits() {
        let s = sampled(16, |x| 1.0 + x * x);
        let [lo, hi] = boundary_jumps(&s).unwrap();
        assert_abs_diff_eq!(lo.jump0, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(hi.jump0, -2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(hi.jump1, -2.0, epsilon = 1e-10);
    }
}

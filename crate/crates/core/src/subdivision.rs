//! The linear 4-point Dubuc-Deslauriers interpolatory scheme.
//!
//! Even nodes keep the coarse values, odd nodes get
//! `(-f_{j-1} + 9 f_j + 9 f_{j+1} - f_{j+2}) / 16`.

use crate::error::{Error, Result};
use crate::exec::{fill_indexed, Execution};
use crate::grid::SampleSeries;

/// How the stencil is completed past the ends of the data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryPolicy {
    /// Virtual zeros outside the grid.
    ZeroPad,
    /// Treat each end as a discontinuity at a known location: the missing
    /// neighbour is taken from the cubic through the four nearest nodes, so
    /// data that is a cubic near the boundary is reproduced exactly.
    #[default]
    BoundaryAsDiscontinuity,
}

impl BoundaryPolicy {
    pub fn name(&self) -> &'static str {
        match self {
            BoundaryPolicy::ZeroPad => "zero_pad",
            BoundaryPolicy::BoundaryAsDiscontinuity => "boundary_as_discontinuity",
        }
    }
}

/// One level of a subdivision run.
#[derive(Debug, Clone, PartialEq)]
pub struct SubdivisionLevelData {
    pub level: usize,
    pub series: SampleSeries,
}

pub const MIN_NODES: usize = 4;

fn ghosts(f: &[f64], policy: BoundaryPolicy) -> (f64, f64) {
    match policy {
        BoundaryPolicy::ZeroPad => (0.0, 0.0),
        BoundaryPolicy::BoundaryAsDiscontinuity => {
            let n = f.len() - 1;
            let left = 4.0 * f[0] - 6.0 * f[1] + 4.0 * f[2] - f[3];
            let right = 4.0 * f[n] - 6.0 * f[n - 1] + 4.0 * f[n - 2] - f[n - 3];
            (left, right)
        }
    }
}

/// One refinement of raw values; `f.len() >= 4` is the caller's job.
pub(crate) fn refine_values(f: &[f64], policy: BoundaryPolicy, exec: Execution) -> Vec<f64> {
    let n = f.len() - 1;
    let (left, right) = ghosts(f, policy);
    let at = |j: isize| -> f64 {
        if j < 0 {
            left
        } else if j as usize > n {
            right
        } else {
            f[j as usize]
        }
    };
    let mut out = vec![0.0; 2 * n + 1];
    fill_indexed(exec, &mut out, |i| {
        let j = i / 2;
        if i % 2 == 0 {
            f[j]
        } else {
            let j = j as isize;
            (9.0 * (at(j) + at(j + 1)) - (at(j - 1) + at(j + 2))) / 16.0
        }
    });
    out
}

fn check_len(len: usize) -> Result<()> {
    if len < MIN_NODES {
        return Err(Error::TooFewNodes {
            required: MIN_NODES,
            found: len,
        });
    }
    Ok(())
}

pub fn dd4_step(input: &SampleSeries, policy: BoundaryPolicy) -> Result<SampleSeries> {
    dd4_step_with(input, policy, Execution::default())
}

pub fn dd4_step_with(
    input: &SampleSeries,
    policy: BoundaryPolicy,
    exec: Execution,
) -> Result<SampleSeries> {
    check_len(input.len())?;
    let values = refine_values(input.values(), policy, exec);
    Ok(SampleSeries::from_parts_unchecked(
        input.grid().refined(),
        values,
    ))
}

/// Levels `0..=levels`, level 0 being the input.
pub fn dd4_refine(
    input: &SampleSeries,
    levels: usize,
    policy: BoundaryPolicy,
) -> Result<Vec<SubdivisionLevelData>> {
    dd4_refine_with(input, levels, policy, Execution::default())
}

pub fn dd4_refine_with(
    input: &SampleSeries,
    levels: usize,
    policy: BoundaryPolicy,
    exec: Execution,
) -> Result<Vec<SubdivisionLevelData>> {
    check_len(input.len())?;
    let mut out = Vec::with_capacity(levels + 1);
    out.push(SubdivisionLevelData {
        level: 0,
        series: input.clone(),
    });
    for level in 1..=levels {
        let next = dd4_step_with(&out[level - 1].series, policy, exec)?;
        out.push(SubdivisionLevelData {
            level,
            series: next,
        });
    }
    Ok(out)
}

/// Only the finest level, without keeping the intermediate ones.
pub fn dd4_refine_final(
    input: &SampleSeries,
    levels: usize,
    policy: BoundaryPolicy,
    exec: Execution,
) -> Result<SampleSeries> {
    check_len(input.len())?;
    let mut grid = *input.grid();
    let mut values = input.values().to_vec();
    for _ in 0..levels {
        values = refine_values(&values, policy, exec);
        grid = grid.refined();
    }
    Ok(SampleSeries::from_parts_unchecked(grid, values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::UniformGrid1D;

    fn series(values: Vec<f64>) -> SampleSeries {
        let g = UniformGrid1D::new(0.0, 1.0, values.len()).unwrap();
        SampleSeries::new(g, values).unwrap()
    }

    #[test]
    fn constant_is_preserved() {
        let s = series(vec![3.5; 9]);
        let r = dd4_step(&s, BoundaryPolicy::BoundaryAsDiscontinuity).unwrap();
        assert!(r.values().iter().all(|&v| v == 3.5));
        let z = dd4_step(&s, BoundaryPolicy::ZeroPad).unwrap();
        assert!(z.values()[4..13].iter().all(|&v| v == 3.5));
    }

    #[test]
    fn cubic_midpoint() {
        let s = series(vec![0.0, 1.0, 8.0, 27.0]);
        let r = dd4_step(&s, BoundaryPolicy::BoundaryAsDiscontinuity).unwrap();
        assert_eq!(r.values()[3], 3.375);
        assert_eq!(r.values()[1], 0.125);
        assert_eq!(r.values()[5], 15.625);
    }

    #[test]
    fn spike_mask() {
        let s = series(vec![0.0, 0.0, 1.0, 0.0, 0.0]);
        let r = dd4_step(&s, BoundaryPolicy::ZeroPad).unwrap();
        assert_eq!(r.values()[3], 9.0 / 16.0);
        assert_eq!(r.values()[5], 9.0 / 16.0);
        assert_eq!(r.values()[1], -1.0 / 16.0);
    }

    #[test]
    fn too_few_nodes() {
        let s = series(vec![1.0, 2.0, 3.0]);
        assert_eq!(
            dd4_step(&s, BoundaryPolicy::ZeroPad),
            Err(Error::TooFewNodes {
                required: 4,
                found: 3
            })
        );
    }

    #[test]
    fn zero_levels_is_identity() {
        let s = series(vec![1.0, -2.0, 3.0, 0.5, 7.0]);
        let r = dd4_refine(&s, 0, BoundaryPolicy::ZeroPad).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].series, s);
    }

    #[test]
    fn final_level_matches_full_run() {
        let s = series((0..12).map(|i| ((i * 37) % 11) as f64).collect());
        let all = dd4_refine(&s, 4, BoundaryPolicy::BoundaryAsDiscontinuity).unwrap();
        let last = dd4_refine_final(
            &s,
            4,
            BoundaryPolicy::BoundaryAsDiscontinuity,
            Execution::Sequential,
        )
        .unwrap();
        assert_eq!(all[4].series, last);
        assert_eq!(last.len(), 11 * 16 + 1);
    }
}

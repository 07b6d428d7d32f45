//! Regularization-correction pipelines for point values and cell averages.
//!
//! The data are smoothed by subtracting the one-sided cubic corrections,
//! refined with the linear scheme and corrected back at the new nodes.
//! Retained nodes are copied from the previous level, so the output
//! interpolates the input exactly.

use crate::detect::{
    classify_kind, detect_cells, locate_corner, locate_jump_pointvalues, DetectionParams,
    SingularityHypothesis, SingularityKind,
};
use crate::error::{Error, Result};
use crate::exec::{fill_indexed, Execution};
use crate::grid::{cell_averages_from_primitive, primitive, CellAverageSeries, SampleSeries};
use crate::jumps::{
    boundary_jumps, estimate_jumps, evaluate_correction, smooth_data_with, CorrectionTerm,
    JumpVector,
};
use crate::subdivision::{dd4_refine_with, BoundaryPolicy, SubdivisionLevelData};

pub const MIN_NODES: usize = 8;

/// Which sampling the input to a pipeline came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Framework {
    Point,
    Cell,
}

impl Framework {
    pub fn name(&self) -> &'static str {
        match self {
            Framework::Point => "point",
            Framework::Cell => "cell",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RCResult {
    /// Corrected reconstruction, level 0 being the input.
    pub levels: Vec<SubdivisionLevelData>,
    pub hypotheses: Vec<SingularityHypothesis>,
    pub correction: CorrectionTerm,
    /// Refinement of the smoothed data before the correction is added back.
    pub smoothed_levels: Vec<SubdivisionLevelData>,
    /// Jumps against a zero exterior at the left and right ends.
    pub boundary: [JumpVector; 2],
    pub policy: BoundaryPolicy,
}

impl RCResult {
    pub fn finest(&self) -> &SampleSeries {
        &self
            .levels
            .last()
            .expect("level 0 is always present")
            .series
    }

    /// True when some localization fell back to the cell midpoint.
    pub fn degraded(&self) -> bool {
        self.hypotheses.iter().any(|h| h.is_degraded())
    }
}

/// Cell-average pipeline output: the point-value run on the primitive and
/// the fine averages recovered from it at every level.
#[derive(Debug, Clone, PartialEq)]
pub struct RCCellResult {
    pub primitive: RCResult,
    pub averages: Vec<CellAverageSeries>,
}

impl RCCellResult {
    pub fn finest(&self) -> &CellAverageSeries {
        self.averages.last().expect("level 0 is always present")
    }
}

pub fn rc_point_values(
    samples: &SampleSeries,
    levels: usize,
    params: &DetectionParams,
) -> Result<RCResult> {
    rc_point_values_with(samples, levels, params, Execution::default())
}

pub fn rc_point_values_with(
    samples: &SampleSeries,
    levels: usize,
    params: &DetectionParams,
    exec: Execution,
) -> Result<RCResult> {
    run(samples, levels, params, Framework::Point, exec)
}

pub fn rc_cell_averages(
    cells: &CellAverageSeries,
    levels: usize,
    params: &DetectionParams,
) -> Result<RCCellResult> {
    rc_cell_averages_with(cells, levels, params, Execution::default())
}

pub fn rc_cell_averages_with(
    cells: &CellAverageSeries,
    levels: usize,
    params: &DetectionParams,
    exec: Execution,
) -> Result<RCCellResult> {
    let big_f = primitive(cells);
    let result = run(&big_f, levels, params, Framework::Cell, exec)?;
    let averages = result
        .levels
        .iter()
        .map(|l| cell_averages_from_primitive(&l.series))
        .collect();
    Ok(RCCellResult {
        primitive: result,
        averages,
    })
}

/// Detects, classifies and locates all singularities. In the cell framework
/// the data are a primitive, where every singularity is a corner.
pub fn locate_singularities(
    samples: &SampleSeries,
    params: &DetectionParams,
    framework: Framework,
) -> Result<Vec<SingularityHypothesis>> {
    detect_cells(samples, params)?
        .iter()
        .map(|hyp| {
            let hyp = match framework {
                Framework::Point => classify_kind(samples, hyp)?,
                Framework::Cell => *hyp,
            };
            match hyp.kind {
                SingularityKind::Corner => locate_corner(samples, &hyp, params),
                SingularityKind::FunctionJump => Ok(locate_jump_pointvalues(samples, &hyp)),
            }
        })
        .collect()
}

/// Correction term from located hypotheses.
pub fn correction_for(
    samples: &SampleSeries,
    hypotheses: &[SingularityHypothesis],
) -> Result<CorrectionTerm> {
    let jumps = hypotheses
        .iter()
        .map(|h| estimate_jumps(samples, h))
        .collect::<Result<Vec<_>>>()?;
    CorrectionTerm::new(jumps)
}

fn run(
    samples: &SampleSeries,
    levels: usize,
    params: &DetectionParams,
    framework: Framework,
    exec: Execution,
) -> Result<RCResult> {
    if samples.len() < MIN_NODES {
        return Err(Error::TooFewNodes {
            required: MIN_NODES,
            found: samples.len(),
        });
    }
    let hypotheses = locate_singularities(samples, params, framework)?;
    let correction = correction_for(samples, &hypotheses)?;
    let boundary = boundary_jumps(samples)?;
    let smoothed = smooth_data_with(samples, &correction, exec);
    let policy = BoundaryPolicy::BoundaryAsDiscontinuity;
    let smoothed_levels = dd4_refine_with(&smoothed, levels, policy, exec)?;
    let levels = correct_levels(samples, &smoothed_levels, &correction, exec);
    Ok(RCResult {
        levels,
        hypotheses,
        correction,
        smoothed_levels,
        boundary,
        policy,
    })
}

/// Adds the correction at the new nodes of every level and copies the
/// retained ones.
pub(crate) fn correct_levels(
    input: &SampleSeries,
    smoothed_levels: &[SubdivisionLevelData],
    correction: &CorrectionTerm,
    exec: Execution,
) -> Vec<SubdivisionLevelData> {
    let mut out = Vec::with_capacity(smoothed_levels.len());
    out.push(SubdivisionLevelData {
        level: 0,
        series: input.clone(),
    });
    for sm in &smoothed_levels[1..] {
        let grid = *sm.series.grid();
        let coarse = out
            .last()
            .map(|l: &SubdivisionLevelData| l.series.values())
            .unwrap_or(&[]);
        let g = sm.series.values();
        let mut values = vec![0.0; g.len()];
        fill_indexed(exec, &mut values, |i| {
            if i % 2 == 0 {
                coarse[i / 2]
            } else {
                g[i] + evaluate_correction(correction, grid.node(i))
            }
        });
        out.push(SubdivisionLevelData {
            level: sm.level,
            series: SampleSeries::from_parts_unchecked(grid, values),
        });
    }
    out
}

/// The linear scheme on raw data with the same boundary treatment.
pub fn linear_point_values(
    samples: &SampleSeries,
    levels: usize,
    exec: Execution,
) -> Result<Vec<SubdivisionLevelData>> {
    dd4_refine_with(
        samples,
        levels,
        BoundaryPolicy::BoundaryAsDiscontinuity,
        exec,
    )
}

/// The linear scheme applied to the primitive of cell averages.
pub fn linear_cell_averages(
    cells: &CellAverageSeries,
    levels: usize,
    exec: Execution,
) -> Result<Vec<CellAverageSeries>> {
    let big_f = primitive(cells);
    Ok(linear_point_values(&big_f, levels, exec)?
        .iter()
        .map(|l| cell_averages_from_primitive(&l.series))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{average, sample, PiecewiseTestFunction, UniformGrid1D};
    use std::f64::consts::PI;

    #[test]
    fn cubic_is_reproduced_everywhere() {
        let g = UniformGrid1D::unit(16).unwrap();
        let p = |x: f64| 2.0 - x + 3.0 * x * x - 1.5 * x * x * x;
        let s = SampleSeries::new(g, g.nodes().map(p).collect()).unwrap();
        let r = rc_point_values(&s, 5, &DetectionParams::default()).unwrap();
        assert!(r.hypotheses.is_empty());
        for (x, v) in r.finest().points() {
            assert!((v - p(x)).abs() <= 1e-11);
        }
    }

    #[test]
    fn interpolates_input() {
        let s = sample(
            &PiecewiseTestFunction::exp1(0.0),
            &UniformGrid1D::unit(16).unwrap(),
        );
        let r = rc_point_values(&s, 3, &DetectionParams::default()).unwrap();
        assert_eq!(r.hypotheses.len(), 1);
        assert_eq!(r.levels[0].series, s);
        let fine = r.finest().values();
        for (j, &v) in s.values().iter().enumerate() {
            assert_eq!(fine[8 * j], v);
        }
    }

    #[test]
    fn too_few_nodes() {
        let s = SampleSeries::on_unit_interval(vec![1.0; 7]).unwrap();
        assert!(matches!(
            rc_point_values(&s, 1, &DetectionParams::default()),
            Err(Error::TooFewNodes {
                required: 8,
                found: 7
            })
        ));
    }

    #[test]
    fn exp3_cell_run_has_one_transition_cell() {
        let f = PiecewiseTestFunction::exp3();
        let cells = average(&f, &UniformGrid1D::unit(20).unwrap());
        let r = rc_cell_averages(&cells, 5, &DetectionParams::default()).unwrap();
        assert_eq!(r.primitive.hypotheses.len(), 1);
        let x = r.primitive.hypotheses[0].location.unwrap();
        assert!((x - PI / 6.0).abs() < 1e-3);
        let fine = r.finest();
        let (lo, hi) = (
            f.one_sided(PI / 6.0, crate::grid::Side::Right, 0),
            f.one_sided(PI / 6.0, crate::grid::Side::Left, 0),
        );
        let between = fine
            .points()
            .filter(|&(x, v)| (x - PI / 6.0).abs() < 0.02 && v > lo + 0.5 && v < hi - 0.5)
            .count();
        assert!(between <= 1, "{between} transitional cells");
    }
}

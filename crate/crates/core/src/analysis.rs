//! Error norms, grid-refinement studies and numerical regularity estimates.

use std::fmt::Write as _;

use crate::detect::{DetectionParams, SingularityHypothesis, SingularityKind};
use crate::error::{Error, Result};
use crate::exec::{map_slice, Execution};
use crate::grid::{
    average, cell_averages_from_primitive, primitive, sample, CellAverageSeries,
    PiecewiseTestFunction, SampleSeries, UniformGrid1D,
};
use crate::jumps::estimate_jumps;
use crate::rc::{locate_singularities, rc_cell_averages_with, rc_point_values_with, Framework};
use crate::subdivision::{dd4_refine_final, dd4_refine_with, BoundaryPolicy};

/// Errors below this are treated as exact and get no order.
pub const ERROR_FLOOR: f64 = 1e-13;

/// Largest fine grid used when measuring errors.
pub const MAX_COMPARISON_NODES: usize = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Norm {
    Inf,
    L1,
}

impl Norm {
    pub fn name(&self) -> &'static str {
        match self {
            Norm::Inf => "inf",
            Norm::L1 => "l1",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Linear,
    Rc,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Linear => "linear",
            Scheme::Rc => "rc",
        }
    }
}

/// Max of `|exact(x_i) - approx_i|` over nodes outside every closed interval
/// of `exclusion`.
pub fn error_inf(
    exact: impl Fn(f64) -> f64,
    approx: &SampleSeries,
    exclusion: &[(f64, f64)],
) -> f64 {
    approx
        .points()
        .filter(|&(x, _)| !exclusion.iter().any(|&(lo, hi)| x >= lo && x <= hi))
        .map(|(x, v)| (exact(x) - v).abs())
        .fold(0.0, f64::max)
}

fn check_same_grid(a: &CellAverageSeries, b: &CellAverageSeries) -> Result<()> {
    if a.grid() != b.grid() {
        return Err(Error::InvalidParameter(
            "cell series live on different grids".into(),
        ));
    }
    Ok(())
}

/// Max difference of cell averages over cells that do not touch any
/// exclusion interval.
pub fn error_inf_cells(
    exact: &CellAverageSeries,
    approx: &CellAverageSeries,
    exclusion: &[(f64, f64)],
) -> Result<f64> {
    check_same_grid(exact, approx)?;
    let g = approx.grid();
    Ok((0..approx.len())
        .filter(|&j| {
            let (a, b) = (g.node(j), g.node(j + 1));
            !exclusion.iter().any(|&(lo, hi)| a <= hi && b >= lo)
        })
        .map(|j| (exact.averages()[j] - approx.averages()[j]).abs())
        .fold(0.0, f64::max))
}

/// `h Σ |exact_j - approx_j|` over all cells.
pub fn error_l1(exact: &CellAverageSeries, approx: &CellAverageSeries) -> Result<f64> {
    check_same_grid(exact, approx)?;
    let h = approx.grid().spacing();
    Ok(h * exact
        .averages()
        .iter()
        .zip(approx.averages())
        .map(|(e, a)| (e - a).abs())
        .sum::<f64>())
}

/// `log2(e0 / e1)`, NaN when either error is under the floor.
pub fn observed_order(e0: f64, e1: f64) -> f64 {
    if !(e0 >= ERROR_FLOOR && e1 >= ERROR_FLOOR) {
        return f64::NAN;
    }
    (e0 / e1).log2()
}

/// Least-squares slope of `-log2(error)` against `log2(n)`.
pub fn regression_order(resolutions: &[usize], errors: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = resolutions
        .iter()
        .zip(errors)
        .filter(|(_, &e)| e > 0.0 && e.is_finite())
        .map(|(&n, &e)| ((n as f64).log2(), -e.log2()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let (num, den) = pts.iter().fold((0.0, 0.0), |(n, d), &(x, y)| {
        (n + (x - mx) * (y - my), d + (x - mx) * (x - mx))
    });
    num / den
}

/// Default number of refinement levels for errors measured from `n` cells.
pub fn comparison_level(n: usize) -> usize {
    let mut level = 0;
    while level < 10 && n * (1 << (level + 1)) < MAX_COMPARISON_NODES {
        level += 1;
    }
    level
}

#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub function: PiecewiseTestFunction,
    pub framework: Framework,
    pub scheme: Scheme,
    pub resolutions: Vec<usize>,
    /// Overrides [`comparison_level`].
    pub levels: Option<usize>,
    pub norm: Norm,
    pub params: DetectionParams,
    /// Compare against the function with each jump moved to the middle of
    /// the cell containing it.
    pub relocate_jumps: bool,
    pub exec: Execution,
}

impl StudyConfig {
    pub fn new(
        function: PiecewiseTestFunction,
        framework: Framework,
        scheme: Scheme,
        norm: Norm,
    ) -> Self {
        Self {
            function,
            framework,
            scheme,
            resolutions: Vec::new(),
            levels: None,
            norm,
            params: DetectionParams::default(),
            relocate_jumps: false,
            exec: Execution::default(),
        }
    }

    pub fn resolutions(mut self, resolutions: impl IntoIterator<Item = usize>) -> Self {
        self.resolutions = resolutions.into_iter().collect();
        self
    }

    fn exclusion_description(&self) -> &'static str {
        match (self.scheme, self.framework, self.norm, self.relocate_jumps) {
            (_, _, Norm::L1, _) => "none",
            (_, Framework::Point, _, true) => "jump moved to cell midpoint",
            (Scheme::Linear, _, _, _) => "none",
            (Scheme::Rc, Framework::Point, _, _) => "nodes between s* and x*",
            (Scheme::Rc, Framework::Cell, _, _) => "cells meeting [min(s*,x*), max(s*,x*)]",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefinementReport {
    pub resolutions: Vec<usize>,
    /// NaN where the run failed.
    pub errors: Vec<f64>,
    /// `orders[i]` relates `errors[i]` and `errors[i + 1]`.
    pub orders: Vec<f64>,
    pub norm: Norm,
    pub exclusion: String,
    pub comparison_levels: Vec<usize>,
    pub failures: Vec<Option<String>>,
}

impl RefinementReport {
    pub fn final_order(&self) -> f64 {
        self.orders.last().copied().unwrap_or(f64::NAN)
    }
}

/// Exclusion intervals between true breakpoints and matching estimates.
fn exclusion_intervals(
    function: &PiecewiseTestFunction,
    hyps: &[SingularityHypothesis],
    h: f64,
) -> Vec<(f64, f64)> {
    hyps.iter()
        .filter_map(|hyp| {
            let x = hyp.location?;
            let s = function
                .breakpoints()
                .iter()
                .copied()
                .filter(|s| (s - x).abs() <= 2.0 * h)
                .min_by(|a, b| (a - x).abs().total_cmp(&(b - x).abs()))?;
            Some((s.min(x), s.max(x)))
        })
        .collect()
}

fn relocated(
    function: &PiecewiseTestFunction,
    grid: &UniformGrid1D,
) -> Result<PiecewiseTestFunction> {
    let moved = function
        .breakpoints()
        .iter()
        .map(|&s| grid.cell_containing(s).map_or(s, |j| grid.cell_midpoint(j)))
        .collect();
    function.with_breakpoints(moved)
}

fn study_point(cfg: &StudyConfig, n: usize, level: usize) -> Result<f64> {
    let grid = UniformGrid1D::unit(n)?;
    let data = sample(&cfg.function, &grid);
    let reference = if cfg.relocate_jumps {
        relocated(&cfg.function, &grid)?
    } else {
        cfg.function.clone()
    };
    let (fine, exclusion) = match cfg.scheme {
        Scheme::Linear => (
            dd4_refine_final(
                &data,
                level,
                BoundaryPolicy::BoundaryAsDiscontinuity,
                cfg.exec,
            )?,
            Vec::new(),
        ),
        Scheme::Rc => {
            let r = rc_point_values_with(&data, level, &cfg.params, cfg.exec)?;
            let exclusion = if cfg.relocate_jumps {
                Vec::new()
            } else {
                exclusion_intervals(&cfg.function, &r.hypotheses, grid.spacing())
            };
            (r.finest().clone(), exclusion)
        }
    };
    Ok(error_inf(|x| reference.value(x), &fine, &exclusion))
}

fn study_cell(cfg: &StudyConfig, n: usize, level: usize) -> Result<f64> {
    let grid = UniformGrid1D::unit(n)?;
    let data = average(&cfg.function, &grid);
    let exact = average(&cfg.function, &grid.refined_by(level));
    let (fine, exclusion) = match cfg.scheme {
        Scheme::Linear => {
            let big_f = dd4_refine_final(
                &primitive(&data),
                level,
                BoundaryPolicy::BoundaryAsDiscontinuity,
                cfg.exec,
            )?;
            (cell_averages_from_primitive(&big_f), Vec::new())
        }
        Scheme::Rc => {
            let r = rc_cell_averages_with(&data, level, &cfg.params, cfg.exec)?;
            let exclusion =
                exclusion_intervals(&cfg.function, &r.primitive.hypotheses, grid.spacing());
            (r.finest().clone(), exclusion)
        }
    };
    match cfg.norm {
        Norm::Inf => error_inf_cells(&exact, &fine, &exclusion),
        Norm::L1 => error_l1(&exact, &fine),
    }
}

/// Runs the scheme at every resolution and tabulates errors and orders. A
/// failing resolution is recorded and leaves a NaN error.
pub fn refinement_study(cfg: &StudyConfig) -> Result<RefinementReport> {
    if cfg.resolutions.is_empty() || cfg.resolutions.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "resolutions must be non-empty and ascending".into(),
        ));
    }
    if cfg.framework == Framework::Point && cfg.norm == Norm::L1 {
        return Err(Error::InvalidParameter(
            "the L1 norm is measured on cell averages".into(),
        ));
    }
    let rows = map_slice(cfg.exec, &cfg.resolutions, |&n| {
        let level = cfg.levels.unwrap_or_else(|| comparison_level(n));
        let err = match cfg.framework {
            Framework::Point => study_point(cfg, n, level),
            Framework::Cell => study_cell(cfg, n, level),
        };
        (level, err)
    });
    let comparison_levels = rows.iter().map(|r| r.0).collect();
    let errors: Vec<f64> = rows
        .iter()
        .map(|r| *r.1.as_ref().unwrap_or(&f64::NAN))
        .collect();
    let failures = rows
        .iter()
        .map(|r| r.1.as_ref().err().map(|e| e.to_string()))
        .collect();
    let orders = errors
        .windows(2)
        .map(|w| observed_order(w[0], w[1]))
        .collect();
    Ok(RefinementReport {
        resolutions: cfg.resolutions.clone(),
        errors,
        orders,
        norm: cfg.norm,
        exclusion: cfg.exclusion_description().to_string(),
        comparison_levels,
        failures,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularityReport {
    pub levels: Vec<usize>,
    pub beta1: Vec<f64>,
    pub beta2: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct RegularityConfig {
    pub function: PiecewiseTestFunction,
    pub framework: Framework,
    pub scheme: Scheme,
    pub n: usize,
    pub levels: Vec<usize>,
    pub params: DetectionParams,
    pub exec: Execution,
}

/// Max of the `order`-th undivided difference over windows whose points all
/// lie left of `cutoff`.
fn max_difference(positions: &[f64], values: &[f64], order: usize, cutoff: f64) -> f64 {
    let end = positions.partition_point(|&x| x < cutoff);
    let mut diff: Vec<f64> = values[..end].to_vec();
    for _ in 0..order {
        diff = diff.windows(2).map(|w| w[1] - w[0]).collect();
    }
    diff.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn beta(k: i32, coarse: f64, fine: f64) -> f64 {
    if !(coarse > 0.0 && fine > 0.0) {
        return f64::NAN;
    }
    -(2f64.powi(k) * fine / coarse).log2()
}

/// `β_k = -log2(2^k ‖Δ^{k+1} f^L‖ / ‖Δ^{k+1} f^{L-1}‖)` on the smooth window
/// left of the first singularity (true or estimated, whichever is smaller).
/// `L` counts the subdivision levels of the finer of the two data sets.
pub fn numerical_regularity(cfg: &RegularityConfig) -> Result<RegularityReport> {
    let top = *cfg
        .levels
        .iter()
        .max()
        .ok_or_else(|| Error::InvalidParameter("no levels requested".into()))?;
    if cfg.levels.contains(&0) {
        return Err(Error::InvalidParameter(
            "regularity levels start at 1".into(),
        ));
    }
    let grid = UniformGrid1D::unit(cfg.n)?;
    let mut cutoff = cfg
        .function
        .breakpoints()
        .first()
        .copied()
        .unwrap_or(f64::INFINITY);
    // (positions, values) per level.
    let series: Vec<(Vec<f64>, Vec<f64>)> = match cfg.framework {
        Framework::Point => {
            let data = sample(&cfg.function, &grid);
            let levels = match cfg.scheme {
                Scheme::Linear => dd4_refine_with(
                    &data,
                    top,
                    BoundaryPolicy::BoundaryAsDiscontinuity,
                    cfg.exec,
                )?,
                Scheme::Rc => {
                    let r = rc_point_values_with(&data, top, &cfg.params, cfg.exec)?;
                    if let Some(x) = r.hypotheses.first().and_then(|h| h.location) {
                        cutoff = cutoff.min(x);
                    }
                    r.levels
                }
            };
            levels
                .into_iter()
                .map(|l| (l.series.grid().nodes().collect(), l.series.into_values()))
                .collect()
        }
        Framework::Cell => {
            let data = average(&cfg.function, &grid);
            let averages = match cfg.scheme {
                Scheme::Linear => dd4_refine_with(
                    &primitive(&data),
                    top,
                    BoundaryPolicy::BoundaryAsDiscontinuity,
                    cfg.exec,
                )?
                .iter()
                .map(|l| cell_averages_from_primitive(&l.series))
                .collect::<Vec<_>>(),
                Scheme::Rc => {
                    let r = rc_cell_averages_with(&data, top, &cfg.params, cfg.exec)?;
                    if let Some(x) = r.primitive.hypotheses.first().and_then(|h| h.location) {
                        cutoff = cutoff.min(x);
                    }
                    r.averages
                }
            };
            // A cell counts by its right end.
            averages
                .into_iter()
                .map(|c| {
                    let g = *c.grid();
                    (
                        (1..g.node_count()).map(|j| g.node(j)).collect(),
                        c.into_averages(),
                    )
                })
                .collect()
        }
    };
    let (mut beta1, mut beta2) = (Vec::new(), Vec::new());
    for &l in &cfg.levels {
        let (pc, vc) = &series[l - 1];
        let (pf, vf) = &series[l];
        beta1.push(beta(
            1,
            max_difference(pc, vc, 2, cutoff),
            max_difference(pf, vf, 2, cutoff),
        ));
        beta2.push(beta(
            2,
            max_difference(pc, vc, 3, cutoff),
            max_difference(pf, vf, 3, cutoff),
        ));
    }
    Ok(RegularityReport {
        levels: cfg.levels.clone(),
        beta1,
        beta2,
    })
}

/// Location and jump-estimate errors at one resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderRow {
    pub n: usize,
    pub location_error: f64,
    pub jump_errors: [f64; 4],
}

/// Estimates the singularity at breakpoint `breakpoint` of point samples
/// and compares location and jumps with the exact extension jumps at the
/// estimated location.
pub fn jump_ladder(
    function: &PiecewiseTestFunction,
    breakpoint: usize,
    resolutions: &[usize],
    params: &DetectionParams,
) -> Result<Vec<LadderRow>> {
    let s = *function
        .breakpoints()
        .get(breakpoint)
        .ok_or_else(|| Error::InvalidParameter(format!("no breakpoint {breakpoint}")))?;
    resolutions
        .iter()
        .map(|&n| {
            let grid = UniformGrid1D::unit(n)?;
            let data = sample(function, &grid);
            let hyps = locate_singularities(&data, params, Framework::Point)?;
            let hyp = hyps
                .iter()
                .find(|h| {
                    h.location
                        .is_some_and(|x| (x - s).abs() <= 2.0 * grid.spacing())
                })
                .ok_or_else(|| {
                    Error::InvalidParameter(format!("breakpoint not detected at N={n}"))
                })?;
            let jv = estimate_jumps(&data, hyp)?;
            let exact = function.extension_jumps(breakpoint, jv.location);
            let est = jv.jumps();
            Ok(LadderRow {
                n,
                location_error: if hyp.kind == SingularityKind::Corner {
                    (jv.location - s).abs()
                } else {
                    f64::NAN
                },
                jump_errors: std::array::from_fn(|k| (est[k] - exact[k]).abs()),
            })
        })
        .collect()
}

/// A reference table: either refinement studies or regularity
/// estimates, one column group per scheme.
#[derive(Debug, Clone, PartialEq)]
pub enum StudyTable {
    Refinement {
        id: u8,
        title: String,
        columns: Vec<(Scheme, RefinementReport)>,
    },
    Regularity {
        id: u8,
        title: String,
        columns: Vec<(Scheme, RegularityReport)>,
    },
}

pub const TABLE_IDS: [u8; 5] = [1, 2, 3, 4, 5];

fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v:.10e}")
    }
}

impl StudyTable {
    pub fn id(&self) -> u8 {
        match self {
            StudyTable::Refinement { id, .. } | StudyTable::Regularity { id, .. } => *id,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        match self {
            StudyTable::Refinement { columns, .. } => {
                let norm = columns.first().map_or("inf", |c| c.1.norm.name());
                out.push('N');
                for (scheme, _) in columns {
                    let _ = write!(out, ",{0}_error_{norm},{0}_order", scheme.name());
                }
                out.push('\n');
                let rows = columns.first().map_or(0, |c| c.1.resolutions.len());
                for i in 0..rows {
                    let _ = write!(out, "{}", columns[0].1.resolutions[i]);
                    for (_, r) in columns {
                        let order = if i == 0 { f64::NAN } else { r.orders[i - 1] };
                        let _ = write!(out, ",{},{}", fmt_num(r.errors[i]), fmt_num(order));
                    }
                    out.push('\n');
                }
            }
            StudyTable::Regularity { columns, .. } => {
                out.push('L');
                for (scheme, _) in columns {
                    let _ = write!(out, ",{0}_beta1,{0}_beta2", scheme.name());
                }
                out.push('\n');
                let rows = columns.first().map_or(0, |c| c.1.levels.len());
                for i in 0..rows {
                    let _ = write!(out, "{}", columns[0].1.levels[i]);
                    for (_, r) in columns {
                        let _ = write!(out, ",{},{}", fmt_num(r.beta1[i]), fmt_num(r.beta2[i]));
                    }
                    out.push('\n');
                }
            }
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        match self {
            StudyTable::Refinement { id, title, columns } => {
                let _ = writeln!(out, "Table {id}: {title}");
                let _ = write!(out, "{:>6}", "N");
                for (scheme, r) in columns {
                    let _ = write!(
                        out,
                        " | {:>12} {:>8}",
                        format!("{} E_{}", scheme.name(), r.norm.name()),
                        "order"
                    );
                }
                out.push('\n');
                for i in 0..columns[0].1.resolutions.len() {
                    let _ = write!(out, "{:>6}", columns[0].1.resolutions[i]);
                    for (_, r) in columns {
                        let order = if i == 0 {
                            "-".to_string()
                        } else if r.orders[i - 1].is_nan() {
                            "n/a".to_string()
                        } else {
                            format!("{:.4}", r.orders[i - 1])
                        };
                        let _ = write!(out, " | {:>12.4e} {:>8}", r.errors[i], order);
                    }
                    out.push('\n');
                }
                for (scheme, r) in columns {
                    let _ = writeln!(out, "{} exclusion: {}", scheme.name(), r.exclusion);
                    for (n, f) in r.resolutions.iter().zip(&r.failures) {
                        if let Some(f) = f {
                            let _ = writeln!(out, "{} failed at N={n}: {f}", scheme.name());
                        }
                    }
                }
            }
            StudyTable::Regularity { id, title, columns } => {
                let _ = writeln!(out, "Table {id}: {title}");
                let levels = &columns[0].1.levels;
                let _ = write!(out, "{:>14}", "L");
                for l in levels {
                    let _ = write!(out, " {l:>8}");
                }
                out.push('\n');
                for (name, pick) in [("beta1", 0), ("beta2", 1)] {
                    for (scheme, r) in columns {
                        let _ = write!(out, "{:>14}", format!("{name} {}", scheme.name()));
                        let vals = if pick == 0 { &r.beta1 } else { &r.beta2 };
                        for v in vals {
                            let _ = write!(out, " {v:>8.4}");
                        }
                        out.push('\n');
                    }
                }
            }
        }
        out
    }
}

fn dyadic(from: usize, to: usize) -> Vec<usize> {
    std::iter::successors(Some(from), |&n| Some(n * 2))
        .take_while(|&n| n <= to)
        .collect()
}

/// Runs one of the reference tables with its fixed parameters.
pub fn study_table(id: u8, params: &DetectionParams, exec: Execution) -> Result<StudyTable> {
    let schemes = [Scheme::Rc, Scheme::Linear];
    let study = |function: PiecewiseTestFunction, framework, norm, relocate, ns: Vec<usize>| {
        schemes
            .iter()
            .map(|&scheme| {
                let mut cfg = StudyConfig::new(function.clone(), framework, scheme, norm)
                    .resolutions(ns.clone());
                cfg.params = *params;
                cfg.relocate_jumps = relocate;
                cfg.exec = exec;
                Ok((scheme, refinement_study(&cfg)?))
            })
            .collect::<Result<Vec<_>>>()
    };
    Ok(match id {
        1 => {
            let columns = schemes
                .iter()
                .map(|&scheme| {
                    let cfg = RegularityConfig {
                        function: PiecewiseTestFunction::exp1(0.0),
                        framework: Framework::Point,
                        scheme,
                        n: 100,
                        levels: (5..=10).collect(),
                        params: *params,
                        exec,
                    };
                    Ok((scheme, numerical_regularity(&cfg)?))
                })
                .collect::<Result<Vec<_>>>()?;
            StudyTable::Regularity {
                id,
                title: "regularity estimates, exp1 (a=0), point values, N=100, x < pi/6".into(),
                columns,
            }
        }
        2 => StudyTable::Refinement {
            id,
            title: "refinement in the max norm, exp1 (a=0), point values".into(),
            columns: study(
                PiecewiseTestFunction::exp1(0.0),
                Framework::Point,
                Norm::Inf,
                false,
                dyadic(16, 2048),
            )?,
        },
        3 => StudyTable::Refinement {
            id,
            title:
                "refinement in the max norm, exp1 (a=10), point values, jump at the cell midpoint"
                    .into(),
            columns: study(
                PiecewiseTestFunction::exp1(10.0),
                Framework::Point,
                Norm::Inf,
                true,
                dyadic(16, 2048),
            )?,
        },
        4 => StudyTable::Refinement {
            id,
            title: "refinement in the max norm, exp3, cell averages".into(),
            columns: study(
                PiecewiseTestFunction::exp3(),
                Framework::Cell,
                Norm::Inf,
                false,
                dyadic(32, 1024),
            )?,
        },
        5 => StudyTable::Refinement {
            id,
            title: "refinement in the L1 norm, exp3, cell averages".into(),
            columns: study(
                PiecewiseTestFunction::exp3(),
                Framework::Cell,
                Norm::L1,
                false,
                dyadic(32, 1024),
            )?,
        },
        other => return Err(Error::InvalidParameter(format!("unknown table {other}"))),
    })
}

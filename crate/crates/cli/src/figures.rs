//! Plot-ready CSV bundles, one directory per figure.
//!
//! 1D curves are `x,y` files; matrices use the library's matrix CSV.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use regcorr::detect::DetectionParams;
use regcorr::grid::{
    average, primitive, sample, BivariateFunction, CellAverageSeries, Grid2DCells, Grid2DSamples,
    PiecewiseTestFunction, SampleSeries, Side, UniformGrid1D,
};
use regcorr::io::{cell_matrix_to_csv, curve_to_csv, matrix_to_csv};
use regcorr::jumps::one_sided_cubic_fit;
use regcorr::rc::{
    linear_cell_averages, linear_point_values, rc_cell_averages_with, rc_point_values_with,
};
use regcorr::tensor2d::{
    linear2d_cell_averages, rc2d_cell_averages_with, rc2d_point_values_with, Rc2DParams,
};
use regcorr::Execution;

pub const FIGURE_IDS: std::ops::RangeInclusive<u8> = 1..=11;

/// One line per figure, for `--help` and the README.
pub const DESCRIPTIONS: [&str; 11] = [
    "exp1 (a=0), 16 points: original and smoothed data",
    "exp3, 20 cell averages: averages, primitive, smoothed primitive, RC result",
    "exp1 (a=0), 16 points, 5 levels: exact, linear and RC limits",
    "zoom of figure 3 around pi/6",
    "exp2, 16 points, 5 levels: exact, coarse and RC around both corners",
    "exp4, 100 points, 5 levels: exact, coarse and RC",
    "circular-arc step, 32x32 points, 1 level: data, subdivided, correction, masked",
    "exp3, 20 cell averages, 5 levels: exact, linear and RC averages",
    "zoom of figure 8 around pi/6",
    "singular-cell close-ups: corner stencil with one-sided cubics, jump cell primitive",
    "quadrant step, 16x16 cell averages, 1 level: data, linear, RC",
];

struct Bundle<'a> {
    dir: &'a Path,
    files: Vec<String>,
}

impl Bundle<'_> {
    fn put(&mut self, name: &str, text: String) -> Result<()> {
        fs::write(self.dir.join(name), text).with_context(|| format!("writing {name}"))?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn xy(&mut self, name: &str, points: impl IntoIterator<Item = (f64, f64)>) -> Result<()> {
        let mut text = String::from("x,y\n");
        for (x, y) in points {
            let _ = writeln!(text, "{x:.16e},{y:.16e}");
        }
        self.put(name, text)
    }
}

fn within(lo: f64, hi: f64) -> impl Fn(&(f64, f64)) -> bool {
    move |&(x, _)| x >= lo && x <= hi
}

/// The exact function at `x`, sampled on a grid `2^levels` finer than `grid`.
fn exact_points(f: &PiecewiseTestFunction, grid: &UniformGrid1D, levels: usize) -> Vec<(f64, f64)> {
    grid.refined_by(levels)
        .nodes()
        .map(|x| (x, f.value(x)))
        .collect()
}

fn exact_cells(
    f: &PiecewiseTestFunction,
    grid: &UniformGrid1D,
    levels: usize,
) -> CellAverageSeries {
    average(f, &grid.refined_by(levels))
}

fn unit(n: usize) -> Result<UniformGrid1D> {
    Ok(UniformGrid1D::unit(n)?)
}

fn points(s: &SampleSeries) -> Vec<(f64, f64)> {
    s.points().collect()
}

fn cells(c: &CellAverageSeries) -> Vec<(f64, f64)> {
    c.points().collect()
}

/// A 1D point-value run shown as limit curves.
struct PointRun<'a> {
    f: &'a PiecewiseTestFunction,
    n: usize,
    levels: usize,
    window: Option<(f64, f64)>,
    linear: bool,
}

fn point_limits(
    b: &mut Bundle,
    run: PointRun,
    params: &DetectionParams,
    exec: Execution,
) -> Result<()> {
    let PointRun {
        f,
        n,
        levels,
        window,
        linear,
    } = run;
    let (lo, hi) = window.unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
    let data = sample(f, &unit(n)?);
    let rc = rc_point_values_with(&data, levels, params, exec)?;
    b.xy(
        "exact.csv",
        exact_points(f, data.grid(), levels)
            .into_iter()
            .filter(within(lo, hi)),
    )?;
    b.xy(
        "coarse.csv",
        points(&data).into_iter().filter(within(lo, hi)),
    )?;
    if linear {
        let lin = linear_point_values(&data, levels, exec)?;
        let finest = &lin.last().expect("level 0 is always present").series;
        b.xy(
            "linear.csv",
            points(finest).into_iter().filter(within(lo, hi)),
        )?;
    }
    b.xy(
        "rc.csv",
        points(rc.finest()).into_iter().filter(within(lo, hi)),
    )
}

fn cell_limits(
    b: &mut Bundle,
    window: Option<(f64, f64)>,
    params: &DetectionParams,
    exec: Execution,
) -> Result<()> {
    let (lo, hi) = window.unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
    let f = PiecewiseTestFunction::exp3();
    let levels = 5;
    let data = average(&f, &unit(20)?);
    let rc = rc_cell_averages_with(&data, levels, params, exec)?;
    let lin = linear_cell_averages(&data, levels, exec)?;
    let last = |v: &[CellAverageSeries]| cells(v.last().expect("level 0 is always present"));
    b.xy(
        "exact.csv",
        cells(&exact_cells(&f, data.grid(), levels))
            .into_iter()
            .filter(within(lo, hi)),
    )?;
    b.xy(
        "coarse.csv",
        cells(&data).into_iter().filter(within(lo, hi)),
    )?;
    b.xy("linear.csv", last(&lin).into_iter().filter(within(lo, hi)))?;
    b.xy(
        "rc.csv",
        last(&rc.averages).into_iter().filter(within(lo, hi)),
    )
}

/// Writes figure `id` into `dir` and returns the file names written.
pub fn write_figure(
    id: u8,
    dir: &Path,
    params: &DetectionParams,
    exec: Execution,
) -> Result<Vec<String>> {
    if !FIGURE_IDS.contains(&id) {
        bail!(UnknownFigure(id));
    }
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut b = Bundle {
        dir,
        files: Vec::new(),
    };
    let zoom = Some((PI / 6.0 - 0.1, PI / 6.0 + 0.1));
    match id {
        1 => {
            let data = sample(&PiecewiseTestFunction::exp1(0.0), &unit(16)?);
            let rc = rc_point_values_with(&data, 0, params, exec)?;
            b.xy("original.csv", points(&data))?;
            b.xy("smoothed.csv", points(&rc.smoothed_levels[0].series))?;
        }
        2 => {
            let f = PiecewiseTestFunction::exp3();
            let data = average(&f, &unit(20)?);
            let rc = rc_cell_averages_with(&data, 5, params, exec)?;
            b.xy("averages.csv", cells(&data))?;
            b.xy("primitive.csv", points(&primitive(&data)))?;
            b.xy(
                "smoothed_primitive.csv",
                points(&rc.primitive.smoothed_levels[0].series),
            )?;
            b.xy("rc.csv", cells(rc.finest()))?;
        }
        3..=6 => {
            let exp1 = PiecewiseTestFunction::exp1(0.0);
            let (exp2, exp4) = (PiecewiseTestFunction::exp2(), PiecewiseTestFunction::exp4());
            let run = |f, n, window, linear| PointRun {
                f,
                n,
                levels: 5,
                window,
                linear,
            };
            let run = match id {
                3 => run(&exp1, 16, None, true),
                4 => run(&exp1, 16, zoom, true),
                5 => run(&exp2, 16, None, false),
                _ => run(&exp4, 100, None, false),
            };
            point_limits(&mut b, run, params, exec)?;
        }
        7 => {
            let data = Grid2DSamples::sample(BivariateFunction::CircleArc, 32)?;
            let p = Rc2DParams {
                detection: *params,
                ..Rc2DParams::default()
            };
            let r = rc2d_point_values_with(&data, 1, &p, exec)?;
            b.put("data.csv", matrix_to_csv(&data))?;
            b.put("subdivided.csv", matrix_to_csv(&r.subdivided))?;
            b.put("correction.csv", matrix_to_csv(&r.correction))?;
            b.put("masked.csv", matrix_to_csv(&r.masked))?;
            b.put("output.csv", matrix_to_csv(&r.output))?;
            if let Some(curve) = &r.curve {
                b.put("curve.csv", curve_to_csv(curve, r.output.y_grid().nodes()))?;
            }
        }
        8 => cell_limits(&mut b, None, params, exec)?,
        9 => cell_limits(&mut b, zoom, params, exec)?,
        10 => {
            schematic(
                &mut b,
                "corner",
                &sample(&PiecewiseTestFunction::exp1(0.0), &unit(16)?),
                params,
                exec,
            )?;
            let data = average(&PiecewiseTestFunction::exp3(), &unit(20)?);
            schematic(&mut b, "jump", &primitive(&data), params, exec)?;
        }
        11 => {
            let data = Grid2DCells::average(BivariateFunction::Quadrants, 16)?;
            b.put("data.csv", cell_matrix_to_csv(&data))?;
            b.put(
                "linear.csv",
                cell_matrix_to_csv(&linear2d_cell_averages(&data, 1, exec)?),
            )?;
            b.put(
                "rc.csv",
                cell_matrix_to_csv(&rc2d_cell_averages_with(&data, 1, params, exec)?),
            )?;
        }
        _ => unreachable!(),
    }
    Ok(b.files)
}

/// Stencil, both one-sided cubics over the stencil span and the located
/// point of the first singular cell of `data`.
fn schematic(
    b: &mut Bundle,
    prefix: &str,
    data: &SampleSeries,
    params: &DetectionParams,
    exec: Execution,
) -> Result<()> {
    let rc = rc_point_values_with(data, 0, params, exec)?;
    let hyp = rc.hypotheses.first().context("no singular cell found")?;
    let x_star = hyp.location.context("singular cell was not located")?;
    let j = hyp.cell_index;
    let g = data.grid();
    let stencil = (j - 3..=j + 4).map(|k| (g.node(k), data.values()[k]));
    b.xy(&format!("{prefix}_stencil.csv"), stencil)?;
    let span = g.refined_by(4);
    let (lo, hi) = (g.node(j - 3), g.node(j + 4));
    for (side, name) in [(Side::Left, "left"), (Side::Right, "right")] {
        let c = one_sided_cubic_fit(data, j, x_star, side)?;
        let cubic = |x: f64| {
            let u = x - x_star;
            c[0] + u * (c[1] + u * (0.5 * c[2] + u * c[3] / 6.0))
        };
        let pts = span
            .nodes()
            .filter(|&x| x >= lo && x <= hi)
            .map(|x| (x, cubic(x)));
        b.xy(&format!("{prefix}_{name}_cubic.csv"), pts)?;
    }
    let mut text = String::from("cell_index,cell_left,cell_right,x_star\n");
    let _ = writeln!(
        text,
        "{j},{:.16e},{:.16e},{x_star:.16e}",
        g.node(j),
        g.node(j + 1)
    );
    b.put(&format!("{prefix}_location.csv"), text)
}

#[derive(Debug)]
pub struct UnknownFigure(pub u8);

impl std::fmt::Display for UnknownFigure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "unknown figure {} (known: 1..=11)", self.0)
    }
}

impl std::error::Error for UnknownFigure {}

//! Plain-text CSV emission and ingestion.
//!
//! Series: a header `# kind=point|cell, origin=<a>, h=<h>` then one value per
//! line with 17 significant digits. Matrices: a header carrying both grids,
//! then one comma-separated line per row.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::detect::SingularityHypothesis;
use crate::error::{Error, Result};
use crate::grid::{CellAverageSeries, Grid2DCells, Grid2DSamples, SampleSeries, UniformGrid1D};
use crate::jumps::JumpVector;
use crate::rc::{Framework, RCResult};
use crate::tensor2d::SingularityCurve;

/// Either kind of 1D data read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub enum Series {
    Point(SampleSeries),
    Cell(CellAverageSeries),
}

impl Series {
    pub fn framework(&self) -> Framework {
        match self {
            Series::Point(_) => Framework::Point,
            Series::Cell(_) => Framework::Cell,
        }
    }
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_values(out: &mut String, kind: &str, grid: &UniformGrid1D, values: &[f64]) {
    let _ = writeln!(
        out,
        "# kind={kind}, origin={:?}, h={:?}",
        grid.origin(),
        grid.spacing()
    );
    for &v in values {
        out.push_str(&num(v));
        out.push('\n');
    }
}

pub fn series_to_csv(series: &SampleSeries) -> String {
    let mut out = String::new();
    write_values(&mut out, "point", series.grid(), series.values());
    out
}

pub fn cells_to_csv(cells: &CellAverageSeries) -> String {
    let mut out = String::new();
    write_values(&mut out, "cell", cells.grid(), cells.averages());
    out
}

/// `key=value` pairs of a `# ...` header line.
fn header_fields(line: &str) -> Result<Vec<(String, String)>> {
    let body = line
        .strip_prefix('#')
        .ok_or_else(|| Error::Parse("missing `#` header line".into()))?;
    body.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| Error::Parse(format!("malformed header field `{kv}`")))
        })
        .collect()
}

fn field<'a>(fields: &'a [(String, String)], key: &str) -> Result<&'a str> {
    fields
        .iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.as_str())
        .ok_or_else(|| Error::Parse(format!("header lacks `{key}`")))
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad number `{s}` in {what}")))
}

fn parse_usize(s: &str, what: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad count `{s}` in {what}")))
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .skip(1)
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

pub fn series_from_csv(text: &str) -> Result<Series> {
    let header = text
        .lines()
        .next()
        .ok_or_else(|| Error::Parse("empty input".into()))?;
    let fields = header_fields(header)?;
    let origin = parse_f64(field(&fields, "origin")?, "header")?;
    let h = parse_f64(field(&fields, "h")?, "header")?;
    let values = data_lines(text)
        .map(|(i, l)| parse_f64(l, &format!("line {i}")))
        .collect::<Result<Vec<_>>>()?;
    match field(&fields, "kind")? {
        "point" => {
            let grid = UniformGrid1D::new(origin, h, values.len())?;
            Ok(Series::Point(SampleSeries::new(grid, values)?))
        }
        "cell" => {
            let grid = UniformGrid1D::new(origin, h, values.len() + 1)?;
            Ok(Series::Cell(CellAverageSeries::new(grid, values)?))
        }
        other => Err(Error::Parse(format!("unknown kind `{other}`"))),
    }
}

pub fn read_series(path: &Path) -> Result<Series> {
    series_from_csv(&fs::read_to_string(path)?)
}

fn write_matrix(
    kind: &str,
    xg: &UniformGrid1D,
    yg: &UniformGrid1D,
    rows: usize,
    cols: usize,
    values: &[f64],
) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# kind={kind}, x_origin={:?}, x_h={:?}, y_origin={:?}, y_h={:?}, rows={rows}, cols={cols}",
        xg.origin(),
        xg.spacing(),
        yg.origin(),
        yg.spacing()
    );
    for row in values.chunks(cols.max(1)) {
        let line: Vec<String> = row.iter().map(|&v| num(v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn matrix_to_csv(m: &Grid2DSamples) -> String {
    write_matrix(
        "point",
        m.x_grid(),
        m.y_grid(),
        m.rows(),
        m.cols(),
        m.values(),
    )
}

pub fn cell_matrix_to_csv(m: &Grid2DCells) -> String {
    write_matrix(
        "cell",
        m.x_grid(),
        m.y_grid(),
        m.rows(),
        m.cols(),
        m.averages(),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub enum Matrix {
    Point(Grid2DSamples),
    Cell(Grid2DCells),
}

pub fn matrix_from_csv(text: &str) -> Result<Matrix> {
    let header = text
        .lines()
        .next()
        .ok_or_else(|| Error::Parse("empty input".into()))?;
    let fields = header_fields(header)?;
    let get = |k: &str| -> Result<f64> { parse_f64(field(&fields, k)?, "header") };
    let rows = parse_usize(field(&fields, "rows")?, "header")?;
    let cols = parse_usize(field(&fields, "cols")?, "header")?;
    let mut values = Vec::with_capacity(rows * cols);
    let mut seen = 0;
    for (i, line) in data_lines(text) {
        let before = values.len();
        for v in line.split(',') {
            values.push(parse_f64(v, &format!("line {i}"))?);
        }
        if values.len() - before != cols {
            return Err(Error::Parse(format!(
                "line {i} has {} values, expected {cols}",
                values.len() - before
            )));
        }
        seen += 1;
    }
    if seen != rows {
        return Err(Error::Parse(format!(
            "found {seen} rows, header says {rows}"
        )));
    }
    let kind = field(&fields, "kind")?;
    let extra = usize::from(kind == "point");
    let xg = UniformGrid1D::new(get("x_origin")?, get("x_h")?, cols + 1 - extra)?;
    let yg = UniformGrid1D::new(get("y_origin")?, get("y_h")?, rows + 1 - extra)?;
    match kind {
        "point" => Ok(Matrix::Point(Grid2DSamples::new(xg, yg, values)?)),
        "cell" => Ok(Matrix::Cell(Grid2DCells::new(xg, yg, values)?)),
        other => Err(Error::Parse(format!("unknown kind `{other}`"))),
    }
}

pub fn curve_to_csv(curve: &SingularityCurve, ys: impl IntoIterator<Item = f64>) -> String {
    let mut out = String::from("y,c\n");
    for y in ys {
        let _ = writeln!(out, "{},{}", num(y), num(curve.value(y)));
    }
    out
}

pub fn hypotheses_to_csv(hyps: &[SingularityHypothesis]) -> String {
    let mut out = String::from("cell_index,kind,x_star,score\n");
    for h in hyps {
        let x = h.location.map_or_else(|| "nan".to_string(), num);
        let _ = writeln!(out, "{},{},{},{}", h.cell_index, h.kind, x, num(h.score));
    }
    out
}

pub fn jumps_to_csv(jumps: &[JumpVector]) -> String {
    let mut out = String::from("x_star,j0,j1,j2,j3\n");
    for jv in jumps {
        let j = jv.jumps();
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            num(jv.location),
            num(j[0]),
            num(j[1]),
            num(j[2]),
            num(j[3])
        );
    }
    out
}

/// Writes `levels/level_NN.csv`, `hypotheses.csv`, `jumps.csv`,
/// `boundary_jumps.csv` and `meta.txt` under `dir`. `meta` lines are
/// appended after the run description. Cell runs write fine averages.
pub fn write_rc_result(
    dir: &Path,
    result: &RCResult,
    averages: Option<&[CellAverageSeries]>,
    meta: &[(String, String)],
) -> Result<()> {
    let levels_dir = dir.join("levels");
    fs::create_dir_all(&levels_dir)?;
    for (k, level) in result.levels.iter().enumerate() {
        let text = match averages {
            Some(a) => cells_to_csv(&a[k]),
            None => series_to_csv(&level.series),
        };
        fs::write(
            levels_dir.join(format!("level_{:02}.csv", level.level)),
            text,
        )?;
    }
    fs::write(
        dir.join("hypotheses.csv"),
        hypotheses_to_csv(&result.hypotheses),
    )?;
    fs::write(
        dir.join("jumps.csv"),
        jumps_to_csv(result.correction.jumps()),
    )?;
    fs::write(
        dir.join("boundary_jumps.csv"),
        jumps_to_csv(&result.boundary),
    )?;
    let mut text = String::new();
    let _ = writeln!(text, "levels={}", result.levels.len() - 1);
    let _ = writeln!(text, "policy={}", result.policy.name());
    let _ = writeln!(text, "degraded={}", result.degraded());
    for (k, v) in meta {
        let _ = writeln!(text, "{k}={v}");
    }
    fs::write(dir.join("meta.txt"), text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_roundtrip_is_exact() {
        let g = UniformGrid1D::new(-0.25, 0.1, 5).unwrap();
        let s =
            SampleSeries::new(g, vec![1.0 / 3.0, -2e-300, 7.5, std::f64::consts::PI, 0.0]).unwrap();
        let text = series_to_csv(&s);
        assert!(text.starts_with("# kind=point, origin=-0.25, h=0.1\n"));
        assert_eq!(text.lines().count(), 6);
        assert_eq!(series_from_csv(&text).unwrap(), Series::Point(s));
    }

    #[test]
    fn cell_roundtrip() {
        let c = CellAverageSeries::on_unit_interval(vec![0.5, 1.5, -3.0]).unwrap();
        assert_eq!(series_from_csv(&cells_to_csv(&c)).unwrap(), Series::Cell(c));
    }

    #[test]
    fn matrix_roundtrip() {
        let g = UniformGrid1D::unit(3).unwrap();
        let m = Grid2DSamples::from_fn(g, g, |x, y| x - 2.0 * y);
        assert_eq!(
            matrix_from_csv(&matrix_to_csv(&m)).unwrap(),
            Matrix::Point(m)
        );
        let c = Grid2DCells::new(g, g, (0..9).map(f64::from).collect()).unwrap();
        assert_eq!(
            matrix_from_csv(&cell_matrix_to_csv(&c)).unwrap(),
            Matrix::Cell(c)
        );
    }

    #[test]
    fn rejects_garbage() {
        assert!(matches!(series_from_csv("1\n2\n"), Err(Error::Parse(_))));
        assert!(matches!(
            series_from_csv("# kind=point, origin=0, h=0.5\n1\nx\n3\n"),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            series_from_csv("# kind=blob, origin=0, h=0.5\n1\n2\n"),
            Err(Error::Parse(_))
        ));
    }
}

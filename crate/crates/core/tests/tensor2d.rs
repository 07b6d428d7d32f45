use regcorr::detect::DetectionParams;
use regcorr::grid::{
    BivariateFunction, Grid2DCells, Grid2DSamples, Piece, PiecewiseTestFunction, UniformGrid1D,
};
use regcorr::subdivision::BoundaryPolicy;
use regcorr::tensor2d::{
    dd4_tensor_step, linear2d_cell_averages, rc2d_cell_averages, rc2d_point_values, MaskSide,
    Rc2DParams, TensorOrder,
};
use regcorr::Execution;

fn unit(n: usize) -> UniformGrid1D {
    UniformGrid1D::unit(n).unwrap()
}

#[test]
fn smooth_data_is_plain_tensor_refinement() {
    let g = unit(24);
    let data = Grid2DSamples::from_fn(g, g, |x, y| (2.0 * x).sin() + x * y * y);
    let r = rc2d_point_values(&data, 2, &Rc2DParams::default()).unwrap();
    assert!(r.curve.is_none());
    let mut plain = data.clone();
    for _ in 0..2 {
        plain = dd4_tensor_step(
            &plain,
            BoundaryPolicy::BoundaryAsDiscontinuity,
            TensorOrder::RowsFirst,
            Execution::Sequential,
        )
        .unwrap();
    }
    for (a, b) in r.output.values().iter().zip(plain.values()) {
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn step_across_a_vertical_line_has_no_overshoot() {
    let g = unit(32);
    let s = 0.5 + 0.37 / 32.0;
    let data = Grid2DSamples::from_fn(g, g, |x, _| if x >= s { 1.0 } else { 0.0 });
    let r = rc2d_point_values(&data, 3, &Rc2DParams::default()).unwrap();
    for v in r.output.values() {
        assert!((-1e-3..=1.0 + 1e-3).contains(v), "{v}");
    }
}

#[test]
fn masked_correction_vanishes_on_the_designated_side() {
    let data = Grid2DSamples::sample(BivariateFunction::CircleArc, 40).unwrap();
    for side in [MaskSide::Right, MaskSide::Left] {
        let params = Rc2DParams {
            mask_side: side,
            ..Rc2DParams::default()
        };
        let r = rc2d_point_values(&data, 2, &params).unwrap();
        let curve = r.curve.as_ref().unwrap();
        let (fx, fy) = (*r.masked.x_grid(), *r.masked.y_grid());
        let h = data.x_grid().spacing();
        let mut zeros = 0;
        for row in 0..r.masked.rows() {
            for col in 0..r.masked.cols() {
                let d = curve.signed_distance(fx.node(col), fy.node(row));
                let d = if side == MaskSide::Right { d } else { -d };
                if d < -h {
                    assert_eq!(r.masked.get(row, col), 0.0);
                    zeros += 1;
                }
            }
        }
        assert!(zeros > 100);
    }
}

#[test]
fn coarse_nodes_away_from_the_curve_are_kept() {
    let data = Grid2DSamples::sample(BivariateFunction::CircleArc, 32).unwrap();
    let levels = 2;
    let r = rc2d_point_values(&data, levels, &Rc2DParams::default()).unwrap();
    let curve = r.curve.as_ref().unwrap();
    let (g, h) = (*data.x_grid(), data.x_grid().spacing());
    let stride = 1 << levels;
    for row in 0..data.rows() {
        for col in 0..data.cols() {
            let (x, y) = (g.node(col), data.y_grid().node(row));
            if curve.signed_distance(x, y).abs() <= 4.0 * h {
                continue;
            }
            let got = r.output.get(stride * row, stride * col);
            let want = data.get(row, col);
            let scale = want
                .abs()
                .max(r.correction.get(stride * row, stride * col).abs());
            assert!(
                (got - want).abs() <= 2.0 * f64::EPSILON * scale,
                "({x}, {y}): {got} vs {want}"
            );
        }
    }
}

#[test]
fn correction_field_is_smooth_across_rows_near_the_curve() {
    // Far from the curve the row cubics are long extrapolations and jitter
    // from row to row; only the band where the mask switches is checked.
    let n = 32;
    let data = Grid2DSamples::sample(BivariateFunction::CircleArc, n).unwrap();
    let r = rc2d_point_values(&data, 1, &Rc2DParams::default()).unwrap();
    let curve = r.curve.as_ref().unwrap();
    let t = &r.correction;
    let (fx, fy) = (*t.x_grid(), *t.y_grid());
    let second = |v: &[f64], k: usize| (v[k - 1] - 2.0 * v[k] + v[k + 1]).abs();
    let mut row_max: f64 = 0.0;
    for row in 0..t.rows() {
        let v = t.row(row);
        for k in 1..v.len() - 1 {
            row_max = row_max.max(second(v, k));
        }
    }
    let mut col_max: f64 = 0.0;
    for col in 0..t.cols() {
        let v = t.column(col);
        for k in 1..v.len() - 1 {
            if curve.signed_distance(fx.node(col), fy.node(k)).abs() <= 4.0 / n as f64 {
                col_max = col_max.max(second(&v, k));
            }
        }
    }
    assert!(
        col_max <= 4.0 * row_max,
        "columns {col_max}, rows {row_max}"
    );
}

#[test]
fn quadrant_cells_stay_within_one_sided_hulls() {
    let f = BivariateFunction::Quadrants;
    let n = 32;
    let data = Grid2DCells::average(f, n).unwrap();
    let out = rc2d_cell_averages(&data, 1, &DetectionParams::default()).unwrap();
    let (fx, fy) = (*out.x_grid(), *out.y_grid());
    let h = 1.0 / n as f64;
    for row in 0..out.rows() {
        let y = fy.cell_midpoint(row);
        for col in 0..out.cols() {
            let x = fx.cell_midpoint(col);
            if (x - 0.5).abs() > 2.0 * h {
                continue;
            }
            let (lo, hi) = (0..=60)
                .flat_map(|i| (0..=4).map(move |k| (i, k)))
                .map(|(i, k)| {
                    let dx = -3.0 * h + 0.1 * h * i as f64;
                    let dy = (k as f64 - 2.0) * 0.25 * fy.spacing();
                    f.value((x + dx).clamp(0.0, 1.0), (y + dy).clamp(0.0, 1.0))
                })
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, u), v| {
                    (l.min(v), u.max(v))
                });
            let v = out.get(row, col);
            assert!(
                v >= lo - 1e-2 && v <= hi + 1e-2,
                "({x}, {y}): {v} not in [{lo}, {hi}]"
            );
        }
    }
    // The linear tensor scheme overshoots at the same cells.
    let linear = linear2d_cell_averages(&data, 1, Execution::Sequential).unwrap();
    let (min, max) = linear
        .averages()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, u), &v| {
            (l.min(v), u.max(v))
        });
    let (dmin, dmax) = data
        .averages()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, u), &v| {
            (l.min(v), u.max(v))
        });
    assert!(min < dmin - 1e-2 || max > dmax + 1e-2);
}

#[test]
fn separable_piecewise_quadratic_cells_are_exact() {
    let s = 0.5 + 0.3 / 32.0;
    let fx = PiecewiseTestFunction::new(
        vec![s],
        vec![
            Piece::Polynomial(vec![1.0, 2.0, -1.0]),
            Piece::Polynomial(vec![-2.0, 0.5, 1.0]),
        ],
    )
    .unwrap();
    let mean_g = |a: f64, b: f64| 1.0 + 0.5 * (a + b) - (a * a + a * b + b * b) / 6.0;
    let cells = |n: usize| {
        let g = unit(n);
        let mut v = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                v.push(
                    fx.cell_average(g.node(c), g.node(c + 1)) * mean_g(g.node(r), g.node(r + 1)),
                );
            }
        }
        Grid2DCells::new(g, g, v).unwrap()
    };
    let out = rc2d_cell_averages(&cells(32), 2, &DetectionParams::default()).unwrap();
    for (a, b) in out.averages().iter().zip(cells(128).averages()) {
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }
}

#[test]
fn constant_cell_matrix_is_preserved() {
    let g = unit(20);
    let data = Grid2DCells::new(g, g, vec![-0.75; 400]).unwrap();
    let out = rc2d_cell_averages(&data, 2, &DetectionParams::default()).unwrap();
    assert!(out.averages().iter().all(|v| (v + 0.75).abs() < 1e-12));
}

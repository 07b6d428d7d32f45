//! Checks against independently computed references: Gauss-Legendre
//! quadrature, hand-differentiated jump formulas and brute-force scans.

use std::f64::consts::PI;

use regcorr::detect::{
    critical_scale_corner, detect_cells, locate_corner, DetectionParams, SingularityKind,
};
use regcorr::grid::{average, sample, Piece, PiecewiseTestFunction, UniformGrid1D};
use regcorr::jumps::estimate_jumps;
use regcorr::rc::{locate_singularities, rc_cell_averages, rc_point_values, Framework};

const GL_NODES: [f64; 5] = [
    0.0,
    -0.538_469_310_105_683_1,
    0.538_469_310_105_683_1,
    -0.906_179_845_938_664,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
    0.236_926_885_056_189_1,
];

/// Composite 5-point Gauss-Legendre on `[a, b]` with 64 panels.
fn gauss(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let panels = 64;
    let w = (b - a) / panels as f64;
    (0..panels)
        .map(|p| {
            let m = a + (p as f64 + 0.5) * w;
            GL_NODES
                .iter()
                .zip(GL_WEIGHTS)
                .map(|(t, wt)| wt * f(m + 0.5 * w * t))
                .sum::<f64>()
                * 0.5
                * w
        })
        .sum()
}

fn mean_by_quadrature(f: &PiecewiseTestFunction, a: f64, b: f64) -> f64 {
    let mut cuts = vec![a];
    cuts.extend(f.breakpoints().iter().copied().filter(|&s| s > a && s < b));
    cuts.push(b);
    let total: f64 = cuts
        .windows(2)
        .map(|w| {
            let piece = &f.pieces()[f.piece_index(0.5 * (w[0] + w[1]))];
            gauss(|x| piece.value(x), w[0], w[1])
        })
        .sum();
    total / (b - a)
}

#[test]
fn cell_averages_match_quadrature() {
    for f in [
        PiecewiseTestFunction::exp1(0.0),
        PiecewiseTestFunction::exp1(10.0),
        PiecewiseTestFunction::exp2(),
        PiecewiseTestFunction::exp3(),
        PiecewiseTestFunction::exp4(),
    ] {
        for n in [20, 64, 333] {
            let g = UniformGrid1D::unit(n).unwrap();
            let cells = average(&f, &g);
            for (j, &v) in cells.averages().iter().enumerate() {
                let q = mean_by_quadrature(&f, g.node(j), g.node(j + 1));
                assert!((v - q).abs() < 1e-12, "cell {j} of {n}: {v} vs {q}");
            }
        }
    }
}

/// `f⁺ − f⁻` for exp1 with `a = 0`: the left piece carries the extra
/// `(x − s)(x − s − 10)`, so the jump is its negative.
fn exp1_jumps(x: f64) -> [f64; 4] {
    let u = x - PI / 6.0;
    [-(u * (u - 10.0)), -(2.0 * u - 10.0), -2.0, 0.0]
}

#[test]
fn exp1_symbolic_jumps() {
    let f = PiecewiseTestFunction::exp1(0.0);
    let s = PI / 6.0;
    assert_eq!(f.extension_jumps(0, s), [0.0, 10.0, -2.0, 0.0]);
    for x in [0.4, 0.6] {
        let got = f.extension_jumps(0, x);
        let want = exp1_jumps(x);
        for k in 0..4 {
            assert!((got[k] - want[k]).abs() < 1e-12);
        }
    }
}

#[test]
fn estimated_jumps_approach_the_symbolic_ones() {
    let f = PiecewiseTestFunction::exp1(0.0);
    let data = sample(&f, &UniformGrid1D::unit(1024).unwrap());
    let hyps = locate_singularities(&data, &DetectionParams::default(), Framework::Point).unwrap();
    assert_eq!(hyps.len(), 1);
    let jv = estimate_jumps(&data, &hyps[0]).unwrap();
    let want = exp1_jumps(jv.location);
    // O(h^{4-k}) times |f^{(4)}| ~ 1e4.
    let tol = [1e-8, 1e-4, 1e-1, 50.0];
    for k in 0..4 {
        assert!(
            (jv.jumps()[k] - want[k]).abs() < tol[k],
            "jump {k}: {} vs {}",
            jv.jumps()[k],
            want[k]
        );
    }
}

#[test]
fn corner_of_a_piecewise_cubic_is_exact() {
    let s = 0.4372;
    let f = PiecewiseTestFunction::new(
        vec![s],
        vec![
            Piece::Polynomial(vec![1.0, -2.0, 0.5, 3.0]),
            Piece::Polynomial(vec![1.0 + 7.0 * s, -9.0, 0.5, 3.0]),
        ],
    )
    .unwrap();
    assert!(f.extension_jumps(0, s)[0].abs() < 1e-15);
    for n in [32, 50, 128] {
        let data = sample(&f, &UniformGrid1D::unit(n).unwrap());
        let params = DetectionParams::default();
        let hyps = detect_cells(&data, &params).unwrap();
        assert_eq!(hyps.len(), 1);
        let located = locate_corner(&data, &hyps[0], &params).unwrap();
        assert!((located.location.unwrap() - s).abs() < 1e-12);

        let r = rc_point_values(&data, 4, &params).unwrap();
        for (x, v) in r.finest().points() {
            assert!((v - f.value(x)).abs() < 1e-10, "N={n} x={x}");
        }
    }
}

#[test]
fn piecewise_quadratic_jump_in_cells_is_exact() {
    let s = 0.5 + 0.3 / 40.0;
    let f = PiecewiseTestFunction::new(
        vec![s],
        vec![
            Piece::Polynomial(vec![2.0, 1.0, -1.0]),
            Piece::Polynomial(vec![-1.0, 0.5, 2.0]),
        ],
    )
    .unwrap();
    let g = UniformGrid1D::unit(40).unwrap();
    let r = rc_cell_averages(&average(&f, &g), 4, &DetectionParams::default()).unwrap();
    let exact = average(&f, &g.refined_by(4));
    for (a, b) in r.finest().averages().iter().zip(exact.averages()) {
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn detection_above_the_critical_scale_finds_the_corner() {
    // exp1: [f'] = 10, sup|f''| over [0, 1] of the pieces is 102.
    let f = PiecewiseTestFunction::exp1(0.0);
    let hc = critical_scale_corner(10.0, 102.0).unwrap();
    for n in (16..=1024).step_by(16) {
        let g = UniformGrid1D::unit(n).unwrap();
        if g.spacing() >= hc {
            continue;
        }
        let data = sample(&f, &g);
        let hyps = detect_cells(&data, &DetectionParams::default()).unwrap();
        assert_eq!(hyps.len(), 1, "N={n}");
        let j = hyps[0].cell_index;
        assert!(
            g.node(j) <= PI / 6.0 && PI / 6.0 <= g.node(j + 1),
            "N={n} cell {j}"
        );
    }
}

#[test]
fn smooth_functions_raise_no_flags() {
    let f = PiecewiseTestFunction::smooth(Piece::base());
    for n in [16, 20, 32, 64, 100, 256, 1000] {
        let data = sample(&f, &UniformGrid1D::unit(n).unwrap());
        assert!(
            detect_cells(&data, &DetectionParams::default())
                .unwrap()
                .is_empty(),
            "N={n}"
        );
    }
}

#[test]
fn jump_classification_matches_the_data() {
    for (f, kind) in [
        (PiecewiseTestFunction::exp1(0.0), SingularityKind::Corner),
        (
            PiecewiseTestFunction::exp1(10.0),
            SingularityKind::FunctionJump,
        ),
        (PiecewiseTestFunction::exp3(), SingularityKind::FunctionJump),
    ] {
        for n in [64, 100, 256] {
            let data = sample(&f, &UniformGrid1D::unit(n).unwrap());
            let hyps =
                locate_singularities(&data, &DetectionParams::default(), Framework::Point).unwrap();
            assert_eq!(hyps.len(), 1);
            assert_eq!(hyps[0].kind, kind);
        }
    }
}

#[test]
fn smooth_part_of_exp1_is_recovered_by_a_brute_force_scan() {
    // Scan the grid for the node of largest second difference and compare
    // with the detector.
    let f = PiecewiseTestFunction::exp1(0.0);
    let data = sample(&f, &UniformGrid1D::unit(128).unwrap());
    let v = data.values();
    let best = (1..v.len() - 1)
        .max_by(|&a, &b| {
            let d = |j: usize| (v[j - 1] - 2.0 * v[j] + v[j + 1]).abs();
            d(a).total_cmp(&d(b))
        })
        .unwrap();
    let hyps = detect_cells(&data, &DetectionParams::default()).unwrap();
    assert!(hyps[0].cell_index.abs_diff(best) <= 1);
}

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Which one-sided limit to take at a breakpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// A smooth piece, defined (and extendable) on the whole real line.
#[derive(Debug, Clone, PartialEq)]
pub enum Piece {
    /// `c + (x - p)(x - p - w) + x² + sin(10x)`; the product term is present
    /// only when `product = Some((p, w))`.
    Oscillatory {
        constant: f64,
        product: Option<(f64, f64)>,
    },
    /// Polynomial with ascending coefficients.
    Polynomial(Vec<f64>),
}

/// `sin(t) / t`, stable near zero.
fn sinc(t: f64) -> f64 {
    if t.abs() < 1e-4 {
        1.0 - t * t / 6.0
    } else {
        t.sin() / t
    }
}

/// Mean of `x^k` over `[a, b]`, as `(a^k + a^{k-1} b + ... + b^k) / (k + 1)`.
fn mean_power(a: f64, b: f64, k: usize) -> f64 {
    let mut sum = 0.0;
    let mut ai = 1.0;
    for i in 0..=k {
        sum += ai * b.powi((k - i) as i32);
        ai *= a;
    }
    sum / (k + 1) as f64
}

impl Piece {
    pub fn base() -> Self {
        Piece::Oscillatory {
            constant: 0.0,
            product: None,
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.derivative(x, 0)
    }

    /// `order`-th derivative at `x`.
    pub fn derivative(&self, x: f64, order: usize) -> f64 {
        match self {
            Piece::Oscillatory { constant, product } => {
                let trig = {
                    let scale = 10f64.powi(order as i32);
                    let t = 10.0 * x;
                    scale
                        * match order % 4 {
                            0 => t.sin(),
                            1 => t.cos(),
                            2 => -t.sin(),
                            _ => -t.cos(),
                        }
                };
                let square = match order {
                    0 => x * x,
                    1 => 2.0 * x,
                    2 => 2.0,
                    _ => 0.0,
                };
                let prod = match product {
                    Some((p, w)) => {
                        let u = x - p;
                        match order {
                            0 => u * (u - w),
                            1 => 2.0 * u - w,
                            2 => 2.0,
                            _ => 0.0,
                        }
                    }
                    None => 0.0,
                };
                let c = if order == 0 { *constant } else { 0.0 };
                c + prod + square + trig
            }
            Piece::Polynomial(coeffs) => {
                let mut acc = 0.0;
                for (k, &c) in coeffs.iter().enumerate().skip(order).rev() {
                    let falling: f64 = (k - order + 1..=k).map(|i| i as f64).product();
                    acc = acc * x + c * falling;
                }
                acc
            }
        }
    }

    /// An antiderivative (the constant of integration is unspecified).
    pub fn antiderivative(&self, x: f64) -> f64 {
        match self {
            Piece::Oscillatory { constant, product } => {
                let prod = match product {
                    Some((p, w)) => {
                        let u = x - p;
                        u * u * u / 3.0 - w * u * u / 2.0
                    }
                    None => 0.0,
                };
                constant * x + prod + x * x * x / 3.0 - (10.0 * x).cos() / 10.0
            }
            Piece::Polynomial(coeffs) => {
                let mut acc = 0.0;
                for (k, &c) in coeffs.iter().enumerate().rev() {
                    acc = acc * x + c / (k + 1) as f64;
                }
                acc * x
            }
        }
    }

    /// Mean over `[a, b]`, written without antiderivative differences so it
    /// stays accurate on very short intervals.
    pub fn mean(&self, a: f64, b: f64) -> f64 {
        let w = b - a;
        if w == 0.0 {
            return self.value(a);
        }
        match self {
            Piece::Oscillatory { constant, product } => {
                let m = 0.5 * (a + b);
                let prod = match product {
                    Some((p, pw)) => {
                        let (ua, ub) = (a - p, b - p);
                        (ua * ua + ua * ub + ub * ub) / 3.0 - pw * 0.5 * (ua + ub)
                    }
                    None => 0.0,
                };
                let square = (a * a + a * b + b * b) / 3.0;
                let trig = (10.0 * m).sin() * sinc(5.0 * w);
                constant + prod + square + trig
            }
            Piece::Polynomial(coeffs) => coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| c * mean_power(a, b, k))
                .sum(),
        }
    }
}

/// Identifiers of the built-in test functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FunctionId {
    /// Corner at π/6 with `[f'] = 10`; `a` adds a jump `[f] = -a`.
    Exp1 { a: f64 },
    /// Two corners, at π/12 and 3π/12.
    Exp2,
    /// Jump of size 10 at π/6 (used with cell averages).
    Exp3,
    /// Two jumps, at π/12 and 3π/12.
    Exp4,
    /// Bivariate, jump across a circular arc.
    Exp2DPoint,
    /// Bivariate, jumps across `x = 0.5` and `y = 0.5`.
    Exp2D,
}

impl FunctionId {
    pub fn is_bivariate(&self) -> bool {
        matches!(self, FunctionId::Exp2DPoint | FunctionId::Exp2D)
    }

    pub fn with_parameter(self, a: f64) -> Self {
        match self {
            FunctionId::Exp1 { .. } => FunctionId::Exp1 { a },
            other => other,
        }
    }

    /// The univariate function, or `None` for the bivariate ids.
    pub fn univariate(&self) -> Option<PiecewiseTestFunction> {
        Some(match *self {
            FunctionId::Exp1 { a } => PiecewiseTestFunction::exp1(a),
            FunctionId::Exp2 => PiecewiseTestFunction::exp2(),
            FunctionId::Exp3 => PiecewiseTestFunction::exp3(),
            FunctionId::Exp4 => PiecewiseTestFunction::exp4(),
            FunctionId::Exp2DPoint | FunctionId::Exp2D => return None,
        })
    }
}

impl fmt::Display for FunctionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionId::Exp1 { .. } => f.write_str("exp1"),
            FunctionId::Exp2 => f.write_str("exp2"),
            FunctionId::Exp3 => f.write_str("exp3"),
            FunctionId::Exp4 => f.write_str("exp4"),
            FunctionId::Exp2DPoint => f.write_str("exp2D_point"),
            FunctionId::Exp2D => f.write_str("exp2D"),
        }
    }
}

impl FromStr for FunctionId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exp1" => Ok(FunctionId::Exp1 { a: 0.0 }),
            "exp2" => Ok(FunctionId::Exp2),
            "exp3" => Ok(FunctionId::Exp3),
            "exp4" => Ok(FunctionId::Exp4),
            "exp2D_point" | "exp2d_point" => Ok(FunctionId::Exp2DPoint),
            "exp2D" | "exp2d" => Ok(FunctionId::Exp2D),
            other => Err(Error::Parse(format!("unknown function `{other}`"))),
        }
    }
}

/// A function that is smooth between strictly increasing breakpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseTestFunction {
    breakpoints: Vec<f64>,
    pieces: Vec<Piece>,
}

impl PiecewiseTestFunction {
    pub fn new(breakpoints: Vec<f64>, pieces: Vec<Piece>) -> Result<Self> {
        if pieces.len() != breakpoints.len() + 1 {
            return Err(Error::InvalidParameter(format!(
                "{} breakpoints need {} pieces, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                pieces.len()
            )));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            breakpoints,
            pieces,
        })
    }

    pub fn smooth(piece: Piece) -> Self {
        Self {
            breakpoints: Vec::new(),
            pieces: vec![piece],
        }
    }

    pub fn exp1(a: f64) -> Self {
        let s = PI / 6.0;
        Self {
            breakpoints: vec![s],
            pieces: vec![
                Piece::Oscillatory {
                    constant: a,
                    product: Some((s, 10.0)),
                },
                Piece::base(),
            ],
        }
    }

    pub fn exp2() -> Self {
        let (s1, s2) = (PI / 12.0, 3.0 * PI / 12.0);
        Self {
            breakpoints: vec![s1, s2],
            pieces: vec![
                Piece::Oscillatory {
                    constant: 0.0,
                    product: Some((s1, 10.0)),
                },
                Piece::base(),
                Piece::Oscillatory {
                    constant: 0.0,
                    product: Some((s2, 5.0)),
                },
            ],
        }
    }

    pub fn exp3() -> Self {
        let s = PI / 6.0;
        Self {
            breakpoints: vec![s],
            pieces: vec![
                Piece::Oscillatory {
                    constant: 10.0,
                    product: Some((s, 10.0)),
                },
                Piece::base(),
            ],
        }
    }

    pub fn exp4() -> Self {
        let (s1, s2) = (PI / 12.0, 3.0 * PI / 12.0);
        Self {
            breakpoints: vec![s1, s2],
            pieces: vec![
                Piece::Oscillatory {
                    constant: 1.0,
                    product: Some((s1, 10.0)),
                },
                Piece::base(),
                Piece::Oscillatory {
                    constant: 2.0,
                    product: Some((s2, 5.0)),
                },
            ],
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Index of the piece used at `x`; breakpoints belong to the right piece.
    pub fn piece_index(&self, x: f64) -> usize {
        self.breakpoints.partition_point(|&b| b <= x)
    }

    pub fn value(&self, x: f64) -> f64 {
        self.pieces[self.piece_index(x)].value(x)
    }

    pub fn derivative(&self, x: f64, order: usize) -> f64 {
        self.pieces[self.piece_index(x)].derivative(x, order)
    }

    /// Derivative of the piece on the given side of `x`. Away from
    /// breakpoints both sides agree.
    pub fn one_sided(&self, x: f64, side: Side, order: usize) -> f64 {
        let idx = match side {
            Side::Right => self.piece_index(x),
            Side::Left => self.breakpoints.partition_point(|&b| b < x),
        };
        self.pieces[idx].derivative(x, order)
    }

    /// Jumps `[f^(k)]`, `k = 0..4`, between the smooth extensions of the
    /// pieces adjacent to breakpoint `k`, evaluated at `x`.
    pub fn extension_jumps(&self, breakpoint: usize, x: f64) -> [f64; 4] {
        let (l, r) = (&self.pieces[breakpoint], &self.pieces[breakpoint + 1]);
        std::array::from_fn(|k| r.derivative(x, k) - l.derivative(x, k))
    }

    /// Same pieces with the breakpoints moved.
    pub fn with_breakpoints(&self, breakpoints: Vec<f64>) -> Result<Self> {
        Self::new(breakpoints, self.pieces.clone())
    }

    /// Evaluates with the discontinuity at breakpoint `k` moved to `at`.
    pub fn relocated_value(&self, breakpoint: usize, at: f64, x: f64) -> f64 {
        let idx = self.piece_index(x);
        let idx = if x < at {
            idx.min(breakpoint)
        } else {
            idx.max(breakpoint + 1)
        };
        self.pieces[idx].value(x)
    }

    /// `∫_a^b f` split at the breakpoints.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        if b < a {
            return -self.integral(b, a);
        }
        let mut total = 0.0;
        let mut lo = a;
        let mut idx = self.piece_index(a);
        while lo < b {
            let hi = self
                .breakpoints
                .get(idx)
                .copied()
                .filter(|&bp| bp < b)
                .unwrap_or(b);
            if hi > lo {
                total += self.pieces[idx].mean(lo, hi) * (hi - lo);
            }
            lo = hi;
            idx += 1;
        }
        total
    }

    /// Mean of `f` over `[a, b]`.
    pub fn cell_average(&self, a: f64, b: f64) -> f64 {
        let first = self.piece_index(a);
        let inner = &self.breakpoints[first..];
        if inner.first().is_none_or(|&bp| bp >= b) {
            return self.pieces[first].mean(a, b);
        }
        self.integral(a, b) / (b - a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exp1_reference_values() {
        let f = PiecewiseTestFunction::exp1(0.0);
        let s = PI / 6.0;
        assert_abs_diff_eq!(f.value(0.0), s * (s + 10.0), epsilon = 1e-14);
        assert_abs_diff_eq!(f.value(0.0), 5.510_143_433_8, epsilon = 1e-9);
        assert_abs_diff_eq!(f.value(1.0), 1.0 + 10f64.sin(), epsilon = 1e-15);
        assert_abs_diff_eq!(f.value(1.0), 0.455_978_889_110_63, epsilon = 1e-12);
    }

    #[test]
    fn exp1_jumps_at_breakpoint() {
        let f = PiecewiseTestFunction::exp1(0.0);
        let j = f.extension_jumps(0, PI / 6.0);
        assert_abs_diff_eq!(j[0], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(j[1], 10.0, epsilon = 1e-13);
        assert_abs_diff_eq!(j[2], -2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(j[3], 0.0, epsilon = 1e-10);

        let g = PiecewiseTestFunction::exp1(10.0);
        assert_abs_diff_eq!(g.extension_jumps(0, PI / 6.0)[0], -10.0, epsilon = 1e-13);
    }

    #[test]
    fn breakpoint_takes_right_piece() {
        let f = PiecewiseTestFunction::exp3();
        let s = PI / 6.0;
        assert_eq!(f.value(s), Piece::base().value(s));
        assert_ne!(
            f.one_sided(s, Side::Left, 0),
            f.one_sided(s, Side::Right, 0)
        );
    }

    #[test]
    fn polynomial_derivatives() {
        let p = Piece::Polynomial(vec![1.0, -2.0, 0.5, 3.0]);
        let x = 0.7;
        assert_abs_diff_eq!(
            p.value(x),
            1.0 - 1.4 + 0.5 * 0.49 + 3.0 * 0.343,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(p.derivative(x, 1), -2.0 + x + 9.0 * 0.49, epsilon = 1e-14);
        assert_abs_diff_eq!(p.derivative(x, 2), 1.0 + 18.0 * x, epsilon = 1e-14);
        assert_abs_diff_eq!(p.derivative(x, 3), 18.0, epsilon = 1e-14);
        assert_eq!(p.derivative(x, 4), 0.0);
    }

    #[test]
    fn mean_matches_antiderivative_on_wide_cells() {
        let pieces = [
            Piece::base(),
            Piece::Oscillatory {
                constant: 3.0,
                product: Some((0.4, 10.0)),
            },
            Piece::Polynomial(vec![0.3, 1.0, -2.0, 4.0, 0.25]),
        ];
        for p in &pieces {
            for &(a, b) in &[(0.0, 1.0), (0.2, 0.45), (-0.3, 0.1)] {
                let exact = (p.antiderivative(b) - p.antiderivative(a)) / (b - a);
                assert_abs_diff_eq!(p.mean(a, b), exact, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn average_of_constant() {
        let f = PiecewiseTestFunction::smooth(Piece::Polynomial(vec![4.25]));
        assert_eq!(f.cell_average(0.1, 0.3), 4.25);
    }

    #[test]
    fn straddling_cell_lies_between_limits() {
        let f = PiecewiseTestFunction::exp3();
        let s = PI / 6.0;
        let (lo, hi) = (s - 0.01, s + 0.04);
        let avg = f.cell_average(lo, hi);
        let (l, r) = (
            f.one_sided(s, Side::Left, 0),
            f.one_sided(s, Side::Right, 0),
        );
        assert!(avg > r.min(l) && avg < r.max(l));
    }

    #[test]
    fn relocation_moves_the_jump() {
        let f = PiecewiseTestFunction::exp1(10.0);
        let s = PI / 6.0;
        let at = s + 0.003;
        let x = s + 0.001;
        assert_eq!(f.relocated_value(0, at, x), f.pieces()[0].value(x));
        assert_eq!(f.relocated_value(0, at, at), f.pieces()[1].value(at));
        assert_eq!(f.relocated_value(0, at, 0.9), f.value(0.9));
    }

    #[test]
    fn parse_ids() {
        assert_eq!("exp3".parse::<FunctionId>().unwrap(), FunctionId::Exp3);
        assert_eq!("exp2D".parse::<FunctionId>().unwrap(), FunctionId::Exp2D);
        assert!("exp9".parse::<FunctionId>().is_err());
        assert!(FunctionId::Exp2DPoint.univariate().is_none());
    }

    #[test]
    fn rejects_unsorted_breakpoints() {
        let r = PiecewiseTestFunction::new(vec![0.5, 0.2], vec![Piece::base(); 3]);
        assert!(r.is_err());
    }
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Piecewise-linear calibration curve.
///
/// Below the first knot the curve is clamped to the first y; past the last
/// knot it extrapolates with the slope of the last segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct PiecewiseLinearCurve {
    knots: Vec<(f64, f64)>,
}

impl PiecewiseLinearCurve {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::EmptyCurve);
        }
        for (i, &(x, y)) in knots.iter().enumerate() {
            if !x.is_finite() || !y.is_finite() {
                return Err(Error::invalid("curve knot", format!("knot {i} is not finite")));
            }
        }
        if let Some(i) = knots.windows(2).position(|w| w[1].0 <= w[0].0) {
            return Err(Error::NonIncreasingKnots { index: i + 1 });
        }
        Ok(Self { knots })
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn eval(&self, x: f64) -> f64 {
        let k = &self.knots;
        let (x0, y0) = k[0];
        if x <= x0 || k.len() == 1 {
            return y0;
        }
        // First knot with knot.x >= x; 1..=len.
        let hi = k.partition_point(|&(kx, _)| kx < x);
        if hi < k.len() && k[hi].0 == x {
            return k[hi].1;
        }
        let seg = hi.min(k.len() - 1);
        let (xa, ya) = k[seg - 1];
        let (xb, yb) = k[seg];
        ya + (x - xa) * (yb - ya) / (xb - xa)
    }

    pub fn is_non_decreasing(&self) -> bool {
        self.knots.windows(2).all(|w| w[1].1 >= w[0].1)
    }
}

impl TryFrom<Vec<(f64, f64)>> for PiecewiseLinearCurve {
    type Error = Error;

    fn try_from(knots: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(knots)
    }
}

impl From<PiecewiseLinearCurve> for Vec<(f64, f64)> {
    fn from(c: PiecewiseLinearCurve) -> Self {
        c.knots
    }
}

/// Evaluates `curve` at `x`. Curves cannot be constructed empty, so this
/// never fails once a curve exists.
pub fn eval_curve(curve: &PiecewiseLinearCurve, x: f64) -> f64 {
    curve.eval(x)
}

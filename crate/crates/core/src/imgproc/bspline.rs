//! Least-squares B-spline curves with centripetal parameterization.

use nalgebra::{DMatrix, DVector};

use crate::error::{MeiboError, Result};

/// Clamped B-spline curve over `t in [0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct BSplineCurve {
    degree: usize,
    control_points: Vec<[f64; 2]>,
    knots: Vec<f64>,
}

impl BSplineCurve {
    pub fn new(degree: usize, control_points: Vec<[f64; 2]>, knots: Vec<f64>) -> Result<Self> {
        if control_points.len() < degree + 1 {
            return Err(MeiboError::TooFewPoints {
                got: control_points.len(),
                need: degree + 1,
            });
        }
        if knots.len() != control_points.len() + degree + 1 || knots.windows(2).any(|k| k[1] < k[0])
        {
            return Err(MeiboError::InvalidParameter(
                "knot vector must be non-decreasing with n + degree + 1 entries".into(),
            ));
        }
        Ok(Self {
            degree,
            control_points,
            knots,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn control_points(&self) -> &[[f64; 2]] {
        &self.control_points
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Point at parameter `t`, clamped into `[0, 1]`.
    pub fn evaluate(&self, t: f64) -> [f64; 2] {
        let p = self.degree;
        let n = self.control_points.len();
        let span = find_span(&self.knots, n, p, t.clamp(0.0, 1.0));
        let basis = basis_functions(&self.knots, span, p, t.clamp(0.0, 1.0));
        let mut out = [0.0; 2];
        for (j, b) in basis.iter().enumerate() {
            let cp = self.control_points[span - p + j];
            out[0] += b * cp[0];
            out[1] += b * cp[1];
        }
        out
    }

    /// `count` points at uniformly spaced parameters, endpoints included.
    pub fn sample(&self, count: usize) -> Vec<[f64; 2]> {
        let count = count.max(2);
        (0..count)
            .map(|i| self.evaluate(i as f64 / (count - 1) as f64))
            .collect()
    }
}

/// Knot span index `i` with `knots[i] <= t < knots[i + 1]`; `t = 1` maps to the last span.
fn find_span(knots: &[f64], n: usize, p: usize, t: f64) -> usize {
    if t >= knots[n] {
        return n - 1;
    }
    let mut lo = p;
    let mut hi = n;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if t < knots[mid] {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    lo
}

/// Non-zero basis values `N_{span-p..=span, p}(t)` by the Cox–de Boor recurrence.
fn basis_functions(knots: &[f64], span: usize, p: usize, t: f64) -> Vec<f64> {
    let mut n = vec![0.0; p + 1];
    let mut left = vec![0.0; p + 1];
    let mut right = vec![0.0; p + 1];
    n[0] = 1.0;
    for j in 1..=p {
        left[j] = t - knots[span + 1 - j];
        right[j] = knots[span + j] - t;
        let mut saved = 0.0;
        for r in 0..j {
            let denom = right[r + 1] + left[j - r];
            let temp = if denom == 0.0 { 0.0 } else { n[r] / denom };
            n[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        n[j] = saved;
    }
    n
}

/// Centripetal parameters: increments proportional to the square root of chord length,
/// normalized to `[0, 1]`.
pub fn centripetal_parameters(points: &[[f64; 2]]) -> Option<Vec<f64>> {
    let mut t = Vec::with_capacity(points.len());
    t.push(0.0);
    let mut acc = 0.0;
    for w in points.windows(2) {
        let d = ((w[1][0] - w[0][0]).powi(2) + (w[1][1] - w[0][1]).powi(2)).sqrt();
        acc += d.sqrt();
        t.push(acc);
    }
    if acc <= 0.0 {
        return None;
    }
    for v in &mut t {
        *v /= acc;
    }
    Some(t)
}

/// Clamped knot vector with uniformly spaced interior knots.
pub fn clamped_uniform_knots(n_ctrl: usize, degree: usize) -> Vec<f64> {
    let interior = n_ctrl - degree - 1;
    let mut k = vec![0.0; degree + 1];
    for i in 1..=interior {
        k.push(i as f64 / (interior + 1) as f64);
    }
    k.extend(std::iter::repeat_n(1.0, degree + 1));
    k
}

/// Default control-point count: `max(4, n / 10)`, never more than the data supports.
pub fn default_control_count(n_points: usize, degree: usize) -> usize {
    (n_points / 10).max(4).min(n_points).max(degree + 1)
}

/// Least-squares fit with the default control-point count.
pub fn fit_bspline(points: &[[f64; 2]], degree: usize) -> Result<BSplineCurve> {
    fit_bspline_with(points, degree, default_control_count(points.len(), degree))
}

/// Least-squares fit with an explicit control-point count.
pub fn fit_bspline_with(points: &[[f64; 2]], degree: usize, n_ctrl: usize) -> Result<BSplineCurve> {
    let need = degree + 1;
    if points.len() < need || n_ctrl < need || n_ctrl > points.len() {
        return Err(MeiboError::TooFewPoints {
            got: points.len(),
            need: need.max(n_ctrl),
        });
    }
    let params = centripetal_parameters(points).ok_or(MeiboError::TooFewPoints { got: 1, need })?;
    let knots = clamped_uniform_knots(n_ctrl, degree);

    let m = points.len();
    let mut a = DMatrix::<f64>::zeros(m, n_ctrl);
    for (row, &t) in params.iter().enumerate() {
        let span = find_span(&knots, n_ctrl, degree, t);
        for (j, b) in basis_functions(&knots, span, degree, t)
            .into_iter()
            .enumerate()
        {
            a[(row, span - degree + j)] = b;
        }
    }
    let bx = DVector::from_iterator(m, points.iter().map(|p| p[0]));
    let by = DVector::from_iterator(m, points.iter().map(|p| p[1]));

    let ata = a.transpose() * &a;
    let (cx, cy) = match ata.clone().cholesky() {
        Some(ch) => (
            ch.solve(&(a.transpose() * &bx)),
            ch.solve(&(a.transpose() * &by)),
        ),
        None => {
            // spans without data make the normal equations singular
            let svd = a.svd(true, true);
            let cx = svd
                .solve(&bx, 1e-12)
                .map_err(|e| MeiboError::InvalidParameter(e.to_string()))?;
            let cy = svd
                .solve(&by, 1e-12)
                .map_err(|e| MeiboError::InvalidParameter(e.to_string()))?;
            (cx, cy)
        }
    };
    let control_points = cx.iter().zip(cy.iter()).map(|(&x, &y)| [x, y]).collect();
    BSplineCurve::new(degree, control_points, knots)
}

//! Width and direction sampled along a centerline.

use std::f64::consts::PI;

use crate::error::{MeiboError, Result};
use crate::imgproc::bspline::fit_bspline_with;
use crate::metrics::centerline::{dist, Centerline};
use crate::raster::BinaryMask;

pub const SAMPLE_SPACING: f64 = 3.0;
pub const RAY_STEP: f64 = 0.05;

/// A point on the sample grid with its unit tangent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub arc: f64,
    pub point: [f64; 2],
    pub tangent: [f64; 2],
}

/// Arc length per control point of the spline that supplies tangent directions, pixels.
pub const TANGENT_KNOT_SPACING: f64 = 45.0;

/// A centerline within this RMS distance of its best-fit line, pixels, is treated
/// as straight. Skeleton quantization alone stays well below it; the gentlest
/// sinusoidal gland worth calling curved sits well above.
/// Arc length over which the end tangent is taken when restoring the tips, pixels.
const END_TANGENT_SPAN: f64 = 6.0;

pub const STRAIGHT_TOLERANCE: f64 = 1.0;

/// Grid positions carried onto a least-squares cubic B-spline through the
/// centerline, at the same arc fractions. Pixel-scale jogs in the skeleton
/// would otherwise dominate the turning angles. `None` if the fit fails.
fn spline_positions(c: &Centerline, grid: &[(f64, [f64; 2])]) -> Option<Vec<[f64; 2]>> {
    let n_ctrl = ((c.arc_length() / TANGENT_KNOT_SPACING).round() as usize + 3).max(4);
    let spline = fit_bspline_with(c.points(), 3, n_ctrl).ok()?;
    let dense =
        Centerline::from_points(spline.sample(2 * c.arc_length().ceil() as usize + 2)).ok()?;
    let scale = dense.arc_length() / c.arc_length();
    Some(
        grid.iter()
            .map(|&(s, _)| dense.point_at(s * scale))
            .collect(),
    )
}

/// Grid positions projected onto the total-least-squares line through the
/// centerline, or `None` when the points stray more than `tol` px RMS from it.
fn line_positions(
    points: &[[f64; 2]],
    grid: &[(f64, [f64; 2])],
    tol: f64,
) -> Option<Vec<[f64; 2]>> {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p[0]).sum::<f64>() / n;
    let my = points.iter().map(|p| p[1]).sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for p in points {
        let (dx, dy) = (p[0] - mx, p[1] - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    let theta = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let (ux, uy) = (theta.cos(), theta.sin());
    let ms = points
        .iter()
        .map(|p| (-(p[0] - mx) * uy + (p[1] - my) * ux).powi(2))
        .sum::<f64>()
        / n;
    if ms.sqrt() > tol {
        return None;
    }
    let project = |p: [f64; 2]| {
        let t = (p[0] - mx) * ux + (p[1] - my) * uy;
        [mx + t * ux, my + t * uy]
    };
    Some(grid.iter().map(|&(_, p)| project(p)).collect())
}

/// Sample grid every `spacing` px of arc length. Tangents are centered
/// differences of the neighbouring grid positions on the best-fit line for a
/// straight centerline and on the tangent spline otherwise, one-sided at the ends.
pub fn sample_grid(c: &Centerline, spacing: f64) -> Vec<Sample> {
    let grid = c.resample(spacing);
    let n = grid.len();
    let guide = line_positions(c.points(), &grid, STRAIGHT_TOLERANCE)
        .or_else(|| spline_positions(c, &grid))
        .unwrap_or_else(|| grid.iter().map(|g| g.1).collect());
    (0..n)
        .map(|i| {
            let a = guide[i.saturating_sub(1)];
            let b = guide[(i + 1).min(n - 1)];
            let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
            let norm = (dx * dx + dy * dy).sqrt();
            let tangent = if norm > 0.0 {
                [dx / norm, dy / norm]
            } else {
                [0.0, 1.0]
            };
            Sample {
                arc: grid[i].0,
                point: grid[i].1,
                tangent,
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct WidthProfile {
    /// Arc position of each kept sample, pixels from M.
    pub arc: Vec<f64>,
    /// Perpendicular chord at each kept sample, pixels.
    pub widths: Vec<f64>,
}

impl WidthProfile {
    pub fn len(&self) -> usize {
        self.widths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.widths.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.widths.iter().sum::<f64>() / self.widths.len() as f64
    }

    /// Population standard deviation, pixels.
    pub fn sd(&self) -> f64 {
        let m = self.mean();
        (self.widths.iter().map(|d| (d - m).powi(2)).sum::<f64>() / self.widths.len() as f64).sqrt()
    }
}

/// Centerline with each end pushed out along its tangent to the centre of the
/// inscribed end disc, where the medial axis of a rounded tip terminates.
/// Thinning stops a few pixels short of that point.
pub fn restore_ends(gland: &BinaryMask, c: &Centerline) -> Centerline {
    let arc = c.arc_length();
    let back = END_TANGENT_SPAN.min(arc);
    let extend = |end: [f64; 2], inner: [f64; 2]| -> Option<[f64; 2]> {
        let d = dist(end, inner);
        if d == 0.0 {
            return None;
        }
        let t = [(end[0] - inner[0]) / d, (end[1] - inner[1]) / d];
        let n = [-t[1], t[0]];
        let reach = march(gland, end, t, RAY_STEP)?;
        let half =
            (march(gland, end, n, RAY_STEP)? + march(gland, end, [-n[0], -n[1]], RAY_STEP)?) / 2.0;
        let gap = reach - half;
        (gap > RAY_STEP).then(|| [end[0] + gap * t[0], end[1] + gap * t[1]])
    };
    let pts = c.points();
    let head = extend(pts[0], c.point_at(back));
    let tail = extend(pts[pts.len() - 1], c.point_at(arc - back));
    let mut out = Vec::with_capacity(pts.len() + 2);
    out.extend(head);
    out.extend_from_slice(pts);
    out.extend(tail);
    Centerline::from_points(out).unwrap_or_else(|_| c.clone())
}

/// Distance to the last foreground pixel along `dir`, or `None` if the ray leaves the raster first.
fn march(gland: &BinaryMask, from: [f64; 2], dir: [f64; 2], step: f64) -> Option<f64> {
    let (w, h) = gland.dims();
    let limit = (w + h) as f64;
    let mut last = 0.0;
    let mut t = step;
    while t <= limit {
        let x = (from[0] + t * dir[0]).round();
        let y = (from[1] + t * dir[1]).round();
        if x < 0.0 || y < 0.0 || x >= w as f64 || y >= h as f64 {
            return None;
        }
        if !gland.get(x as usize, y as usize) {
            return Some(last);
        }
        last = t;
        t += step;
    }
    None
}

/// Pixel under a point, if inside the raster.
fn pixel_of(gland: &BinaryMask, p: [f64; 2]) -> Option<bool> {
    let (x, y) = (p[0].round(), p[1].round());
    if x < 0.0 || y < 0.0 || x >= gland.width() as f64 || y >= gland.height() as f64 {
        None
    } else {
        Some(gland.get(x as usize, y as usize))
    }
}

/// Midpoints of the perpendicular chords every `spacing` px of arc. The two
/// gland edges quantize at different places, so their midpoint wanders by half
/// pixels where the skeleton jumps whole ones. `None` if too few chords stay on the raster.
pub fn chord_midline(gland: &BinaryMask, c: &Centerline, spacing: f64) -> Option<Centerline> {
    let pts = sample_grid(c, spacing)
        .into_iter()
        .filter(|s| pixel_of(gland, s.point) == Some(true))
        .filter_map(|s| {
            let n = [-s.tangent[1], s.tangent[0]];
            let a = march(gland, s.point, n, RAY_STEP)?;
            let b = march(gland, s.point, [-n[0], -n[1]], RAY_STEP)?;
            let d = (a - b) / 2.0;
            Some([s.point[0] + d * n[0], s.point[1] + d * n[1]])
        })
        .collect();
    Centerline::from_points(pts).ok()
}

pub fn width_profile(gland: &BinaryMask, c: &Centerline) -> Result<WidthProfile> {
    width_profile_with(gland, c, SAMPLE_SPACING, RAY_STEP)
}

/// Chord through the gland perpendicular to the tangent at each sample.
/// Samples off the gland or whose rays leave the raster are dropped.
pub fn width_profile_with(
    gland: &BinaryMask,
    c: &Centerline,
    spacing: f64,
    step: f64,
) -> Result<WidthProfile> {
    let mut arc = Vec::new();
    let mut widths = Vec::new();
    for s in sample_grid(c, spacing) {
        if pixel_of(gland, s.point) != Some(true) {
            continue;
        }
        let n = [-s.tangent[1], s.tangent[0]];
        let a = march(gland, s.point, n, step);
        let b = march(gland, s.point, [-n[0], -n[1]], step);
        if let (Some(a), Some(b)) = (a, b) {
            arc.push(s.arc);
            widths.push(a + b + step);
        }
    }
    if widths.is_empty() {
        return Err(MeiboError::NoValidSamples);
    }
    Ok(WidthProfile { arc, widths })
}

/// Angle difference wrapped into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut v = a.rem_euclid(2.0 * PI);
    if v > PI {
        v -= 2.0 * PI;
    }
    v
}

/// Mean absolute turning per unit arc over the sample grid, radians per pixel.
pub fn mean_abs_curvature(samples: &[Sample]) -> Result<f64> {
    if samples.len() < 3 {
        return Err(MeiboError::TooFewPoints {
            got: samples.len(),
            need: 3,
        });
    }
    let terms: Vec<f64> = samples
        .windows(2)
        .filter_map(|w| {
            let ds = w[1].arc - w[0].arc;
            if ds <= 0.0 {
                return None;
            }
            let a0 = w[0].tangent[1].atan2(w[0].tangent[0]);
            let a1 = w[1].tangent[1].atan2(w[1].tangent[0]);
            Some((wrap_angle(a1 - a0) / ds).abs())
        })
        .collect();
    Ok(terms.iter().sum::<f64>() / terms.len() as f64)
}

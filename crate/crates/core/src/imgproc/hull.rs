//! Convex hull of a mask by Graham scan, rasterized back to a filled mask.

use crate::error::{MeiboError, Result};
use crate::imgproc::components::{label_components, Connectivity};
use crate::raster::BinaryMask;

type Pt = (i64, i64);

#[inline]
fn cross(o: Pt, a: Pt, b: Pt) -> i64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Graham scan over integer points. Returns the hull vertices in counter-clockwise
/// order (mathematical orientation of the `(x, y)` plane) without collinear points.
pub fn graham_scan(points: &[Pt]) -> Vec<Pt> {
    let mut pts: Vec<Pt> = points.to_vec();
    pts.sort_unstable();
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    // pivot: lowest y, then lowest x
    let pivot_idx = (0..pts.len())
        .min_by_key(|&i| (pts[i].1, pts[i].0))
        .expect("non-empty");
    let pivot = pts.swap_remove(pivot_idx);
    pts.sort_by(|&a, &b| {
        let c = cross(pivot, a, b);
        if c != 0 {
            // a before b when b is counter-clockwise of a
            0.cmp(&c)
        } else {
            let da = (a.0 - pivot.0).pow(2) + (a.1 - pivot.1).pow(2);
            let db = (b.0 - pivot.0).pow(2) + (b.1 - pivot.1).pow(2);
            da.cmp(&db)
        }
    });
    let mut hull = vec![pivot];
    for p in pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull
}

/// Pixels on the digital segment between `a` and `b`, one per step along the major axis.
fn segment_pixels(a: Pt, b: Pt) -> Vec<Pt> {
    let dx = b.0 - a.0;
    let dy = b.1 - a.1;
    let steps = dx.abs().max(dy.abs());
    if steps == 0 {
        return vec![a];
    }
    (0..=steps)
        .map(|i| {
            let x = a.0 as f64 + dx as f64 * i as f64 / steps as f64;
            let y = a.1 as f64 + dy as f64 * i as f64 / steps as f64;
            (x.round() as i64, y.round() as i64)
        })
        .collect()
}

/// Filled convex hull of the foreground: every pixel whose center lies in the
/// closed hull polygon. A collinear foreground yields the digital segment
/// joining its extremes.
pub fn convex_hull(mask: &BinaryMask) -> Result<BinaryMask> {
    let (w, h) = mask.dims();
    // row extremes carry every hull vertex
    let mut points = Vec::new();
    for y in 0..h {
        let row = &mask.bits()[y * w..(y + 1) * w];
        if let Some(x0) = row.iter().position(|&b| b) {
            let x1 = row.iter().rposition(|&b| b).expect("row has a pixel");
            points.push((x0 as i64, y as i64));
            if x1 != x0 {
                points.push((x1 as i64, y as i64));
            }
        }
    }
    if points.is_empty() {
        return Err(MeiboError::EmptyMask);
    }
    let mut out = mask.blank_like();
    rasterize_hull(&points, &mut out);
    Ok(out)
}

/// Union of the filled hulls of every 8-connected component.
pub fn convex_hull_components(mask: &BinaryMask) -> BinaryMask {
    let (w, h) = mask.dims();
    let comps = label_components(mask, Connectivity::Eight);
    let mut extremes: Vec<Vec<Pt>> = vec![Vec::new(); comps.len()];
    // per-label row extremes; a label's pixels in one row may be split into several runs
    let mut row_lo = vec![usize::MAX; comps.len()];
    let mut row_hi = vec![0usize; comps.len()];
    for y in 0..h {
        let mut seen = Vec::new();
        for x in 0..w {
            let l = comps.label_at(x, y);
            if l == 0 {
                continue;
            }
            let i = l as usize - 1;
            if row_lo[i] == usize::MAX {
                seen.push(i);
                row_lo[i] = x;
            }
            row_hi[i] = x;
        }
        for i in seen {
            extremes[i].push((row_lo[i] as i64, y as i64));
            if row_hi[i] != row_lo[i] {
                extremes[i].push((row_hi[i] as i64, y as i64));
            }
            row_lo[i] = usize::MAX;
        }
    }
    let mut out = mask.blank_like();
    for pts in &extremes {
        rasterize_hull(pts, &mut out);
    }
    out
}

fn rasterize_hull(points: &[Pt], out: &mut BinaryMask) {
    let hull = graham_scan(points);
    match hull.len() {
        0 => {}
        1 | 2 => {
            let (a, b) = (hull[0], *hull.last().expect("non-empty"));
            for (x, y) in segment_pixels(a, b) {
                out.set(x as usize, y as usize, true);
            }
        }
        _ => fill_polygon(&hull, out),
    }
}

fn fill_polygon(hull: &[Pt], out: &mut BinaryMask) {
    let w = out.width() as i64;
    let y_min = hull.iter().map(|p| p.1).min().expect("non-empty");
    let y_max = hull.iter().map(|p| p.1).max().expect("non-empty");
    for y in y_min..=y_max {
        // the polygon is convex, so each row meets it in one interval
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..hull.len() {
            let a = hull[i];
            let b = hull[(i + 1) % hull.len()];
            if (a.1 <= y && y <= b.1) || (b.1 <= y && y <= a.1) {
                if a.1 == b.1 {
                    lo = lo.min(a.0.min(b.0) as f64);
                    hi = hi.max(a.0.max(b.0) as f64);
                } else {
                    let t = (y - a.1) as f64 / (b.1 - a.1) as f64;
                    let x = a.0 as f64 + t * (b.0 - a.0) as f64;
                    lo = lo.min(x);
                    hi = hi.max(x);
                }
            }
        }
        if lo > hi {
            continue;
        }
        let x0 = ((lo - 1e-9).ceil() as i64).max(0);
        let x1 = ((hi + 1e-9).floor() as i64).min(w - 1);
        for x in x0..=x1 {
            out.set(x as usize, y as usize, true);
        }
    }
}

//! Brute-force reference implementations written from the direct definitions,
//! plus random input generators. Shared by the integration tests and the
//! acceptance runner.
#![allow(dead_code)]

use meibo::evalseg::score;
use meibo::imgproc::bspline::{centripetal_parameters, fit_bspline_with};
use meibo::imgproc::*;
use meibo::{BinaryMask, GrayImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random size in `[16, 32]` on both axes.
pub fn random_dims(r: &mut impl Rng) -> (usize, usize) {
    (r.random_range(16..=32), r.random_range(16..=32))
}

/// Mask with foreground density drawn per case, so sparse, dense and blobby inputs all occur.
pub fn random_mask(r: &mut impl Rng, w: usize, h: usize) -> BinaryMask {
    let density: f64 = r.random_range(0.05..0.95);
    let blobby = r.random_bool(0.5);
    let mut m = BinaryMask::from_fn(w, h, |_, _| r.random_bool(density)).unwrap();
    if blobby {
        m = binary_median(&m, &StructuringElement::disk(3));
    }
    m
}

/// A handful of isolated pixels: exercises hull corner cases (one point, collinear sets).
pub fn sparse_mask(r: &mut impl Rng, w: usize, h: usize) -> BinaryMask {
    let n = r.random_range(1..=8);
    let collinear = r.random_bool(0.25);
    let mut m = BinaryMask::empty(w, h).unwrap();
    let y0 = r.random_range(0..h);
    for _ in 0..n {
        let x = r.random_range(0..w);
        let y = if collinear { y0 } else { r.random_range(0..h) };
        m.set(x, y, true);
    }
    m
}

pub fn random_image(r: &mut impl Rng, w: usize, h: usize) -> GrayImage {
    // a small palette some of the time, so histograms have gaps and plateaus
    let palette: Option<Vec<u8>> = r.random_bool(0.4).then(|| {
        let k = r.random_range(2..=5);
        (0..k).map(|_| r.random()).collect()
    });
    GrayImage::from_fn(w, h, |_, _| match &palette {
        Some(p) => p[r.random_range(0..p.len())],
        None => r.random(),
    })
    .unwrap()
}

pub fn random_se(r: &mut impl Rng) -> StructuringElement {
    if r.random_bool(0.5) {
        StructuringElement::disk(r.random_range(1..=9))
    } else {
        StructuringElement::rect(r.random_range(1..=7), r.random_range(1..=7))
    }
}

/// Axis-aligned bars `(x, y, width, height)` on a blank raster.
pub fn bars(w: usize, h: usize, rects: &[(usize, usize, usize, usize)]) -> BinaryMask {
    BinaryMask::from_fn(w, h, |x, y| {
        rects
            .iter()
            .any(|&(x0, y0, bw, bh)| x >= x0 && x < x0 + bw && y >= y0 && y < y0 + bh)
    })
    .unwrap()
}

fn clamp_get(img: &GrayImage, x: isize, y: isize) -> i64 {
    let xx = x.clamp(0, img.width() as isize - 1) as usize;
    let yy = y.clamp(0, img.height() as isize - 1) as usize;
    img.get(xx, yy) as i64
}

fn in_mask(m: &BinaryMask, x: isize, y: isize) -> bool {
    x >= 0
        && y >= 0
        && (x as usize) < m.width()
        && (y as usize) < m.height()
        && m.get(x as usize, y as usize)
}

pub mod oracle {
    use super::*;

    pub fn erode(m: &BinaryMask, se: &StructuringElement) -> BinaryMask {
        BinaryMask::from_fn(m.width(), m.height(), |x, y| {
            se.offsets()
                .iter()
                .all(|&(dx, dy)| in_mask(m, x as isize + dx, y as isize + dy))
        })
        .unwrap()
    }

    pub fn dilate(m: &BinaryMask, se: &StructuringElement) -> BinaryMask {
        let mut out = m.blank_like();
        for (ax, ay) in m.foreground() {
            for &(dx, dy) in se.offsets() {
                let (x, y) = (ax as isize + dx, ay as isize + dy);
                if x >= 0 && y >= 0 && (x as usize) < m.width() && (y as usize) < m.height() {
                    out.set(x as usize, y as usize, true);
                }
            }
        }
        out
    }

    pub fn minus(a: &BinaryMask, b: &BinaryMask) -> BinaryMask {
        BinaryMask::from_fn(a.width(), a.height(), |x, y| a.get(x, y) && !b.get(x, y)).unwrap()
    }

    pub fn invert(m: &BinaryMask) -> BinaryMask {
        BinaryMask::from_fn(m.width(), m.height(), |x, y| !m.get(x, y)).unwrap()
    }

    /// Background 4-connected to the border, grown until nothing changes.
    pub fn fill_holes(m: &BinaryMask) -> BinaryMask {
        let (w, h) = m.dims();
        let mut outside = BinaryMask::from_fn(w, h, |x, y| {
            !m.get(x, y) && (x == 0 || y == 0 || x == w - 1 || y == h - 1)
        })
        .unwrap();
        loop {
            let next = BinaryMask::from_fn(w, h, |x, y| {
                outside.get(x, y)
                    || (!m.get(x, y)
                        && [(1, 0), (-1, 0), (0, 1), (0, -1)]
                            .iter()
                            .any(|&(dx, dy)| in_mask(&outside, x as isize + dx, y as isize + dy)))
            })
            .unwrap();
            if next == outside {
                return invert(&outside);
            }
            outside = next;
        }
    }

    fn window(img: &GrayImage, se: &StructuringElement, x: usize, y: usize) -> Vec<i64> {
        let mut v: Vec<i64> = se
            .offsets()
            .iter()
            .map(|&(dx, dy)| clamp_get(img, x as isize + dx, y as isize + dy))
            .collect();
        v.sort_unstable();
        v
    }

    pub fn median(img: &GrayImage, se: &StructuringElement) -> GrayImage {
        GrayImage::from_fn(img.width(), img.height(), |x, y| {
            let v = window(img, se, x, y);
            v[(v.len() - 1) / 2] as u8
        })
        .unwrap()
    }

    pub fn binary_median(m: &BinaryMask, se: &StructuringElement) -> BinaryMask {
        let g = m.to_gray();
        let med = median(&g, se);
        BinaryMask::from_fn(m.width(), m.height(), |x, y| med.get(x, y) > 0).unwrap()
    }

    fn convolve3(img: &GrayImage, k: [[i64; 3]; 3], x: usize, y: usize) -> i64 {
        let mut s = 0;
        for (j, row) in k.iter().enumerate() {
            for (i, &c) in row.iter().enumerate() {
                s += c * clamp_get(
                    img,
                    x as isize + i as isize - 1,
                    y as isize + j as isize - 1,
                );
            }
        }
        s
    }

    pub fn prewitt(img: &GrayImage) -> GrayImage {
        let kx = [[-1, 0, 1], [-1, 0, 1], [-1, 0, 1]];
        let ky = [[-1, -1, -1], [0, 0, 0], [1, 1, 1]];
        GrayImage::from_fn(img.width(), img.height(), |x, y| {
            (convolve3(img, kx, x, y).abs() + convolve3(img, ky, x, y).abs()).min(255) as u8
        })
        .unwrap()
    }

    fn box_mean(img: &GrayImage, size: usize, x: usize, y: usize) -> f64 {
        let r = (size / 2) as isize;
        let mut s = 0i64;
        for dy in -r..=r {
            for dx in -r..=r {
                s += clamp_get(img, x as isize + dx, y as isize + dy);
            }
        }
        s as f64 / (size * size) as f64
    }

    pub fn highlight(img: &GrayImage, size: usize) -> GrayImage {
        GrayImage::from_fn(img.width(), img.height(), |x, y| {
            let v = img.get(x, y) as f64;
            (v + (v - box_mean(img, size, x, y)))
                .round()
                .clamp(0.0, 255.0) as u8
        })
        .unwrap()
    }

    /// Identity plus the all-minus-one Laplacian whose center tap balances the sum.
    pub fn laplacian(img: &GrayImage, size: usize) -> GrayImage {
        let r = (size / 2) as isize;
        let n = (size * size) as i64;
        GrayImage::from_fn(img.width(), img.height(), |x, y| {
            let mut s = 0i64;
            for dy in -r..=r {
                for dx in -r..=r {
                    let tap = if dx == 0 && dy == 0 { n - 1 } else { -1 };
                    s += tap * clamp_get(img, x as isize + dx, y as isize + dy);
                }
            }
            (img.get(x, y) as i64 + s).clamp(0, 255) as u8
        })
        .unwrap()
    }

    /// Exhaustive between-class variance; the first maximal plateau, returned at its midpoint.
    pub fn otsu_level(img: &GrayImage) -> Option<u8> {
        let vals: Vec<f64> = img.data().iter().map(|&v| v as f64).collect();
        let n = vals.len() as f64;
        let var = |t: usize| -> Option<f64> {
            let (c0, c1): (Vec<f64>, Vec<f64>) = vals.iter().partition(|&&v| v <= t as f64);
            if c0.is_empty() || c1.is_empty() {
                return None;
            }
            let m0 = c0.iter().sum::<f64>() / c0.len() as f64;
            let m1 = c1.iter().sum::<f64>() / c1.len() as f64;
            Some(c0.len() as f64 / n * c1.len() as f64 / n * (m0 - m1).powi(2))
        };
        let vs: Vec<Option<f64>> = (0..255).map(var).collect();
        let best = vs
            .iter()
            .flatten()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        if !best.is_finite() {
            return None;
        }
        let same = |v: &Option<f64>| v.is_some_and(|v| (v - best).abs() <= 1e-9 * best.max(1.0));
        let lo = vs.iter().position(same)?;
        let mut hi = lo;
        while hi + 1 < 255 && same(&vs[hi + 1]) {
            hi += 1;
        }
        Some(((lo + hi) / 2) as u8)
    }

    /// Labels by repeated minimum propagation, renumbered in raster order of first pixel.
    pub fn labels(m: &BinaryMask, conn: Connectivity) -> Vec<u32> {
        let (w, h) = m.dims();
        let nbrs: &[(isize, isize)] = match conn {
            Connectivity::Four => &[(1, 0), (-1, 0), (0, 1), (0, -1)],
            Connectivity::Eight => &[
                (1, 0),
                (-1, 0),
                (0, 1),
                (0, -1),
                (1, 1),
                (1, -1),
                (-1, 1),
                (-1, -1),
            ],
        };
        let mut id: Vec<usize> = (0..w * h)
            .map(|i| if m.bits()[i] { i + 1 } else { 0 })
            .collect();
        loop {
            let mut changed = false;
            for y in 0..h {
                for x in 0..w {
                    let i = y * w + x;
                    if id[i] == 0 {
                        continue;
                    }
                    for &(dx, dy) in nbrs {
                        let (xx, yy) = (x as isize + dx, y as isize + dy);
                        if in_mask(m, xx, yy) {
                            let j = yy as usize * w + xx as usize;
                            if id[j] < id[i] {
                                id[i] = id[j];
                                changed = true;
                            }
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let mut renum = std::collections::HashMap::new();
        id.iter()
            .map(|&v| {
                if v == 0 {
                    0
                } else {
                    let next = renum.len() as u32 + 1;
                    *renum.entry(v).or_insert(next)
                }
            })
            .collect()
    }

    fn components(m: &BinaryMask) -> Vec<BinaryMask> {
        let l = labels(m, Connectivity::Eight);
        let n = l.iter().copied().max().unwrap_or(0);
        (1..=n)
            .map(|k| {
                BinaryMask::from_vec(m.width(), m.height(), l.iter().map(|&v| v == k).collect())
                    .unwrap()
            })
            .collect()
    }

    fn union(w: usize, h: usize, parts: impl IntoIterator<Item = BinaryMask>) -> BinaryMask {
        let mut out = BinaryMask::empty(w, h).unwrap();
        for p in parts {
            out.union_with(&p).unwrap();
        }
        out
    }

    pub fn remove_small(m: &BinaryMask, min_area: usize) -> BinaryMask {
        union(
            m.width(),
            m.height(),
            components(m).into_iter().filter(|c| c.count() >= min_area),
        )
    }

    pub fn reject_border(m: &BinaryMask) -> BinaryMask {
        let (w, h) = m.dims();
        union(
            w,
            h,
            components(m).into_iter().filter(|c| {
                !c.foreground()
                    .any(|(x, y)| x == 0 || y == 0 || x == w - 1 || y == h - 1)
            }),
        )
    }

    pub fn keep_largest(m: &BinaryMask) -> BinaryMask {
        let comps = components(m);
        let best = comps.iter().map(|c| c.count()).max();
        comps
            .into_iter()
            .find(|c| Some(c.count()) == best)
            .unwrap_or_else(|| m.blank_like())
    }

    fn cross(o: (i64, i64), a: (i64, i64), b: (i64, i64)) -> i64 {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    }

    /// Pixel centers in the closed hull, as the intersection of every supporting half-plane.
    /// A collinear set becomes the digital segment joining its extremes.
    pub fn convex_hull(m: &BinaryMask) -> BinaryMask {
        let pts: Vec<(i64, i64)> = m.foreground().map(|(x, y)| (x as i64, y as i64)).collect();
        let mut out = m.blank_like();
        if pts.is_empty() {
            return out;
        }
        let (a0, b0) = (
            pts[0],
            *pts.iter()
                .max_by_key(|p| (p.0 - pts[0].0).pow(2) + (p.1 - pts[0].1).pow(2))
                .unwrap(),
        );
        if pts.iter().all(|&p| cross(a0, b0, p) == 0) {
            let lo = *pts.iter().min().unwrap();
            let hi = *pts.iter().max().unwrap();
            let steps = (hi.0 - lo.0).abs().max((hi.1 - lo.1).abs());
            for i in 0..=steps {
                let t = if steps == 0 {
                    0.0
                } else {
                    i as f64 / steps as f64
                };
                let x = (lo.0 as f64 + t * (hi.0 - lo.0) as f64).round() as usize;
                let y = (lo.1 as f64 + t * (hi.1 - lo.1) as f64).round() as usize;
                out.set(x, y, true);
            }
            return out;
        }
        // row extremes span the same hull as the full foreground
        let mut ext = Vec::new();
        for y in 0..m.height() as i64 {
            let row: Vec<i64> = pts.iter().filter(|p| p.1 == y).map(|p| p.0).collect();
            if let (Some(&lo), Some(&hi)) = (row.iter().min(), row.iter().max()) {
                ext.push((lo, y));
                ext.push((hi, y));
            }
        }
        let mut planes = Vec::new();
        for &a in &ext {
            for &b in &ext {
                if a != b && ext.iter().all(|&p| cross(a, b, p) >= 0) {
                    planes.push((a, b));
                }
            }
        }
        for y in 0..m.height() {
            for x in 0..m.width() {
                let q = (x as i64, y as i64);
                if planes.iter().all(|&(a, b)| cross(a, b, q) >= 0) {
                    out.set(x, y, true);
                }
            }
        }
        out
    }

    pub fn convex_hull_components(m: &BinaryMask) -> BinaryMask {
        union(m.width(), m.height(), components(m).iter().map(convex_hull))
    }

    /// Zhang–Suen thinning, recomputed over the whole raster at every subiteration.
    pub fn skeletonize(m: &BinaryMask) -> BinaryMask {
        let mut img = m.clone();
        loop {
            let mut changed = false;
            for pass in 0..2 {
                let snapshot = img.clone();
                for y in 0..img.height() {
                    for x in 0..img.width() {
                        if !snapshot.get(x, y) {
                            continue;
                        }
                        let p = |dx: isize, dy: isize| {
                            in_mask(&snapshot, x as isize + dx, y as isize + dy) as u8
                        };
                        let n = [
                            p(0, -1),
                            p(1, -1),
                            p(1, 0),
                            p(1, 1),
                            p(0, 1),
                            p(-1, 1),
                            p(-1, 0),
                            p(-1, -1),
                        ];
                        let b: u8 = n.iter().sum();
                        let a = (0..8).filter(|&i| n[i] == 0 && n[(i + 1) % 8] == 1).count();
                        let (p2, p4, p6, p8) = (n[0], n[2], n[4], n[6]);
                        let cond = if pass == 0 {
                            p2 * p4 * p6 == 0 && p4 * p6 * p8 == 0
                        } else {
                            p2 * p4 * p8 == 0 && p2 * p6 * p8 == 0
                        };
                        if (2..=6).contains(&b) && a == 1 && cond {
                            img.set(x, y, false);
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                return img;
            }
        }
    }

    /// Cox–de Boor recursion on half-open spans; the clamped end belongs to the last function.
    pub fn basis(knots: &[f64], i: usize, p: usize, t: f64, n_ctrl: usize) -> f64 {
        if t >= *knots.last().unwrap() {
            return if i == n_ctrl - 1 { 1.0 } else { 0.0 };
        }
        if p == 0 {
            return if knots[i] <= t && t < knots[i + 1] {
                1.0
            } else {
                0.0
            };
        }
        let mut v = 0.0;
        let d1 = knots[i + p] - knots[i];
        if d1 > 0.0 {
            v += (t - knots[i]) / d1 * basis(knots, i, p - 1, t, n_ctrl);
        }
        let d2 = knots[i + p + 1] - knots[i + 1];
        if d2 > 0.0 {
            v += (knots[i + p + 1] - t) / d2 * basis(knots, i + 1, p - 1, t, n_ctrl);
        }
        v
    }

    pub fn curve_point(c: &BSplineCurve, t: f64) -> [f64; 2] {
        let n = c.control_points().len();
        let mut p = [0.0; 2];
        for (i, cp) in c.control_points().iter().enumerate() {
            let b = basis(c.knots(), i, c.degree(), t, n);
            p[0] += b * cp[0];
            p[1] += b * cp[1];
        }
        p
    }
}

/// Outcome of one operation's oracle comparison.
#[derive(Debug)]
pub struct OpCheck {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
}

fn check<T>(
    name: &'static str,
    cases: usize,
    mut run: impl FnMut(usize) -> T,
    ok: impl Fn(&T) -> bool,
) -> OpCheck {
    let failures = (0..cases).filter(|&i| !ok(&run(i))).count();
    OpCheck {
        name,
        cases,
        failures,
    }
}

fn gray_within(a: &GrayImage, b: &GrayImage, tol: i32) -> bool {
    a.dims() == b.dims()
        && a.data()
            .iter()
            .zip(b.data())
            .all(|(&x, &y)| (x as i32 - y as i32).abs() <= tol)
}

/// Every raster operation against its oracle on `cases` random inputs each.
/// Binary results must match exactly, filter outputs within one intensity level.
pub fn kernel_suite(cases: usize, seed: u64) -> Vec<OpCheck> {
    let mut r = rng(seed);
    let mut out = Vec::new();
    macro_rules! binary_op {
        ($name:expr, $f:expr) => {{
            let rr = &mut r;
            out.push(check(
                $name,
                cases,
                |_| {
                    let (w, h) = random_dims(rr);
                    let m = random_mask(rr, w, h);
                    let se = random_se(rr);
                    #[allow(clippy::redundant_closure_call)]
                    ($f)(&m, &se)
                },
                |(a, b): &(BinaryMask, BinaryMask)| a == b,
            ));
        }};
    }
    binary_op!("erode", |m: &BinaryMask, se: &StructuringElement| (
        erode(m, se),
        oracle::erode(m, se)
    ));
    binary_op!("dilate", |m: &BinaryMask, se: &StructuringElement| (
        dilate(m, se),
        oracle::dilate(m, se)
    ));
    binary_op!("gradient_out", |m: &BinaryMask, se: &StructuringElement| {
        (
            gradient_out(m, se),
            oracle::minus(&oracle::dilate(m, se), m),
        )
    });
    binary_op!("gradient_in", |m: &BinaryMask, se: &StructuringElement| {
        (gradient_in(m, se), oracle::minus(m, &oracle::erode(m, se)))
    });
    binary_op!(
        "binary_median",
        |m: &BinaryMask, se: &StructuringElement| {
            (binary_median(m, se), oracle::binary_median(m, se))
        }
    );
    binary_op!("invert", |m: &BinaryMask, _: &StructuringElement| (
        invert(m),
        oracle::invert(m)
    ));
    binary_op!("fill_holes", |m: &BinaryMask, _: &StructuringElement| (
        fill_holes(m),
        oracle::fill_holes(m)
    ));
    binary_op!("keep_largest", |m: &BinaryMask, _: &StructuringElement| (
        keep_largest(m),
        oracle::keep_largest(m)
    ));
    binary_op!("reject_border", |m: &BinaryMask, _: &StructuringElement| (
        reject_border(m),
        oracle::reject_border(m)
    ));
    binary_op!("skeletonize", |m: &BinaryMask, _: &StructuringElement| (
        skeletonize(m),
        oracle::skeletonize(m)
    ));
    binary_op!(
        "convex_hull_components",
        |m: &BinaryMask, _: &StructuringElement| {
            (convex_hull_components(m), oracle::convex_hull_components(m))
        }
    );

    out.push(check(
        "subtract",
        cases,
        |_| {
            let (w, h) = random_dims(&mut r);
            let a = random_mask(&mut r, w, h);
            let b = random_mask(&mut r, w, h);
            (subtract(&a, &b).unwrap(), oracle::minus(&a, &b))
        },
        |(a, b)| a == b,
    ));
    out.push(check(
        "remove_small",
        cases,
        |_| {
            let (w, h) = random_dims(&mut r);
            let m = random_mask(&mut r, w, h);
            let min = r.random_range(1..40);
            (remove_small(&m, min), oracle::remove_small(&m, min))
        },
        |(a, b)| a == b,
    ));
    out.push(check(
        "label_components",
        cases,
        |_| {
            let (w, h) = random_dims(&mut r);
            let m = random_mask(&mut r, w, h);
            let conn = if r.random_bool(0.5) {
                Connectivity::Four
            } else {
                Connectivity::Eight
            };
            let set = label_components(&m, conn);
            let areas: Vec<usize> = set.stats().iter().map(|s| s.area).collect();
            let expect = oracle::labels(&m, conn);
            let n = expect.iter().copied().max().unwrap_or(0) as usize;
            let expect_areas: Vec<usize> = (1..=n as u32)
                .map(|k| expect.iter().filter(|&&v| v == k).count())
                .collect();
            (set.labels() == expect.as_slice(), areas == expect_areas)
        },
        |&(a, b)| a && b,
    ));
    out.push(check(
        "convex_hull",
        cases,
        |i| {
            let (w, h) = random_dims(&mut r);
            let m = if i % 2 == 0 {
                sparse_mask(&mut r, w, h)
            } else {
                keep_largest(&random_mask(&mut r, w, h))
            };
            if m.is_empty() {
                return true;
            }
            convex_hull(&m).unwrap() == oracle::convex_hull(&m)
        },
        |&b| b,
    ));

    out.push(check(
        "median_filter",
        cases,
        |_| {
            let (w, h) = random_dims(&mut r);
            let img = random_image(&mut r, w, h);
            let se = random_se(&mut r);
            gray_within(&median_filter(&img, &se), &oracle::median(&img, &se), 1)
        },
        |&b| b,
    ));
    out.push(check(
        "prewitt",
        cases,
        |_| {
            let (w, h) = random_dims(&mut r);
            let img = random_image(&mut r, w, h);
            gray_within(&prewitt(&img).unwrap(), &oracle::prewitt(&img), 1)
        },
        |&b| b,
    ));
    out.push(check(
        "highlight_details",
        cases,
        |_| {
            let (w, h) = random_dims(&mut r);
            let img = random_image(&mut r, w, h);
            let size = 2 * r.random_range(1..=13) + 1;
            gray_within(
                &highlight_details(&img, size).unwrap(),
                &oracle::highlight(&img, size),
                1,
            )
        },
        |&b| b,
    ));
    out.push(check(
        "laplacian_sharpen",
        cases,
        |_| {
            let (w, h) = random_dims(&mut r);
            // low contrast keeps part of the output out of saturation
            let base: u8 = r.random_range(60..190);
            let img =
                GrayImage::from_fn(w, h, |_, _| base.saturating_add(r.random_range(0..3))).unwrap();
            let size = 2 * r.random_range(1..=14) + 1;
            gray_within(
                &laplacian_sharpen(&img, size).unwrap(),
                &oracle::laplacian(&img, size),
                1,
            )
        },
        |&b| b,
    ));
    out.push(check(
        "otsu_threshold",
        cases,
        |_| {
            let (w, h) = random_dims(&mut r);
            let img = random_image(&mut r, w, h);
            match (
                try_threshold(&img, ThresholdMethod::Otsu),
                oracle::otsu_level(&img),
            ) {
                (Ok(m), Some(level)) => {
                    m == BinaryMask::from_fn(w, h, |x, y| img.get(x, y) > level).unwrap()
                }
                (Err(_), None) => true,
                _ => false,
            }
        },
        |&b| b,
    ));
    out.push(check(
        "multiply_gray",
        cases,
        |_| {
            let (w, h) = random_dims(&mut r);
            let img = random_image(&mut r, w, h);
            let m = random_mask(&mut r, w, h);
            let got = multiply_gray(&img, &m).unwrap();
            let sub = subtract_gray(&img, &m).unwrap();
            (0..h).all(|y| {
                (0..w).all(|x| {
                    let v = img.get(x, y);
                    got.get(x, y) == if m.get(x, y) { v } else { 0 }
                        && sub.get(x, y) == if m.get(x, y) { 0 } else { v }
                })
            })
        },
        |&b| b,
    ));
    out.push(check(
        "bspline_fit",
        cases,
        |_| {
            let n = r.random_range(6..60);
            let pts: Vec<[f64; 2]> = (0..n)
                .map(|i| {
                    [
                        i as f64 * 3.0 + r.random_range(0.0..2.0),
                        r.random_range(-20.0..20.0),
                    ]
                })
                .collect();
            let degree = r.random_range(1..=3);
            let n_ctrl = r.random_range(degree + 1..=n.min(12));
            let c = fit_bspline_with(&pts, degree, n_ctrl).unwrap();
            let ts = centripetal_parameters(&pts).unwrap();
            // evaluation agrees with the recursive basis, and the residual is orthogonal to every basis function
            let eval_ok = ts.iter().all(|&t| {
                let (a, b) = (c.evaluate(t), oracle::curve_point(&c, t));
                (a[0] - b[0]).abs() < 1e-6 && (a[1] - b[1]).abs() < 1e-6
            });
            let scale = pts.iter().map(|p| p[0].abs() + p[1].abs()).sum::<f64>();
            let normal_ok = (0..n_ctrl).all(|j| {
                let mut g = [0.0; 2];
                for (p, &t) in pts.iter().zip(&ts) {
                    let q = c.evaluate(t);
                    let nb = oracle::basis(c.knots(), j, degree, t, n_ctrl);
                    g[0] += nb * (p[0] - q[0]);
                    g[1] += nb * (p[1] - q[1]);
                }
                g[0].abs() < 1e-7 * scale && g[1].abs() < 1e-7 * scale
            });
            eval_ok && normal_ok
        },
        |&b| b,
    ));
    out
}

/// `score` against per-pixel counting on random mask pairs; returns `(cases, failures)`.
pub fn eval_suite(cases: usize, seed: u64) -> (usize, usize) {
    let mut r = rng(seed);
    let mut failures = 0;
    for _ in 0..cases {
        let a = random_mask(&mut r, 64, 64);
        let b = random_mask(&mut r, 64, 64);
        let Ok(s) = score(&a, &b) else {
            failures += usize::from(a.count() != 0);
            continue;
        };
        let (mut both, mut ref_n, mut cand_n) = (0u64, 0u64, 0u64);
        for (&x, &y) in a.bits().iter().zip(b.bits()) {
            both += u64::from(x && y);
            ref_n += u64::from(x);
            cand_n += u64::from(y);
        }
        // k = 2|A∩B| / (|A|+|B|) and the two error rates, compared as exact fractions
        let counts_ok = s.overlap_px as u64 == both
            && s.reference_px as u64 == ref_n
            && s.candidate_px as u64 == cand_n;
        let k_ok = s.k == (2 * both) as f64 / (ref_n + cand_n) as f64;
        let rp_ok = s.r_p == (cand_n - both) as f64 / ref_n as f64 * 100.0;
        let rn_ok = s.r_n == (ref_n - both) as f64 / ref_n as f64 * 100.0;
        let same = score(&a, &a).unwrap();
        let identity_ok = same.k == 1.0 && same.r_p == 0.0 && same.r_n == 0.0;
        if !(counts_ok && k_ok && rp_ok && rn_ok && identity_ok) {
            failures += 1;
        }
    }
    (cases, failures)
}

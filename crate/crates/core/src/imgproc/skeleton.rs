//! Zhang–Suen two-subiteration thinning.

use crate::raster::BinaryMask;

/// Thins the foreground to an 8-connected, one-pixel-wide skeleton.
///
/// Pixels outside the raster count as background. The result is a fixed point:
/// thinning a skeleton again changes nothing.
pub fn skeletonize(mask: &BinaryMask) -> BinaryMask {
    let (w, h) = mask.dims();
    let mut img = mask.clone();
    let mut live: Vec<(usize, usize)> = mask.foreground().collect();
    let mut doomed = Vec::new();

    loop {
        let mut changed = false;
        for pass in 0..2 {
            doomed.clear();
            for &(x, y) in &live {
                if deletable(&img, x, y, pass) {
                    doomed.push((x, y));
                }
            }
            if !doomed.is_empty() {
                changed = true;
                for &(x, y) in &doomed {
                    img.set(x, y, false);
                }
                live.retain(|&(x, y)| img.get(x, y));
            }
        }
        if !changed {
            break;
        }
    }
    debug_assert_eq!(img.dims(), (w, h));
    img
}

#[inline]
fn deletable(img: &BinaryMask, x: usize, y: usize, pass: usize) -> bool {
    let (x, y) = (x as isize, y as isize);
    let p = |dx: isize, dy: isize| img.get_or_bg(x + dx, y + dy) as u8;
    // P2..P9 clockwise from north
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
    if !(2..=6).contains(&b) {
        return false;
    }
    let a = (0..8).filter(|&i| n[i] == 0 && n[(i + 1) % 8] == 1).count();
    if a != 1 {
        return false;
    }
    let (p2, p4, p6, p8) = (n[0], n[2], n[4], n[6]);
    if pass == 0 {
        p2 * p4 * p6 == 0 && p4 * p6 * p8 == 0
    } else {
        p2 * p4 * p8 == 0 && p2 * p6 * p8 == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imgproc::components::{label_components, Connectivity};

    #[test]
    fn thin_line_is_unchanged() {
        let line = BinaryMask::from_fn(20, 5, |x, y| y == 2 && (2..18).contains(&x)).unwrap();
        assert_eq!(skeletonize(&line), line);
    }

    #[test]
    fn rectangle_thins_to_midline() {
        let rect = BinaryMask::from_fn(27, 11, |x, y| (3..24).contains(&x) && (3..8).contains(&y))
            .unwrap();
        let sk = skeletonize(&rect);
        assert!(!sk.is_empty());
        // all skeleton pixels in the middle part of the rectangle lie on row 5
        for (x, y) in sk.foreground() {
            if (6..21).contains(&x) {
                assert_eq!(y, 5, "pixel ({x},{y})");
            }
        }
        assert_eq!(label_components(&sk, Connectivity::Eight).len(), 1);
        assert_eq!(skeletonize(&sk), sk);
    }
}

//! Binary morphology.
//!
//! Neighborhoods that fall outside the raster are background. Both erosion and
//! dilation decompose the structuring element into horizontal runs and answer
//! each run with a per-row prefix count, so cost is `O(pixels * rows(se))`.

use std::collections::VecDeque;

use crate::error::Result;
use crate::imgproc::se::StructuringElement;
use crate::raster::{BinaryMask, GrayImage};

/// Per-row prefix counts: `p[y * (w + 1) + x]` = foreground pixels in `row[0..x)`.
fn row_prefix(mask: &BinaryMask) -> Vec<u32> {
    let (w, h) = mask.dims();
    let mut p = vec![0u32; (w + 1) * h];
    for y in 0..h {
        let base = y * (w + 1);
        for x in 0..w {
            p[base + x + 1] = p[base + x] + mask.get(x, y) as u32;
        }
    }
    p
}

/// `{p : p + b in mask for every offset b}`.
pub fn erode(mask: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    let (w, h) = mask.dims();
    let runs = se.runs();
    let prefix = row_prefix(mask);
    let mut out = mask.blank_like();
    for y in 0..h as isize {
        'px: for x in 0..w as isize {
            for r in &runs {
                let yy = y + r.dy;
                let x0 = x + r.dx0;
                let x1 = x + r.dx1;
                if yy < 0 || yy >= h as isize || x0 < 0 || x1 >= w as isize {
                    continue 'px;
                }
                let base = yy as usize * (w + 1);
                let have = prefix[base + x1 as usize + 1] - prefix[base + x0 as usize];
                if have as isize != r.dx1 - r.dx0 + 1 {
                    continue 'px;
                }
            }
            out.set(x as usize, y as usize, true);
        }
    }
    out
}

/// `{a + b : a in mask, b in se}`.
pub fn dilate(mask: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    let (w, h) = mask.dims();
    let runs = se.runs();
    let prefix = row_prefix(mask);
    let mut out = mask.blank_like();
    for y in 0..h as isize {
        for x in 0..w as isize {
            let hit = runs.iter().any(|r| {
                let yy = y - r.dy;
                if yy < 0 || yy >= h as isize {
                    return false;
                }
                let x0 = (x - r.dx1).max(0);
                let x1 = (x - r.dx0).min(w as isize - 1);
                if x0 > x1 {
                    return false;
                }
                let base = yy as usize * (w + 1);
                prefix[base + x1 as usize + 1] > prefix[base + x0 as usize]
            });
            if hit {
                out.set(x as usize, y as usize, true);
            }
        }
    }
    out
}

pub fn invert(mask: &BinaryMask) -> BinaryMask {
    let mut out = mask.clone();
    for b in out.bits_mut() {
        *b = !*b;
    }
    out
}

/// `a AND NOT b`.
pub fn subtract(a: &BinaryMask, b: &BinaryMask) -> Result<BinaryMask> {
    a.and_not(b)
}

/// Zeroes the pixels of `img` covered by `mask`.
pub fn subtract_gray(img: &GrayImage, mask: &BinaryMask) -> Result<GrayImage> {
    mask.ensure_same_dims(img.dims())?;
    let data = img
        .data()
        .iter()
        .zip(mask.bits())
        .map(|(&v, &m)| if m { 0 } else { v })
        .collect();
    GrayImage::from_vec(img.width(), img.height(), data)
}

/// Keeps the pixels of `img` covered by `mask`, zeroing the rest.
pub fn multiply_gray(img: &GrayImage, mask: &BinaryMask) -> Result<GrayImage> {
    subtract_gray(img, &invert(mask))
}

/// Outer ring: `dilate(mask) - mask`.
pub fn gradient_out(mask: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    dilate(mask, se).and_not(mask).expect("same dims")
}

/// Inner ring: `mask - erode(mask)`.
pub fn gradient_in(mask: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    mask.and_not(&erode(mask, se)).expect("same dims")
}

/// Fills background regions that are not 4-connected to the raster border.
pub fn fill_holes(mask: &BinaryMask) -> BinaryMask {
    let (w, h) = mask.dims();
    let mut reached = vec![false; w * h];
    let mut queue = VecDeque::new();
    let seed =
        |x: usize, y: usize, reached: &mut Vec<bool>, queue: &mut VecDeque<(usize, usize)>| {
            let i = y * w + x;
            if !mask.get(x, y) && !reached[i] {
                reached[i] = true;
                queue.push_back((x, y));
            }
        };
    for x in 0..w {
        seed(x, 0, &mut reached, &mut queue);
        seed(x, h - 1, &mut reached, &mut queue);
    }
    for y in 0..h {
        seed(0, y, &mut reached, &mut queue);
        seed(w - 1, y, &mut reached, &mut queue);
    }
    while let Some((x, y)) = queue.pop_front() {
        if x > 0 {
            seed(x - 1, y, &mut reached, &mut queue);
        }
        if x + 1 < w {
            seed(x + 1, y, &mut reached, &mut queue);
        }
        if y > 0 {
            seed(x, y - 1, &mut reached, &mut queue);
        }
        if y + 1 < h {
            seed(x, y + 1, &mut reached, &mut queue);
        }
    }
    let bits = reached.iter().map(|&r| !r).collect();
    BinaryMask::from_vec(w, h, bits).expect("same dims")
}

/// Median filter on a binary mask: a majority vote under the edge-replicated
/// footprint, equal to the grayscale lower median of the 0/255 rendering.
pub fn binary_median(mask: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    let (w, h) = mask.dims();
    let offsets = se.offsets();
    let n = offsets.len();
    // lower median is foreground iff background count <= (n - 1) / 2
    let max_bg = (n - 1) / 2;
    let mut out = mask.blank_like();
    for y in 0..h as isize {
        for x in 0..w as isize {
            let mut bg = 0usize;
            for &(dx, dy) in offsets {
                let xx = (x + dx).clamp(0, w as isize - 1) as usize;
                let yy = (y + dy).clamp(0, h as isize - 1) as usize;
                if !mask.get(xx, yy) {
                    bg += 1;
                    if bg > max_bg {
                        break;
                    }
                }
            }
            if bg <= max_bg {
                out.set(x as usize, y as usize, true);
            }
        }
    }
    out
}

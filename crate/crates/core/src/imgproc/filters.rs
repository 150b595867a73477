//! Grayscale neighborhood filters. Borders use edge replication throughout.

use crate::error::{MeiboError, Result};
use crate::imgproc::se::StructuringElement;
use crate::raster::GrayImage;

fn check_kernel(size: usize) -> Result<()> {
    if size < 3 || size % 2 == 0 {
        return Err(MeiboError::InvalidKernelSize(size));
    }
    Ok(())
}

/// Sum over the `size x size` window centered on every pixel, edge-replicated.
pub(crate) fn box_sum(img: &GrayImage, size: usize) -> Vec<u32> {
    let (w, h) = img.dims();
    let r = (size / 2) as isize;
    let mut prefix = vec![0u32; w + 2 * r as usize + 1];

    let mut rows = vec![0u32; w * h];
    for y in 0..h {
        for (k, p) in (-r..w as isize + r).enumerate() {
            prefix[k + 1] = prefix[k] + img.get_clamped(p, y as isize) as u32;
        }
        for x in 0..w {
            rows[y * w + x] = prefix[x + size] - prefix[x];
        }
    }

    let mut out = vec![0u32; w * h];
    let mut col_prefix = vec![0u32; h + 2 * r as usize + 1];
    for x in 0..w {
        for (k, p) in (-r..h as isize + r).enumerate() {
            let yy = p.clamp(0, h as isize - 1) as usize;
            col_prefix[k + 1] = col_prefix[k] + rows[yy * w + x];
        }
        for y in 0..h {
            out[y * w + x] = col_prefix[y + size] - col_prefix[y];
        }
    }
    out
}

/// Gradient magnitude `|Gx| + |Gy|` from the 3x3 Prewitt kernels, clamped to 255.
pub fn prewitt(img: &GrayImage) -> Result<GrayImage> {
    let (w, h) = img.dims();
    if w < 3 || h < 3 {
        return Err(MeiboError::ImageTooSmall {
            width: w,
            height: h,
            min_width: 3,
            min_height: 3,
        });
    }
    GrayImage::from_fn(w, h, |x, y| {
        let (x, y) = (x as isize, y as isize);
        let p = |dx: isize, dy: isize| img.get_clamped(x + dx, y + dy) as i32;
        let gx = (p(1, -1) + p(1, 0) + p(1, 1)) - (p(-1, -1) + p(-1, 0) + p(-1, 1));
        let gy = (p(-1, 1) + p(0, 1) + p(1, 1)) - (p(-1, -1) + p(0, -1) + p(1, -1));
        (gx.abs() + gy.abs()).min(255) as u8
    })
}

/// Median of the intensities under the footprint; even counts take the lower median.
pub fn median_filter(img: &GrayImage, se: &StructuringElement) -> GrayImage {
    let (w, h) = img.dims();
    let offsets = se.offsets();
    let mid = (offsets.len() - 1) / 2;
    let mut buf = Vec::with_capacity(offsets.len());
    let mut out = img.clone();
    for y in 0..h {
        for x in 0..w {
            buf.clear();
            buf.extend(
                offsets
                    .iter()
                    .map(|&(dx, dy)| img.get_clamped(x as isize + dx, y as isize + dy)),
            );
            let (_, m, _) = buf.select_nth_unstable(mid);
            out.set(x, y, *m);
        }
    }
    out
}

/// Rounded `num / den` for a positive denominator.
#[inline]
fn round_div(num: i64, den: i64) -> i64 {
    if num >= 0 {
        (num + den / 2) / den
    } else {
        -((-num + den / 2) / den)
    }
}

/// High-boost detail enhancement: `img + gain * (img - boxblur(img, size))` with gain 1.
pub fn highlight_details(img: &GrayImage, size: usize) -> Result<GrayImage> {
    check_kernel(size)?;
    let n = (size * size) as i64;
    let sums = box_sum(img, size);
    let data = img
        .data()
        .iter()
        .zip(&sums)
        .map(|(&v, &s)| round_div(2 * v as i64 * n - s as i64, n).clamp(0, 255) as u8)
        .collect();
    GrayImage::from_vec(img.width(), img.height(), data)
}

/// Identity plus a `size x size` Laplacian (every tap -1, center `size^2 - 1`), clamped.
pub fn laplacian_sharpen(img: &GrayImage, size: usize) -> Result<GrayImage> {
    check_kernel(size)?;
    let n = (size * size) as i64;
    let sums = box_sum(img, size);
    let data = img
        .data()
        .iter()
        .zip(&sums)
        .map(|(&v, &s)| (v as i64 + n * v as i64 - s as i64).clamp(0, 255) as u8)
        .collect();
    GrayImage::from_vec(img.width(), img.height(), data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lcg_image(w: usize, h: usize, seed: u64) -> GrayImage {
        let mut s = seed;
        GrayImage::from_fn(w, h, |_, _| {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (s >> 56) as u8
        })
        .unwrap()
    }

    #[test]
    fn box_sum_matches_direct_window() {
        let img = lcg_image(13, 9, 7);
        let sums = box_sum(&img, 5);
        for y in 0..9 {
            for x in 0..13 {
                let mut s = 0u32;
                for dy in -2..=2 {
                    for dx in -2..=2 {
                        s += img.get_clamped(x as isize + dx, y as isize + dy) as u32;
                    }
                }
                assert_eq!(sums[y * 13 + x], s);
            }
        }
    }

    #[test]
    fn prewitt_flat_is_zero_and_step_hits_flanking_columns() {
        let flat = GrayImage::filled(8, 8, 128).unwrap();
        assert!(prewitt(&flat).unwrap().data().iter().all(|&v| v == 0));

        let step = GrayImage::from_fn(16, 6, |x, _| if x < 8 { 0 } else { 255 }).unwrap();
        let g = prewitt(&step).unwrap();
        for y in 0..6 {
            for x in 0..16 {
                let expected = if x == 7 || x == 8 { 255 } else { 0 };
                assert_eq!(g.get(x, y), expected, "({x},{y})");
            }
        }
    }

    #[test]
    fn prewitt_rejects_tiny_images() {
        let img = GrayImage::filled(2, 5, 0).unwrap();
        assert!(matches!(
            prewitt(&img),
            Err(MeiboError::ImageTooSmall { .. })
        ));
    }

    #[test]
    fn median_removes_isolated_outlier() {
        let mut img = GrayImage::filled(9, 9, 100).unwrap();
        img.set(4, 4, 255);
        let out = median_filter(&img, &StructuringElement::disk(3));
        assert!(out.data().iter().all(|&v| v == 100));
    }

    #[test]
    fn median_even_footprint_takes_lower_middle() {
        let img = GrayImage::from_fn(2, 1, |x, _| if x == 0 { 10 } else { 20 }).unwrap();
        let out = median_filter(&img, &StructuringElement::rect(2, 1));
        // footprint at x=0 covers {10, 20}; lower median is 10
        assert_eq!(out.get(0, 0), 10);
    }

    #[test]
    fn highlight_details_step_overshoots() {
        let img = GrayImage::from_fn(40, 3, |x, _| if x < 20 { 60 } else { 120 }).unwrap();
        let out = highlight_details(&img, 5).unwrap();
        // left of the edge, box mean is above 60 -> undershoot; right of edge, overshoot
        assert!(out.get(19, 1) < 60);
        assert!(out.get(20, 1) > 120);
        // x=19, 3x5 blur window holds 3 columns at 60 and 2 at 120 -> mean 84, out = 2*60-84 = 36
        assert_eq!(out.get(19, 1), 36);
        assert_eq!(out.get(5, 1), 60);
    }

    #[test]
    fn laplacian_single_bright_pixel() {
        let mut img = GrayImage::filled(5, 5, 0).unwrap();
        img.set(2, 2, 10);
        let out = laplacian_sharpen(&img, 3).unwrap();
        assert_eq!(out.get(2, 2), 90);
        for (x, y) in [(1, 1), (2, 1), (3, 3), (1, 2)] {
            assert_eq!(out.get(x, y), 0);
        }
    }

    #[test]
    fn kernel_size_validation() {
        let img = GrayImage::filled(5, 5, 0).unwrap();
        assert!(matches!(
            highlight_details(&img, 4),
            Err(MeiboError::InvalidKernelSize(4))
        ));
        assert!(matches!(
            laplacian_sharpen(&img, 1),
            Err(MeiboError::InvalidKernelSize(1))
        ));
    }

    #[test]
    fn flat_images_pass_through() {
        let img = GrayImage::filled(30, 30, 77).unwrap();
        assert_eq!(highlight_details(&img, 25).unwrap(), img);
        assert_eq!(laplacian_sharpen(&img, 29).unwrap(), img);
        assert_eq!(median_filter(&img, &StructuringElement::disk(5)), img);
    }
}

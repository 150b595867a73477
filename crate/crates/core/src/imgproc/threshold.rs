//! Global binarization.

use crate::error::{MeiboError, Result};
use crate::raster::{BinaryMask, GrayImage};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThresholdMethod {
    Otsu,
    Fixed(u8),
}

pub fn histogram(img: &GrayImage) -> [u64; 256] {
    let mut hist = [0u64; 256];
    for &v in img.data() {
        hist[v as usize] += 1;
    }
    hist
}

/// Otsu level: class 0 holds values `<= t`, class 1 values `> t`.
///
/// Between-class variance only changes at occupied bins, so the maximum is a
/// plateau running from the largest class-0 value up to one below the smallest
/// class-1 value; the midpoint of the first maximal plateau is returned.
pub fn otsu_level(hist: &[u64; 256]) -> Result<u8> {
    let total: u64 = hist.iter().sum();
    let total_sum: u64 = hist.iter().enumerate().map(|(v, &c)| v as u64 * c).sum();
    let occupied = hist.iter().filter(|&&c| c > 0).count();
    if occupied < 2 {
        return Err(MeiboError::DegenerateHistogram);
    }

    let mut best = f64::NEG_INFINITY;
    let mut best_t = 0usize;
    let mut n0 = 0u64;
    let mut s0 = 0u64;
    for t in 0..255 {
        n0 += hist[t];
        s0 += t as u64 * hist[t];
        let n1 = total - n0;
        if n0 == 0 || n1 == 0 {
            continue;
        }
        let s1 = total_sum - s0;
        // N^2 * sigma_b^2 = (n1*s0 - n0*s1)^2 / (n0*n1)
        let diff = n1 as f64 * s0 as f64 - n0 as f64 * s1 as f64;
        let var = diff * diff / (n0 as f64 * n1 as f64);
        if var > best {
            best = var;
            best_t = t;
        }
    }

    // best_t is the largest class-0 value; extend through the empty bins above it
    let mut hi = best_t;
    while hi + 1 < 255 && hist[hi + 1] == 0 {
        hi += 1;
    }
    Ok(((best_t + hi) / 2) as u8)
}

/// Binarize with foreground = pixels strictly above the level.
pub fn threshold_at(img: &GrayImage, level: u8) -> BinaryMask {
    BinaryMask::from_vec(
        img.width(),
        img.height(),
        img.data().iter().map(|&v| v > level).collect(),
    )
    .expect("dimensions come from a valid image")
}

/// Binarization that reports a degenerate Otsu histogram as an error.
pub fn try_threshold(img: &GrayImage, method: ThresholdMethod) -> Result<BinaryMask> {
    let level = match method {
        ThresholdMethod::Fixed(l) => l,
        ThresholdMethod::Otsu => otsu_level(&histogram(img))?,
    };
    Ok(threshold_at(img, level))
}

/// Binarization; a constant image under Otsu yields an all-background mask and a warning.
pub fn threshold(img: &GrayImage, method: ThresholdMethod) -> BinaryMask {
    match try_threshold(img, method) {
        Ok(m) => m,
        Err(_) => {
            log::warn!("Otsu threshold on a constant image, returning an empty mask");
            BinaryMask::empty(img.width(), img.height()).expect("valid dimensions")
        }
    }
}

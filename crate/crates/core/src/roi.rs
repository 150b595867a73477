//! Tarsal-conjunctiva region of interest.
//!
//! The eyelid is found as the union of dark inter-gland blocks that survive
//! enhancement, inversion and cleaning. Their hull is reduced to one block whose
//! upper and lower edges are fitted with quadratic B-splines; the region between
//! the two curves is the ROI.

use crate::error::{MeiboError, Result};
use crate::imgproc::bspline::{fit_bspline, BSplineCurve};
use crate::imgproc::{
    convex_hull_components, dilate, erode, gradient_out, highlight_details, invert, keep_largest,
    laplacian_sharpen, median_filter, prewitt, reject_border, remove_small, subtract,
    subtract_gray, threshold, StructuringElement, ThresholdMethod,
};
use crate::raster::{BinaryMask, GrayImage};

pub const MIN_ROI_WIDTH: usize = 64;
pub const MIN_ROI_HEIGHT: usize = 64;

/// Tunable sizes of the ROI pipeline. `Default` gives the reference values.
#[derive(Clone, Debug, PartialEq)]
pub struct RoiParams {
    /// Disk diameter dilating the thresholded edge map into the reflection mask.
    pub reflection_dilate: usize,
    /// Disk diameter of the denoising median.
    pub median_diameter: usize,
    pub highlight_size: usize,
    pub laplacian_size: usize,
    /// Side of the square used to open the inverted binary image.
    pub clean_rect: usize,
    /// Blocks below this many pixels are dropped after the opening erosion.
    pub min_block_area: usize,
    /// Disk diameter of the outer gradient that links neighbouring blocks.
    pub connect_diameter: usize,
    /// Disk diameter of the erosion that detaches lumps from the hull.
    pub fit_diameter: usize,
    /// Smallest accepted eyelid block as a fraction of the image area.
    pub min_area_fraction: f64,
    pub spline_degree: usize,
}

impl Default for RoiParams {
    fn default() -> Self {
        Self {
            reflection_dilate: 5,
            median_diameter: 3,
            highlight_size: 25,
            laplacian_size: 29,
            clean_rect: 5,
            min_block_area: 190,
            connect_diameter: 8,
            fit_diameter: 11,
            min_area_fraction: 0.05,
            spline_degree: 2,
        }
    }
}

/// Segmented ROI and its fitted boundaries.
#[derive(Clone, Debug)]
pub struct RoiResult {
    pub roi_mask: BinaryMask,
    pub upper_boundary: BSplineCurve,
    pub lower_boundary: BSplineCurve,
    pub area: usize,
}

/// Intermediate rasters of one ROI run in pipeline order, all at input size.
/// A failed run keeps the stages reached before the failure.
#[derive(Clone, Debug, Default)]
pub struct RoiTrace {
    stages: Vec<(&'static str, GrayImage)>,
}

impl RoiTrace {
    pub fn stages(&self) -> &[(&'static str, GrayImage)] {
        &self.stages
    }

    pub fn get(&self, name: &str) -> Option<&GrayImage> {
        self.stages
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, img)| img)
    }
}

fn record(trace: &mut Option<&mut RoiTrace>, name: &'static str, img: impl FnOnce() -> GrayImage) {
    if let Some(t) = trace.as_deref_mut() {
        t.stages.push((name, img()));
    }
}

/// Mask of eyelashes and specular highlights: strong edges, thresholded and dilated.
pub fn build_reflection_mask(img: &GrayImage) -> Result<BinaryMask> {
    build_reflection_mask_with(img, RoiParams::default().reflection_dilate)
}

fn build_reflection_mask_with(img: &GrayImage, dilate_diameter: usize) -> Result<BinaryMask> {
    let edges = prewitt(img)?;
    let strong = threshold(&edges, ThresholdMethod::Otsu);
    Ok(dilate(&strong, &StructuringElement::disk(dilate_diameter)))
}

/// Median, high-boost and Laplacian sharpening shared with gland segmentation.
pub(crate) fn enhance(
    img: &GrayImage,
    median: usize,
    highlight: usize,
    laplacian: usize,
) -> Result<GrayImage> {
    let med = median_filter(img, &StructuringElement::disk(median));
    let hd = highlight_details(&med, highlight)?;
    laplacian_sharpen(&hd, laplacian)
}

pub fn segment_roi(img: &GrayImage, params: &RoiParams) -> Result<RoiResult> {
    run(img, params, None)
}

/// Like [`segment_roi`], recording every intermediate raster into `trace`.
pub fn segment_roi_traced(
    img: &GrayImage,
    params: &RoiParams,
    trace: &mut RoiTrace,
) -> Result<RoiResult> {
    trace.stages.clear();
    run(img, params, Some(trace))
}

fn run(img: &GrayImage, params: &RoiParams, mut trace: Option<&mut RoiTrace>) -> Result<RoiResult> {
    let (w, h) = img.dims();
    if w < MIN_ROI_WIDTH || h < MIN_ROI_HEIGHT {
        return Err(MeiboError::ImageTooSmall {
            width: w,
            height: h,
            min_width: MIN_ROI_WIDTH,
            min_height: MIN_ROI_HEIGHT,
        });
    }

    let reflection_mask = build_reflection_mask_with(img, params.reflection_dilate)?;
    let masked_gray = subtract_gray(img, &reflection_mask)?;
    let enhanced = enhance(
        &masked_gray,
        params.median_diameter,
        params.highlight_size,
        params.laplacian_size,
    )?;
    let inverted_binary = invert(&threshold(&enhanced, ThresholdMethod::Otsu));
    let inverted_masked = subtract(&inverted_binary, &reflection_mask)?;
    record(&mut trace, "reflection_mask", || reflection_mask.to_gray());
    record(&mut trace, "masked_gray", || masked_gray.clone());
    record(&mut trace, "enhanced", || enhanced.clone());
    record(&mut trace, "inverted_binary", || inverted_binary.to_gray());
    record(&mut trace, "inverted_masked", || inverted_masked.to_gray());

    let rect = StructuringElement::rect(params.clean_rect, params.clean_rect);
    let opened = erode(&inverted_masked, &rect);
    let opened = dilate(&remove_small(&opened, params.min_block_area), &rect);
    let cleaned_blocks = reject_border(&opened);
    record(&mut trace, "cleaned_blocks", || cleaned_blocks.to_gray());
    if cleaned_blocks.is_empty() {
        return Err(MeiboError::NoEyelidDetected(
            "no interior blocks after cleaning",
        ));
    }

    let ring = gradient_out(
        &cleaned_blocks,
        &StructuringElement::disk(params.connect_diameter),
    );
    let hull = convex_hull_components(&ring);
    record(&mut trace, "hull", || hull.to_gray());

    let fit_se = StructuringElement::disk(params.fit_diameter);
    let fitted_block = dilate(&keep_largest(&erode(&hull, &fit_se)), &fit_se);
    record(&mut trace, "fitted_block", || fitted_block.to_gray());
    if (fitted_block.count() as f64) < params.min_area_fraction * (w * h) as f64 {
        return Err(MeiboError::NoEyelidDetected(
            "largest block is below the area floor",
        ));
    }

    roi_from_block(&fitted_block, params.spline_degree)
}

/// First foreground row of each column scanned top-down and bottom-up.
fn column_edges(block: &BinaryMask) -> (Vec<[f64; 2]>, Vec<[f64; 2]>) {
    let (w, h) = block.dims();
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for x in 0..w {
        if let Some(y) = (0..h).find(|&y| block.get(x, y)) {
            upper.push([x as f64, y as f64]);
        }
        if let Some(y) = (0..h).rev().find(|&y| block.get(x, y)) {
            lower.push([x as f64, y as f64]);
        }
    }
    (upper, lower)
}

/// Fits boundary curves to a block and fills the region between them.
pub fn roi_from_block(block: &BinaryMask, degree: usize) -> Result<RoiResult> {
    let (upper_pts, lower_pts) = column_edges(block);
    if upper_pts.len() <= degree {
        return Err(MeiboError::NoEyelidDetected("too few boundary columns"));
    }
    let upper = fit_bspline(&upper_pts, degree)?;
    let lower = fit_bspline(&lower_pts, degree)?;

    let x_first = upper_pts[0][0] as usize;
    let x_last = upper_pts[upper_pts.len() - 1][0] as usize;
    let dense = 8 * (x_last - x_first + 1);
    let top = column_profile(&upper.sample(dense), x_first, x_last, f64::min);
    let bottom = column_profile(&lower.sample(dense), x_first, x_last, f64::max);

    let (w, h) = block.dims();
    let mut mask = block.blank_like();
    for (i, x) in (x_first..=x_last).enumerate() {
        let (Some(a), Some(b)) = (top[i], bottom[i]) else {
            continue;
        };
        let y0 = (a - 1e-9).ceil().max(0.0) as usize;
        let y1 = ((b + 1e-9).floor() as isize).min(h as isize - 1);
        if y1 < 0 {
            continue;
        }
        for y in y0..=y1 as usize {
            mask.set(x, y, true);
        }
    }
    debug_assert!(x_last < w);
    let roi_mask = keep_largest(&mask);
    let area = roi_mask.count();
    if area == 0 {
        return Err(MeiboError::EmptyRoi);
    }
    Ok(RoiResult {
        roi_mask,
        upper_boundary: upper,
        lower_boundary: lower,
        area,
    })
}

/// `y` of a sampled curve at each integer column, combining multiple crossings with `pick`.
/// Columns outside the curve's x-range are clamped to the nearest end.
fn column_profile(
    poly: &[[f64; 2]],
    x_first: usize,
    x_last: usize,
    pick: fn(f64, f64) -> f64,
) -> Vec<Option<f64>> {
    let mut out: Vec<Option<f64>> = vec![None; x_last - x_first + 1];
    let mut merge = |x: usize, y: f64| {
        if (x_first..=x_last).contains(&x) {
            let slot = &mut out[x - x_first];
            *slot = Some(slot.map_or(y, |v| pick(v, y)));
        }
    };
    for seg in poly.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let (lo, hi) = if a[0] <= b[0] { (a, b) } else { (b, a) };
        let c0 = lo[0].ceil().max(x_first as f64);
        let c1 = hi[0].floor().min(x_last as f64);
        let mut c = c0;
        while c <= c1 {
            let t = if hi[0] > lo[0] {
                (c - lo[0]) / (hi[0] - lo[0])
            } else {
                0.0
            };
            merge(c as usize, lo[1] + t * (hi[1] - lo[1]));
            c += 1.0;
        }
    }
    // clamped ends can stop a fraction short of the outer columns
    let first = out.iter().position(Option::is_some);
    let last = out.iter().rposition(Option::is_some);
    if let (Some(f), Some(l)) = (first, last) {
        let (fy, ly) = (out[f], out[l]);
        out[..f].iter_mut().for_each(|v| *v = fy);
        out[l + 1..].iter_mut().for_each(|v| *v = ly);
    }
    out
}

//! Raster primitives shared by every pipeline stage: filters, thresholding,
//! binary morphology, component analysis, thinning, convex hull and curve fitting.

pub mod bspline;
pub mod components;
pub mod filters;
pub mod hull;
pub mod morphology;
pub mod se;
pub mod skeleton;
pub mod threshold;

pub use bspline::{fit_bspline, fit_bspline_with, BSplineCurve};
pub use components::{
    keep_largest, label_components, reject_border, remove_small, BBox, ComponentSet,
    ComponentStats, Connectivity,
};
pub use filters::{highlight_details, laplacian_sharpen, median_filter, prewitt};
pub use hull::{convex_hull, convex_hull_components};
pub use morphology::{
    binary_median, dilate, erode, fill_holes, gradient_in, gradient_out, invert, multiply_gray,
    subtract, subtract_gray,
};
pub use se::{SeShape, StructuringElement};
pub use skeleton::skeletonize;
pub use threshold::{otsu_level, threshold, try_threshold, ThresholdMethod};

//! Gland geometry (length, width, deformation, tortuosity) and image-level
//! area ratio and signal index.

pub mod centerline;
pub mod profile;

pub use centerline::{extract_centerline, moving_average, Centerline};
pub use profile::{
    mean_abs_curvature, sample_grid, width_profile, wrap_angle, Sample, WidthProfile,
};

use crate::error::{MeiboError, Result};
use crate::glands::{extract_glands_with, segment_gland_signal, Gland, GlandParams, GlandSet};
use crate::raster::{BinaryMask, GrayImage};
use crate::roi::{segment_roi, segment_roi_traced, RoiParams, RoiResult, RoiTrace};

/// Millimetres per pixel.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Resolution(f64);

impl Resolution {
    pub const DEFAULT: Resolution = Resolution(0.03);

    pub fn new(mm_per_px: f64) -> Result<Self> {
        if mm_per_px.is_finite() && mm_per_px > 0.0 {
            Ok(Self(mm_per_px))
        } else {
            Err(MeiboError::InvalidParameter(format!(
                "resolution must be positive, got {mm_per_px}"
            )))
        }
    }

    pub fn mm_per_px(self) -> f64 {
        self.0
    }
}

impl Default for Resolution {
    fn default() -> Self {
        Self::DEFAULT
    }
}

pub fn gland_length(c: &Centerline, r: Resolution) -> f64 {
    r.0 * c.arc_length()
}

pub fn gland_width(w: &WidthProfile, r: Resolution) -> f64 {
    r.0 * w.mean()
}

/// Population standard deviation of the widths in millimetres.
pub fn deformation_index(w: &WidthProfile, r: Resolution) -> f64 {
    r.0 * w.sd()
}

/// Arc-to-chord ratio times the mean absolute curvature in mm^-1.
pub fn tortuosity_index(c: &Centerline, r: Resolution) -> Result<f64> {
    tortuosity_from_samples(c, &sample_grid(c, profile::SAMPLE_SPACING), r)
}

fn tortuosity_from_samples(c: &Centerline, samples: &[Sample], r: Resolution) -> Result<f64> {
    if c.chord() <= 0.0 {
        return Err(MeiboError::DegenerateChord);
    }
    Ok(c.arc_length() / c.chord() * mean_abs_curvature(samples)? / r.0)
}

/// Percentage of ROI pixels carrying gland signal.
pub fn area_ratio(gland_signal: &BinaryMask, roi: &RoiResult) -> Result<f64> {
    if roi.area == 0 {
        return Err(MeiboError::EmptyRoi);
    }
    let n = gland_signal.intersection_count(&roi.roi_mask)?;
    Ok(100.0 * n as f64 / roi.area as f64)
}

/// `log10` of mean gland intensity over mean non-gland ROI intensity.
pub fn signal_index(img: &GrayImage, gs: &GlandSet, roi: &RoiResult) -> Result<f64> {
    signal_index_of_masks(img, &gs.union(), &gs.gland_signal, &roi.roi_mask)
}

/// Same ratio from raw masks: labeled glands, all gland signal, ROI.
pub fn signal_index_of_masks(
    img: &GrayImage,
    glands: &BinaryMask,
    gland_signal: &BinaryMask,
    roi_mask: &BinaryMask,
) -> Result<f64> {
    let grey_i = img.mean_under(glands).ok_or(MeiboError::NoGlands)?;
    let background = roi_mask.and_not(gland_signal)?;
    let grey_0 = img.mean_under(&background).ok_or(MeiboError::EmptyRoi)?;
    if grey_0 == 0.0 {
        return Err(MeiboError::ZeroBackground);
    }
    Ok((grey_i / grey_0).log10())
}

/// Per-gland conditions recorded in reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GlandFlag {
    Fragmented,
    DegenerateGland,
    NoValidSamples,
    DegenerateChord,
    TooFewSamples,
}

impl GlandFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            GlandFlag::Fragmented => "fragmented",
            GlandFlag::DegenerateGland => "degenerate_gland",
            GlandFlag::NoValidSamples => "no_valid_samples",
            GlandFlag::DegenerateChord => "degenerate_chord",
            GlandFlag::TooFewSamples => "too_few_samples",
        }
    }
}

/// Geometry of one gland. Missing values are excluded from aggregates.
#[derive(Clone, Debug, PartialEq)]
pub struct GlandMetrics {
    pub label: u32,
    pub area_px: usize,
    pub length_mm: Option<f64>,
    pub width_mm: Option<f64>,
    pub deformation_mm: Option<f64>,
    pub tortuosity: Option<f64>,
    /// Arc-to-chord factor of the tortuosity, dimensionless.
    pub arc_chord_ratio: Option<f64>,
    pub flags: Vec<GlandFlag>,
}

/// Measures one gland mask.
pub fn measure_gland(label: u32, mask: &BinaryMask, r: Resolution) -> GlandMetrics {
    let mut m = GlandMetrics {
        label,
        area_px: mask.count(),
        length_mm: None,
        width_mm: None,
        deformation_mm: None,
        tortuosity: None,
        arc_chord_ratio: None,
        flags: Vec::new(),
    };
    let c = match extract_centerline(mask) {
        Ok(c) => c,
        Err(_) => {
            m.flags.push(GlandFlag::DegenerateGland);
            return m;
        }
    };
    m.length_mm = Some(gland_length(&profile::restore_ends(mask, &c), r));
    match width_profile(mask, &c) {
        Ok(w) => {
            m.width_mm = Some(gland_width(&w, r));
            m.deformation_mm = Some(deformation_index(&w, r));
        }
        Err(_) => m.flags.push(GlandFlag::NoValidSamples),
    }
    // turning angles come from the chord midline; length and chord stay on the skeleton path
    let midline = profile::chord_midline(mask, &c, 1.0);
    let samples = sample_grid(midline.as_ref().unwrap_or(&c), profile::SAMPLE_SPACING);
    match tortuosity_from_samples(&c, &samples, r) {
        Ok(ti) => {
            m.tortuosity = Some(ti);
            m.arc_chord_ratio = Some(c.arc_length() / c.chord());
        }
        Err(MeiboError::DegenerateChord) => m.flags.push(GlandFlag::DegenerateChord),
        Err(_) => m.flags.push(GlandFlag::TooFewSamples),
    }
    m
}

/// Mean and population standard deviation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanSd {
    pub mean: f64,
    pub sd: f64,
}

impl MeanSd {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Option<Self> {
        let v: Vec<f64> = values.into_iter().collect();
        if v.is_empty() {
            return None;
        }
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
        Some(Self { mean, sd })
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Aggregates {
    pub length: Option<MeanSd>,
    pub width: Option<MeanSd>,
    pub deformation: Option<MeanSd>,
    pub tortuosity: Option<MeanSd>,
}

impl Aggregates {
    pub fn from_glands(glands: &[GlandMetrics]) -> Self {
        Self {
            length: MeanSd::of(glands.iter().filter_map(|g| g.length_mm)),
            width: MeanSd::of(glands.iter().filter_map(|g| g.width_mm)),
            deformation: MeanSd::of(glands.iter().filter_map(|g| g.deformation_mm)),
            tortuosity: MeanSd::of(glands.iter().filter_map(|g| g.tortuosity)),
        }
    }
}

/// Everything measured on one image.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageReport {
    pub resolution: Resolution,
    pub roi_area_px: usize,
    pub ga_percent: f64,
    pub si: Option<f64>,
    pub glands: Vec<GlandMetrics>,
    pub aggregates: Aggregates,
    /// Non-fatal problems, as error codes.
    pub errors: Vec<String>,
}

impl ImageReport {
    pub fn si_scaled(&self) -> Option<f64> {
        self.si.map(|s| 100.0 * s)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AnalysisParams {
    pub resolution: Resolution,
    pub roi: RoiParams,
    pub glands: GlandParams,
}

/// Report plus the intermediate segmentations it was computed from.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub report: ImageReport,
    pub roi: RoiResult,
    pub glands: GlandSet,
}

pub fn analyze(img: &GrayImage, r: Resolution) -> Result<ImageReport> {
    let params = AnalysisParams {
        resolution: r,
        ..AnalysisParams::default()
    };
    analyze_detailed(img, &params).map(|a| a.report)
}

pub fn analyze_detailed(img: &GrayImage, params: &AnalysisParams) -> Result<Analysis> {
    finish(img, params, segment_roi(img, &params.roi)?)
}

/// Like [`analyze_detailed`], recording the ROI stages into `trace` even when segmentation fails.
pub fn analyze_traced(
    img: &GrayImage,
    params: &AnalysisParams,
    trace: &mut RoiTrace,
) -> Result<Analysis> {
    finish(img, params, segment_roi_traced(img, &params.roi, trace)?)
}

fn finish(img: &GrayImage, params: &AnalysisParams, roi: RoiResult) -> Result<Analysis> {
    let signal = segment_gland_signal(img, &roi, &params.glands)?;
    let glands = extract_glands_with(&signal, &params.glands);
    let report = report_from_segmentation(img, &roi, &glands, params.resolution)?;
    Ok(Analysis {
        report,
        roi,
        glands,
    })
}

/// Metrics for a given ROI and gland set.
pub fn report_from_segmentation(
    img: &GrayImage,
    roi: &RoiResult,
    glands: &GlandSet,
    r: Resolution,
) -> Result<ImageReport> {
    let ga_percent = area_ratio(&glands.gland_signal, roi)?;
    let mut errors = Vec::new();
    let si = match signal_index(img, glands, roi) {
        Ok(v) => Some(v),
        Err(e) => {
            errors.push(e.code().to_string());
            None
        }
    };
    let metrics: Vec<GlandMetrics> = glands.glands.iter().map(|g| gland_metrics(g, r)).collect();
    Ok(ImageReport {
        resolution: r,
        roi_area_px: roi.area,
        ga_percent,
        si,
        aggregates: Aggregates::from_glands(&metrics),
        glands: metrics,
        errors,
    })
}

fn gland_metrics(g: &Gland, r: Resolution) -> GlandMetrics {
    let mut m = measure_gland(g.label, &g.mask, r);
    if g.fragmented {
        m.flags.insert(0, GlandFlag::Fragmented);
    }
    m
}

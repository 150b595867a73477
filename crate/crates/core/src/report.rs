//! Versioned JSON and CSV renderings of image reports.
//!
//! Numbers are written with four decimals so that identical inputs give
//! byte-identical files. Missing and non-finite values become `null`.

use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::error::{MeiboError, Result};
use crate::evalseg::SegScore;
use crate::metrics::{GlandMetrics, ImageReport, MeanSd};
use crate::phantom::PhantomTruth;

pub const SCHEMA_VERSION: u32 = 1;

/// A number serialized with exactly four decimals, or `null`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Fixed4(pub Option<f64>);

impl Fixed4 {
    pub fn text(self) -> Option<String> {
        let v = self.0.filter(|v| v.is_finite())?;
        let s = format!("{v:.4}");
        // -0.0000 and 0.0000 must not differ between runs that round differently
        Some(if s == "-0.0000" {
            "0.0000".to_string()
        } else {
            s
        })
    }
}

impl From<f64> for Fixed4 {
    fn from(v: f64) -> Self {
        Fixed4(Some(v))
    }
}

impl From<Option<f64>> for Fixed4 {
    fn from(v: Option<f64>) -> Self {
        Fixed4(v)
    }
}

impl Serialize for Fixed4 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.text() {
            Some(t) => RawValue::from_string(t)
                .map_err(serde::ser::Error::custom)?
                .serialize(s),
            None => s.serialize_none(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RoiRecord {
    pub area_px: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct GlandRecord {
    pub label: u32,
    pub area_px: usize,
    #[serde(rename = "L_mm")]
    pub length_mm: Fixed4,
    #[serde(rename = "D_mm")]
    pub width_mm: Fixed4,
    #[serde(rename = "DI_mm")]
    pub deformation_mm: Fixed4,
    #[serde(rename = "TI")]
    pub tortuosity: Fixed4,
    pub flags: Vec<&'static str>,
}

impl From<&GlandMetrics> for GlandRecord {
    fn from(g: &GlandMetrics) -> Self {
        Self {
            label: g.label,
            area_px: g.area_px,
            length_mm: g.length_mm.into(),
            width_mm: g.width_mm.into(),
            deformation_mm: g.deformation_mm.into(),
            tortuosity: g.tortuosity.into(),
            flags: g.flags.iter().map(|f| f.as_str()).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AggregatesRecord {
    #[serde(rename = "L_mean")]
    pub length_mean: Fixed4,
    #[serde(rename = "L_sd")]
    pub length_sd: Fixed4,
    #[serde(rename = "D_mean")]
    pub width_mean: Fixed4,
    #[serde(rename = "D_sd")]
    pub width_sd: Fixed4,
    #[serde(rename = "DI_mean")]
    pub deformation_mean: Fixed4,
    #[serde(rename = "DI_sd")]
    pub deformation_sd: Fixed4,
    #[serde(rename = "TI_mean")]
    pub tortuosity_mean: Fixed4,
    #[serde(rename = "TI_sd")]
    pub tortuosity_sd: Fixed4,
}

fn split(m: Option<MeanSd>) -> (Fixed4, Fixed4) {
    (Fixed4(m.map(|m| m.mean)), Fixed4(m.map(|m| m.sd)))
}

impl AggregatesRecord {
    fn empty() -> Self {
        let n = Fixed4(None);
        Self {
            length_mean: n,
            length_sd: n,
            width_mean: n,
            width_sd: n,
            deformation_mean: n,
            deformation_sd: n,
            tortuosity_mean: n,
            tortuosity_sd: n,
        }
    }
}

/// One image's report as written to disk.
#[derive(Clone, Debug, Serialize)]
pub struct ReportRecord {
    pub schema_version: u32,
    pub image: String,
    #[serde(rename = "R_mm_per_px")]
    pub resolution: Fixed4,
    pub roi: Option<RoiRecord>,
    #[serde(rename = "GA_percent")]
    pub ga_percent: Fixed4,
    #[serde(rename = "SI")]
    pub si: Fixed4,
    #[serde(rename = "SI_scaled")]
    pub si_scaled: Fixed4,
    pub glands: Vec<GlandRecord>,
    pub aggregates: AggregatesRecord,
    pub errors: Vec<String>,
}

impl ReportRecord {
    pub fn from_report(image: &str, r: &ImageReport) -> Self {
        let a = &r.aggregates;
        let (length_mean, length_sd) = split(a.length);
        let (width_mean, width_sd) = split(a.width);
        let (deformation_mean, deformation_sd) = split(a.deformation);
        let (tortuosity_mean, tortuosity_sd) = split(a.tortuosity);
        Self {
            schema_version: SCHEMA_VERSION,
            image: image.to_string(),
            resolution: r.resolution.mm_per_px().into(),
            roi: Some(RoiRecord {
                area_px: r.roi_area_px,
            }),
            ga_percent: r.ga_percent.into(),
            si: r.si.into(),
            si_scaled: r.si_scaled().into(),
            glands: r.glands.iter().map(GlandRecord::from).collect(),
            aggregates: AggregatesRecord {
                length_mean,
                length_sd,
                width_mean,
                width_sd,
                deformation_mean,
                deformation_sd,
                tortuosity_mean,
                tortuosity_sd,
            },
            errors: r.errors.clone(),
        }
    }

    /// Report for an image whose analysis failed outright.
    pub fn failed(image: &str, mm_per_px: f64, error: &MeiboError) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            image: image.to_string(),
            resolution: mm_per_px.into(),
            roi: None,
            ga_percent: Fixed4(None),
            si: Fixed4(None),
            si_scaled: Fixed4(None),
            glands: Vec::new(),
            aggregates: AggregatesRecord::empty(),
            errors: vec![error.code().to_string()],
        }
    }

    pub fn is_failure(&self) -> bool {
        self.roi.is_none()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Per-gland table; an image without glands contributes no rows.
    pub fn to_csv(&self) -> Result<String> {
        csv_table(std::slice::from_ref(self))
    }
}

const CSV_HEADER: [&str; 8] = [
    "image", "label", "area_px", "L_mm", "D_mm", "DI_mm", "TI", "flags",
];

/// Flattened per-gland rows of several reports under one header.
pub fn csv_table(reports: &[ReportRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| MeiboError::Io(std::io::Error::other(e));
    w.write_record(CSV_HEADER).map_err(io)?;
    let cell = |f: Fixed4| f.text().unwrap_or_default();
    for r in reports {
        for g in &r.glands {
            w.write_record([
                r.image.clone(),
                g.label.to_string(),
                g.area_px.to_string(),
                cell(g.length_mm),
                cell(g.width_mm),
                cell(g.deformation_mm),
                cell(g.tortuosity),
                g.flags.join(";"),
            ])
            .map_err(io)?;
        }
    }
    let bytes = w
        .into_inner()
        .map_err(|e| MeiboError::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Per-image lines and cross-image means for a batch.
#[derive(Clone, Debug, Serialize)]
pub struct BatchSummary {
    pub schema_version: u32,
    pub images: usize,
    pub succeeded: usize,
    pub failed: Vec<FailedImage>,
    #[serde(rename = "GA_percent")]
    pub ga_percent: SummaryStat,
    #[serde(rename = "SI")]
    pub si: SummaryStat,
    #[serde(rename = "L_mean")]
    pub length_mean: SummaryStat,
    #[serde(rename = "D_mean")]
    pub width_mean: SummaryStat,
    #[serde(rename = "DI_mean")]
    pub deformation_mean: SummaryStat,
    #[serde(rename = "TI_mean")]
    pub tortuosity_mean: SummaryStat,
}

#[derive(Clone, Debug, Serialize)]
pub struct FailedImage {
    pub image: String,
    pub errors: Vec<String>,
}

/// Mean and population SD over the images that produced a value.
#[derive(Clone, Debug, Serialize)]
pub struct SummaryStat {
    pub n: usize,
    pub mean: Fixed4,
    pub sd: Fixed4,
}

impl SummaryStat {
    fn of(values: impl Iterator<Item = Option<f64>>) -> Self {
        let v: Vec<f64> = values.flatten().filter(|v| v.is_finite()).collect();
        match MeanSd::of(v.iter().copied()) {
            Some(m) => Self {
                n: v.len(),
                mean: m.mean.into(),
                sd: m.sd.into(),
            },
            None => Self {
                n: 0,
                mean: Fixed4(None),
                sd: Fixed4(None),
            },
        }
    }
}

impl BatchSummary {
    /// Statistics use the rounded values as written, so the summary agrees with the reports.
    pub fn of(reports: &[ReportRecord]) -> Self {
        let ok: Vec<&ReportRecord> = reports.iter().filter(|r| !r.is_failure()).collect();
        let stat = |f: fn(&ReportRecord) -> Fixed4| {
            SummaryStat::of(ok.iter().map(|r| f(r).text().and_then(|t| t.parse().ok())))
        };
        Self {
            schema_version: SCHEMA_VERSION,
            images: reports.len(),
            succeeded: ok.len(),
            failed: reports
                .iter()
                .filter(|r| r.is_failure())
                .map(|r| FailedImage {
                    image: r.image.clone(),
                    errors: r.errors.clone(),
                })
                .collect(),
            ga_percent: stat(|r| r.ga_percent),
            si: stat(|r| r.si),
            length_mean: stat(|r| r.aggregates.length_mean),
            width_mean: stat(|r| r.aggregates.width_mean),
            deformation_mean: stat(|r| r.aggregates.deformation_mean),
            tortuosity_mean: stat(|r| r.aggregates.tortuosity_mean),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes");
        s.push('\n');
        s
    }
}

/// Agreement of one candidate mask with its reference.
#[derive(Clone, Debug, Serialize)]
pub struct ScoreRecord {
    pub schema_version: u32,
    pub k: Fixed4,
    pub r_p: Fixed4,
    pub r_n: Fixed4,
    pub reference_px: usize,
    pub candidate_px: usize,
    pub overlap_px: usize,
}

impl ScoreRecord {
    pub fn of(s: &SegScore) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            k: s.k.into(),
            r_p: s.r_p.into(),
            r_n: s.r_n.into(),
            reference_px: s.reference_px,
            candidate_px: s.candidate_px,
            overlap_px: s.overlap_px,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("score serializes");
        s.push('\n');
        s
    }
}

/// Analytic truth of one gland in a phantom.
#[derive(Clone, Debug, Serialize)]
pub struct TruthGlandRecord {
    pub index: usize,
    pub area_px: usize,
    #[serde(rename = "L_mm")]
    pub length_mm: Fixed4,
    #[serde(rename = "D_mm")]
    pub width_mm: Fixed4,
    #[serde(rename = "DI_mm")]
    pub deformation_mm: Fixed4,
    #[serde(rename = "TI")]
    pub tortuosity: Fixed4,
    pub straight: bool,
}

/// Truth metrics file written next to a phantom image.
#[derive(Clone, Debug, Serialize)]
pub struct TruthRecord {
    pub schema_version: u32,
    #[serde(rename = "R_mm_per_px")]
    pub resolution: Fixed4,
    pub roi_area_px: usize,
    #[serde(rename = "GA_percent")]
    pub ga_percent: Fixed4,
    #[serde(rename = "GA_analytic_percent")]
    pub ga_analytic: Fixed4,
    #[serde(rename = "SI")]
    pub si: Fixed4,
    #[serde(rename = "SI_analytic")]
    pub si_analytic: Fixed4,
    pub glands: Vec<TruthGlandRecord>,
}

impl TruthRecord {
    pub fn of(t: &PhantomTruth) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            resolution: t.resolution.mm_per_px().into(),
            roi_area_px: t.roi.count(),
            ga_percent: t.ga_percent.into(),
            ga_analytic: t.ga_analytic.into(),
            si: t.si.into(),
            si_analytic: t.si_analytic.into(),
            glands: t
                .gland_metrics
                .iter()
                .zip(&t.glands)
                .enumerate()
                .map(|(index, (g, m))| TruthGlandRecord {
                    index,
                    area_px: m.count(),
                    length_mm: g.length_mm.into(),
                    width_mm: g.width_mm.into(),
                    deformation_mm: g.deformation_mm.into(),
                    tortuosity: g.tortuosity.into(),
                    straight: g.straight,
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("truth serializes");
        s.push('\n');
        s
    }
}

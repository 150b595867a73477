use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use meibo::io::{read_gray, render_overlay, write_rgb_png, write_trace};
use meibo::metrics::{analyze_detailed, analyze_traced, AnalysisParams, Resolution};
use meibo::report::{csv_table, BatchSummary, ReportRecord};
use meibo::roi::RoiTrace;

use crate::args::{AnalyzeArgs, Format};

const EXPECTED_DIMS: (usize, usize) = (1088, 512);

/// Runs the batch; `Ok(false)` when at least one image failed.
pub fn run(a: &AnalyzeArgs) -> Result<bool> {
    let resolution = Resolution::new(a.r_mm_per_px)?;
    let params = AnalysisParams {
        resolution,
        ..AnalysisParams::default()
    };
    let inputs = collect_inputs(&a.inputs)?;
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = a.jobs {
        if j == 0 {
            bail!("--jobs must be at least 1");
        }
        pool = pool.num_threads(j);
    }
    let pool = pool.build()?;
    let records: Vec<ReportRecord> = pool.install(|| {
        inputs
            .par_iter()
            .map(|(stem, path)| process(stem, path, a, &params))
            .collect::<Result<_>>()
    })?;

    if a.format == Format::Csv {
        write(&a.out.join("glands.csv"), csv_table(&records)?)?;
    }
    let summary = BatchSummary::of(&records);
    write(&a.out.join("summary.json"), summary.to_json())?;
    for f in &summary.failed {
        log::warn!("{} failed: {}", f.image, f.errors.join(", "));
    }
    Ok(summary.failed.is_empty())
}

/// Analyzes one image and writes its outputs. Only I/O on the output side is fatal.
fn process(
    stem: &str,
    path: &Path,
    a: &AnalyzeArgs,
    params: &AnalysisParams,
) -> Result<ReportRecord> {
    let image = path
        .file_name()
        .map_or_else(|| stem.to_string(), |n| n.to_string_lossy().into_owned());
    let mm = params.resolution.mm_per_px();
    let record = match read_gray(path) {
        Err(e) => ReportRecord::failed(&image, mm, &e),
        Ok(img) => {
            if img.dims() != EXPECTED_DIMS {
                log::warn!(
                    "{image} is {}x{}, expected {}x{}",
                    img.width(),
                    img.height(),
                    EXPECTED_DIMS.0,
                    EXPECTED_DIMS.1
                );
            }
            let outcome = if a.trace {
                let mut trace = RoiTrace::default();
                let r = analyze_traced(&img, params, &mut trace);
                write_trace(&a.out.join(format!("{stem}_trace")), stem, &trace)?;
                r
            } else {
                analyze_detailed(&img, params)
            };
            match outcome {
                Ok(analysis) => {
                    if a.overlay {
                        let rgb = render_overlay(
                            &img,
                            &analysis.roi.roi_mask,
                            analysis.glands.glands.iter().map(|g| &g.mask),
                        );
                        write_rgb_png(&a.out.join(format!("{stem}_overlay.png")), &rgb)?;
                    }
                    ReportRecord::from_report(&image, &analysis.report)
                }
                Err(e) => ReportRecord::failed(&image, mm, &e),
            }
        }
    };
    match a.format {
        Format::Json => write(&a.out.join(format!("{stem}.json")), record.to_json())?,
        Format::Csv => write(&a.out.join(format!("{stem}.csv")), record.to_csv()?)?,
    }
    log::info!(
        "{image}: {}",
        if record.is_failure() { "failed" } else { "ok" }
    );
    Ok(record)
}

/// Expands directories to their PNG/BMP files; returns `(stem, path)` sorted by stem.
fn collect_inputs(inputs: &[PathBuf]) -> Result<Vec<(String, PathBuf)>> {
    let mut files = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(p)
                .with_context(|| format!("reading directory {}", p.display()))?
                .map(|e| e.map(|e| e.path()))
                .collect::<std::io::Result<_>>()?;
            found.retain(|f| f.is_file() && is_image(f));
            files.extend(found);
        } else if p.is_file() {
            files.push(p.clone());
        } else {
            bail!("input not found: {}", p.display());
        }
    }
    let mut by_stem = BTreeMap::new();
    for f in files {
        let stem = f
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .with_context(|| format!("input has no file name: {}", f.display()))?;
        if let Some(prev) = by_stem.insert(stem.clone(), f.clone()) {
            bail!(
                "inputs {} and {} would write the same report {stem}",
                prev.display(),
                f.display()
            );
        }
    }
    if by_stem.is_empty() {
        bail!("no PNG or BMP images among the inputs");
    }
    Ok(by_stem.into_iter().collect())
}

fn is_image(p: &Path) -> bool {
    p.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("png") || e.eq_ignore_ascii_case("bmp"))
}

fn write(path: &Path, text: String) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

//! Image files: 8-bit grayscale input, mask and overlay output.

use std::path::{Path, PathBuf};

use image::{DynamicImage, ImageFormat, Luma, Rgb, RgbImage};

use crate::error::MeiboError;
use crate::error::Result;
use crate::phantom::{PhantomSpec, PhantomTruth};
use crate::raster::{BinaryMask, GrayImage};
use crate::report::TruthRecord;
use crate::roi::RoiTrace;

/// Rec. 601 luma of an 8-bit RGB triple.
pub fn luma601(r: u8, g: u8, b: u8) -> u8 {
    (0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64)
        .round()
        .clamp(0.0, 255.0) as u8
}

fn from_dynamic(img: DynamicImage) -> Result<GrayImage> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let data = match img {
        DynamicImage::ImageLuma8(g) => g.into_raw(),
        DynamicImage::ImageLumaA8(g) => g.pixels().map(|p| p.0[0]).collect(),
        other => other
            .to_rgb8()
            .pixels()
            .map(|p| luma601(p.0[0], p.0[1], p.0[2]))
            .collect(),
    };
    GrayImage::from_vec(w, h, data)
}

/// Reads a PNG or BMP file; color input is reduced to Rec. 601 luma.
pub fn read_gray(path: &Path) -> Result<GrayImage> {
    from_dynamic(
        image::ImageReader::open(path)?
            .with_guessed_format()?
            .decode()?,
    )
}

/// Reads a mask image; nonzero pixels are foreground.
pub fn read_mask(path: &Path) -> Result<BinaryMask> {
    Ok(BinaryMask::from_nonzero(&read_gray(path)?))
}

fn to_luma_buffer(img: &GrayImage) -> image::ImageBuffer<Luma<u8>, Vec<u8>> {
    image::ImageBuffer::from_raw(img.width() as u32, img.height() as u32, img.data().to_vec())
        .expect("buffer matches dimensions")
}

/// Writes an 8-bit grayscale PNG.
pub fn write_gray_png(path: &Path, img: &GrayImage) -> Result<()> {
    to_luma_buffer(img).save_with_format(path, ImageFormat::Png)?;
    Ok(())
}

/// Writes a mask as a 0/255 PNG.
pub fn write_mask_png(path: &Path, mask: &BinaryMask) -> Result<()> {
    write_gray_png(path, &mask.to_gray())
}

pub const ROI_COLOR: [u8; 3] = [255, 220, 0];
pub const GLAND_COLOR: [u8; 3] = [230, 30, 30];

/// Foreground pixels with a 4-neighbour in the background or off the raster.
pub fn contour(mask: &BinaryMask) -> BinaryMask {
    let (w, h) = mask.dims();
    BinaryMask::from_fn(w, h, |x, y| {
        let (xi, yi) = (x as isize, y as isize);
        mask.get(x, y)
            && [(1, 0), (-1, 0), (0, 1), (0, -1)]
                .iter()
                .any(|&(dx, dy)| !mask.get_or_bg(xi + dx, yi + dy))
    })
    .expect("same dims")
}

/// Source image in gray with the ROI boundary and gland contours drawn in color.
pub fn render_overlay<'a>(
    img: &GrayImage,
    roi: &BinaryMask,
    glands: impl IntoIterator<Item = &'a BinaryMask>,
) -> RgbImage {
    let (w, h) = img.dims();
    let mut out = RgbImage::from_fn(w as u32, h as u32, |x, y| {
        let v = img.get(x as usize, y as usize);
        Rgb([v, v, v])
    });
    let mut paint = |m: &BinaryMask, c: [u8; 3]| {
        for (x, y) in contour(m).foreground() {
            out.put_pixel(x as u32, y as u32, Rgb(c));
        }
    };
    paint(roi, ROI_COLOR);
    for g in glands {
        paint(g, GLAND_COLOR);
    }
    out
}

pub fn write_rgb_png(path: &Path, img: &RgbImage) -> Result<()> {
    img.save_with_format(path, ImageFormat::Png)?;
    Ok(())
}

/// Writes each ROI stage as `<stem>_<index>_<stage>.png` into `dir`.
pub fn write_trace(dir: &Path, stem: &str, trace: &RoiTrace) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    trace
        .stages()
        .iter()
        .enumerate()
        .map(|(i, (name, img))| {
            let p = dir.join(format!("{stem}_{:02}_{name}.png", i + 1));
            write_gray_png(&p, img)?;
            Ok(p)
        })
        .collect()
}

/// Gland masks as one 8-bit image holding `index + 1` per gland pixel.
pub fn label_image(masks: &[BinaryMask], w: usize, h: usize) -> Result<GrayImage> {
    if masks.len() > 255 {
        return Err(MeiboError::InvalidParameter(format!(
            "{} glands do not fit an 8-bit label image",
            masks.len()
        )));
    }
    let mut data = vec![0u8; w * h];
    for (i, m) in masks.iter().enumerate() {
        m.ensure_same_dims((w, h))?;
        for (x, y) in m.foreground() {
            data[y * w + x] = (i + 1) as u8;
        }
    }
    GrayImage::from_vec(w, h, data)
}

/// Writes `<stem>_image.png`, `_roi.png`, `_glands.png` (gland signal),
/// `_labels.png` (per-gland index), `_truth.json` and `_spec.toml` into `dir`.
pub fn write_phantom(
    dir: &Path,
    stem: &str,
    spec: &PhantomSpec,
    img: &GrayImage,
    truth: &PhantomTruth,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let path = |suffix: &str| dir.join(format!("{stem}_{suffix}"));
    let (w, h) = img.dims();
    let files = [
        path("image.png"),
        path("roi.png"),
        path("glands.png"),
        path("labels.png"),
        path("truth.json"),
        path("spec.toml"),
    ];
    write_gray_png(&files[0], img)?;
    write_mask_png(&files[1], &truth.roi)?;
    write_mask_png(&files[2], &truth.gland_signal)?;
    write_gray_png(&files[3], &label_image(&truth.glands, w, h)?)?;
    std::fs::write(&files[4], TruthRecord::of(truth).to_json())?;
    std::fs::write(&files[5], spec.to_toml())?;
    Ok(files.to_vec())
}

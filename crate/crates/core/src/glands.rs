//! Gland signal, intact-gland extraction and separation of fused glands.

use crate::error::{MeiboError, Result};
use crate::imgproc::{
    binary_median, dilate, erode, fill_holes, gradient_in, gradient_out, invert, keep_largest,
    label_components, multiply_gray, remove_small, skeletonize, subtract, threshold,
    ComponentStats, Connectivity, StructuringElement, ThresholdMethod,
};
use crate::raster::{BinaryMask, GrayImage};
use crate::roi::{enhance, RoiResult};

#[derive(Clone, Debug, PartialEq)]
pub struct GlandParams {
    pub median_diameter: usize,
    pub highlight_size: usize,
    pub laplacian_size: usize,
    /// Disk diameter of the majority filter on the binarized signal.
    pub majority_diameter: usize,
    /// Accepted principal-axis angles in degrees, inclusive.
    pub min_angle_deg: f64,
    pub max_angle_deg: f64,
    pub min_gland_area: usize,
    /// A component is fused when its row-run total exceeds `max_row_runs`
    /// or its column-run total exceeds `max_col_runs`.
    pub max_row_runs: usize,
    pub max_col_runs: usize,
    /// Width and height of the separating erosion element.
    pub split_se: (usize, usize),
    pub max_split_iterations: usize,
    /// Disk diameter used to close the cuts left by the separating skeleton.
    pub repair_diameter: usize,
}

impl Default for GlandParams {
    fn default() -> Self {
        Self {
            median_diameter: 3,
            highlight_size: 25,
            laplacian_size: 29,
            majority_diameter: 5,
            min_angle_deg: 45.0,
            max_angle_deg: 135.0,
            min_gland_area: 1400,
            max_row_runs: 350,
            max_col_runs: 200,
            split_se: (1, 3),
            max_split_iterations: 100,
            repair_diameter: 3,
        }
    }
}

/// Bright, roughly vertical structures inside the ROI.
pub fn segment_gland_signal(
    img: &GrayImage,
    roi: &RoiResult,
    params: &GlandParams,
) -> Result<BinaryMask> {
    if roi.area == 0 || roi.roi_mask.is_empty() {
        return Err(MeiboError::EmptyRoi);
    }
    roi.roi_mask.ensure_same_dims(img.dims())?;
    let enhanced = enhance(
        img,
        params.median_diameter,
        params.highlight_size,
        params.laplacian_size,
    )?;
    let inside = multiply_gray(&enhanced, &roi.roi_mask)?;
    let binary = threshold(&inside, ThresholdMethod::Otsu);
    let smooth = binary_median(&binary, &StructuringElement::disk(params.majority_diameter));
    let (lo, hi) = (params.min_angle_deg, params.max_angle_deg);
    Ok(label_components(&smooth, Connectivity::Eight)
        .mask_where(|s| (lo..=hi).contains(&s.angle_deg)))
}

/// Totals of maximal foreground runs over all rows and over all columns.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SegmentCounts {
    pub n_h: usize,
    pub n_v: usize,
}

pub fn count_segments(component: &BinaryMask) -> SegmentCounts {
    let (w, h) = component.dims();
    let bits = component.bits();
    let n_h = (0..h)
        .map(|y| {
            let row = &bits[y * w..(y + 1) * w];
            row.iter()
                .enumerate()
                .filter(|&(x, &b)| b && (x == 0 || !row[x - 1]))
                .count()
        })
        .sum();
    let n_v = (0..w)
        .map(|x| {
            (0..h)
                .filter(|&y| bits[y * w + x] && (y == 0 || !bits[(y - 1) * w + x]))
                .count()
        })
        .sum();
    SegmentCounts { n_h, n_v }
}

/// Fused-gland test with the reference thresholds.
pub fn is_connected_gland(c: SegmentCounts) -> bool {
    is_connected_with(c, &GlandParams::default())
}

fn is_connected_with(c: SegmentCounts, params: &GlandParams) -> bool {
    c.n_h > params.max_row_runs || c.n_v > params.max_col_runs
}

/// Result of separating one fused component.
#[derive(Clone, Debug)]
pub struct FragmentOutcome {
    /// Separated glands at the input's size; the unsplit input on divergence.
    pub glands: Vec<BinaryMask>,
    /// Erosion steps taken over all passes.
    pub iterations: usize,
    pub diverged: bool,
}

struct Piece {
    mask: BinaryMask,
    depth: usize,
}

/// Frame of `p` background pixels around a mask.
fn pad(mask: &BinaryMask, p: usize) -> BinaryMask {
    let (w, h) = mask.dims();
    mask.crop(-(p as isize), -(p as isize), w + 2 * p, h + 2 * p)
        .expect("padded size is positive")
}

fn unpad(mask: &BinaryMask, p: usize, w: usize, h: usize) -> BinaryMask {
    mask.crop(p as isize, p as isize, w, h)
        .expect("inner size is positive")
}

fn erode_n(mask: &BinaryMask, se: &StructuringElement, n: usize) -> BinaryMask {
    (0..n).fold(mask.clone(), |m, _| erode(&m, se))
}

/// Closes one-pixel cuts: outer ring, hole fill, then the inner ring removed again.
fn repair(piece: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    let p = se.width().max(se.height());
    let padded = pad(piece, p);
    let grown = fill_holes(&gradient_out(&padded, se).or(&padded).expect("same dims"));
    let closed = subtract(&grown, &gradient_in(&grown, se)).expect("same dims");
    let (w, h) = piece.dims();
    unpad(&closed, p, w, h)
}

/// Drops what is left of a severed bridge: any stretch thinner along the split
/// axis than the cores had to be eroded before they parted.
fn trim_bridge(piece: &BinaryMask, se: &StructuringElement, depth: usize) -> BinaryMask {
    let line =
        StructuringElement::rect(1 + depth * (se.width() - 1), 1 + depth * (se.height() - 1));
    let p = line.width().max(line.height());
    let padded = pad(piece, p);
    let (w, h) = piece.dims();
    unpad(&dilate(&erode(&padded, &line), &line), p, w, h)
}

pub fn fragment(connected: &BinaryMask) -> FragmentOutcome {
    fragment_with(connected, &GlandParams::default())
}

/// Splits a fused component by repeated erosion and a background skeleton cut.
pub fn fragment_with(connected: &BinaryMask, params: &GlandParams) -> FragmentOutcome {
    let (full_w, full_h) = connected.dims();
    let Some((bx0, by0, bx1, by1)) = connected.bounding_box() else {
        return FragmentOutcome {
            glands: Vec::new(),
            iterations: 0,
            diverged: true,
        };
    };
    let margin = 2;
    let (ox, oy) = (bx0 as isize - margin, by0 as isize - margin);
    let (cw, ch) = (
        bx1 - bx0 + 1 + 2 * margin as usize,
        by1 - by0 + 1 + 2 * margin as usize,
    );
    let local = connected
        .crop(ox, oy, cw, ch)
        .expect("crop size is positive");

    let se = StructuringElement::rect(params.split_se.0, params.split_se.1);
    let mut queue = vec![Piece {
        mask: local.clone(),
        depth: 0,
    }];
    let mut done: Vec<(BinaryMask, usize)> = Vec::new();
    let mut iterations = 0;
    let mut diverged = false;

    'pieces: while let Some(Piece { mask, depth }) = queue.pop() {
        let mut depth = depth;
        let mut eroded = erode_n(&mask, &se, depth);
        loop {
            if iterations >= params.max_split_iterations {
                diverged = true;
                break 'pieces;
            }
            eroded = erode(&eroded, &se);
            depth += 1;
            iterations += 1;
            if eroded.is_empty() {
                diverged = true;
                break 'pieces;
            }
            if label_components(&eroded, Connectivity::Eight).len() > 1 {
                break;
            }
        }

        // background skeleton of the eroded cores runs between them
        let p = depth + 2;
        let skeleton = unpad(&skeletonize(&invert(&pad(&eroded, p))), p, cw, ch);
        let cut = subtract(&mask, &skeleton).expect("same dims");
        let parts = label_components(&cut, Connectivity::Four);
        let mut seeded = vec![false; parts.len() + 1];
        for (x, y) in eroded.foreground() {
            seeded[parts.label_at(x, y) as usize] = true;
        }
        for s in parts.stats() {
            if !seeded[s.label as usize] {
                continue;
            }
            let part = parts.mask_of(s.label);
            if is_connected_with(count_segments(&part), params) {
                queue.push(Piece { mask: part, depth });
            } else {
                done.push((part, depth));
            }
        }
    }

    if diverged {
        log::warn!(
            "fragmentation diverged after {iterations} erosions, keeping the component unsplit"
        );
        return FragmentOutcome {
            glands: vec![connected.clone()],
            iterations,
            diverged,
        };
    }

    let repair_se = StructuringElement::disk(params.repair_diameter);
    let mut claimed = local.blank_like();
    let mut glands = Vec::with_capacity(done.len());
    for (part, depth) in &done {
        let fixed = subtract(
            &trim_bridge(&repair(part, &repair_se), &se, *depth),
            &claimed,
        )
        .expect("same dims");
        let fixed = keep_largest(&fixed);
        if fixed.is_empty() {
            continue;
        }
        claimed.union_with(&fixed).expect("same dims");
        let mut out = BinaryMask::empty(full_w, full_h).expect("valid dims");
        out.paste_or(&fixed, ox, oy);
        glands.push(out);
    }
    FragmentOutcome {
        glands,
        iterations,
        diverged,
    }
}

#[derive(Clone, Debug)]
pub struct Gland {
    pub label: u32,
    pub mask: BinaryMask,
    pub stats: ComponentStats,
    /// Produced by splitting a fused component.
    pub fragmented: bool,
}

#[derive(Clone, Debug)]
pub struct GlandSet {
    pub gland_signal: BinaryMask,
    pub glands: Vec<Gland>,
}

impl GlandSet {
    /// Union of all labeled gland masks.
    pub fn union(&self) -> BinaryMask {
        let mut u = self.gland_signal.blank_like();
        for g in &self.glands {
            u.union_with(&g.mask).expect("same dims");
        }
        u
    }
}

pub fn extract_glands(gland_signal: &BinaryMask) -> GlandSet {
    extract_glands_with(gland_signal, &GlandParams::default())
}

/// Drops small pieces, separates fused components and labels glands left to right.
pub fn extract_glands_with(gland_signal: &BinaryMask, params: &GlandParams) -> GlandSet {
    let kept = remove_small(gland_signal, params.min_gland_area);
    let comps = label_components(&kept, Connectivity::Eight);
    let mut found: Vec<(BinaryMask, bool)> = Vec::new();
    for s in comps.stats() {
        let mask = comps.mask_of(s.label);
        if is_connected_with(count_segments(&mask), params) {
            let outcome = fragment_with(&mask, params);
            let split = !outcome.diverged;
            found.extend(outcome.glands.into_iter().map(|g| (g, split)));
        } else {
            found.push((mask, false));
        }
    }

    let mut glands: Vec<Gland> = found
        .into_iter()
        .filter_map(|(mask, fragmented)| {
            let stats = label_components(&mask, Connectivity::Eight)
                .largest()?
                .clone();
            (stats.area >= params.min_gland_area).then_some(Gland {
                label: 0,
                mask,
                stats,
                fragmented,
            })
        })
        .collect();
    glands.sort_by(|a, b| {
        a.stats
            .centroid
            .0
            .total_cmp(&b.stats.centroid.0)
            .then(a.stats.centroid.1.total_cmp(&b.stats.centroid.1))
            .then(a.stats.bbox.min_x.cmp(&b.stats.bbox.min_x))
    });
    for (i, g) in glands.iter_mut().enumerate() {
        g.label = i as u32 + 1;
        g.stats.label = g.label;
    }
    GlandSet {
        gland_signal: gland_signal.clone(),
        glands,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bars(w: usize, h: usize, rects: &[(usize, usize, usize, usize)]) -> BinaryMask {
        BinaryMask::from_fn(w, h, |x, y| {
            rects
                .iter()
                .any(|&(x0, y0, rw, rh)| (x0..x0 + rw).contains(&x) && (y0..y0 + rh).contains(&y))
        })
        .unwrap()
    }

    fn dice(a: &BinaryMask, b: &BinaryMask) -> f64 {
        2.0 * a.intersection_count(b).unwrap() as f64 / (a.count() + b.count()) as f64
    }

    #[test]
    fn segment_counts_of_a_rectangle() {
        let r = bars(40, 120, &[(5, 5, 20, 100)]);
        assert_eq!(count_segments(&r), SegmentCounts { n_h: 100, n_v: 20 });
        assert_eq!(
            count_segments(&BinaryMask::empty(4, 4).unwrap()),
            SegmentCounts::default()
        );
    }

    #[test]
    fn fused_pair_exceeds_row_threshold() {
        let m = bars(
            80,
            320,
            &[(5, 10, 20, 300), (35, 10, 20, 300), (25, 150, 10, 4)],
        );
        let c = count_segments(&m);
        assert_eq!(c.n_h, 596);
        assert!(is_connected_gland(c));
    }

    #[test]
    fn connected_thresholds_are_strict() {
        assert!(!is_connected_gland(SegmentCounts { n_h: 100, n_v: 20 }));
        assert!(!is_connected_gland(SegmentCounts { n_h: 350, n_v: 200 }));
        assert!(is_connected_gland(SegmentCounts { n_h: 351, n_v: 0 }));
        assert!(is_connected_gland(SegmentCounts { n_h: 0, n_v: 201 }));
    }

    #[test]
    fn dumbbell_splits_in_two() {
        let a = (10, 10, 20, 150);
        let b = (40, 10, 20, 150);
        let m = bars(80, 180, &[a, b, (30, 80, 10, 4)]);
        let out = fragment(&m);
        assert!(!out.diverged);
        assert_eq!(out.glands.len(), 2);
        assert!(out.iterations < 100);
        let ra = bars(80, 180, &[a]);
        let rb = bars(80, 180, &[b]);
        for g in &out.glands {
            let k = dice(g, &ra).max(dice(g, &rb));
            assert!(k >= 0.85, "k = {k}");
        }
        assert_eq!(out.glands[0].intersection_count(&out.glands[1]).unwrap(), 0);
    }

    #[test]
    fn unequal_bridges_need_a_second_pass() {
        let m = bars(
            120,
            240,
            &[
                (10, 10, 20, 200),
                (40, 10, 20, 200),
                (70, 10, 20, 200),
                (30, 60, 10, 4),
                (60, 120, 10, 12),
            ],
        );
        let out = fragment(&m);
        assert!(!out.diverged);
        assert_eq!(out.glands.len(), 3);
    }

    #[test]
    fn single_bar_diverges_and_is_kept() {
        let m = bars(40, 60, &[(10, 10, 20, 30)]);
        let out = fragment(&m);
        assert!(out.diverged);
        assert_eq!(out.glands, vec![m]);
    }

    #[test]
    fn small_components_are_not_glands() {
        // 1399 px and 1400 px stripes
        let mut m = bars(120, 200, &[(10, 10, 10, 140)]);
        m.set(10, 10, false);
        let big = bars(120, 200, &[(60, 10, 10, 140)]);
        m.union_with(&big).unwrap();
        let set = extract_glands(&m);
        assert_eq!(set.glands.len(), 1);
        assert_eq!(set.glands[0].mask, big);
        assert_eq!(set.gland_signal, m);
    }

    #[test]
    fn labels_follow_centroid_x() {
        let m = bars(
            200,
            200,
            &[(150, 10, 12, 150), (20, 30, 12, 150), (80, 5, 12, 150)],
        );
        let set = extract_glands(&m);
        let xs: Vec<f64> = set.glands.iter().map(|g| g.stats.centroid.0).collect();
        assert_eq!(
            set.glands.iter().map(|g| g.label).collect::<Vec<_>>(),
            vec![1, 2, 3]
        );
        assert!(xs.windows(2).all(|p| p[0] < p[1]));
        assert!(extract_glands(&BinaryMask::empty(10, 10).unwrap())
            .glands
            .is_empty());
    }
}

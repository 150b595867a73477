//! Agreement between a reference and a candidate segmentation.

use crate::error::{MeiboError, Result};
use crate::raster::BinaryMask;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SegScore {
    /// Dice overlap in `[0, 1]`.
    pub k: f64,
    /// Candidate pixels outside the reference, percent of the reference area.
    pub r_p: f64,
    /// Reference pixels missed by the candidate, percent of the reference area.
    pub r_n: f64,
    pub reference_px: usize,
    pub candidate_px: usize,
    pub overlap_px: usize,
}

/// Scores `candidate` against `reference`.
pub fn score(reference: &BinaryMask, candidate: &BinaryMask) -> Result<SegScore> {
    let overlap_px = reference.intersection_count(candidate)?;
    let reference_px = reference.count();
    if reference_px == 0 {
        return Err(MeiboError::EmptyReference);
    }
    let candidate_px = candidate.count();
    let m = reference_px as f64;
    Ok(SegScore {
        k: 2.0 * overlap_px as f64 / (reference_px + candidate_px) as f64,
        r_p: (candidate_px - overlap_px) as f64 / m * 100.0,
        r_n: (reference_px - overlap_px) as f64 / m * 100.0,
        reference_px,
        candidate_px,
        overlap_px,
    })
}

/// For each reference mask, the candidate sharing the most pixels with it;
/// ties go to the lower index and `None` marks a reference nothing overlaps.
pub fn match_by_overlap(
    references: &[BinaryMask],
    candidates: &[BinaryMask],
) -> Result<Vec<Option<usize>>> {
    references
        .iter()
        .map(|r| {
            let mut best: Option<(usize, usize)> = None;
            for (j, c) in candidates.iter().enumerate() {
                let n = r.intersection_count(c)?;
                if n > 0 && best.is_none_or(|(_, b)| n > b) {
                    best = Some((j, n));
                }
            }
            Ok(best.map(|(j, _)| j))
        })
        .collect()
}

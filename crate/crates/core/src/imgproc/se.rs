//! Structuring elements.

/// Footprint shape.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeShape {
    Disk,
    Rectangle,
}

/// A neighborhood footprint stored as offsets from its anchor pixel.
///
/// The anchor sits at index `(size - 1) / 2` along each axis, so odd sizes are
/// centered and even sizes lean one pixel towards the positive direction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructuringElement {
    shape: SeShape,
    width: usize,
    height: usize,
    offsets: Vec<(isize, isize)>,
}

/// A maximal horizontal run of footprint offsets at a fixed `dy`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct SeRun {
    pub dy: isize,
    pub dx0: isize,
    pub dx1: isize,
}

impl StructuringElement {
    /// Disk of the given diameter: pixels whose center lies within `diameter / 2`
    /// of the element center.
    pub fn disk(diameter: usize) -> Self {
        let d = diameter.max(1);
        let c = (d as f64 - 1.0) / 2.0;
        let r2 = (d as f64 / 2.0).powi(2);
        let anchor = ((d - 1) / 2) as isize;
        let mut offsets = Vec::new();
        for j in 0..d {
            for i in 0..d {
                let dx = i as f64 - c;
                let dy = j as f64 - c;
                if dx * dx + dy * dy <= r2 + 1e-9 {
                    offsets.push((i as isize - anchor, j as isize - anchor));
                }
            }
        }
        Self {
            shape: SeShape::Disk,
            width: d,
            height: d,
            offsets,
        }
    }

    /// Full `width x height` rectangle.
    pub fn rect(width: usize, height: usize) -> Self {
        let w = width.max(1);
        let h = height.max(1);
        let ax = ((w - 1) / 2) as isize;
        let ay = ((h - 1) / 2) as isize;
        let mut offsets = Vec::with_capacity(w * h);
        for j in 0..h {
            for i in 0..w {
                offsets.push((i as isize - ax, j as isize - ay));
            }
        }
        Self {
            shape: SeShape::Rectangle,
            width: w,
            height: h,
            offsets,
        }
    }

    pub fn shape(&self) -> SeShape {
        self.shape
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Offsets `(dx, dy)` relative to the anchor, row-major.
    pub fn offsets(&self) -> &[(isize, isize)] {
        &self.offsets
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    /// Point reflection through the anchor.
    pub fn reflected(&self) -> Self {
        let mut offsets: Vec<_> = self.offsets.iter().map(|&(dx, dy)| (-dx, -dy)).collect();
        offsets.sort_by_key(|&(dx, dy)| (dy, dx));
        Self {
            shape: self.shape,
            width: self.width,
            height: self.height,
            offsets,
        }
    }

    pub fn is_symmetric(&self) -> bool {
        let mut a = self.offsets.clone();
        let mut b: Vec<_> = self.offsets.iter().map(|&(dx, dy)| (-dx, -dy)).collect();
        a.sort_unstable();
        b.sort_unstable();
        a == b
    }

    pub(crate) fn runs(&self) -> Vec<SeRun> {
        let mut sorted = self.offsets.clone();
        sorted.sort_by_key(|&(dx, dy)| (dy, dx));
        let mut runs: Vec<SeRun> = Vec::new();
        for (dx, dy) in sorted {
            match runs.last_mut() {
                Some(r) if r.dy == dy && r.dx1 + 1 == dx => r.dx1 = dx,
                _ => runs.push(SeRun {
                    dy,
                    dx0: dx,
                    dx1: dx,
                }),
            }
        }
        runs
    }
}

//! Connected-component labeling and blob statistics.

use crate::raster::BinaryMask;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Connectivity {
    Four,
    Eight,
}

impl Connectivity {
    fn offsets(self) -> &'static [(isize, isize)] {
        match self {
            Connectivity::Four => &[(1, 0), (-1, 0), (0, 1), (0, -1)],
            Connectivity::Eight => &[
                (1, 0),
                (-1, 0),
                (0, 1),
                (0, -1),
                (1, 1),
                (1, -1),
                (-1, 1),
                (-1, -1),
            ],
        }
    }
}

/// Inclusive pixel bounding box.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BBox {
    pub min_x: usize,
    pub min_y: usize,
    pub max_x: usize,
    pub max_y: usize,
}

impl BBox {
    pub fn width(&self) -> usize {
        self.max_x - self.min_x + 1
    }

    pub fn height(&self) -> usize {
        self.max_y - self.min_y + 1
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComponentStats {
    pub label: u32,
    pub area: usize,
    pub bbox: BBox,
    pub centroid: (f64, f64),
    /// Principal-axis angle in degrees, counter-clockwise from horizontal with
    /// the y axis pointing up, in `[0, 180)`.
    pub angle_deg: f64,
    pub touches_border: bool,
}

/// Label map (0 = background, components `1..=n`) with per-component stats.
#[derive(Clone, Debug)]
pub struct ComponentSet {
    width: usize,
    height: usize,
    labels: Vec<u32>,
    stats: Vec<ComponentStats>,
}

impl ComponentSet {
    pub fn len(&self) -> usize {
        self.stats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stats.is_empty()
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label_at(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    pub fn stats(&self) -> &[ComponentStats] {
        &self.stats
    }

    /// Stats for label `l` (1-based).
    pub fn get(&self, l: u32) -> &ComponentStats {
        &self.stats[l as usize - 1]
    }

    pub fn mask_of(&self, label: u32) -> BinaryMask {
        self.mask_where(|s| s.label == label)
    }

    /// Union of components whose stats satisfy `keep`.
    pub fn mask_where(&self, keep: impl Fn(&ComponentStats) -> bool) -> BinaryMask {
        let flags: Vec<bool> = std::iter::once(false)
            .chain(self.stats.iter().map(keep))
            .collect();
        let bits = self.labels.iter().map(|&l| flags[l as usize]).collect();
        BinaryMask::from_vec(self.width, self.height, bits).expect("same dims")
    }

    pub fn largest(&self) -> Option<&ComponentStats> {
        // first of equal areas wins so the choice is deterministic
        self.stats
            .iter()
            .fold(None, |best: Option<&ComponentStats>, s| match best {
                Some(b) if b.area >= s.area => Some(b),
                _ => Some(s),
            })
    }
}

#[derive(Default)]
struct Moments {
    n: f64,
    sx: f64,
    sy: f64,
    sxx: f64,
    syy: f64,
    sxy: f64,
}

/// Angle of the principal axis from second-order central moments.
pub(crate) fn principal_angle_deg(mu20: f64, mu02: f64, mu11: f64) -> f64 {
    // image rows grow downwards, so flip the sign of the mixed moment
    let theta = 0.5 * (-2.0 * mu11).atan2(mu20 - mu02);
    let mut deg = theta.to_degrees().rem_euclid(180.0);
    if deg >= 180.0 - 1e-9 {
        deg = 0.0;
    }
    deg
}

/// Labels components in raster order of their first pixel.
pub fn label_components(mask: &BinaryMask, connectivity: Connectivity) -> ComponentSet {
    let (w, h) = mask.dims();
    let mut labels = vec![0u32; w * h];
    let mut stats = Vec::new();
    let mut stack = Vec::new();
    let offs = connectivity.offsets();

    for start in 0..w * h {
        if !mask.bits()[start] || labels[start] != 0 {
            continue;
        }
        let label = stats.len() as u32 + 1;
        labels[start] = label;
        stack.push(start);
        let mut m = Moments::default();
        let mut bbox = BBox {
            min_x: usize::MAX,
            min_y: usize::MAX,
            max_x: 0,
            max_y: 0,
        };
        let mut touches = false;
        while let Some(i) = stack.pop() {
            let (x, y) = (i % w, i / w);
            let (fx, fy) = (x as f64, y as f64);
            m.n += 1.0;
            m.sx += fx;
            m.sy += fy;
            m.sxx += fx * fx;
            m.syy += fy * fy;
            m.sxy += fx * fy;
            bbox.min_x = bbox.min_x.min(x);
            bbox.min_y = bbox.min_y.min(y);
            bbox.max_x = bbox.max_x.max(x);
            bbox.max_y = bbox.max_y.max(y);
            touches |= x == 0 || y == 0 || x + 1 == w || y + 1 == h;
            for &(dx, dy) in offs {
                let nx = x as isize + dx;
                let ny = y as isize + dy;
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if mask.bits()[j] && labels[j] == 0 {
                    labels[j] = label;
                    stack.push(j);
                }
            }
        }
        let cx = m.sx / m.n;
        let cy = m.sy / m.n;
        let mu20 = m.sxx - m.sx * cx;
        let mu02 = m.syy - m.sy * cy;
        let mu11 = m.sxy - m.sx * cy;
        stats.push(ComponentStats {
            label,
            area: m.n as usize,
            bbox,
            centroid: (cx, cy),
            angle_deg: principal_angle_deg(mu20, mu02, mu11),
            touches_border: touches,
        });
    }

    ComponentSet {
        width: w,
        height: h,
        labels,
        stats,
    }
}

/// Drops 8-connected components smaller than `min_area` pixels.
pub fn remove_small(mask: &BinaryMask, min_area: usize) -> BinaryMask {
    label_components(mask, Connectivity::Eight).mask_where(|s| s.area >= min_area)
}

/// Drops 8-connected components that touch the raster border.
pub fn reject_border(mask: &BinaryMask) -> BinaryMask {
    label_components(mask, Connectivity::Eight).mask_where(|s| !s.touches_border)
}

/// Largest 8-connected component, or an empty mask.
pub fn keep_largest(mask: &BinaryMask) -> BinaryMask {
    let comps = label_components(mask, Connectivity::Eight);
    match comps.largest() {
        Some(s) => comps.mask_of(s.label),
        None => mask.blank_like(),
    }
}

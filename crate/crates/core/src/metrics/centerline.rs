//! Gland centerline from the longest skeleton path.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use crate::error::{MeiboError, Result};
use crate::imgproc::skeletonize;
use crate::raster::BinaryMask;

/// Ordered centerline from endpoint M (smaller y) to endpoint N.
#[derive(Clone, Debug, PartialEq)]
pub struct Centerline {
    pixels: Vec<(usize, usize)>,
    points: Vec<[f64; 2]>,
    arc_length: f64,
    chord: f64,
}

impl Centerline {
    /// Builds a centerline from an already ordered, smoothed polyline.
    pub fn from_points(points: Vec<[f64; 2]>) -> Result<Self> {
        if points.len() < 2 {
            return Err(MeiboError::DegenerateGland);
        }
        let arc_length = polyline_length(&points);
        let chord = dist(points[0], points[points.len() - 1]);
        Ok(Self {
            pixels: Vec::new(),
            points,
            arc_length,
            chord,
        })
    }

    /// Skeleton pixels of the path before smoothing; empty for synthetic centerlines.
    pub fn pixels(&self) -> &[(usize, usize)] {
        &self.pixels
    }

    /// Smoothed points, M first.
    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    /// Arc length `l_MN` of the smoothed polyline, pixels.
    pub fn arc_length(&self) -> f64 {
        self.arc_length
    }

    /// Straight distance between the endpoints, pixels.
    pub fn chord(&self) -> f64 {
        self.chord
    }

    /// Point at arc length `s` from M, clamped to the ends.
    pub fn point_at(&self, s: f64) -> [f64; 2] {
        let mut acc = 0.0;
        for w in self.points.windows(2) {
            let d = dist(w[0], w[1]);
            if acc + d >= s && d > 0.0 {
                let t = ((s - acc) / d).clamp(0.0, 1.0);
                return [
                    w[0][0] + t * (w[1][0] - w[0][0]),
                    w[0][1] + t * (w[1][1] - w[0][1]),
                ];
            }
            acc += d;
        }
        if s <= 0.0 {
            self.points[0]
        } else {
            self.points[self.points.len() - 1]
        }
    }

    /// Points every `spacing` of arc length from M; the last sample sits at or before N.
    pub fn resample(&self, spacing: f64) -> Vec<(f64, [f64; 2])> {
        let n = (self.arc_length / spacing).floor() as usize;
        let mut out = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        let mut seg = 0;
        for i in 0..=n {
            let s = i as f64 * spacing;
            while seg + 1 < self.points.len() - 1
                && acc + dist(self.points[seg], self.points[seg + 1]) < s
            {
                acc += dist(self.points[seg], self.points[seg + 1]);
                seg += 1;
            }
            let (a, b) = (self.points[seg], self.points[seg + 1]);
            let d = dist(a, b);
            let t = if d > 0.0 {
                ((s - acc) / d).clamp(0.0, 1.0)
            } else {
                0.0
            };
            out.push((s, [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]));
        }
        out
    }
}

#[inline]
pub(crate) fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt()
}

pub(crate) fn polyline_length(points: &[[f64; 2]]) -> f64 {
    points.windows(2).map(|w| dist(w[0], w[1])).sum()
}

/// Centered moving average; windows shrink symmetrically near the ends so the endpoints stay fixed.
pub fn moving_average(points: &[[f64; 2]], window: usize) -> Vec<[f64; 2]> {
    let half = window / 2;
    let n = points.len();
    (0..n)
        .map(|i| {
            let k = half.min(i).min(n - 1 - i);
            let span = &points[i - k..=i + k];
            let m = span.len() as f64;
            let (sx, sy) = span
                .iter()
                .fold((0.0, 0.0), |(sx, sy), p| (sx + p[0], sy + p[1]));
            [sx / m, sy / m]
        })
        .collect()
}

#[derive(Copy, Clone, PartialEq)]
struct Entry {
    cost: f64,
    node: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then(other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// 8-adjacency graph over skeleton pixels.
struct SkeletonGraph {
    nodes: Vec<(usize, usize)>,
    adj: Vec<Vec<(usize, f64)>>,
}

impl SkeletonGraph {
    fn new(skeleton: &BinaryMask) -> Self {
        let nodes: Vec<(usize, usize)> = skeleton.foreground().collect();
        let index: HashMap<(usize, usize), usize> =
            nodes.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        let adj = nodes
            .iter()
            .map(|&(x, y)| {
                let mut out = Vec::with_capacity(8);
                for dy in -1isize..=1 {
                    for dx in -1isize..=1 {
                        if dx == 0 && dy == 0 {
                            continue;
                        }
                        let (nx, ny) = (x as isize + dx, y as isize + dy);
                        if nx < 0 || ny < 0 {
                            continue;
                        }
                        if let Some(&j) = index.get(&(nx as usize, ny as usize)) {
                            let w = if dx != 0 && dy != 0 {
                                std::f64::consts::SQRT_2
                            } else {
                                1.0
                            };
                            out.push((j, w));
                        }
                    }
                }
                out
            })
            .collect();
        Self { nodes, adj }
    }

    /// Distances and predecessors from `src`.
    fn dijkstra(&self, src: usize) -> (Vec<f64>, Vec<usize>) {
        let n = self.nodes.len();
        let mut d = vec![f64::INFINITY; n];
        let mut prev = vec![usize::MAX; n];
        let mut heap = BinaryHeap::new();
        d[src] = 0.0;
        heap.push(Entry {
            cost: 0.0,
            node: src,
        });
        while let Some(Entry { cost, node }) = heap.pop() {
            if cost > d[node] {
                continue;
            }
            for &(j, w) in &self.adj[node] {
                let c = cost + w;
                if c < d[j] {
                    d[j] = c;
                    prev[j] = node;
                    heap.push(Entry { cost: c, node: j });
                }
            }
        }
        (d, prev)
    }

    /// Farthest reachable node; ties go to the lowest index.
    fn farthest(d: &[f64]) -> usize {
        let mut best = 0;
        for (i, &v) in d.iter().enumerate() {
            if v.is_finite() && (v > d[best] || !d[best].is_finite()) {
                best = i;
            }
        }
        best
    }

    /// Component sizes, to seed the search inside the largest piece.
    fn largest_component_node(&self) -> usize {
        let n = self.nodes.len();
        let mut comp = vec![usize::MAX; n];
        let mut best = (0, 0);
        for s in 0..n {
            if comp[s] != usize::MAX {
                continue;
            }
            let mut stack = vec![s];
            comp[s] = s;
            let mut size = 0;
            while let Some(u) = stack.pop() {
                size += 1;
                for &(v, _) in &self.adj[u] {
                    if comp[v] == usize::MAX {
                        comp[v] = s;
                        stack.push(v);
                    }
                }
            }
            if size > best.1 {
                best = (s, size);
            }
        }
        best.0
    }

    /// Longest geodesic path by two sweeps: farthest from a seed, then farthest from that.
    fn longest_path(&self) -> Vec<(usize, usize)> {
        let seed = self.largest_component_node();
        let (d0, _) = self.dijkstra(seed);
        let a = Self::farthest(&d0);
        let (d1, prev) = self.dijkstra(a);
        let b = Self::farthest(&d1);
        let mut path = vec![self.nodes[b]];
        let mut cur = b;
        while cur != a {
            cur = prev[cur];
            path.push(self.nodes[cur]);
        }
        path
    }
}

pub const SMOOTHING_WINDOW: usize = 5;

/// Skeleton, longest path, ordering from the upper endpoint, then smoothing.
pub fn extract_centerline(gland: &BinaryMask) -> Result<Centerline> {
    extract_centerline_with(gland, SMOOTHING_WINDOW)
}

pub fn extract_centerline_with(gland: &BinaryMask, window: usize) -> Result<Centerline> {
    let (x0, y0, x1, y1) = gland.bounding_box().ok_or(MeiboError::DegenerateGland)?;
    let pad = 1;
    let ox = x0 as isize - pad;
    let oy = y0 as isize - pad;
    let local = gland.crop(ox, oy, x1 - x0 + 3, y1 - y0 + 3)?;
    let skeleton = skeletonize(&local);
    if skeleton.count() < 2 {
        return Err(MeiboError::DegenerateGland);
    }
    let graph = SkeletonGraph::new(&skeleton);
    let mut path: Vec<(usize, usize)> = graph
        .longest_path()
        .into_iter()
        .map(|(x, y)| ((x as isize + ox) as usize, (y as isize + oy) as usize))
        .collect();
    if path.len() < 2 {
        return Err(MeiboError::DegenerateGland);
    }
    let (first, last) = (path[0], path[path.len() - 1]);
    if (last.1, last.0) < (first.1, first.0) {
        path.reverse();
    }
    let raw: Vec<[f64; 2]> = path.iter().map(|&(x, y)| [x as f64, y as f64]).collect();
    let mut c = Centerline::from_points(moving_average(&raw, window))?;
    c.pixels = path;
    Ok(c)
}

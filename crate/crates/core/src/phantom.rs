//! Synthetic meibography images with exact ground truth.
//!
//! An eyelid is a superellipse of background intensity on a brighter surround.
//! Glands are ribbons around sinusoidal centerlines with round caps. Truth masks
//! and metrics come from the generative parameters, never from the noisy image.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{MeiboError, Result};
use crate::imgproc::{erode, StructuringElement};
use crate::metrics::{signal_index_of_masks, Resolution};
use crate::raster::{BinaryMask, GrayImage};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EyelidSpec {
    pub center_x: f64,
    pub center_y: f64,
    pub semi_x: f64,
    pub semi_y: f64,
    /// Superellipse exponent; 2 is an ellipse, larger values square the corners.
    pub exponent: f64,
}

impl Default for EyelidSpec {
    fn default() -> Self {
        Self {
            center_x: 544.0,
            center_y: 256.0,
            semi_x: 460.0,
            semi_y: 150.0,
            exponent: 4.0,
        }
    }
}

impl EyelidSpec {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let u = ((x - self.center_x) / self.semi_x)
            .abs()
            .powf(self.exponent);
        let v = ((y - self.center_y) / self.semi_y)
            .abs()
            .powf(self.exponent);
        u + v <= 1.0
    }

    /// Half of the eyelid's vertical extent at column `x`, zero outside.
    pub fn half_height(&self, x: f64) -> f64 {
        let u = ((x - self.center_x) / self.semi_x).abs();
        if u >= 1.0 {
            0.0
        } else {
            self.semi_y * (1.0 - u.powf(self.exponent)).powf(1.0 / self.exponent)
        }
    }

    /// Area by quadrature over columns, pixels.
    pub fn area(&self) -> f64 {
        let n = 20_000;
        let h = 2.0 * self.semi_x / n as f64;
        (0..n)
            .map(|i| {
                let x = self.center_x - self.semi_x + (i as f64 + 0.5) * h;
                2.0 * self.half_height(x) * h
            })
            .sum()
    }
}

/// Gland width along its centerline, in pixels, as a function of arc fraction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WidthModel {
    Constant {
        width: f64,
    },
    /// `top` over the upper half of the arc, `bottom` over the lower half.
    Step {
        top: f64,
        bottom: f64,
    },
    /// Linear change from `top` to `bottom`.
    Taper {
        top: f64,
        bottom: f64,
    },
}

impl WidthModel {
    pub fn at(&self, u: f64) -> f64 {
        match *self {
            WidthModel::Constant { width } => width,
            WidthModel::Step { top, bottom } => {
                if u < 0.5 {
                    top
                } else {
                    bottom
                }
            }
            WidthModel::Taper { top, bottom } => top + (bottom - top) * u,
        }
    }

    pub fn max(&self) -> f64 {
        match *self {
            WidthModel::Constant { width } => width,
            WidthModel::Step { top, bottom } | WidthModel::Taper { top, bottom } => top.max(bottom),
        }
    }

    /// Mean and population standard deviation over a uniform arc fraction.
    pub fn moments(&self) -> (f64, f64) {
        match *self {
            WidthModel::Constant { width } => (width, 0.0),
            WidthModel::Step { top, bottom } => ((top + bottom) / 2.0, (top - bottom).abs() / 2.0),
            WidthModel::Taper { top, bottom } => {
                ((top + bottom) / 2.0, (top - bottom).abs() / 12f64.sqrt())
            }
        }
    }
}

/// One ribbon: `x(y) = base_x + amplitude * sin(2 pi (y - top_y) / period + phase)`
/// for `y` in `[top_y, top_y + length]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlandSpec {
    pub base_x: f64,
    pub top_y: f64,
    pub length: f64,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default = "default_period")]
    pub period: f64,
    #[serde(default)]
    pub phase: f64,
    pub width: WidthModel,
}

fn default_period() -> f64 {
    200.0
}

impl GlandSpec {
    pub fn is_straight(&self) -> bool {
        self.amplitude == 0.0
    }

    fn omega(&self) -> f64 {
        2.0 * PI / self.period
    }

    pub fn x_at(&self, y: f64) -> f64 {
        self.base_x + self.amplitude * (self.omega() * (y - self.top_y) + self.phase).sin()
    }

    fn dx(&self, y: f64) -> f64 {
        self.amplitude * self.omega() * (self.omega() * (y - self.top_y) + self.phase).cos()
    }

    fn ddx(&self, y: f64) -> f64 {
        -self.amplitude
            * self.omega().powi(2)
            * (self.omega() * (y - self.top_y) + self.phase).sin()
    }

    /// Centerline points `(x, y, arc)` every `dy` rows; the last point sits on the bottom end.
    fn centerline(&self, dy: f64) -> Vec<(f64, f64, f64)> {
        let n = (self.length / dy).ceil().max(1.0) as usize;
        let mut out = Vec::with_capacity(n + 1);
        let mut arc = 0.0;
        let mut prev: Option<(f64, f64)> = None;
        for i in 0..=n {
            let y = self.top_y + self.length * i as f64 / n as f64;
            let x = self.x_at(y);
            if let Some((px, py)) = prev {
                arc += ((x - px).powi(2) + (y - py).powi(2)).sqrt();
            }
            out.push((x, y, arc));
            prev = Some((x, y));
        }
        out
    }
}

/// Bright bar fusing glands `left` and `right` (indices into the gland list) at row `y`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BridgeSpec {
    pub left: usize,
    pub right: usize,
    pub y: f64,
    pub height: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhantomSpec {
    pub width: usize,
    pub height: usize,
    pub eyelid: EyelidSpec,
    /// Explicit glands; when empty, `gland_count` glands are laid out automatically.
    pub glands: Vec<GlandSpec>,
    pub gland_count: usize,
    pub gland_width: f64,
    /// Vertical clearance between gland ends and the eyelid boundary in the automatic layout.
    pub end_margin: f64,
    pub bridges: Vec<BridgeSpec>,
    pub gland_intensity: f64,
    pub background_intensity: f64,
    pub surround_intensity: f64,
    pub lash_intensity: f64,
    /// Width of the intensity ramp across gland edges, pixels; 0 gives hard edges.
    pub edge_softness: f64,
    pub noise_sigma: f64,
    pub lash_streaks: usize,
    /// Bright specular spots scattered over the surround, clear of the eyelid.
    pub highlights: usize,
    pub highlight_intensity: f64,
    /// Relative brightness change across the image width.
    pub illumination_gradient: f64,
    pub seed: u64,
}

impl Default for PhantomSpec {
    fn default() -> Self {
        Self {
            width: 1088,
            height: 512,
            eyelid: EyelidSpec::default(),
            glands: Vec::new(),
            gland_count: 24,
            gland_width: 16.0,
            end_margin: 10.0,
            bridges: Vec::new(),
            gland_intensity: 150.0,
            background_intensity: 95.0,
            surround_intensity: 115.0,
            lash_intensity: 15.0,
            edge_softness: 6.0,
            noise_sigma: 4.0,
            lash_streaks: 4,
            highlights: 80,
            highlight_intensity: 245.0,
            illumination_gradient: 0.1,
            seed: 1,
        }
    }
}

/// Analytic metrics of one generated gland.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlandTruth {
    pub arc_px: f64,
    pub chord_px: f64,
    pub length_mm: f64,
    pub width_mm: f64,
    pub deformation_mm: f64,
    pub tortuosity: f64,
    pub straight: bool,
}

#[derive(Clone, Debug)]
pub struct PhantomTruth {
    pub roi: BinaryMask,
    /// Ribbon masks in spec order.
    pub glands: Vec<BinaryMask>,
    /// Ribbons plus bridges.
    pub gland_signal: BinaryMask,
    pub gland_metrics: Vec<GlandTruth>,
    /// Pixel-counted area ratio, percent.
    pub ga_percent: f64,
    /// Area ratio from the continuous shapes, percent.
    pub ga_analytic: f64,
    /// Signal index of the noise-free rendering under the truth masks.
    pub si: f64,
    /// `log10(gland / background)` from the phantom intensities.
    pub si_analytic: f64,
    pub clean_image: GrayImage,
    pub resolution: Resolution,
}

/// Longest automatic gland, kept below the fused-gland row-run threshold.
const MAX_AUTO_LENGTH: f64 = 320.0;
/// Largest half-width plus sinusoid amplitude the automatic layout makes room for.
const MAX_AUTO_HALF_WIDTH: f64 = 10.0;
/// Shortest automatic gland.
const MIN_AUTO_LENGTH: f64 = 130.0;
/// Horizontal clearance between the outermost glands and the eyelid, beyond the end margin.
const SIDE_CLEARANCE: f64 = 10.0;

impl PhantomSpec {
    /// Parses a TOML spec; absent fields take their defaults.
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec serializes")
    }

    /// Explicit gland list, or the automatic layout.
    pub fn resolved_glands(&self) -> Result<Vec<GlandSpec>> {
        if !self.glands.is_empty() {
            return Ok(self.glands.clone());
        }
        auto_layout(
            &self.eyelid,
            self.gland_count,
            &|_| GlandShape::straight(self.gland_width),
            self.end_margin,
        )
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(MeiboError::SpecInfeasible(m.to_string()));
        if self.width < 64 || self.height < 64 {
            return bad("image must be at least 64x64");
        }
        if self.gland_intensity <= self.background_intensity {
            return bad("gland intensity must exceed background intensity");
        }
        if !(self.noise_sigma >= 0.0) {
            return bad("noise sigma must be non-negative");
        }
        let e = &self.eyelid;
        if !(e.semi_x > 0.0 && e.semi_y > 0.0 && e.exponent > 0.0) {
            return bad("eyelid axes and exponent must be positive");
        }
        Ok(())
    }

    /// A varied corpus: eyelid geometry, gland count and shapes, noise up to 8,
    /// up to 8 lash streaks; every fourth phantom fuses one pair of glands.
    pub fn corpus(n: usize, seed: u64) -> Vec<PhantomSpec> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|i| corpus_member(i, n, &mut rng)).collect()
    }

    /// Whether a bridge fuses any pair of glands.
    pub fn is_fused(&self) -> bool {
        !self.bridges.is_empty()
    }
}

/// Shape of the `i`-th automatic gland.
#[derive(Clone, Debug)]
struct GlandShape {
    amplitude: f64,
    period: f64,
    phase: f64,
    width: WidthModel,
}

impl GlandShape {
    fn straight(w: f64) -> Self {
        Self {
            amplitude: 0.0,
            period: default_period(),
            phase: 0.0,
            width: WidthModel::Constant { width: w },
        }
    }
}

/// Half-width of the widest symmetric span whose ends still leave room for a gland of minimum length.
fn layout_reach(eyelid: &EyelidSpec, end_margin: f64) -> Result<f64> {
    let side = end_margin + SIDE_CLEARANCE;
    let need = MIN_AUTO_LENGTH + 2.0 * end_margin + 2.0 * MAX_AUTO_HALF_WIDTH + 2.0;
    let mut reach = eyelid.semi_x - side;
    while reach > 0.0
        && 2.0 * eyelid.half_height(eyelid.center_x + reach + 2.0 * MAX_AUTO_HALF_WIDTH) < need
    {
        reach -= 1.0;
    }
    if reach <= 0.0 {
        return Err(MeiboError::SpecInfeasible(
            "eyelid too small for glands".into(),
        ));
    }
    Ok(reach)
}

/// Evenly spaced glands across the part of the eyelid tall enough to hold them.
fn auto_layout(
    eyelid: &EyelidSpec,
    count: usize,
    shape: &dyn Fn(usize) -> GlandShape,
    end_margin: f64,
) -> Result<Vec<GlandSpec>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let reach = layout_reach(eyelid, end_margin)?;
    let x0 = eyelid.center_x - reach;
    let step = if count > 1 {
        2.0 * reach / (count - 1) as f64
    } else {
        0.0
    };
    (0..count)
        .map(|i| {
            let s = shape(i);
            let r = s.width.max() / 2.0;
            // half-pixel centers for even widths, whole-pixel for odd, so a straight gland covers exactly its width
            let offset = if (s.width.max().round() as i64) % 2 == 0 {
                0.5
            } else {
                0.0
            };
            let base_x = (if count > 1 {
                x0 + step * i as f64
            } else {
                eyelid.center_x
            })
            .floor()
                + offset;
            let reach_x = s.amplitude.abs() + r;
            let half = [base_x - reach_x, base_x, base_x + reach_x]
                .iter()
                .map(|&x| eyelid.half_height(x))
                .fold(f64::INFINITY, f64::min);
            let top = (eyelid.center_y - half + end_margin + r).ceil();
            let bottom = (eyelid.center_y + half - end_margin - r).floor();
            let length = (bottom - top).min(MAX_AUTO_LENGTH);
            if length < MIN_AUTO_LENGTH {
                return Err(MeiboError::SpecInfeasible(format!(
                    "gland {i} does not fit"
                )));
            }
            let top = top + ((bottom - top) - length) / 2.0;
            Ok(GlandSpec {
                base_x,
                top_y: top.round(),
                length: length.round(),
                amplitude: s.amplitude,
                period: s.period,
                phase: s.phase,
                width: s.width,
            })
        })
        .collect()
}

fn corpus_member(i: usize, n: usize, rng: &mut ChaCha8Rng) -> PhantomSpec {
    let eyelid = EyelidSpec {
        center_x: 544.0 + rng.random_range(-20.0..20.0),
        center_y: 256.0 + rng.random_range(-15.0..15.0),
        semi_x: rng.random_range(430.0..480.0),
        semi_y: rng.random_range(135.0..175.0),
        exponent: rng.random_range(3.5..6.0),
    };
    let end_margin = 10.0;
    let reach = layout_reach(&eyelid, end_margin).expect("corpus eyelids hold glands");
    let pitch = rng.random_range(32.0..36.0);
    let count = (2.0 * reach / pitch).floor() as usize + 1;
    // curved glands share one wave so neighbours stay roughly parallel
    let period = rng.random_range(120.0..240.0);
    let phase = rng.random_range(0.0..2.0 * PI);
    let shapes: Vec<GlandShape> = (0..count)
        .map(|_| {
            let w = rng.random_range(14.0..18.0f64).round();
            let width = match rng.random_range(0..6u32) {
                0 => WidthModel::Step {
                    top: w - 2.0,
                    bottom: w + 2.0,
                },
                1 => WidthModel::Taper {
                    top: w + 2.0,
                    bottom: w - 2.0,
                },
                _ => WidthModel::Constant { width: w },
            };
            if rng.random_bool(0.5) {
                GlandShape {
                    amplitude: 0.0,
                    period: default_period(),
                    phase: 0.0,
                    width,
                }
            } else {
                GlandShape {
                    amplitude: rng.random_range(4.0..8.0),
                    period,
                    phase,
                    width,
                }
            }
        })
        .collect();
    let glands = auto_layout(&eyelid, count, &|k| shapes[k].clone(), end_margin)
        .expect("corpus geometry always fits");
    let bridges = if i % 4 == 3 {
        let left = rng.random_range(2..count - 3);
        let (a, b) = (&glands[left], &glands[left + 1]);
        let lo = a.top_y.max(b.top_y) + 40.0;
        let hi = (a.top_y + a.length).min(b.top_y + b.length) - 40.0;
        vec![BridgeSpec {
            left,
            right: left + 1,
            y: rng.random_range(lo..hi).round(),
            height: rng.random_range(4.0..8.0f64).round(),
        }]
    } else {
        Vec::new()
    };
    let levels = [0.0, 2.0, 4.0, 6.0, 8.0];
    let background = rng.random_range(85.0..105.0);
    let contrast = rng.random_range(45.0..65.0);
    PhantomSpec {
        eyelid,
        glands,
        gland_count: count,
        end_margin,
        bridges,
        gland_intensity: background + contrast,
        background_intensity: background,
        surround_intensity: 0.0,
        noise_sigma: levels[i % levels.len()],
        lash_streaks: (i * 3 + n) % 9,
        highlights: 80,
        illumination_gradient: rng.random_range(0.0..0.3),
        seed: rng.random(),
        ..PhantomSpec::default()
    }
    .with_surround_offset(20.0)
}

impl PhantomSpec {
    fn with_surround_offset(mut self, offset: f64) -> Self {
        self.surround_intensity = self.background_intensity + offset;
        self
    }
}

/// Fraction of an edge ramp covered at signed distance `d` inside the boundary.
fn ramp(d: f64, softness: f64) -> f64 {
    if softness <= 0.0 {
        if d >= -1e-9 {
            1.0
        } else {
            0.0
        }
    } else {
        (0.5 + d / softness).clamp(0.0, 1.0)
    }
}

/// Pixels within the local half-width of a ribbon centerline, and the soft
/// coverage of the ribbon for rendering.
fn render_ribbon(g: &GlandSpec, w: usize, h: usize, softness: f64) -> (BinaryMask, Vec<f64>) {
    let mut mask = BinaryMask::empty(w, h).expect("valid dims");
    let mut cover = vec![0.0f64; w * h];
    let pts = g.centerline(0.25);
    let total = pts.last().map_or(0.0, |p| p.2).max(f64::EPSILON);
    let pad = softness.max(0.0) / 2.0;
    for &(cx, cy, arc) in &pts {
        let r = g.width.at(arc / total) / 2.0;
        let reach = r + pad;
        let (x0, x1) = (
            (cx - reach).floor().max(0.0) as usize,
            ((cx + reach).ceil() as usize).min(w - 1),
        );
        let (y0, y1) = (
            (cy - reach).floor().max(0.0) as usize,
            ((cy + reach).ceil() as usize).min(h - 1),
        );
        for y in y0..=y1 {
            for x in x0..=x1 {
                let d2 = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
                if d2 <= r * r + 1e-9 {
                    mask.set(x, y, true);
                }
                let c = &mut cover[y * w + x];
                *c = c.max(ramp(r - d2.sqrt(), softness));
            }
        }
    }
    (mask, cover)
}

fn render_bridge(b: &BridgeSpec, glands: &[GlandSpec], w: usize, h: usize) -> Result<BinaryMask> {
    let (Some(l), Some(r)) = (glands.get(b.left), glands.get(b.right)) else {
        return Err(MeiboError::SpecInfeasible(
            "bridge refers to a missing gland".into(),
        ));
    };
    let xa = l.x_at(b.y);
    let xb = r.x_at(b.y);
    let (xa, xb) = (xa.min(xb), xa.max(xb));
    let y0 = b.y - b.height / 2.0;
    BinaryMask::from_fn(w, h, |x, y| {
        let (x, y) = (x as f64, y as f64);
        x >= xa && x <= xb && y >= y0 && y < y0 + b.height
    })
}

/// Arc length, chord, and analytic metrics by quadrature along the sinusoid.
pub fn gland_truth(g: &GlandSpec, r: Resolution) -> GlandTruth {
    let n = 20_000;
    let dy = g.length / n as f64;
    let mut arc = 0.0;
    let mut curv = 0.0;
    let mut wsum = 0.0;
    // first pass: arc length
    let speed = |y: f64| (1.0 + g.dx(y).powi(2)).sqrt();
    for i in 0..n {
        arc += speed(g.top_y + (i as f64 + 0.5) * dy) * dy;
    }
    let mut s = 0.0;
    let mut widths = Vec::with_capacity(n);
    for i in 0..n {
        let y = g.top_y + (i as f64 + 0.5) * dy;
        let ds = speed(y) * dy;
        let u = (s + ds / 2.0) / arc;
        s += ds;
        let k = g.ddx(y).abs() / speed(y).powi(3);
        curv += k * ds;
        let wd = g.width.at(u);
        wsum += wd * ds;
        widths.push((wd, ds));
    }
    let mean_w = wsum / arc;
    let sd_w = (widths
        .iter()
        .map(|(wd, ds)| (wd - mean_w).powi(2) * ds)
        .sum::<f64>()
        / arc)
        .sqrt();
    let (x0, y0) = (g.x_at(g.top_y), g.top_y);
    let (x1, y1) = (g.x_at(g.top_y + g.length), g.top_y + g.length);
    let chord = ((x1 - x0).powi(2) + (y1 - y0).powi(2)).sqrt();
    let rr = r.mm_per_px();
    GlandTruth {
        arc_px: arc,
        chord_px: chord,
        length_mm: rr * arc,
        width_mm: rr * mean_w,
        deformation_mm: rr * sd_w,
        tortuosity: if g.is_straight() {
            0.0
        } else {
            arc / chord * (curv / arc) / rr
        },
        straight: g.is_straight(),
    }
}

/// Continuous area of a ribbon: swept width plus the two end caps.
fn ribbon_area(g: &GlandSpec, t: &GlandTruth, r: Resolution) -> f64 {
    let r0 = g.width.at(0.0) / 2.0;
    let r1 = g.width.at(1.0) / 2.0;
    t.width_mm / r.mm_per_px() * t.arc_px + PI * (r0 * r0 + r1 * r1) / 2.0
}

/// Renders the phantom and its truth with the default resolution.
pub fn generate(spec: &PhantomSpec) -> Result<(GrayImage, PhantomTruth)> {
    generate_with(spec, Resolution::DEFAULT)
}

pub fn generate_with(
    spec: &PhantomSpec,
    resolution: Resolution,
) -> Result<(GrayImage, PhantomTruth)> {
    spec.validate()?;
    let (w, h) = (spec.width, spec.height);
    let glands = spec.resolved_glands()?;

    let roi = BinaryMask::from_fn(w, h, |x, y| spec.eyelid.contains(x as f64, y as f64))?;
    let inner = erode(&roi, &StructuringElement::disk(5));
    let (masks, covers): (Vec<BinaryMask>, Vec<Vec<f64>>) = glands
        .iter()
        .map(|g| render_ribbon(g, w, h, spec.edge_softness))
        .unzip();
    let mut gland_signal = roi.blank_like();
    for (i, m) in masks.iter().enumerate() {
        if !m.and_not(&inner)?.is_empty() {
            return Err(MeiboError::SpecInfeasible(format!(
                "gland {i} is not inside the eyelid with a 2 px margin"
            )));
        }
        if gland_signal.intersection_count(m)? > 0 {
            return Err(MeiboError::SpecInfeasible(format!(
                "gland {i} overlaps another gland"
            )));
        }
        gland_signal.union_with(m)?;
    }
    let mut bridge_area = 0.0;
    for b in &spec.bridges {
        let bm = render_bridge(b, &glands, w, h)?.and(&roi)?;
        bridge_area += bm.and_not(&gland_signal)?.count() as f64;
        gland_signal.union_with(&bm)?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let lashes = render_lashes(spec, &mut rng);
    let spots = render_highlights(spec, &mut rng);

    let mut gland_cover = vec![0.0f64; w * h];
    for c in &covers {
        for (a, &b) in gland_cover.iter_mut().zip(c) {
            *a = a.max(b);
        }
    }
    for b in &spec.bridges {
        for (x, y) in render_bridge(b, &glands, w, h)?.and(&roi)?.foreground() {
            gland_cover[y * w + x] = 1.0;
        }
    }
    let base = |x: usize, y: usize| -> f64 {
        let v = if lashes.get(x, y) {
            spec.lash_intensity
        } else if spots.get(x, y) {
            spec.highlight_intensity
        } else {
            let lid = if roi.get(x, y) {
                spec.background_intensity
            } else {
                spec.surround_intensity
            };
            lid + (spec.gland_intensity - spec.background_intensity) * gland_cover[y * w + x]
        };
        let f = 1.0 + spec.illumination_gradient * (x as f64 / (w - 1) as f64 - 0.5);
        v * f
    };
    let clean_image = GrayImage::from_fn(w, h, |x, y| base(x, y).round().clamp(0.0, 255.0) as u8)?;
    let mut noise_rng = ChaCha8Rng::seed_from_u64(spec.seed);
    noise_rng.set_stream(1);
    let image = if spec.noise_sigma > 0.0 {
        let normal = Normal::new(0.0, spec.noise_sigma)
            .map_err(|e| MeiboError::SpecInfeasible(e.to_string()))?;
        GrayImage::from_fn(w, h, |x, y| {
            (base(x, y) + normal.sample(&mut noise_rng))
                .round()
                .clamp(0.0, 255.0) as u8
        })?
    } else {
        clean_image.clone()
    };

    let gland_metrics: Vec<GlandTruth> =
        glands.iter().map(|g| gland_truth(g, resolution)).collect();
    let roi_area = roi.count() as f64;
    let ga_percent = 100.0 * gland_signal.count() as f64 / roi_area;
    let analytic_glands: f64 = glands
        .iter()
        .zip(&gland_metrics)
        .map(|(g, t)| ribbon_area(g, t, resolution))
        .sum();
    let ga_analytic = 100.0 * (analytic_glands + bridge_area) / spec.eyelid.area();
    let union = masks.iter().fold(roi.blank_like(), |mut u, m| {
        u.union_with(m).expect("same dims");
        u
    });
    let si = signal_index_of_masks(&clean_image, &union, &gland_signal, &roi)?;
    let si_analytic = (spec.gland_intensity / spec.background_intensity).log10();

    Ok((
        image,
        PhantomTruth {
            roi,
            glands: masks,
            gland_signal,
            gland_metrics,
            ga_percent,
            ga_analytic,
            si,
            si_analytic,
            clean_image,
            resolution,
        },
    ))
}

/// Elliptical bright spots at least 30 px outside the eyelid.
fn render_highlights(spec: &PhantomSpec, rng: &mut ChaCha8Rng) -> BinaryMask {
    let (w, h) = (spec.width, spec.height);
    let e = &spec.eyelid;
    let clear = EyelidSpec {
        semi_x: e.semi_x + 30.0,
        semi_y: e.semi_y + 30.0,
        ..e.clone()
    };
    let mut mask = BinaryMask::empty(w, h).expect("valid dims");
    let mut placed = 0;
    for _ in 0..spec.highlights * 50 {
        if placed == spec.highlights {
            break;
        }
        let cx = rng.random_range(0.0..w as f64);
        let cy = rng.random_range(0.0..h as f64);
        let a: f64 = rng.random_range(8.0..20.0);
        let b: f64 = rng.random_range(5.0..12.0);
        let t: f64 = rng.random_range(0.0..PI);
        let (c, s) = (t.cos(), t.sin());
        let near = [(a, 0.0), (-a, 0.0), (0.0, b), (0.0, -b)]
            .iter()
            .any(|&(u, v)| clear.contains(cx + u * c - v * s, cy + u * s + v * c));
        if near || clear.contains(cx, cy) {
            continue;
        }
        let r = a.max(b).ceil() as isize;
        for y in (cy as isize - r).max(0)..=(cy as isize + r).min(h as isize - 1) {
            for x in (cx as isize - r).max(0)..=(cx as isize + r).min(w as isize - 1) {
                let (dx, dy) = (x as f64 - cx, y as f64 - cy);
                let (u, v) = (dx * c + dy * s, -dx * s + dy * c);
                if (u / a).powi(2) + (v / b).powi(2) <= 1.0 {
                    mask.set(x as usize, y as usize, true);
                }
            }
        }
        placed += 1;
    }
    mask
}

/// Thin dark streaks crossing the upper eyelid margin, clear of the glands.
fn render_lashes(spec: &PhantomSpec, rng: &mut ChaCha8Rng) -> BinaryMask {
    let (w, h) = (spec.width, spec.height);
    let mut mask = BinaryMask::empty(w, h).expect("valid dims");
    let e = &spec.eyelid;
    for _ in 0..spec.lash_streaks {
        let x = e.center_x + rng.random_range(-0.7..0.7) * e.semi_x;
        let y_edge = e.center_y - e.half_height(x);
        let len = rng.random_range(30.0..55.0);
        let tilt: f64 = rng.random_range(-0.5..0.5);
        // the streak ends a few pixels inside the eyelid, well above any gland
        let inside = (spec.end_margin * 0.5).min(10.0);
        let (ex, ey) = (x, y_edge + inside);
        let (sx, sy) = (x + tilt.sin() * len, y_edge + inside - tilt.cos() * len);
        let steps = (len * 4.0) as usize;
        for k in 0..=steps {
            let t = k as f64 / steps as f64;
            let px = sx + (ex - sx) * t;
            let py = sy + (ey - sy) * t;
            for (dx, dy) in [(0.0, 0.0), (1.0, 0.0)] {
                let (qx, qy) = ((px + dx).round(), (py + dy).round());
                if qx >= 0.0 && qy >= 0.0 && (qx as usize) < w && (qy as usize) < h {
                    mask.set(qx as usize, qy as usize, true);
                }
            }
        }
    }
    mask
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_spec_is_deterministic() {
        let spec = PhantomSpec::default();
        let (a, ta) = generate(&spec).unwrap();
        let (b, tb) = generate(&spec).unwrap();
        assert_eq!(a.dims(), (1088, 512));
        assert_eq!(a, b);
        assert_eq!(ta.gland_signal, tb.gland_signal);
        assert_eq!(ta.glands.len(), 24);
    }

    #[test]
    fn straight_constant_glands_have_zero_ti_and_di() {
        let spec = PhantomSpec {
            gland_count: 12,
            ..PhantomSpec::default()
        };
        let (_, t) = generate(&spec).unwrap();
        assert_eq!(t.gland_metrics.len(), 12);
        for g in &t.gland_metrics {
            assert_eq!(g.tortuosity, 0.0);
            assert!(g.deformation_mm.abs() < 1e-9);
            assert!((g.width_mm - 0.48).abs() < 1e-9);
        }
    }

    #[test]
    fn sinusoid_arc_length_matches_quadrature() {
        let g = GlandSpec {
            base_x: 100.0,
            top_y: 20.0,
            length: 240.0,
            amplitude: 10.0,
            period: 120.0,
            phase: 0.0,
            width: WidthModel::Constant { width: 12.0 },
        };
        let t = gland_truth(&g, Resolution::DEFAULT);
        let fine = g.centerline(0.01).last().unwrap().2;
        assert!((t.arc_px - fine).abs() / fine < 1e-4);
        assert!(t.arc_px > 240.0);
    }

    #[test]
    fn analytic_and_counted_ga_agree() {
        for spec in PhantomSpec::corpus(4, 11) {
            let (_, t) = generate(&spec).unwrap();
            assert!(
                (t.ga_percent - t.ga_analytic).abs() <= 0.5,
                "{} vs {}",
                t.ga_percent,
                t.ga_analytic
            );
        }
    }

    #[test]
    fn masks_are_disjoint_and_inside_roi() {
        let spec = &PhantomSpec::corpus(3, 5)[2];
        let (_, t) = generate(spec).unwrap();
        for (i, a) in t.glands.iter().enumerate() {
            assert!(a.and_not(&t.roi).unwrap().is_empty());
            for b in &t.glands[i + 1..] {
                assert_eq!(a.intersection_count(b).unwrap(), 0);
            }
        }
    }

    #[test]
    fn clean_si_is_exact_without_gradient_or_lashes() {
        let spec = PhantomSpec {
            illumination_gradient: 0.0,
            lash_streaks: 0,
            gland_intensity: 160.0,
            background_intensity: 80.0,
            edge_softness: 0.0,
            ..PhantomSpec::default()
        };
        let (_, t) = generate(&spec).unwrap();
        assert_eq!(t.si, t.si_analytic);
    }

    #[test]
    fn gland_outside_eyelid_is_infeasible() {
        let spec = PhantomSpec {
            glands: vec![GlandSpec {
                base_x: 544.0,
                top_y: 100.0,
                length: 300.0,
                amplitude: 0.0,
                period: 100.0,
                phase: 0.0,
                width: WidthModel::Constant { width: 12.0 },
            }],
            ..PhantomSpec::default()
        };
        assert!(matches!(
            generate(&spec),
            Err(MeiboError::SpecInfeasible(_))
        ));
    }

    #[test]
    fn spec_round_trips_through_toml() {
        let spec = &PhantomSpec::corpus(4, 3)[3];
        let text = toml::to_string(spec).unwrap();
        let back: PhantomSpec = toml::from_str(&text).unwrap();
        assert_eq!(&back, spec);
        let minimal: PhantomSpec = toml::from_str("seed = 9\nnoise_sigma = 0.0").unwrap();
        assert_eq!(minimal.width, 1088);
        assert_eq!(minimal.seed, 9);
    }
}

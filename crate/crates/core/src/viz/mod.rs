//! SVG renderers for agreement visualizations.
//!
//! All renderers are pure and format numbers with a fixed precision, so equal
//! inputs give byte-identical documents.

mod heatmap;
mod lift;
mod loess;
mod scatter;
mod svg;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::agreement::{EvalMode, KRange};
use crate::error::{Error, Result};

pub use heatmap::{default_item_order, render_heatmap};
pub use lift::{lift_bands, positive_lift_area, render_lift, LiftBand};
pub use loess::{loess_at, loess_surface, render_loess_overlay, LoessGrid};
pub use scatter::render_scatter;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotType {
    Scatter,
    Heatmap,
    Loess,
    Lift,
}

impl PlotType {
    pub fn name(self) -> &'static str {
        match self {
            PlotType::Scatter => "scatter",
            PlotType::Heatmap => "heatmap",
            PlotType::Loess => "loess",
            PlotType::Lift => "lift",
        }
    }
}

impl std::str::FromStr for PlotType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [PlotType::Scatter, PlotType::Heatmap, PlotType::Loess, PlotType::Lift]
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Unknown { what: "plot type", name: s.to_string() })
    }
}

/// Which configuration supplies the plotted positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfigSide {
    #[serde(rename = "A", alias = "a")]
    A,
    #[default]
    #[serde(rename = "B", alias = "b")]
    B,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    #[default]
    Simple,
    Compare,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    All,
    #[default]
    Item,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamMode {
    #[default]
    Single,
    Multiple,
}

/// An sRGB color, serialized as `#rrggbb`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Rgb(pub u8, pub u8, pub u8);

impl Rgb {
    pub const WHITE: Rgb = Rgb(255, 255, 255);

    fn lerp(self, other: Rgb, t: f64) -> Rgb {
        let f = |a: u8, b: u8| (a as f64 + (b as f64 - a as f64) * t).round().clamp(0.0, 255.0) as u8;
        Rgb(f(self.0, other.0), f(self.1, other.1), f(self.2, other.2))
    }

    /// `self` painted with opacity `alpha` over `base`.
    pub fn over(self, base: Rgb, alpha: f64) -> Rgb {
        base.lerp(self, alpha)
    }
}

impl fmt::Display for Rgb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{:02x}{:02x}{:02x}", self.0, self.1, self.2)
    }
}

impl From<Rgb> for String {
    fn from(c: Rgb) -> String {
        c.to_string()
    }
}

impl TryFrom<String> for Rgb {
    type Error = Error;

    fn try_from(s: String) -> Result<Rgb> {
        s.parse()
    }
}

impl std::str::FromStr for Rgb {
    type Err = Error;

    fn from_str(s: &str) -> Result<Rgb> {
        let bad = || Error::InvalidParameter(format!("color `{s}` is not #rrggbb"));
        let hex = s.strip_prefix('#').filter(|h| h.len() == 6).ok_or_else(bad)?;
        let part = |i: usize| u8::from_str_radix(&hex[i..i + 2], 16).map_err(|_| bad());
        Ok(Rgb(part(0)?, part(2)?, part(4)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Palette {
    pub negative: Rgb,
    pub midpoint: Rgb,
    pub positive: Rgb,
    /// Per-technique colors for lift fills and categorical points, cycled.
    pub techniques: Vec<Rgb>,
}

impl Default for Palette {
    fn default() -> Self {
        Self {
            negative: Rgb(235, 40, 40),
            midpoint: Rgb(235, 235, 235),
            positive: Rgb(40, 40, 235),
            techniques: vec![
                Rgb(31, 119, 180),
                Rgb(255, 127, 14),
                Rgb(44, 160, 44),
                Rgb(214, 39, 40),
                Rgb(148, 103, 189),
                Rgb(140, 86, 75),
            ],
        }
    }
}

impl Palette {
    pub fn technique(&self, i: usize) -> Rgb {
        if self.techniques.is_empty() {
            Rgb(0, 0, 0)
        } else {
            self.techniques[i % self.techniques.len()]
        }
    }
}

/// Styling shared by the plot types.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlotStyle {
    pub width: f64,
    pub height: f64,
    pub palette: Palette,
    pub point_radius: f64,
    /// Loess grid resolution per axis.
    pub grid: usize,
    /// Loess span (fraction of items in each local fit).
    pub span: f64,
    /// 3D projection angles in degrees.
    pub azimuth: f64,
    pub elevation: f64,
    /// Opacity of each lift fill before compositing.
    pub fill_alpha: f64,
    pub title: Option<String>,
}

impl Default for PlotStyle {
    fn default() -> Self {
        Self {
            width: 640.0,
            height: 480.0,
            palette: Palette::default(),
            point_radius: 3.0,
            grid: 60,
            span: 0.75,
            azimuth: 30.0,
            elevation: 20.0,
            fill_alpha: 0.45,
            title: None,
        }
    }
}

/// The design-framework settings of one plot.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderSpec {
    pub config_side: ConfigSide,
    pub comp: Comparison,
    /// Rank-movement classes; only used by heatmaps.
    pub eval: Option<EvalMode>,
    /// Color by agreement relative to random (`AR*`) instead of raw `AR`.
    pub adjust: bool,
    pub range_k: KRange,
    pub aggr: Aggregation,
    pub param: ParamMode,
    pub plot: PlotStyle,
}

impl RenderSpec {
    pub fn color_mode(&self) -> ColorMode {
        if self.comp == Comparison::Compare {
            ColorMode::Comparative
        } else if self.adjust {
            ColorMode::RelativeToRandom
        } else {
            ColorMode::Absolute
        }
    }

    /// Checks the spec against a plot type and item count; returns the
    /// resolved neighborhood sizes.
    pub fn validate(&self, plot: PlotType, n: usize) -> Result<Vec<usize>> {
        let ks = self.range_k.resolve(n)?;
        if self.eval.is_some() && plot != PlotType::Heatmap {
            return Err(Error::InvalidParameter(format!("eval applies to heatmaps only, not {}", plot.name())));
        }
        let s = &self.plot;
        if !(s.width > 0.0 && s.height > 0.0 && s.width.is_finite() && s.height.is_finite()) {
            return Err(Error::InvalidParameter("canvas size must be positive".into()));
        }
        if !(s.point_radius > 0.0) {
            return Err(Error::InvalidParameter("point_radius must be positive".into()));
        }
        if !(0.0 < s.fill_alpha && s.fill_alpha <= 1.0) {
            return Err(Error::InvalidParameter("fill_alpha must lie in (0, 1]".into()));
        }
        if plot == PlotType::Loess {
            if !(s.span > 0.0 && s.span <= 1.0) {
                return Err(Error::InvalidParameter(format!("span must lie in (0, 1], got {}", s.span)));
            }
            if s.grid < 1 {
                return Err(Error::InvalidParameter("grid must be >= 1".into()));
            }
        }
        Ok(ks)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColorMode {
    /// Sequential ramp over `[0, 1]`.
    Absolute,
    /// Diverging around 0 (agreement above or below random).
    RelativeToRandom,
    /// Diverging around 0 (first technique better is blue).
    Comparative,
}

/// Maps values to colors.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorScale {
    pub mode: ColorMode,
    pub lo: f64,
    pub hi: f64,
    negative: Rgb,
    midpoint: Rgb,
    positive: Rgb,
}

impl ColorScale {
    pub fn new(mode: ColorMode, lo: f64, hi: f64, palette: &Palette) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidParameter(format!("color domain [{lo}, {hi}] is empty")));
        }
        if mode != ColorMode::Absolute && (lo + hi).abs() > 1e-12 * hi.abs() {
            return Err(Error::InvalidParameter("diverging color domains must be symmetric about 0".into()));
        }
        Ok(Self { mode, lo, hi, negative: palette.negative, midpoint: palette.midpoint, positive: palette.positive })
    }

    /// Absolute scales use `[0, 1]`; diverging scales are symmetric about 0
    /// at the 98th percentile of `|v|`, with extremes clipped.
    pub fn fit(mode: ColorMode, values: &[f64], palette: &Palette) -> Result<Self> {
        match mode {
            ColorMode::Absolute => Self::new(mode, 0.0, 1.0, palette),
            _ => {
                let mut mags: Vec<f64> = values.iter().map(|v| v.abs()).filter(|v| v.is_finite()).collect();
                mags.sort_by(f64::total_cmp);
                let bound = if mags.is_empty() {
                    0.0
                } else {
                    let idx = ((0.98 * mags.len() as f64).ceil() as usize).clamp(1, mags.len()) - 1;
                    mags[idx]
                };
                let bound = if bound > 0.0 { bound } else { 1.0 };
                Self::new(mode, -bound, bound, palette)
            }
        }
    }

    pub fn color(&self, v: f64) -> Rgb {
        let t = ((v - self.lo) / (self.hi - self.lo)).clamp(0.0, 1.0);
        let t = if t.is_nan() { 0.5 } else { t };
        match self.mode {
            ColorMode::Absolute => self.midpoint.lerp(self.positive, t),
            _ => {
                if t < 0.5 {
                    self.negative.lerp(self.midpoint, 2.0 * t)
                } else {
                    self.midpoint.lerp(self.positive, 2.0 * t - 1.0)
                }
            }
        }
    }
}

pub(crate) fn check_finite(values: &[f64], what: &str) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::InvalidParameter(format!("{what} entry {i} is not finite"))),
        None => Ok(()),
    }
}

use std::fmt::Write;

use super::Rgb;

/// Fixed-precision coordinate formatting (no negative zero).
pub(crate) fn num(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".to_string()
    } else {
        s
    }
}

pub(crate) fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Minimal SVG 1.1 document builder.
pub(crate) struct Svg {
    buf: String,
}

impl Svg {
    pub fn new(width: f64, height: f64) -> Self {
        let mut buf = String::new();
        buf.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        let _ = writeln!(
            buf,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">",
            w = num(width),
            h = num(height)
        );
        let _ = writeln!(
            buf,
            "<rect class=\"background\" x=\"0.000\" y=\"0.000\" width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>",
            num(width),
            num(height)
        );
        Self { buf }
    }

    pub fn open_group(&mut self, class: &str) {
        let _ = writeln!(self.buf, "<g class=\"{}\">", escape(class));
    }

    pub fn close_group(&mut self) {
        self.buf.push_str("</g>\n");
    }

    pub fn rect(&mut self, class: &str, x: f64, y: f64, w: f64, h: f64, fill: Option<Rgb>, extra: &str) {
        let fill = fill.map_or("none".to_string(), |c| c.to_string());
        let _ = writeln!(
            self.buf,
            "<rect class=\"{class}\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{fill}\"{extra}/>",
            num(x),
            num(y),
            num(w),
            num(h)
        );
    }

    pub fn circle(&mut self, class: &str, cx: f64, cy: f64, r: f64, fill: Rgb, stroke: Option<Rgb>, extra: &str) {
        let stroke = stroke.map_or(String::new(), |s| format!(" stroke=\"{s}\" stroke-width=\"1\""));
        let _ = writeln!(
            self.buf,
            "<circle class=\"{class}\" cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{fill}\"{stroke}{extra}/>",
            num(cx),
            num(cy),
            num(r)
        );
    }

    fn points(pts: &[(f64, f64)]) -> String {
        let parts: Vec<String> = pts.iter().map(|&(x, y)| format!("{},{}", num(x), num(y))).collect();
        parts.join(" ")
    }

    pub fn polygon(&mut self, class: &str, pts: &[(f64, f64)], fill: Rgb, extra: &str) {
        let _ = writeln!(
            self.buf,
            "<polygon class=\"{class}\" points=\"{}\" fill=\"{fill}\" stroke=\"none\"{extra}/>",
            Self::points(pts)
        );
    }

    pub fn polyline(&mut self, class: &str, pts: &[(f64, f64)], stroke: Rgb, width: f64, dash: Option<&str>) {
        let dash = dash.map_or(String::new(), |d| format!(" stroke-dasharray=\"{d}\""));
        let _ = writeln!(
            self.buf,
            "<polyline class=\"{class}\" points=\"{}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"{}\"{dash}/>",
            Self::points(pts),
            num(width)
        );
    }

    pub fn line(&mut self, class: &str, a: (f64, f64), b: (f64, f64), stroke: Rgb, dash: Option<&str>) {
        let dash = dash.map_or(String::new(), |d| format!(" stroke-dasharray=\"{d}\""));
        let _ = writeln!(
            self.buf,
            "<line class=\"{class}\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{stroke}\" stroke-width=\"1\"{dash}/>",
            num(a.0),
            num(a.1),
            num(b.0),
            num(b.1)
        );
    }

    pub fn text(&mut self, class: &str, x: f64, y: f64, size: f64, anchor: &str, content: &str) {
        let _ = writeln!(
            self.buf,
            "<text class=\"{class}\" x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"{}\" text-anchor=\"{anchor}\">{}</text>",
            num(x),
            num(y),
            num(size),
            escape(content)
        );
    }

    pub fn finish(mut self) -> String {
        self.buf.push_str("</svg>\n");
        self.buf
    }
}

/// Affine map from a data box onto a pixel box, y pointing up.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Frame {
    pub px: f64,
    pub py: f64,
    pub pw: f64,
    pub ph: f64,
    pub x0: f64,
    pub y0: f64,
    pub sx: f64,
    pub sy: f64,
}

impl Frame {
    /// Independent scales on each axis.
    pub fn stretch(px: f64, py: f64, pw: f64, ph: f64, xr: (f64, f64), yr: (f64, f64)) -> Self {
        let (xr, yr) = (widen(xr), widen(yr));
        Self { px, py, pw, ph, x0: xr.0, y0: yr.0, sx: pw / (xr.1 - xr.0), sy: ph / (yr.1 - yr.0) }
    }

    /// One scale for both axes, data centered in the pixel box.
    pub fn equal(px: f64, py: f64, pw: f64, ph: f64, xr: (f64, f64), yr: (f64, f64)) -> Self {
        let (xr, yr) = (widen(xr), widen(yr));
        let s = (pw / (xr.1 - xr.0)).min(ph / (yr.1 - yr.0));
        let x0 = 0.5 * (xr.0 + xr.1) - 0.5 * pw / s;
        let y0 = 0.5 * (yr.0 + yr.1) - 0.5 * ph / s;
        Self { px, py, pw, ph, x0, y0, sx: s, sy: s }
    }

    pub fn map(&self, x: f64, y: f64) -> (f64, f64) {
        (self.px + (x - self.x0) * self.sx, self.py + self.ph - (y - self.y0) * self.sy)
    }
}

fn widen((lo, hi): (f64, f64)) -> (f64, f64) {
    if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, lo + 0.5)
    }
}

pub(crate) fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// Caption text for a list of labelled aggregate values.
pub(crate) fn caption(aggregates: &[(String, f64)]) -> String {
    let parts: Vec<String> = aggregates.iter().map(|(name, v)| format!("{name}: {v:.4}")).collect();
    parts.join("   ")
}

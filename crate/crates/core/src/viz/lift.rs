use std::collections::BTreeMap;

use super::svg::{Frame, Svg};
use super::{PlotType, RenderSpec, Rgb};
use crate::agreement::{psi, AgreementProfile};
use crate::error::{Error, Result};

/// A filled region of the lift plot, in data coordinates `(k, agreement)`,
/// covered by the listed techniques (indices into the profile list).
#[derive(Debug, Clone, PartialEq)]
pub struct LiftBand {
    pub cover: Vec<usize>,
    pub polygon: Vec<(f64, f64)>,
}

/// Lift above baseline at `k = 0..=n-1`, with `AR_0 = E_0 = 0`.
fn lift_heights(p: &AgreementProfile) -> Vec<f64> {
    let n = p.n();
    let mut g = vec![0.0; n];
    for k in 1..n {
        g[k] = p.ar_adjusted_at(k).max(0.0);
    }
    g
}

/// Sum of trapezoids of `max(AR_k - k/(n-1), 0)` along the plotted curve,
/// which starts at `k = 0`.
pub fn positive_lift_area(profile: &AgreementProfile) -> f64 {
    let g = lift_heights(profile);
    g.windows(2).map(|w| 0.5 * (w[0] + w[1])).sum()
}

struct Strip {
    top: Vec<(f64, f64)>,
    bottom: Vec<(f64, f64)>,
}

/// Decomposes the per-technique fills between curve and baseline into
/// regions of constant coverage, split where curves cross.
pub fn lift_bands(profiles: &[&AgreementProfile]) -> Result<Vec<LiftBand>> {
    let first = profiles.first().ok_or_else(|| Error::InvalidParameter("no profile to plot".into()))?;
    let n = first.n();
    if let Some(p) = profiles.iter().find(|p| p.n() != n) {
        return Err(Error::ShapeMismatch(format!("profiles have n = {n} and n = {}", p.n())));
    }
    let heights: Vec<Vec<f64>> = profiles.iter().map(|p| lift_heights(p)).collect();
    let t = profiles.len();
    let scale = (n - 1) as f64;
    let mut open: BTreeMap<Vec<usize>, Strip> = BTreeMap::new();
    let mut done = Vec::new();
    for k in 0..n - 1 {
        let a: Vec<f64> = heights.iter().map(|h| h[k]).collect();
        let b: Vec<f64> = heights.iter().map(|h| h[k + 1]).collect();
        let mut cuts = vec![0.0, 1.0];
        for u in 0..t {
            for v in (u + 1)..t {
                let (da, db) = (a[u] - a[v], b[u] - b[v]);
                if da * db < 0.0 {
                    cuts.push(da / (da - db));
                }
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        for c in cuts.windows(2) {
            let (s0, s1) = (c[0], c[1]);
            if s1 <= s0 {
                continue;
            }
            let at = |u: usize, s: f64| a[u] + (b[u] - a[u]) * s;
            let mid = 0.5 * (s0 + s1);
            let mut order: Vec<usize> = (0..t).collect();
            order.sort_by(|&u, &v| at(u, mid).total_cmp(&at(v, mid)).then(u.cmp(&v)));
            let (x0, x1) = (k as f64 + s0, k as f64 + s1);
            let mut touched = Vec::new();
            let (mut lo0, mut lo1) = (0.0, 0.0);
            for (j, &u) in order.iter().enumerate() {
                let (hi0, hi1) = (at(u, s0), at(u, s1));
                if hi0 - lo0 > 1e-12 || hi1 - lo1 > 1e-12 {
                    let mut cover: Vec<usize> = order[j..].to_vec();
                    cover.sort_unstable();
                    let baseline = |x: f64| x / scale;
                    let strip = open.entry(cover.clone()).or_insert_with(|| Strip {
                        top: vec![(x0, baseline(x0) + hi0)],
                        bottom: vec![(x0, baseline(x0) + lo0)],
                    });
                    strip.top.push((x1, baseline(x1) + hi1));
                    strip.bottom.push((x1, baseline(x1) + lo1));
                    touched.push(cover);
                }
                lo0 = hi0;
                lo1 = hi1;
            }
            let stale: Vec<Vec<usize>> = open.keys().filter(|key| !touched.contains(key)).cloned().collect();
            for key in stale {
                let strip = open.remove(&key).expect("key listed");
                done.push(close(key, strip));
            }
        }
    }
    for (key, strip) in open {
        done.push(close(key, strip));
    }
    Ok(done)
}

fn close(cover: Vec<usize>, strip: Strip) -> LiftBand {
    let mut polygon = strip.top;
    polygon.extend(strip.bottom.into_iter().rev());
    LiftBand { cover, polygon }
}

/// Performance-lift plot: `AR_k` curves over `k`, a dashed baseline at the
/// random expectation `k/(n-1)`, and translucent fills where a curve lies
/// above the baseline. Overlapping fills are composited in technique order.
pub fn render_lift(profiles: &[(&str, &AgreementProfile)], spec: &RenderSpec) -> Result<String> {
    let refs: Vec<&AgreementProfile> = profiles.iter().map(|p| p.1).collect();
    let bands = lift_bands(&refs)?;
    let n = refs[0].n();
    if n < 3 {
        return Err(Error::TooSmall { what: "items for a lift plot", min: 3, got: n });
    }
    spec.validate(PlotType::Lift, n)?;
    let style = &spec.plot;
    let (w, h) = (style.width, style.height);
    let legend_h = 16.0 * profiles.len() as f64;
    let frame = Frame::stretch(60.0, 30.0, w - 80.0, h - 80.0 - legend_h, (0.0, (n - 1) as f64), (0.0, 1.0));
    let mut svg = Svg::new(w, h);
    if let Some(t) = &style.title {
        svg.text("title", w / 2.0, 20.0, 14.0, "middle", t);
    }
    let extra = format!(" data-k-max=\"{}\"", n - 1);
    svg.rect("frame", frame.px, frame.py, frame.pw, frame.ph, None, &format!("{extra} stroke=\"#000000\""));
    svg.open_group("fills");
    let blend = |cover: &[usize]| {
        cover.iter().fold(Rgb::WHITE, |acc, &u| style.palette.technique(u).over(acc, style.fill_alpha))
    };
    for band in &bands {
        let pts: Vec<(f64, f64)> = band.polygon.iter().map(|&(x, y)| frame.map(x, y)).collect();
        let cover: Vec<String> = band.cover.iter().map(usize::to_string).collect();
        svg.polygon("lift-fill", &pts, blend(&band.cover), &format!(" data-cover=\"{}\"", cover.join(",")));
    }
    svg.close_group();
    svg.line("baseline", frame.map(0.0, 0.0), frame.map((n - 1) as f64, 1.0), Rgb(0, 0, 0), Some("6 4"));
    for (u, p) in refs.iter().enumerate() {
        let mut pts = vec![frame.map(0.0, 0.0)];
        pts.extend((1..n).map(|k| frame.map(k as f64, p.ar_at(k))));
        svg.polyline("lift-curve", &pts, style.palette.technique(u), 1.5, None);
    }
    // axes
    for i in 0..=4 {
        let v = i as f64 / 4.0;
        let (x, y) = frame.map(0.0, v);
        svg.text("tick", x - 6.0, y + 4.0, 10.0, "end", &format!("{v:.2}"));
        let kx = ((n - 1) as f64 * v).round();
        let (x, y) = frame.map(kx, 0.0);
        svg.text("tick", x, y + 14.0, 10.0, "middle", &format!("{kx}"));
    }
    svg.text("axis-label", frame.px + frame.pw / 2.0, frame.py + frame.ph + 30.0, 11.0, "middle", "k");
    let ly0 = frame.py + frame.ph + 44.0;
    for (u, (name, p)) in profiles.iter().enumerate() {
        let y = ly0 + 16.0 * u as f64;
        svg.line("legend-key", (frame.px, y - 4.0), (frame.px + 24.0, y - 4.0), style.palette.technique(u), None);
        let label = match psi(p) {
            Ok(v) => format!("{name}  psi = {v:.4}"),
            Err(_) => name.to_string(),
        };
        svg.text("legend", frame.px + 30.0, y, 11.0, "start", &label);
    }
    Ok(svg.finish())
}

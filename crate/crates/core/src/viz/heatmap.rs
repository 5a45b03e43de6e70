use super::svg::{caption, Svg};
use super::{check_finite, ColorMode, ColorScale, PlotType, RenderSpec};
use crate::error::{Error, Result};
use crate::geometry::{check_permutation, Configuration};

/// Items sorted by ascending first coordinate (ties by index).
pub fn default_item_order(embedding: &Configuration) -> Vec<usize> {
    let mut order: Vec<usize> = (0..embedding.n()).collect();
    order.sort_by(|&a, &b| embedding.get(a, 0).total_cmp(&embedding.get(b, 0)).then(a.cmp(&b)));
    order
}

/// Item-by-k heatmap. `per_item_by_k` is `n x |range_k|` row-major, with the
/// columns following the spec's resolved `range_k`. With `binary`, values are
/// reduced to their sign (1, -1 or 0) before coloring.
pub fn render_heatmap(
    per_item_by_k: &[f64],
    item_order: &[usize],
    aggregates: &[(String, f64)],
    spec: &RenderSpec,
    binary: bool,
) -> Result<String> {
    let n = item_order.len();
    let ks = spec.validate(PlotType::Heatmap, n)?;
    check_permutation(item_order, n)?;
    let cols = ks.len();
    if per_item_by_k.len() != n * cols {
        return Err(Error::ShapeMismatch(format!(
            "heatmap matrix has {} entries, expected {n} x {cols}",
            per_item_by_k.len()
        )));
    }
    check_finite(per_item_by_k, "heatmap")?;
    let style = &spec.plot;
    let values: Vec<f64> = if binary {
        per_item_by_k.iter().map(|&v| if v > 0.0 { 1.0 } else if v < 0.0 { -1.0 } else { 0.0 }).collect()
    } else {
        per_item_by_k.to_vec()
    };
    let scale = if binary {
        ColorScale::new(ColorMode::Comparative, -1.0, 1.0, &style.palette)?
    } else {
        ColorScale::fit(spec.color_mode(), &values, &style.palette)?
    };
    let (w, h) = (style.width, style.height);
    let (px, py, pw, ph) = (60.0, 30.0, w - 80.0, h - 90.0);
    let (cw, ch) = (pw / n as f64, ph / cols as f64);
    let mut svg = Svg::new(w, h);
    if let Some(t) = &style.title {
        svg.text("title", w / 2.0, 20.0, 14.0, "middle", t);
    }
    svg.open_group("cells");
    for (pos, &item) in item_order.iter().enumerate() {
        for c in 0..cols {
            // smallest k at the bottom
            let y = py + ph - (c + 1) as f64 * ch;
            let extra = format!(" data-item=\"{item}\" data-k=\"{}\"", ks[c]);
            svg.rect("cell", px + pos as f64 * cw, y, cw, ch, Some(scale.color(values[item * cols + c])), &extra);
        }
    }
    svg.close_group();
    svg.text("axis-label", px + pw / 2.0, py + ph + 18.0, 11.0, "middle", "items");
    svg.text("axis-label", px - 8.0, py + ph, 11.0, "end", &format!("k={}", ks[0]));
    svg.text("axis-label", px - 8.0, py + 10.0, 11.0, "end", &format!("k={}", ks[cols - 1]));
    svg.text("caption", w / 2.0, h - 20.0, 12.0, "middle", &caption(aggregates));
    Ok(svg.finish())
}

use super::svg::{caption, range, Frame, Svg};
use super::{check_finite, Aggregation, ColorScale, RenderSpec};
use crate::error::{Error, Result};
use crate::geometry::Configuration;

/// Screen coordinates and viewer nearness of each item. 3D inputs use an
/// orthographic camera at the spec's azimuth and elevation.
pub(crate) fn project(config: &Configuration, azimuth_deg: f64, elevation_deg: f64) -> Vec<(f64, f64, f64)> {
    if config.dim() == 2 {
        return (0..config.n()).map(|i| (config.get(i, 0), config.get(i, 1), 0.0)).collect();
    }
    let (az, el) = (azimuth_deg.to_radians(), elevation_deg.to_radians());
    (0..config.n())
        .map(|i| {
            let (x, y, z) = (config.get(i, 0), config.get(i, 1), config.get(i, 2));
            let sx = x * az.cos() - y * az.sin();
            let depth = x * az.sin() + y * az.cos();
            let sy = z * el.cos() - depth * el.sin();
            let near = depth * el.cos() + z * el.sin();
            (sx, sy, near)
        })
        .collect()
}

/// Scatterplot of one or two embeddings (side-by-side panels), points
/// colored by `item_values`. `aggregates` are printed in the caption.
pub fn render_scatter(
    embeddings: &[&Configuration],
    item_values: &[f64],
    aggregates: &[(String, f64)],
    spec: &RenderSpec,
) -> Result<String> {
    let first = embeddings.first().ok_or_else(|| Error::InvalidParameter("no embedding to plot".into()))?;
    if embeddings.len() > 2 {
        return Err(Error::InvalidParameter("at most two embeddings per scatterplot".into()));
    }
    let n = first.n();
    spec.validate(super::PlotType::Scatter, n)?;
    for e in embeddings {
        if e.n() != n {
            return Err(Error::ShapeMismatch(format!("embeddings have {} and {} items", n, e.n())));
        }
        if !(2..=3).contains(&e.dim()) {
            return Err(Error::InvalidParameter(format!("scatterplots need 2 or 3 dimensions, got {}", e.dim())));
        }
    }
    if item_values.len() != n {
        return Err(Error::ShapeMismatch(format!("{} item values for {n} items", item_values.len())));
    }
    check_finite(item_values, "item value")?;
    let values: Vec<f64> = match spec.aggr {
        Aggregation::Item => item_values.to_vec(),
        Aggregation::All => vec![item_values.iter().sum::<f64>() / n as f64; n],
    };
    let style = &spec.plot;
    let scale = ColorScale::fit(spec.color_mode(), &values, &style.palette)?;
    let (w, h) = (style.width, style.height);
    let mut svg = Svg::new(w * embeddings.len() as f64, h);
    if let Some(t) = &style.title {
        svg.text("title", w * embeddings.len() as f64 / 2.0, 20.0, 14.0, "middle", t);
    }
    for (p, e) in embeddings.iter().enumerate() {
        let pts = project(e, style.azimuth, style.elevation);
        let frame = Frame::equal(
            p as f64 * w + 20.0,
            30.0,
            w - 40.0,
            h - 80.0,
            range(pts.iter().map(|q| q.0)),
            range(pts.iter().map(|q| q.1)),
        );
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| pts[a].2.total_cmp(&pts[b].2).then(a.cmp(&b)));
        svg.open_group("points");
        for i in order {
            let (x, y) = frame.map(pts[i].0, pts[i].1);
            svg.circle("item", x, y, style.point_radius, scale.color(values[i]), None, &format!(" data-item=\"{i}\""));
        }
        svg.close_group();
    }
    svg.text("caption", w * embeddings.len() as f64 / 2.0, h - 20.0, 12.0, "middle", &caption(aggregates));
    Ok(svg.finish())
}

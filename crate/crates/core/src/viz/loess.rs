use rayon::prelude::*;

use super::svg::{caption, range, Frame, Svg};
use super::{check_finite, ColorScale, PlotType, RenderSpec};
use crate::error::{Error, Result};
use crate::geometry::Configuration;
use crate::linalg::solve_small;

/// Fitted loess values on a regular grid over the bounding box of the points.
#[derive(Debug, Clone, PartialEq)]
pub struct LoessGrid {
    pub grid: usize,
    /// Node abscissae (cell centers), ascending.
    pub xs: Vec<f64>,
    /// Node ordinates (cell centers), ascending.
    pub ys: Vec<f64>,
    /// `values[j * grid + i]` is the fit at `(xs[i], ys[j])`.
    pub values: Vec<f64>,
    /// Nodes where the local design was degenerate and the weighted mean was used.
    pub fallback: Vec<bool>,
}

impl LoessGrid {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.grid + i]
    }
}

fn check_inputs(points: &Configuration, values: &[f64], span: f64) -> Result<()> {
    if points.dim() != 2 {
        return Err(Error::InvalidParameter(format!("loess needs 2D positions, got {}", points.dim())));
    }
    if points.n() < 10 {
        return Err(Error::TooSmall { what: "loess points", min: 10, got: points.n() });
    }
    if values.len() != points.n() {
        return Err(Error::ShapeMismatch(format!("{} values for {} points", values.len(), points.n())));
    }
    if !(span > 0.0 && span <= 1.0) {
        return Err(Error::InvalidParameter(format!("span must lie in (0, 1], got {span}")));
    }
    check_finite(points.values(), "position")?;
    check_finite(values, "value")
}

fn fit_node(points: &Configuration, values: &[f64], q: usize, x0: f64, y0: f64) -> (f64, bool) {
    let n = points.n();
    let mut near: Vec<(f64, usize)> = (0..n)
        .map(|i| {
            let (dx, dy) = (points.get(i, 0) - x0, points.get(i, 1) - y0);
            ((dx * dx + dy * dy).sqrt(), i)
        })
        .collect();
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if q < n {
        near.select_nth_unstable_by(q - 1, cmp);
        near.truncate(q);
    }
    near.sort_by(cmp);
    let dmax = near.iter().fold(0.0f64, |m, p| m.max(p.0));
    let weight = |d: f64| {
        if dmax > 0.0 {
            let u = (d / dmax).min(1.0);
            (1.0 - u * u * u).powi(3)
        } else {
            1.0
        }
    };
    let mut a = [0.0; 9];
    let mut b = [0.0; 3];
    let (mut sw, mut swv) = (0.0, 0.0);
    for &(d, i) in &near {
        let w = weight(d);
        let basis = [1.0, points.get(i, 0) - x0, points.get(i, 1) - y0];
        for r in 0..3 {
            for c in 0..3 {
                a[r * 3 + c] += w * basis[r] * basis[c];
            }
            b[r] += w * basis[r] * values[i];
        }
        sw += w;
        swv += w * values[i];
    }
    if solve_small(3, &mut a, &mut b, 1e-10).is_some() && b[0].is_finite() {
        return (b[0], false);
    }
    if sw > 0.0 {
        (swv / sw, true)
    } else {
        (near.iter().map(|&(_, i)| values[i]).sum::<f64>() / near.len() as f64, true)
    }
}

/// Local linear fit at one position with tricube weights over the
/// `ceil(span * n)` nearest points. Returns the value and whether the
/// weighted-mean fallback was used.
pub fn loess_at(points: &Configuration, values: &[f64], span: f64, x: f64, y: f64) -> Result<(f64, bool)> {
    check_inputs(points, values, span)?;
    let q = ((span * points.n() as f64).ceil() as usize).clamp(1, points.n());
    Ok(fit_node(points, values, q, x, y))
}

/// Loess surface on a `grid x grid` lattice of cell centers covering the
/// bounding box of `points`.
pub fn loess_surface(points: &Configuration, values: &[f64], span: f64, grid: usize) -> Result<LoessGrid> {
    check_inputs(points, values, span)?;
    if grid < 1 {
        return Err(Error::InvalidParameter("grid must be >= 1".into()));
    }
    let n = points.n();
    let q = ((span * n as f64).ceil() as usize).clamp(1, n);
    let axis = |col: usize| {
        let (lo, hi) = range((0..n).map(|i| points.get(i, col)));
        (0..grid).map(|i| lo + (hi - lo) * (i as f64 + 0.5) / grid as f64).collect::<Vec<f64>>()
    };
    let (xs, ys) = (axis(0), axis(1));
    let fits: Vec<(f64, bool)> = (0..grid * grid)
        .into_par_iter()
        .map(|idx| fit_node(points, values, q, xs[idx % grid], ys[idx / grid]))
        .collect();
    Ok(LoessGrid {
        grid,
        xs,
        ys,
        values: fits.iter().map(|f| f.0).collect(),
        fallback: fits.iter().map(|f| f.1).collect(),
    })
}

/// Loess surface cells behind black-outlined points. With `categories`, the
/// points take technique palette colors instead of agreement colors.
pub fn render_loess_overlay(
    embedding: &Configuration,
    item_values: &[f64],
    categories: Option<&[usize]>,
    aggregates: &[(String, f64)],
    spec: &RenderSpec,
) -> Result<String> {
    let n = embedding.n();
    spec.validate(PlotType::Loess, n)?;
    let style = &spec.plot;
    let surface = loess_surface(embedding, item_values, style.span, style.grid)?;
    if let Some(c) = categories {
        if c.len() != n {
            return Err(Error::ShapeMismatch(format!("{} categories for {n} items", c.len())));
        }
    }
    let mut all = item_values.to_vec();
    all.extend_from_slice(&surface.values);
    let scale = ColorScale::fit(spec.color_mode(), &all, &style.palette)?;
    let (w, h) = (style.width, style.height);
    let xr = range((0..n).map(|i| embedding.get(i, 0)));
    let yr = range((0..n).map(|i| embedding.get(i, 1)));
    let frame = Frame::equal(20.0, 30.0, w - 40.0, h - 80.0, xr, yr);
    let g = surface.grid;
    let (dx, dy) = ((xr.1 - xr.0) / g as f64, (yr.1 - yr.0) / g as f64);
    let mut svg = Svg::new(w, h);
    if let Some(t) = &style.title {
        svg.text("title", w / 2.0, 20.0, 14.0, "middle", t);
    }
    svg.open_group("surface");
    for j in 0..g {
        for i in 0..g {
            let (x0, y1) = frame.map(surface.xs[i] - dx / 2.0, surface.ys[j] + dy / 2.0);
            let (x1, y0) = frame.map(surface.xs[i] + dx / 2.0, surface.ys[j] - dy / 2.0);
            svg.rect("surface", x0, y1, (x1 - x0).max(0.0), (y0 - y1).max(0.0), Some(scale.color(surface.at(i, j))), "");
        }
    }
    svg.close_group();
    svg.open_group("points");
    for i in 0..n {
        let (x, y) = frame.map(embedding.get(i, 0), embedding.get(i, 1));
        let fill = match categories {
            Some(c) => style.palette.technique(c[i]),
            None => scale.color(item_values[i]),
        };
        svg.circle("item", x, y, style.point_radius, fill, Some(super::Rgb(0, 0, 0)), &format!(" data-item=\"{i}\""));
    }
    svg.close_group();
    svg.text("caption", w / 2.0, h - 20.0, 12.0, "middle", &caption(aggregates));
    Ok(svg.finish())
}

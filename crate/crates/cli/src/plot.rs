//! Turns a plot request into SVG documents.

use drqa_core::agreement::{agreement_profile, item_agreement, item_agreement_matrix, item_movement_matrix, mean_agreement};
use drqa_core::viz::{
    default_item_order, render_heatmap, render_lift, render_loess_overlay, render_scatter, Comparison, ConfigSide,
    ParamMode, PlotType, RenderSpec,
};
use drqa_core::{AgreementProfile, Configuration, Error as CoreError, RankStructure};
use serde::{Deserialize, Serialize};

use crate::error::Result;

/// The data side of a plot: which configurations to compare.
///
/// In a pipeline the names refer to datasets and embeddings produced by
/// earlier stages; for `drqa plot` they are CSV paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlotInputs {
    pub reference: String,
    pub embeddings: Vec<String>,
    /// Display names, defaulting to the embedding names.
    #[serde(default)]
    pub labels: Option<Vec<String>>,
    #[serde(default)]
    pub render: RenderSpec,
    /// Heatmap cells show only the sign of their value.
    #[serde(default)]
    pub binary: bool,
}

/// A resolved configuration with its rank structure.
pub struct Side<'a> {
    pub name: String,
    pub config: &'a Configuration,
    pub ranks: &'a RankStructure,
}

/// Renders one SVG, or one per embedding for non-lift plots with
/// `param = multiple`.
pub fn render(
    plot: PlotType,
    reference: &Side<'_>,
    embeddings: &[Side<'_>],
    render: &RenderSpec,
    binary: bool,
) -> Result<Vec<String>> {
    if embeddings.is_empty() {
        return Err(CoreError::InvalidParameter("a plot needs at least one embedding".into()).into());
    }
    let compare = render.comp == Comparison::Compare;
    if compare && embeddings.len() < 2 {
        return Err(CoreError::InvalidParameter("comp = compare needs two embeddings".into()).into());
    }
    let n = reference.config.n();
    let ks = render.validate(plot, n)?;
    let profiles: Vec<AgreementProfile> = embeddings
        .iter()
        .map(|e| agreement_profile(reference.ranks, e.ranks, plot != PlotType::Lift))
        .collect::<std::result::Result<_, _>>()?;
    if plot == PlotType::Lift {
        let named: Vec<(&str, &AgreementProfile)> =
            embeddings.iter().zip(&profiles).map(|(e, p)| (e.name.as_str(), p)).collect();
        return Ok(vec![render_lift(&named, render)?]);
    }
    let tag = if render.adjust { "mean AR*" } else { "mean AR" };
    let aggregate = |u: usize| -> Result<(String, f64)> {
        Ok((format!("{} {tag}", embeddings[u].name), mean_agreement(&profiles[u], &ks, render.adjust)?))
    };
    if compare {
        let aggregates = vec![aggregate(0)?, aggregate(1)?];
        return Ok(vec![draw(plot, reference, &embeddings[..2], &profiles[..2], &ks, &aggregates, render, binary)?]);
    }
    let count = if render.param == ParamMode::Multiple { embeddings.len() } else { 1 };
    (0..count)
        .map(|u| {
            let aggregates = vec![aggregate(u)?];
            draw(plot, reference, &embeddings[u..=u], &profiles[u..=u], &ks, &aggregates, render, binary)
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn draw(
    plot: PlotType,
    reference: &Side<'_>,
    emb: &[Side<'_>],
    profiles: &[AgreementProfile],
    ks: &[usize],
    aggregates: &[(String, f64)],
    render: &RenderSpec,
    binary: bool,
) -> Result<String> {
    let adjust = render.adjust;
    let items = |p: &AgreementProfile| item_agreement(p, ks, adjust);
    let diff = |a: Vec<f64>, b: Vec<f64>| -> Vec<f64> { a.iter().zip(&b).map(|(x, y)| x - y).collect() };
    let values = if emb.len() == 2 { diff(items(&profiles[0])?, items(&profiles[1])?) } else { items(&profiles[0])? };
    let svg = match plot {
        PlotType::Scatter => {
            let panels: Vec<&Configuration> = match render.config_side {
                ConfigSide::A => vec![reference.config],
                ConfigSide::B => emb.iter().map(|e| e.config).collect(),
                ConfigSide::Both => vec![reference.config, emb[0].config],
            };
            render_scatter(&panels, &values, aggregates, render)?
        }
        PlotType::Heatmap => {
            let matrix = |u: usize| -> Result<Vec<f64>> {
                Ok(match render.eval {
                    Some(eval) => item_movement_matrix(reference.ranks, emb[u].ranks, ks, eval)?,
                    None => item_agreement_matrix(&profiles[u], ks, adjust)?,
                })
            };
            let m = if emb.len() == 2 { diff(matrix(0)?, matrix(1)?) } else { matrix(0)? };
            let order_from = if render.config_side == ConfigSide::A { reference.config } else { emb[0].config };
            render_heatmap(&m, &default_item_order(order_from), aggregates, render, binary)?
        }
        PlotType::Loess => {
            let positions = if render.config_side == ConfigSide::A { reference.config } else { emb[0].config };
            let better: Option<Vec<usize>> =
                (emb.len() == 2).then(|| values.iter().map(|&v| usize::from(v < 0.0)).collect());
            render_loess_overlay(positions, &values, better.as_deref(), aggregates, render)?
        }
        PlotType::Lift => unreachable!("lift plots are drawn from profiles"),
    };
    Ok(svg)
}

//! Distance MDS by iterative majorization (SMACOF).
//!
//! The reported Stress is Kruskal's normalized form
//! `sqrt(sum w (d - dhat)^2 / sum w d^2)`, with `d` the embedded distances and
//! `dhat` the transformed dissimilarities refitted to the current embedding
//! (optimal scale for the ratio transform, weighted isotonic regression for
//! the ordinal one). Under Guttman updates this quantity never increases.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::classical::classical_mds;
use super::graph::components_from_edges;
use super::{check_target_dim, Diagnostics, ReductionResult, SmacofDiagnostics};
use crate::error::{Error, Result};
use crate::geometry::{Configuration, ProximityMatrix};
use crate::linalg::inverse;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    /// `dhat = b * delta` with the least-squares optimal scale `b`.
    #[default]
    Ratio,
    /// Monotone (isotonic) regression of the distances on the dissimilarity order.
    Ordinal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmacofInit {
    #[default]
    ClassicalMds,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SmacofParams {
    pub transform: Transform,
    pub max_iter: usize,
    /// Stop once the relative Stress decrease falls below this value.
    pub tol: f64,
    pub init: SmacofInit,
}

impl Default for SmacofParams {
    fn default() -> Self {
        Self { transform: Transform::Ratio, max_iter: 500, tol: 1e-6, init: SmacofInit::ClassicalMds }
    }
}

struct Problem<'a> {
    n: usize,
    k: usize,
    delta: &'a [f64],
    // None means unit weights off the diagonal
    weights: Option<&'a [f64]>,
    // upper-triangle pairs with positive weight, sorted by dissimilarity
    order: Vec<(u32, u32)>,
    // block boundaries of tied dissimilarities within `order`
    tie_blocks: Vec<usize>,
}

impl Problem<'_> {
    fn w(&self, i: usize, j: usize) -> f64 {
        match self.weights {
            Some(w) => w[i * self.n + j],
            None => {
                if i == j {
                    0.0
                } else {
                    1.0
                }
            }
        }
    }
}

fn pairwise(x: &[f64], n: usize, k: usize) -> Vec<f64> {
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = &x[i * k..(i + 1) * k];
            (0..n)
                .map(|j| {
                    let xj = &x[j * k..(j + 1) * k];
                    xi.iter().zip(xj).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
                })
                .collect()
        })
        .collect();
    rows.concat()
}

/// Weighted isotonic fit of `d` over the dissimilarity order (ties in the
/// dissimilarities share one fitted value). Returns an `n x n` matrix.
fn isotonic_fit(p: &Problem, d: &[f64]) -> Vec<f64> {
    let n = p.n;
    // per tie block: weighted mean of d and total weight
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(p.tie_blocks.len());
    for (b, &start) in p.tie_blocks.iter().enumerate() {
        let end = p.tie_blocks.get(b + 1).copied().unwrap_or(p.order.len());
        let mut sw = 0.0;
        let mut swd = 0.0;
        for &(i, j) in &p.order[start..end] {
            let w = p.w(i as usize, j as usize);
            sw += w;
            swd += w * d[i as usize * n + j as usize];
        }
        blocks.push((swd / sw, sw, 1));
    }
    // pool adjacent violators over blocks
    let mut stack: Vec<(f64, f64, usize)> = Vec::with_capacity(blocks.len());
    for blk in blocks {
        let mut cur = blk;
        while let Some(&(v, w, c)) = stack.last() {
            if v <= cur.0 {
                break;
            }
            stack.pop();
            let tw = w + cur.1;
            cur = ((v * w + cur.0 * cur.1) / tw, tw, c + cur.2);
        }
        stack.push(cur);
    }
    let mut fitted = vec![0.0; n * n];
    let mut blk = 0;
    for (v, _, count) in stack {
        for _ in 0..count {
            let start = p.tie_blocks[blk];
            let end = p.tie_blocks.get(blk + 1).copied().unwrap_or(p.order.len());
            for &(i, j) in &p.order[start..end] {
                fitted[i as usize * n + j as usize] = v;
                fitted[j as usize * n + i as usize] = v;
            }
            blk += 1;
        }
    }
    fitted
}

/// Stress of distances `d` against the best transformed dissimilarities, and
/// those transformed values.
fn fitted_stress(p: &Problem, transform: Transform, d: &[f64]) -> (f64, Vec<f64>) {
    let n = p.n;
    let dhat = match transform {
        Transform::Ratio => {
            let mut num = 0.0;
            let mut den = 0.0;
            for &(i, j) in &p.order {
                let (i, j) = (i as usize, j as usize);
                let w = p.w(i, j);
                num += w * d[i * n + j] * p.delta[i * n + j];
                den += w * p.delta[i * n + j] * p.delta[i * n + j];
            }
            let b = if den > 0.0 { num / den } else { 0.0 };
            p.delta.iter().map(|v| b * v).collect()
        }
        Transform::Ordinal => isotonic_fit(p, d),
    };
    (raw_stress1(p, d, &dhat), dhat)
}

fn raw_stress1(p: &Problem, d: &[f64], dhat: &[f64]) -> f64 {
    let n = p.n;
    let mut num = 0.0;
    let mut den = 0.0;
    for &(i, j) in &p.order {
        let (i, j) = (i as usize, j as usize);
        let w = p.w(i, j);
        let (a, b) = (d[i * n + j], dhat[i * n + j]);
        num += w * (a - b) * (a - b);
        den += w * a * a;
    }
    if den > 0.0 {
        (num / den).sqrt()
    } else {
        1.0
    }
}

/// Normalized Stress of an embedding against dissimilarities, with the
/// transformed values refitted as in [`smacof`].
pub fn stress(
    dist: &ProximityMatrix,
    embedding: &Configuration,
    weights: Option<&[f64]>,
    transform: Transform,
) -> Result<f64> {
    let dist = dist.to_distances();
    let n = dist.n();
    if embedding.n() != n {
        return Err(Error::ShapeMismatch(format!("embedding has {} items, distances {n}", embedding.n())));
    }
    let p = problem(&dist, embedding.dim(), weights)?;
    let d = pairwise(embedding.values(), n, embedding.dim());
    Ok(fitted_stress(&p, transform, &d).0)
}

fn problem<'a>(dist: &'a ProximityMatrix, k: usize, weights: Option<&'a [f64]>) -> Result<Problem<'a>> {
    let n = dist.n();
    let delta = dist.values();
    if let Some(w) = weights {
        if w.len() != n * n {
            return Err(Error::ShapeMismatch(format!("weight matrix has {} entries, expected {}", w.len(), n * n)));
        }
        for i in 0..n {
            if w[i * n + i] != 0.0 {
                return Err(Error::InvalidParameter(format!("weight diagonal {i} must be zero")));
            }
            for j in 0..i {
                let (a, b) = (w[i * n + j], w[j * n + i]);
                if !a.is_finite() || a < 0.0 {
                    return Err(Error::InvalidParameter(format!("weight ({i}, {j}) must be finite and >= 0")));
                }
                if a != b {
                    return Err(Error::InvalidParameter(format!("weights are not symmetric at ({i}, {j})")));
                }
            }
        }
    }
    let mut order: Vec<(u32, u32)> = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let w = weights.map_or(1.0, |w| w[i * n + j]);
            if w > 0.0 {
                order.push((i as u32, j as u32));
            }
        }
    }
    if order.is_empty() {
        return Err(Error::InvalidParameter("all SMACOF weights are zero".into()));
    }
    let sizes = components_from_edges(n, order.iter().map(|&(i, j)| (i as usize, j as usize)));
    if sizes.len() > 1 {
        return Err(Error::Disconnected { context: "SMACOF weight graph".into(), sizes });
    }
    let key = |&(i, j): &(u32, u32)| delta[i as usize * n + j as usize];
    order.sort_by(|a, b| key(a).total_cmp(&key(b)).then(a.cmp(b)));
    let mut tie_blocks = vec![0];
    for idx in 1..order.len() {
        if key(&order[idx]) != key(&order[idx - 1]) {
            tie_blocks.push(idx);
        }
    }
    Ok(Problem { n, k, delta, weights, order, tie_blocks })
}

/// Moore-Penrose inverse of the weighted Laplacian `V`, for a connected weight graph.
fn v_pseudo_inverse(p: &Problem) -> Result<Vec<f64>> {
    let n = p.n;
    let c = 1.0 / n as f64;
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let w = p.w(i, j);
                v[i * n + j] = -w + c;
                diag += w;
            }
        }
        v[i * n + i] = diag + c;
    }
    let mut inv = inverse(n, &v)?;
    inv.iter_mut().for_each(|x| *x -= c);
    Ok(inv)
}

/// One Guttman transform `V^+ B(X) X`.
fn guttman(p: &Problem, x: &[f64], d: &[f64], dhat: &[f64], vplus: Option<&[f64]>) -> Vec<f64> {
    let (n, k) = (p.n, p.k);
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = &x[i * k..(i + 1) * k];
            let mut acc = vec![0.0; k];
            for j in 0..n {
                let dij = d[i * n + j];
                if j == i || dij <= 0.0 {
                    continue;
                }
                let w = p.w(i, j);
                if w == 0.0 {
                    continue;
                }
                let b = w * dhat[i * n + j] / dij;
                let xj = &x[j * k..(j + 1) * k];
                for a in 0..k {
                    acc[a] += b * (xi[a] - xj[a]);
                }
            }
            acc
        })
        .collect();
    let bx = rows.concat();
    match vplus {
        None => bx.iter().map(|v| v / n as f64).collect(),
        Some(vp) => {
            let out: Vec<Vec<f64>> = (0..n)
                .into_par_iter()
                .map(|i| {
                    let mut acc = vec![0.0; k];
                    let row = &vp[i * n..(i + 1) * n];
                    for (j, &c) in row.iter().enumerate() {
                        for a in 0..k {
                            acc[a] += c * bx[j * k + a];
                        }
                    }
                    acc
                })
                .collect();
            out.concat()
        }
    }
}

fn random_start(n: usize, k: usize, seed: u64, scale: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n * k).map(|_| rng.random_range(-1.0..1.0) * scale).collect()
}

/// Weighted SMACOF. `weights` is an `n x n` symmetric non-negative matrix
/// with zero diagonal (`None` for unit weights); zero weights drop pairs,
/// e.g. missing dissimilarities.
pub fn smacof(
    dist: &ProximityMatrix,
    target_dim: usize,
    weights: Option<&[f64]>,
    params: &SmacofParams,
    seed: u64,
) -> Result<ReductionResult> {
    let dist = dist.to_distances();
    let n = dist.n();
    let k = target_dim;
    check_target_dim(target_dim, n)?;
    if params.max_iter == 0 {
        return Err(Error::InvalidParameter("max_iter must be positive".into()));
    }
    if !(params.tol >= 0.0) {
        return Err(Error::InvalidParameter("tol must be non-negative".into()));
    }
    let unit = weights.map_or(true, |w| {
        (0..n).all(|i| (0..n).all(|j| w[i * n + j] == if i == j { 0.0 } else { 1.0 }))
    });
    let weights = if unit { None } else { weights };
    let p = problem(&dist, k, weights)?;
    let vplus = if unit { None } else { Some(v_pseudo_inverse(&p)?) };

    let mean_delta = p.order.iter().map(|&(i, j)| p.delta[i as usize * n + j as usize]).sum::<f64>()
        / p.order.len() as f64;
    let mut warnings = Vec::new();
    let (mut x, init) = match params.init {
        SmacofInit::ClassicalMds => match classical_mds(&dist, k) {
            Ok(r) if r.embedding.values().iter().any(|&v| v != 0.0) => (r.embedding.values().to_vec(), "classical_mds"),
            _ => {
                warnings.push("classical MDS start unusable; using seeded random start".into());
                (random_start(n, k, seed, mean_delta.max(1.0)), "random")
            }
        },
        SmacofInit::Random => (random_start(n, k, seed, mean_delta.max(1.0)), "random"),
    };

    let mut d = pairwise(&x, n, k);
    let (mut current, fit) = fitted_stress(&p, params.transform, &d);
    // majorization target: raw dissimilarities for ratio, refitted and
    // rescaled to the dissimilarity norm for ordinal
    let norm_target: f64 = p.order.iter().map(|&(i, j)| {
        let (i, j) = (i as usize, j as usize);
        p.w(i, j) * p.delta[i * n + j] * p.delta[i * n + j]
    }).sum();
    let rescale = |fit: Vec<f64>| -> Vec<f64> {
        let norm: f64 = p.order.iter().map(|&(i, j)| {
            let (i, j) = (i as usize, j as usize);
            p.w(i, j) * fit[i * n + j] * fit[i * n + j]
        }).sum();
        if norm > 0.0 {
            let s = (norm_target / norm).sqrt();
            fit.into_iter().map(|v| v * s).collect()
        } else {
            p.delta.to_vec()
        }
    };
    let mut dhat = match params.transform {
        Transform::Ratio => p.delta.to_vec(),
        Transform::Ordinal => rescale(fit),
    };

    let mut history = vec![current];
    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..params.max_iter {
        iterations += 1;
        x = guttman(&p, &x, &d, &dhat, vplus.as_deref());
        d = pairwise(&x, n, k);
        let (next, fit) = fitted_stress(&p, params.transform, &d);
        if params.transform == Transform::Ordinal {
            dhat = rescale(fit);
        }
        debug_assert!(
            next <= current * (1.0 + 1e-9) + 1e-12,
            "stress increased from {current} to {next}"
        );
        history.push(next);
        let decrease = current - next;
        let done = next <= 1e-14 || decrease <= params.tol * current.max(f64::MIN_POSITIVE);
        current = next;
        if done {
            converged = true;
            break;
        }
    }
    let embedding = Configuration::from_flat(n, k, x)?;
    Ok(ReductionResult {
        embedding,
        diagnostics: Diagnostics::Smacof(SmacofDiagnostics {
            stress: current,
            iterations,
            converged,
            stress_history: history,
            init: init.to_string(),
            warnings,
        }),
    })
}

/// Binary weights keeping the pairs whose distance is at or below the
/// `quantile` of all off-diagonal distances.
pub fn local_weights(dist: &ProximityMatrix, quantile: f64) -> Result<Vec<f64>> {
    if !(quantile > 0.0 && quantile <= 1.0) {
        return Err(Error::InvalidParameter(format!("quantile must lie in (0, 1], got {quantile}")));
    }
    let n = dist.n();
    let mut upper: Vec<f64> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).map(|(i, j)| dist.get(i, j)).collect();
    upper.sort_by(f64::total_cmp);
    let idx = ((quantile * upper.len() as f64).ceil() as usize).clamp(1, upper.len()) - 1;
    let threshold = upper[idx];
    let mut w = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j && dist.get(i, j) <= threshold {
                w[i * n + j] = 1.0;
            }
        }
    }
    Ok(w)
}

/// SMACOF restricted to the smallest distances (local MDS).
pub fn local_smacof(
    dist: &ProximityMatrix,
    target_dim: usize,
    quantile: f64,
    params: &SmacofParams,
    seed: u64,
) -> Result<ReductionResult> {
    let dist = dist.to_distances();
    let w = local_weights(&dist, quantile)?;
    smacof(&dist, target_dim, Some(&w), params, seed).map_err(|e| match e {
        Error::Disconnected { sizes, .. } => Error::Disconnected {
            context: format!("local weight graph at quantile {quantile} (try a larger quantile)"),
            sizes,
        },
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{euclidean_distances, MetricTag};

    fn random_config(n: usize, m: usize, seed: u64) -> Configuration {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Configuration::from_flat(n, m, (0..n * m).map(|_| rng.random_range(-3.0..3.0)).collect()).unwrap()
    }

    fn assert_monotone(history: &[f64]) {
        for w in history.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-9) + 1e-12, "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn recovers_planar_distances_from_random_start() {
        let c = random_config(30, 2, 5);
        let dist = euclidean_distances(&c, 2.0).unwrap();
        let params = SmacofParams { init: SmacofInit::Random, tol: 1e-10, max_iter: 2000, ..Default::default() };
        let r = smacof(&dist, 2, None, &params, 9).unwrap();
        let s = r.diagnostics.smacof().unwrap();
        assert!(s.stress < 0.01, "stress {}", s.stress);
        assert_monotone(&s.stress_history);
    }

    #[test]
    fn ordinal_stress_is_monotone() {
        let c = random_config(25, 4, 2);
        let dist = euclidean_distances(&c, 2.0).unwrap();
        for init in [SmacofInit::Random, SmacofInit::ClassicalMds] {
            let params = SmacofParams { transform: Transform::Ordinal, init, ..Default::default() };
            let r = smacof(&dist, 2, None, &params, 1).unwrap();
            let s = r.diagnostics.smacof().unwrap();
            assert_monotone(&s.stress_history);
            assert!(s.stress < s.stress_history[0] || s.stress_history.len() <= 2);
        }
    }

    #[test]
    fn weighted_stress_is_monotone() {
        let c = random_config(30, 3, 8);
        let dist = euclidean_distances(&c, 2.0).unwrap();
        let w = local_weights(&dist, 0.5).unwrap();
        let params = SmacofParams { init: SmacofInit::Random, ..Default::default() };
        let r = smacof(&dist, 2, Some(&w), &params, 4).unwrap();
        assert_monotone(&r.diagnostics.smacof().unwrap().stress_history);
    }

    #[test]
    fn single_pair_is_fit_exactly() {
        let dist = ProximityMatrix::from_distances(2, vec![0.0, 2.5, 2.5, 0.0], MetricTag::Precomputed).unwrap();
        let params = SmacofParams { init: SmacofInit::Random, ..Default::default() };
        let r = smacof(&dist, 1, Some(&[0.0, 1.0, 1.0, 0.0]), &params, 3).unwrap();
        let e = &r.embedding;
        assert!(((e.get(0, 0) - e.get(1, 0)).abs() - 2.5).abs() < 1e-9);
        assert!(r.diagnostics.smacof().unwrap().stress < 1e-9);
    }

    #[test]
    fn weight_errors() {
        let c = random_config(6, 2, 1);
        let dist = euclidean_distances(&c, 2.0).unwrap();
        let p = SmacofParams::default();
        assert!(matches!(smacof(&dist, 2, Some(&[0.0; 36]), &p, 0), Err(Error::InvalidParameter(_))));
        let mut w = vec![0.0; 36];
        for (i, j) in [(0, 1), (1, 2), (3, 4)] {
            w[i * 6 + j] = 1.0;
            w[j * 6 + i] = 1.0;
        }
        match smacof(&dist, 2, Some(&w), &p, 0) {
            Err(Error::Disconnected { sizes, .. }) => assert_eq!(sizes, vec![3, 2, 1]),
            other => panic!("{other:?}"),
        }
        let mut asym = vec![1.0; 36];
        for i in 0..6 {
            asym[i * 6 + i] = 0.0;
        }
        asym[1] = 2.0;
        assert!(smacof(&dist, 2, Some(&asym), &p, 0).is_err());
    }

    #[test]
    fn quantile_one_matches_plain_smacof() {
        let c = random_config(20, 3, 6);
        let dist = euclidean_distances(&c, 2.0).unwrap();
        let p = SmacofParams::default();
        let plain = smacof(&dist, 2, None, &p, 0).unwrap();
        let local = local_smacof(&dist, 2, 1.0, &p, 0).unwrap();
        assert_eq!(plain, local);
    }

    #[test]
    fn tiny_quantile_disconnects() {
        let c = random_config(200, 3, 12);
        let dist = euclidean_distances(&c, 2.0).unwrap();
        let w = local_weights(&dist, 0.001).unwrap();
        // union-find over the thresholded graph
        let mut parent: Vec<usize> = (0..200).collect();
        fn find(p: &mut Vec<usize>, x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        for i in 0..200 {
            for j in 0..200 {
                if w[i * 200 + j] > 0.0 {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    parent[a] = b;
                }
            }
        }
        let roots = (0..200).filter(|&i| find(&mut parent, i) == i).count();
        assert!(roots > 1);
        match local_smacof(&dist, 2, 0.001, &SmacofParams::default(), 0) {
            Err(Error::Disconnected { sizes, context }) => {
                assert_eq!(sizes.len(), roots);
                assert!(context.contains("larger quantile"));
            }
            other => panic!("{other:?}"),
        }
        assert!(local_weights(&dist, 0.0).is_err());
        assert!(local_weights(&dist, 1.5).is_err());
    }

    #[test]
    fn stress_invariant_under_item_permutation() {
        let c = random_config(25, 3, 21);
        let params = SmacofParams { tol: 1e-12, max_iter: 3000, ..Default::default() };
        let base = smacof(&euclidean_distances(&c, 2.0).unwrap(), 2, None, &params, 0).unwrap();
        let order: Vec<usize> = (0..25).rev().collect();
        let perm = c.permuted(&order).unwrap();
        let other = smacof(&euclidean_distances(&perm, 2.0).unwrap(), 2, None, &params, 0).unwrap();
        let (a, b) = (base.diagnostics.smacof().unwrap().stress, other.diagnostics.smacof().unwrap().stress);
        assert!((a - b).abs() < 1e-8, "{a} vs {b}");
    }

    #[test]
    fn isotonic_fit_is_monotone() {
        let c = random_config(12, 3, 4);
        let dist = euclidean_distances(&c, 2.0).unwrap();
        let p = problem(&dist, 2, None).unwrap();
        let d = pairwise(random_config(12, 2, 5).values(), 12, 2);
        let fit = isotonic_fit(&p, &d);
        let seq: Vec<f64> = p.order.iter().map(|&(i, j)| fit[i as usize * 12 + j as usize]).collect();
        assert!(seq.windows(2).all(|w| w[0] <= w[1] + 1e-15));
    }
}

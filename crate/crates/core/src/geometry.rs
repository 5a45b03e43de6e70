//! Configurations, proximity matrices and neighbor rank structures.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest item count for which a dense `n x n` proximity matrix is built.
pub const MAX_DENSE_ITEMS: usize = 20_000;

/// An `n x m` matrix of item coordinates, row-major.
///
/// Both source data and embeddings are configurations. Cells may be marked
/// unobserved through the mask; unobserved cells hold `NaN`.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    n: usize,
    m: usize,
    values: Vec<f64>,
    labels: Option<Vec<String>>,
    mask: Option<Vec<bool>>,
}

impl Configuration {
    pub fn from_flat(n: usize, m: usize, values: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooSmall { what: "items", min: 2, got: n });
        }
        if m < 1 {
            return Err(Error::TooSmall { what: "dimensions", min: 1, got: m });
        }
        if values.len() != n * m {
            return Err(Error::ShapeMismatch(format!(
                "{} values for a {n} x {m} configuration",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: pos / m, col: pos % m });
        }
        Ok(Self { n, m, values, labels: None, mask: None })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != m) {
            return Err(Error::ShapeMismatch(format!(
                "row {bad} has {} columns, expected {m}",
                rows[bad].len()
            )));
        }
        Self::from_flat(rows.len(), m, rows.concat())
    }

    /// Builds a configuration with missing cells. `mask[i * m + l]` is `true`
    /// when the cell is observed; the stored value of unobserved cells is ignored.
    pub fn with_missing(n: usize, m: usize, mut values: Vec<f64>, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != n * m || values.len() != n * m {
            return Err(Error::ShapeMismatch(format!(
                "mask/value length must be {} for a {n} x {m} configuration",
                n * m
            )));
        }
        let mut filled = values.clone();
        for (v, &obs) in filled.iter_mut().zip(&mask) {
            if !obs {
                *v = 0.0;
            }
        }
        // validate shape and observed cells
        Self::from_flat(n, m, filled)?;
        for (v, &obs) in values.iter_mut().zip(&mask) {
            if !obs {
                *v = f64::NAN;
            }
        }
        let mask = if mask.iter().all(|&b| b) { None } else { Some(mask) };
        Ok(Self { n, m, values, labels: None, mask })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::InvalidLabels(format!(
                "{} labels for {} items",
                labels.len(),
                self.n
            )));
        }
        let mut seen = HashSet::with_capacity(labels.len());
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::InvalidLabels(format!("duplicate label `{l}`")));
            }
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.m..(i + 1) * self.m]
    }

    pub fn get(&self, i: usize, l: usize) -> f64 {
        self.values[i * self.m + l]
    }

    pub fn is_observed(&self, i: usize, l: usize) -> bool {
        self.mask.as_ref().map_or(true, |mk| mk[i * self.m + l])
    }

    pub fn is_complete(&self) -> bool {
        self.mask.is_none()
    }

    pub fn mask(&self) -> Option<&[bool]> {
        self.mask.as_deref()
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Label of item `i`, falling back to its 1-based position.
    pub fn label(&self, i: usize) -> String {
        match &self.labels {
            Some(l) => l[i].clone(),
            None => (i + 1).to_string(),
        }
    }

    pub fn column(&self, l: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, l)).collect()
    }

    /// Reorders items so that new item `r` is old item `order[r]`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        check_permutation(order, self.n)?;
        let mut values = Vec::with_capacity(self.values.len());
        for &i in order {
            values.extend_from_slice(self.row(i));
        }
        let mask = self.mask.as_ref().map(|mk| {
            order
                .iter()
                .flat_map(|&i| mk[i * self.m..(i + 1) * self.m].iter().copied())
                .collect()
        });
        let labels = self.labels.as_ref().map(|l| order.iter().map(|&i| l[i].clone()).collect());
        Ok(Self { n: self.n, m: self.m, values, labels, mask })
    }

    pub(crate) fn copy_labels_from(mut self, other: &Configuration) -> Self {
        if other.n == self.n {
            self.labels = other.labels.clone();
        }
        self
    }
}

pub(crate) fn check_permutation(order: &[usize], n: usize) -> Result<()> {
    if order.len() != n {
        return Err(Error::ShapeMismatch(format!("permutation of length {} for {n} items", order.len())));
    }
    let mut seen = vec![false; n];
    for &i in order {
        if i >= n || std::mem::replace(&mut seen[i], true) {
            return Err(Error::InvalidParameter(format!("not a permutation of 0..{n}")));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProximityKind {
    Distance,
    Similarity,
}

/// How a proximity matrix was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "metric")]
pub enum MetricTag {
    Minkowski { p: f64 },
    Correlation,
    /// Correlation similarities converted to distances as `1 - s`.
    OneMinusCorrelation,
    Geodesic { n_neighbors: usize },
    Precomputed,
}

/// A symmetric `n x n` matrix of distances or similarities.
#[derive(Debug, Clone, PartialEq)]
pub struct ProximityMatrix {
    n: usize,
    values: Vec<f64>,
    kind: ProximityKind,
    metric: MetricTag,
}

impl ProximityMatrix {
    /// Validates and wraps a dense distance matrix.
    pub fn from_distances(n: usize, values: Vec<f64>, metric: MetricTag) -> Result<Self> {
        Self::validate_shape(n, &values)?;
        for i in 0..n {
            if values[i * n + i] != 0.0 {
                return Err(Error::InvalidProximity(format!("diagonal entry {i} is not zero")));
            }
            for j in 0..i {
                let (a, b) = (values[i * n + j], values[j * n + i]);
                if a < 0.0 {
                    return Err(Error::InvalidProximity(format!("negative distance at ({i}, {j})")));
                }
                if (a - b).abs() > 1e-9 * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::InvalidProximity(format!("asymmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self { n, values, kind: ProximityKind::Distance, metric })
    }

    pub fn from_similarities(n: usize, values: Vec<f64>, metric: MetricTag) -> Result<Self> {
        Self::validate_shape(n, &values)?;
        for i in 0..n {
            for j in 0..=i {
                let (a, b) = (values[i * n + j], values[j * n + i]);
                if !(-1.0..=1.0).contains(&a) {
                    return Err(Error::InvalidProximity(format!("similarity outside [-1, 1] at ({i}, {j})")));
                }
                if (a - b).abs() > 1e-12 {
                    return Err(Error::InvalidProximity(format!("asymmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self { n, values, kind: ProximityKind::Similarity, metric })
    }

    fn validate_shape(n: usize, values: &[f64]) -> Result<()> {
        if n < 2 {
            return Err(Error::TooSmall { what: "items", min: 2, got: n });
        }
        if n > MAX_DENSE_ITEMS {
            return Err(Error::TooLarge { what: "proximity matrix", limit: MAX_DENSE_ITEMS, got: n });
        }
        if values.len() != n * n {
            return Err(Error::ShapeMismatch(format!("{} values for an {n} x {n} matrix", values.len())));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: pos / n, col: pos % n });
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> ProximityKind {
        self.kind
    }

    pub fn metric(&self) -> &MetricTag {
        &self.metric
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    /// Distance view of the matrix: similarities become `1 - s`.
    pub fn to_distances(&self) -> ProximityMatrix {
        match self.kind {
            ProximityKind::Distance => self.clone(),
            ProximityKind::Similarity => {
                let n = self.n;
                let mut values: Vec<f64> = self.values.iter().map(|s| 1.0 - s).collect();
                for i in 0..n {
                    values[i * n + i] = 0.0;
                }
                let metric = match self.metric {
                    MetricTag::Correlation => MetricTag::OneMinusCorrelation,
                    ref other => other.clone(),
                };
                ProximityMatrix { n, values, kind: ProximityKind::Distance, metric }
            }
        }
    }
}

/// Minkowski distances between the rows of `config`.
///
/// With missing cells, each pair uses the columns observed in both rows.
pub fn euclidean_distances(config: &Configuration, p: f64) -> Result<ProximityMatrix> {
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!("Minkowski exponent must be >= 1, got {p}")));
    }
    let n = config.n();
    if n > MAX_DENSE_ITEMS {
        return Err(Error::TooLarge { what: "proximity matrix", limit: MAX_DENSE_ITEMS, got: n });
    }
    let m = config.dim();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = config.row(i);
            ((i + 1)..n)
                .map(|j| {
                    let xj = config.row(j);
                    let mut acc = 0.0;
                    let mut shared = 0usize;
                    for l in 0..m {
                        if config.is_observed(i, l) && config.is_observed(j, l) {
                            shared += 1;
                            let d = (xi[l] - xj[l]).abs();
                            acc = if p == 2.0 {
                                acc + d * d
                            } else if p.is_infinite() {
                                f64::max(acc, d)
                            } else if p == 1.0 {
                                acc + d
                            } else {
                                acc + d.powf(p)
                            };
                        }
                    }
                    if shared == 0 {
                        return f64::NAN;
                    }
                    if p == 2.0 {
                        acc.sqrt()
                    } else if p == 1.0 || p.is_infinite() {
                        acc
                    } else {
                        acc.powf(1.0 / p)
                    }
                })
                .collect()
        })
        .collect();
    let mut values = vec![0.0; n * n];
    for (i, row) in upper.iter().enumerate() {
        for (off, &d) in row.iter().enumerate() {
            let j = i + 1 + off;
            if d.is_nan() {
                return Err(Error::NoSharedColumns { i, j });
            }
            values[i * n + j] = d;
            values[j * n + i] = d;
        }
    }
    Ok(ProximityMatrix { n, values, kind: ProximityKind::Distance, metric: MetricTag::Minkowski { p } })
}

/// Pearson correlations between the rows (items) of a complete configuration.
pub fn correlation_similarities(config: &Configuration) -> Result<ProximityMatrix> {
    let (n, m) = (config.n(), config.dim());
    if m < 2 {
        return Err(Error::TooSmall { what: "dimensions for correlation", min: 2, got: m });
    }
    if !config.is_complete() {
        return Err(Error::MissingData("correlation requires a fully observed configuration".into()));
    }
    let mut centered = Vec::with_capacity(n * m);
    let mut norms = Vec::with_capacity(n);
    for i in 0..n {
        let row = config.row(i);
        let mean = row.iter().sum::<f64>() / m as f64;
        let start = centered.len();
        centered.extend(row.iter().map(|v| v - mean));
        let ss: f64 = centered[start..].iter().map(|v| v * v).sum();
        if ss == 0.0 {
            return Err(Error::ZeroVarianceItem { item: i });
        }
        norms.push(ss.sqrt());
    }
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        values[i * n + i] = 1.0;
        let ci = &centered[i * m..(i + 1) * m];
        for j in (i + 1)..n {
            let cj = &centered[j * m..(j + 1) * m];
            let dot: f64 = ci.iter().zip(cj).map(|(a, b)| a * b).sum();
            let s = (dot / (norms[i] * norms[j])).clamp(-1.0, 1.0);
            values[i * n + j] = s;
            values[j * n + i] = s;
        }
    }
    ProximityMatrix::from_similarities(n, values, MetricTag::Correlation)
}

/// Rule used to order items at equal distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TiePolicy {
    /// Equal distances are ranked by ascending item index.
    #[default]
    AscendingIndex,
}

/// Per-item neighbor rankings.
///
/// `rank(i, j)` is the 1-based ascending rank of item `j` among the `n - 1`
/// other items as seen from item `i`; `neighbor(i, r)` is its inverse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankStructure {
    n: usize,
    // n x n, zero on the diagonal
    ranks: Vec<u32>,
    // n x (n - 1); entry r - 1 of row i is the r-th nearest neighbor of i
    neighbors: Vec<u32>,
    tie_policy: TiePolicy,
}

impl RankStructure {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tie_policy(&self) -> TiePolicy {
        self.tie_policy
    }

    /// Rank of `j` from `i` (1..=n-1). Panics when `i == j`.
    pub fn rank(&self, i: usize, j: usize) -> usize {
        assert_ne!(i, j, "self rank is undefined");
        self.ranks[i * self.n + j] as usize
    }

    /// The `r`-th nearest neighbor of `i`, with `r` in 1..=n-1.
    pub fn neighbor(&self, i: usize, r: usize) -> usize {
        self.neighbors[i * (self.n - 1) + r - 1] as usize
    }

    /// Neighbors of `i` from nearest to farthest.
    pub fn neighbors_of(&self, i: usize) -> &[u32] {
        let w = self.n - 1;
        &self.neighbors[i * w..(i + 1) * w]
    }

    pub(crate) fn ranks_row(&self, i: usize) -> &[u32] {
        &self.ranks[i * self.n..(i + 1) * self.n]
    }

    /// Rebuilds a rank structure from neighbor orderings (`n` rows of `n - 1` items).
    pub fn from_neighbors(n: usize, neighbors: Vec<u32>) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooSmall { what: "items", min: 2, got: n });
        }
        if neighbors.len() != n * (n - 1) {
            return Err(Error::ShapeMismatch(format!("{} neighbor entries for n = {n}", neighbors.len())));
        }
        let mut ranks = vec![0u32; n * n];
        for i in 0..n {
            for (r, &j) in neighbors[i * (n - 1)..(i + 1) * (n - 1)].iter().enumerate() {
                let j = j as usize;
                if j >= n || j == i || ranks[i * n + j] != 0 {
                    return Err(Error::InvalidParameter(format!(
                        "row {i} of the neighbor matrix is not a permutation of the other items"
                    )));
                }
                ranks[i * n + j] = (r + 1) as u32;
            }
        }
        Ok(Self { n, ranks, neighbors, tie_policy: TiePolicy::AscendingIndex })
    }

    /// Rebuilds a rank structure from an `n x n` rank matrix whose diagonal is ignored.
    pub fn from_ranks(n: usize, ranks: &[u32]) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooSmall { what: "items", min: 2, got: n });
        }
        if ranks.len() != n * n {
            return Err(Error::ShapeMismatch(format!("{} rank entries for n = {n}", ranks.len())));
        }
        let mut neighbors = vec![u32::MAX; n * (n - 1)];
        for i in 0..n {
            for j in (0..n).filter(|&j| j != i) {
                let r = ranks[i * n + j] as usize;
                let slot = i * (n - 1) + r.wrapping_sub(1);
                if r == 0 || r >= n || neighbors[slot] != u32::MAX {
                    return Err(Error::InvalidParameter(format!("row {i} of the rank matrix is not a permutation of 1..n-1")));
                }
                neighbors[slot] = j as u32;
            }
        }
        let mut clean = ranks.to_vec();
        for i in 0..n {
            clean[i * n + i] = 0;
        }
        Ok(Self { n, ranks: clean, neighbors, tie_policy: TiePolicy::AscendingIndex })
    }
}

/// Ranks every row of a proximity matrix, excluding the diagonal.
///
/// Similarity matrices are ranked through their `1 - s` distances.
pub fn rank_structure(prox: &ProximityMatrix) -> RankStructure {
    let dist = prox.to_distances();
    let n = dist.n();
    let rows: Vec<Vec<u32>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let d = dist.row(i);
            let mut order: Vec<u32> = (0..n as u32).filter(|&j| j as usize != i).collect();
            order.sort_by(|&a, &b| d[a as usize].total_cmp(&d[b as usize]).then(a.cmp(&b)));
            order
        })
        .collect();
    let mut neighbors = Vec::with_capacity(n * (n - 1));
    let mut ranks = vec![0u32; n * n];
    for (i, row) in rows.iter().enumerate() {
        for (r, &j) in row.iter().enumerate() {
            ranks[i * n + j as usize] = (r + 1) as u32;
        }
        neighbors.extend_from_slice(row);
    }
    RankStructure { n, ranks, neighbors, tie_policy: TiePolicy::AscendingIndex }
}

/// Euclidean rank structure of a configuration.
pub fn config_ranks(config: &Configuration) -> Result<RankStructure> {
    Ok(rank_structure(&euclidean_distances(config, 2.0)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> Configuration {
        Configuration::from_flat(xs.len(), 1, xs.to_vec()).unwrap()
    }

    #[test]
    fn one_dimensional_distances() {
        let d = euclidean_distances(&line(&[0.0, 1.0, 3.0, 7.0]), 2.0).unwrap();
        assert_eq!(d.get(0, 1), 1.0);
        assert_eq!(d.get(0, 2), 3.0);
        assert_eq!(d.get(1, 3), 6.0);
        for i in 0..4 {
            assert_eq!(d.get(i, i), 0.0);
        }
    }

    #[test]
    fn three_four_five() {
        let c = Configuration::from_rows(&[vec![0.0, 0.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(euclidean_distances(&c, 2.0).unwrap().get(0, 1), 5.0);
        assert_eq!(euclidean_distances(&c, 1.0).unwrap().get(0, 1), 7.0);
        assert_eq!(euclidean_distances(&c, f64::INFINITY).unwrap().get(0, 1), 4.0);
    }

    #[test]
    fn rejects_bad_input() {
        let err = Configuration::from_flat(2, 2, vec![0.0, 1.0, f64::NAN, 2.0]).unwrap_err();
        assert_eq!(err, Error::NonFinite { row: 1, col: 0 });
        assert!(matches!(
            euclidean_distances(&line(&[0.0, 1.0]), 0.5),
            Err(Error::InvalidParameter(_))
        ));
        assert!(Configuration::from_flat(1, 2, vec![0.0, 1.0]).is_err());
        let dup = line(&[0.0, 1.0]).with_labels(vec!["a".into(), "a".into()]);
        assert!(matches!(dup, Err(Error::InvalidLabels(_))));
    }

    #[test]
    fn missing_cells_use_shared_columns() {
        let c = Configuration::with_missing(
            2,
            3,
            vec![0.0, 5.0, 1.0, 3.0, 0.0, 5.0],
            vec![true, false, true, true, true, true],
        )
        .unwrap();
        assert!(!c.is_observed(0, 1));
        let d = euclidean_distances(&c, 2.0).unwrap();
        assert_eq!(d.get(0, 1), 5.0);
        let disjoint =
            Configuration::with_missing(2, 2, vec![1.0, 0.0, 0.0, 1.0], vec![true, false, false, true]).unwrap();
        assert_eq!(euclidean_distances(&disjoint, 2.0), Err(Error::NoSharedColumns { i: 0, j: 1 }));
    }

    #[test]
    fn correlation_cases() {
        let c = Configuration::from_rows(&[
            vec![1.0, 2.0, 3.0],
            vec![2.0, 4.0, 6.0],
            vec![3.0, 2.0, 1.0],
            vec![1.0, 2.0, 3.0],
        ])
        .unwrap();
        let s = correlation_similarities(&c).unwrap();
        assert!((s.get(0, 1) - 1.0).abs() < 1e-15);
        assert!((s.get(0, 2) + 1.0).abs() < 1e-15);
        assert!((s.get(0, 3) - 1.0).abs() < 1e-15);
        assert_eq!(s.kind(), ProximityKind::Similarity);
        let d = s.to_distances();
        assert_eq!(d.metric(), &MetricTag::OneMinusCorrelation);
        assert!((d.get(0, 2) - 2.0).abs() < 1e-15);

        let flat = Configuration::from_rows(&[vec![1.0, 2.0], vec![4.0, 4.0]]).unwrap();
        assert_eq!(correlation_similarities(&flat), Err(Error::ZeroVarianceItem { item: 1 }));
    }

    #[test]
    fn ranks_of_line() {
        let r = config_ranks(&line(&[0.0, 1.0, 3.0, 7.0])).unwrap();
        let first: Vec<usize> = (1..=3).map(|k| r.neighbor(0, k)).collect();
        assert_eq!(first, vec![1, 2, 3]);
        // item 2 (x = 1): distances 1, 2, 6
        assert_eq!(r.neighbor(1, 1), 0);
        assert_eq!(r.rank(1, 2), 2);
    }

    #[test]
    fn simplex_ties_use_index_order() {
        let s = 3f64.sqrt() / 2.0;
        let c = Configuration::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, s]]).unwrap();
        let mut d = euclidean_distances(&c, 2.0).unwrap().values().to_vec();
        // force exact equidistance
        for v in d.iter_mut().filter(|v| **v != 0.0) {
            *v = 1.0;
        }
        let r = rank_structure(&ProximityMatrix::from_distances(3, d, MetricTag::Precomputed).unwrap());
        assert_eq!(r.neighbors_of(0), &[1, 2]);
        assert_eq!(r.neighbors_of(1), &[0, 2]);
        assert_eq!(r.neighbors_of(2), &[0, 1]);
        assert_eq!(r.tie_policy(), TiePolicy::AscendingIndex);
    }

    #[test]
    fn two_items() {
        let r = config_ranks(&line(&[0.0, 4.0])).unwrap();
        assert_eq!(r.neighbor(0, 1), 1);
        assert_eq!(r.neighbor(1, 1), 0);
        assert_eq!(r.rank(0, 1), 1);
    }

    #[test]
    fn duplicate_points_tie() {
        let r = config_ranks(&line(&[2.0, 2.0, 2.0, 0.0])).unwrap();
        assert_eq!(r.neighbors_of(2), &[0, 1, 3]);
    }

    #[test]
    fn proximity_validation() {
        assert!(ProximityMatrix::from_distances(2, vec![0.0, 1.0, 2.0, 0.0], MetricTag::Precomputed).is_err());
        assert!(ProximityMatrix::from_distances(2, vec![1.0, 1.0, 1.0, 0.0], MetricTag::Precomputed).is_err());
        assert!(ProximityMatrix::from_distances(2, vec![0.0, -1.0, -1.0, 0.0], MetricTag::Precomputed).is_err());
    }
}

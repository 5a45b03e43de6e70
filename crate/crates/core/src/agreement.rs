//! Rank-order neighborhood agreement between configurations.
//!
//! For two rank structures over the same items, `a_ik` is the number of items
//! shared by the `k` nearest neighbors of item `i` in both. The agreement rate
//! is `AR_k = sum_i a_ik / (k n)`, and its random-adjusted form subtracts the
//! hypergeometric expectation `k / (n - 1)`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::RankStructure;

/// Agreement rates for every neighborhood size `k = 1..=n-1`.
///
/// Vectors are indexed by `k - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct AgreementProfile {
    n: usize,
    shared: Vec<u64>,
    ar: Vec<f64>,
    ar_adjusted: Vec<f64>,
    // n x (n - 1), row i holds a_ik / k
    per_item: Option<Vec<f64>>,
    per_item_adjusted: bool,
}

impl AgreementProfile {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `AR_k` for `k = 1..=n-1`.
    pub fn ar(&self) -> &[f64] {
        &self.ar
    }

    /// `AR*_k = AR_k - k / (n - 1)`.
    pub fn ar_adjusted(&self) -> &[f64] {
        &self.ar_adjusted
    }

    /// `sum_i a_ik` for each `k`.
    pub fn shared_counts(&self) -> &[u64] {
        &self.shared
    }

    pub fn ar_at(&self, k: usize) -> f64 {
        self.ar[k - 1]
    }

    pub fn ar_adjusted_at(&self, k: usize) -> f64 {
        self.ar_adjusted[k - 1]
    }

    pub fn per_item(&self) -> Option<&[f64]> {
        self.per_item.as_deref()
    }

    pub fn per_item_adjusted(&self) -> bool {
        self.per_item_adjusted
    }

    /// Item-level fraction `a_ik / k` (adjusted if the profile was adjusted).
    pub fn item_value(&self, i: usize, k: usize) -> Option<f64> {
        self.per_item.as_ref().map(|p| p[i * (self.n - 1) + k - 1])
    }

    /// Subtracts `k / (n - 1)` from every per-item entry.
    pub fn into_adjusted_per_item(mut self) -> Self {
        if let (Some(p), false) = (self.per_item.as_mut(), self.per_item_adjusted) {
            let w = self.n - 1;
            for row in p.chunks_mut(w) {
                for (idx, v) in row.iter_mut().enumerate() {
                    *v -= expected_agreement(idx + 1, self.n);
                }
            }
            self.per_item_adjusted = true;
        }
        self
    }
}

/// Expected agreement of random configurations, `k / (n - 1)`.
pub fn expected_agreement(k: usize, n: usize) -> f64 {
    k as f64 / (n - 1) as f64
}

fn check_pair(a: &RankStructure, b: &RankStructure) -> Result<()> {
    if a.n() != b.n() {
        return Err(Error::ShapeMismatch(format!(
            "rank structures over {} and {} items",
            a.n(),
            b.n()
        )));
    }
    Ok(())
}

/// Per-row cumulative shared-neighbor counts `a_i1..a_i(n-1)`, computed
/// incrementally over `k` with membership flags.
fn row_shared_counts(a: &RankStructure, b: &RankStructure, i: usize, in_a: &mut [bool], in_b: &mut [bool], out: &mut [u32]) {
    in_a.fill(false);
    in_b.fill(false);
    let (na, nb) = (a.neighbors_of(i), b.neighbors_of(i));
    let mut count = 0u32;
    for k in 0..na.len() {
        let (x, y) = (na[k] as usize, nb[k] as usize);
        if x == y {
            count += 1;
        } else {
            if in_b[x] {
                count += 1;
            }
            if in_a[y] {
                count += 1;
            }
        }
        in_a[x] = true;
        in_b[y] = true;
        out[k] = count;
    }
}

/// Agreement profile of two rank structures over the same items.
pub fn agreement_profile(a: &RankStructure, b: &RankStructure, with_per_item: bool) -> Result<AgreementProfile> {
    check_pair(a, b)?;
    let n = a.n();
    let w = n - 1;
    let rows: Vec<Vec<u32>> = (0..n)
        .into_par_iter()
        .map_init(
            || (vec![false; n], vec![false; n]),
            |(in_a, in_b), i| {
                let mut out = vec![0u32; w];
                row_shared_counts(a, b, i, in_a, in_b, &mut out);
                out
            },
        )
        .collect();
    let mut shared = vec![0u64; w];
    for row in &rows {
        for (s, &c) in shared.iter_mut().zip(row) {
            *s += c as u64;
        }
    }
    let ar: Vec<f64> = shared
        .iter()
        .enumerate()
        .map(|(idx, &s)| s as f64 / ((idx + 1) as f64 * n as f64))
        .collect();
    let ar_adjusted = ar
        .iter()
        .enumerate()
        .map(|(idx, &v)| v - expected_agreement(idx + 1, n))
        .collect();
    let per_item = with_per_item.then(|| {
        rows.iter()
            .flat_map(|row| row.iter().enumerate().map(|(idx, &c)| c as f64 / (idx + 1) as f64))
            .collect()
    });
    Ok(AgreementProfile { n, shared, ar, ar_adjusted, per_item, per_item_adjusted: false })
}

fn psi_from_weights(profile: &AgreementProfile, weights: &[f64]) -> Result<f64> {
    let n = profile.n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (idx, (&f, &adj)) in weights.iter().zip(&profile.ar_adjusted).enumerate() {
        let k = idx + 1;
        num += f * adj;
        den += f * (n - k - 1) as f64 / (n - 1) as f64;
    }
    if den == 0.0 {
        return Err(Error::Undefined(format!(
            "psi denominator is zero for n = {n} under the given weights"
        )));
    }
    Ok(num / den)
}

/// Share of the area between the random baseline and perfect agreement that
/// lies under the adjusted agreement curve. Negative when worse than random.
pub fn psi(profile: &AgreementProfile) -> Result<f64> {
    if profile.n <= 2 {
        return Err(Error::Undefined("psi needs n > 2: the maximal area above random is zero".into()));
    }
    psi_from_weights(profile, &vec![1.0; profile.n - 1])
}

/// Weighted variant of [`psi`].
pub fn weighted_psi(profile: &AgreementProfile, f: &WeightFunction) -> Result<f64> {
    let weights = f.resolve(profile.n)?;
    psi_from_weights(profile, &weights)
}

/// Weight over neighborhood sizes used by [`weighted_psi`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightFunction {
    Uniform,
    /// 1 on `lo..=hi`, 0 elsewhere.
    Indicator { lo: usize, hi: usize },
    /// Full weight on the first third of `1..n-1`, linear descent to zero over
    /// the middle third, zero afterwards.
    LinearTaper,
    /// Explicit `f(k)` for `k = 1..=n-1`.
    Table(Vec<f64>),
}

impl WeightFunction {
    /// Resolves `f(k)` for `k = 1..=n-1`.
    pub fn resolve(&self, n: usize) -> Result<Vec<f64>> {
        if n < 2 {
            return Err(Error::TooSmall { what: "items", min: 2, got: n });
        }
        let w = n - 1;
        let values = match self {
            WeightFunction::Uniform => vec![1.0; w],
            WeightFunction::Indicator { lo, hi } => {
                if *lo < 1 || lo > hi || *hi > w {
                    return Err(Error::InvalidParameter(format!(
                        "indicator range {lo}..={hi} outside 1..={w}"
                    )));
                }
                (1..=w).map(|k| if (*lo..=*hi).contains(&k) { 1.0 } else { 0.0 }).collect()
            }
            WeightFunction::LinearTaper => {
                let first = (n - 1) / 3;
                let second = 2 * (n - 1) / 3;
                let third = n as f64 / 3.0;
                (1..=w)
                    .map(|k| {
                        if k < first {
                            1.0
                        } else if k < second {
                            (1.0 - (k as f64 - third) / third).clamp(0.0, 1.0)
                        } else {
                            0.0
                        }
                    })
                    .collect()
            }
            WeightFunction::Table(t) => {
                if t.len() != w {
                    return Err(Error::ShapeMismatch(format!("weight table of length {} for n = {n}", t.len())));
                }
                if t.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    return Err(Error::InvalidParameter("weights must be finite and non-negative".into()));
                }
                t.clone()
            }
        };
        if !values.iter().any(|&v| v > 0.0) {
            return Err(Error::InvalidParameter(format!("weight function is zero everywhere for n = {n}")));
        }
        Ok(values)
    }
}

/// A set of neighborhood sizes.
///
/// Serialized as its text form: `all`, `a-b` or `k1;k2;...`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum KRange {
    #[default]
    All,
    Span { from: usize, to: usize },
    List(Vec<usize>),
}

impl KRange {
    /// Sorted, de-duplicated sizes, validated against `1..=n-1`.
    pub fn resolve(&self, n: usize) -> Result<Vec<usize>> {
        let max = n.saturating_sub(1);
        let mut ks = match self {
            KRange::All => (1..=max).collect(),
            KRange::Span { from, to } => (*from..=*to).collect::<Vec<_>>(),
            KRange::List(l) => l.clone(),
        };
        ks.sort_unstable();
        ks.dedup();
        if ks.is_empty() {
            return Err(Error::InvalidParameter("empty k range".into()));
        }
        if ks[0] < 1 || ks[ks.len() - 1] > max {
            return Err(Error::InvalidParameter(format!("k range {self} outside 1..={max}")));
        }
        Ok(ks)
    }
}

impl fmt::Display for KRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KRange::All => f.write_str("all"),
            KRange::Span { from, to } => write!(f, "{from}-{to}"),
            KRange::List(l) => {
                let parts: Vec<String> = l.iter().map(usize::to_string).collect();
                f.write_str(&parts.join(";"))
            }
        }
    }
}

impl From<KRange> for String {
    fn from(r: KRange) -> String {
        r.to_string()
    }
}

impl TryFrom<String> for KRange {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl FromStr for KRange {
    type Err = Error;

    /// Accepts `all`, `a-b`, a single `k`, or `k1;k2;...`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidParameter(format!("cannot parse k range `{s}`"));
        if s.eq_ignore_ascii_case("all") {
            return Ok(KRange::All);
        }
        if let Some((a, b)) = s.split_once('-') {
            let from = a.trim().parse().map_err(|_| bad())?;
            let to = b.trim().parse().map_err(|_| bad())?;
            return Ok(KRange::Span { from, to });
        }
        let list = s
            .split([';', ','])
            .map(|p| p.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| bad())?;
        Ok(KRange::List(list))
    }
}

/// Mean of `AR_k` (or `AR*_k`) over a set of neighborhood sizes.
pub fn mean_agreement(profile: &AgreementProfile, range_k: &[usize], adjusted: bool) -> Result<f64> {
    check_range(range_k, profile.n)?;
    let src = if adjusted { &profile.ar_adjusted } else { &profile.ar };
    Ok(range_k.iter().map(|&k| src[k - 1]).sum::<f64>() / range_k.len() as f64)
}

fn check_range(range_k: &[usize], n: usize) -> Result<()> {
    if range_k.is_empty() {
        return Err(Error::InvalidParameter("empty k range".into()));
    }
    if let Some(&k) = range_k.iter().find(|&&k| k < 1 || k > n - 1) {
        return Err(Error::InvalidParameter(format!("k = {k} outside 1..={}", n - 1)));
    }
    Ok(())
}

/// Per-item agreement averaged over `range_k`.
pub fn item_agreement(profile: &AgreementProfile, range_k: &[usize], adjusted: bool) -> Result<Vec<f64>> {
    check_range(range_k, profile.n)?;
    let per_item = profile
        .per_item
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("profile was computed without per-item values".into()))?;
    let n = profile.n;
    let w = n - 1;
    let subtract = adjusted && !profile.per_item_adjusted;
    let add_back = !adjusted && profile.per_item_adjusted;
    Ok(per_item
        .chunks(w)
        .map(|row| {
            let total: f64 = range_k
                .iter()
                .map(|&k| {
                    let v = row[k - 1];
                    if subtract {
                        v - expected_agreement(k, n)
                    } else if add_back {
                        v + expected_agreement(k, n)
                    } else {
                        v
                    }
                })
                .sum();
            total / range_k.len() as f64
        })
        .collect())
}

/// Item-by-k matrix (`n x |range_k|`, row-major) of per-item agreement.
pub fn item_agreement_matrix(profile: &AgreementProfile, range_k: &[usize], adjusted: bool) -> Result<Vec<f64>> {
    check_range(range_k, profile.n)?;
    let n = profile.n;
    let per_item = profile
        .per_item
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("profile was computed without per-item values".into()))?;
    let mut out = Vec::with_capacity(n * range_k.len());
    for row in per_item.chunks(n - 1) {
        for &k in range_k {
            let mut v = row[k - 1];
            if adjusted && !profile.per_item_adjusted {
                v -= expected_agreement(k, n);
            } else if !adjusted && profile.per_item_adjusted {
                v += expected_agreement(k, n);
            }
            out.push(v);
        }
    }
    Ok(out)
}

/// Agreement between `A` and `B` with the influence of a third configuration
/// `Z` removed, in the manner of a partial correlation.
pub fn partial_agreement(ab: f64, az: f64, bz: f64) -> Result<f64> {
    for (name, v) in [("ab", ab), ("az", az), ("bz", bz)] {
        if !(-1.0..=1.0).contains(&v) {
            return Err(Error::InvalidParameter(format!("{name} = {v} outside [-1, 1]")));
        }
    }
    if az.abs() >= 1.0 || bz.abs() >= 1.0 {
        return Err(Error::Undefined("Z fully determines one side (|az| or |bz| = 1)".into()));
    }
    Ok((ab - az * bz) / ((1.0 - az * az) * (1.0 - bz * bz)).sqrt())
}

/// Joint histogram of neighbor ranks: `count(r, s)` is the number of ordered
/// pairs `(i, j)` with rank `r` in `A` and rank `s` in `B`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoRankingMatrix {
    n: usize,
    omega: Vec<u32>,
}

impl CoRankingMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Entry for A-rank `r` and B-rank `s`, both 1-based.
    pub fn count(&self, r: usize, s: usize) -> u32 {
        self.omega[(r - 1) * (self.n - 1) + s - 1]
    }

    /// Row `r` (1-based A-rank).
    pub fn row(&self, r: usize) -> &[u32] {
        let w = self.n - 1;
        &self.omega[(r - 1) * w..r * w]
    }

    /// Sum of the top-left `k x k` block, equal to `k n AR_k`.
    pub fn block_sum(&self, k: usize) -> u64 {
        (1..=k).map(|r| self.row(r)[..k].iter().map(|&c| c as u64).sum::<u64>()).sum()
    }

    pub fn transpose(&self) -> CoRankingMatrix {
        let w = self.n - 1;
        let mut omega = vec![0u32; w * w];
        for r in 0..w {
            for s in 0..w {
                omega[s * w + r] = self.omega[r * w + s];
            }
        }
        CoRankingMatrix { n: self.n, omega }
    }
}

pub fn co_ranking(a: &RankStructure, b: &RankStructure) -> Result<CoRankingMatrix> {
    check_pair(a, b)?;
    let n = a.n();
    let w = n - 1;
    let mut omega = vec![0u32; w * w];
    for i in 0..n {
        let (ra, rb) = (a.ranks_row(i), b.ranks_row(i));
        for j in (0..n).filter(|&j| j != i) {
            omega[(ra[j] as usize - 1) * w + rb[j] as usize - 1] += 1;
        }
    }
    Ok(CoRankingMatrix { n, omega })
}

/// Classification of all ordered pairs at one neighborhood size.
///
/// For a pair `(i, j)` with rank `a` in the source and `b` in the embedding:
/// hard intrusion `b <= k < a`, soft intrusion `b < a <= k`, hard extrusion
/// `a <= k < b`, soft extrusion `a < b <= k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RankMovementTally {
    pub k: usize,
    pub hard_intrusions: u64,
    pub soft_intrusions: u64,
    pub hard_extrusions: u64,
    pub soft_extrusions: u64,
    /// Same rank on both sides, inside the neighborhood.
    pub unchanged_in: u64,
    /// Both ranks beyond `k`.
    pub outside: u64,
}

impl RankMovementTally {
    pub fn total(&self) -> u64 {
        self.hard_intrusions
            + self.soft_intrusions
            + self.hard_extrusions
            + self.soft_extrusions
            + self.unchanged_in
            + self.outside
    }
}

pub fn classify_rank_movements(a: &RankStructure, b: &RankStructure, k: usize) -> Result<RankMovementTally> {
    check_pair(a, b)?;
    let n = a.n();
    if k < 1 || k > n - 1 {
        return Err(Error::InvalidParameter(format!("k = {k} outside 1..={}", n - 1)));
    }
    let mut t = RankMovementTally { k, ..Default::default() };
    for i in 0..n {
        let (ra, rb) = (a.ranks_row(i), b.ranks_row(i));
        for j in (0..n).filter(|&j| j != i) {
            let (x, y) = (ra[j] as usize, rb[j] as usize);
            match (x <= k, y <= k) {
                (false, false) => t.outside += 1,
                (false, true) => t.hard_intrusions += 1,
                (true, false) => t.hard_extrusions += 1,
                (true, true) if y < x => t.soft_intrusions += 1,
                (true, true) if x < y => t.soft_extrusions += 1,
                (true, true) => t.unchanged_in += 1,
            }
        }
    }
    Ok(t)
}

/// Which rank movements to count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    Hard,
    Soft,
    #[default]
    Both,
}

/// Per-item rate of rank movements over `range_k`, as an `n x |range_k|`
/// row-major matrix. Each entry is `(intrusions + extrusions) / (2k)` for the
/// movement classes selected by `eval`.
pub fn item_movement_matrix(a: &RankStructure, b: &RankStructure, range_k: &[usize], eval: EvalMode) -> Result<Vec<f64>> {
    check_pair(a, b)?;
    let n = a.n();
    check_range(range_k, n)?;
    let w = n - 1;
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map_init(
            || (vec![false; n], vec![false; n], vec![0u32; w]),
            |(in_a, in_b, shared), i| {
                row_shared_counts(a, b, i, in_a, in_b, shared);
                let (na, nb) = (a.neighbors_of(i), b.neighbors_of(i));
                let (ra, rb) = (a.ranks_row(i), b.ranks_row(i));
                // soft counts at k accumulate pairs whose larger rank equals k
                let mut soft = vec![0u32; w];
                let mut acc = 0u32;
                for k in 1..=w {
                    let x = na[k - 1] as usize;
                    if (rb[x] as usize) < k {
                        acc += 1;
                    }
                    let y = nb[k - 1] as usize;
                    if (ra[y] as usize) < k {
                        acc += 1;
                    }
                    soft[k - 1] = acc;
                }
                range_k
                    .iter()
                    .map(|&k| {
                        let hard = 2 * (k as u32 - shared[k - 1]);
                        let count = match eval {
                            EvalMode::Hard => hard,
                            EvalMode::Soft => soft[k - 1],
                            EvalMode::Both => hard + soft[k - 1],
                        };
                        count as f64 / (2 * k) as f64
                    })
                    .collect()
            },
        )
        .collect();
    Ok(rows.concat())
}

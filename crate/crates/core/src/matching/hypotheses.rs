//! Multi-hypothesis generation with conditional sampling, residual ranking
//! and the conditional inlier probability between two correspondences.

use std::collections::HashSet;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{estimate_global_homography, Correspondence, Homography};

/// How a candidate's conditional inlier probability is aggregated against
/// the inliers admitted so far.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SelectionMode {
    /// Mean probability over every selected inlier.
    Mean,
    /// Probability against the first selected inlier only.
    FirstOnly,
    /// Largest probability over the selected inliers. Lets a second
    /// planar structure in, which the mean rule tends to shut out.
    #[default]
    Any,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionParams {
    /// Minimal subset size.
    pub s: usize,
    /// Residual threshold in pixels for counting as a hypothesis inlier.
    pub eps_o: f64,
    /// Floor on the conditional inlier probability for admission.
    pub eps_r: f64,
    /// Hypotheses drawn by uniform sampling before conditional sampling.
    pub m0: usize,
    /// Total hypothesis count.
    pub m_total: usize,
    /// Prefix length of the ranked hypothesis lists.
    pub m: usize,
    pub mode: SelectionMode,
}

impl Default for SelectionParams {
    fn default() -> Self {
        SelectionParams {
            s: 4,
            eps_o: 1.0,
            eps_r: 0.01,
            m0: 10,
            m_total: 500,
            m: 50,
            mode: SelectionMode::Mean,
        }
    }
}

impl SelectionParams {
    pub fn validate(&self) -> Result<()> {
        if self.s < 4 {
            return Err(Error::param(format!("subset size s must be >= 4, got {}", self.s)));
        }
        if !(self.m0 >= 1 && self.m_total >= self.m0) {
            return Err(Error::param(format!(
                "need M >= M0 >= 1, got M={} M0={}",
                self.m_total, self.m0
            )));
        }
        if !(1..=self.m_total).contains(&self.m) {
            return Err(Error::param(format!("prefix length m={} outside [1, M]", self.m)));
        }
        if !(self.eps_o > 0.0) {
            return Err(Error::param("eps_o must be positive"));
        }
        if !(0.0..=1.0).contains(&self.eps_r) {
            return Err(Error::param("eps_r must lie in [0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    pub homography: Homography,
    pub inverse: Homography,
    /// Sorted indices of the minimal subset it was fitted to.
    pub subset: Vec<usize>,
}

impl Hypothesis {
    /// Symmetric transfer error, averaged over both directions.
    pub fn residual(&self, c: &Correspondence) -> f64 {
        let fwd = self.homography.map(c.src).distance(&c.dst);
        let bwd = self.inverse.map(c.dst).distance(&c.src);
        let r = 0.5 * (fwd + bwd);
        if r.is_finite() {
            r
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct HypothesisSet {
    pub hypotheses: Vec<Hypothesis>,
}

impl HypothesisSet {
    pub fn len(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hypotheses.is_empty()
    }
}

/// Residuals of every correspondence to every hypothesis together with the
/// per-correspondence hypothesis ranking.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualTable {
    pub n_matches: usize,
    pub n_hypotheses: usize,
    /// Row-major `n_matches × n_hypotheses`.
    pub residuals: Vec<f64>,
    /// Hypothesis indices per correspondence, nondescending residual, ties
    /// by index.
    pub ranked: Vec<Vec<u32>>,
}

impl ResidualTable {
    #[inline]
    pub fn residual(&self, i: usize, h: usize) -> f64 {
        self.residuals[i * self.n_hypotheses + h]
    }
}

/// Bitset of the first `m` hypotheses of a ranked list (all of them when
/// the list is shorter).
#[derive(Debug, Clone)]
pub(crate) struct Prefix(Vec<u64>);

impl Prefix {
    pub(crate) fn new(list: &[u32], m: usize, n_hypotheses: usize) -> Self {
        let mut bits = vec![0u64; n_hypotheses.div_ceil(64).max(1)];
        for &h in &list[..m.min(list.len())] {
            bits[h as usize / 64] |= 1 << (h % 64);
        }
        Prefix(bits)
    }

    #[inline]
    pub(crate) fn shared(&self, other: &Prefix) -> u32 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a & b).count_ones()).sum()
    }
}

/// `f(F_i, F_j) = |h^i_{1:m} ∩ h^j_{1:m}| / m`.
pub fn conditional_inlier_probability(list_i: &[u32], list_j: &[u32], m: usize) -> Result<f64> {
    if m == 0 || m > list_i.len() || m > list_j.len() {
        return Err(Error::param(format!(
            "prefix length {m} outside [1, {}]",
            list_i.len().min(list_j.len())
        )));
    }
    let mut prefix: Vec<u32> = list_i[..m].to_vec();
    prefix.sort_unstable();
    let shared = list_j[..m]
        .iter()
        .filter(|h| prefix.binary_search(h).is_ok())
        .count();
    Ok(shared as f64 / m as f64)
}

fn rank_row(residuals: &[f64]) -> Vec<u32> {
    let mut idx: Vec<u32> = (0..residuals.len() as u32).collect();
    idx.sort_by(|&a, &b| residuals[a as usize].total_cmp(&residuals[b as usize]).then(a.cmp(&b)));
    idx
}

/// First `m` hypothesis indices by (residual, index), unordered.
fn top_m(residuals: &[f64], m: usize) -> Vec<u32> {
    let mut idx: Vec<u32> = (0..residuals.len() as u32).collect();
    if m < idx.len() {
        idx.select_nth_unstable_by(m, |&a, &b| {
            residuals[a as usize].total_cmp(&residuals[b as usize]).then(a.cmp(&b))
        });
        idx.truncate(m);
    }
    idx
}

pub fn rank_hypotheses(matches: &[Correspondence], hyps: &HypothesisSet) -> ResidualTable {
    let n_h = hyps.len();
    let mut residuals = Vec::with_capacity(matches.len() * n_h);
    for c in matches {
        residuals.extend(hyps.hypotheses.iter().map(|h| h.residual(c)));
    }
    let ranked = residuals.chunks(n_h.max(1)).take(matches.len()).map(rank_row).collect();
    ResidualTable {
        n_matches: matches.len(),
        n_hypotheses: n_h,
        residuals,
        ranked,
    }
}

fn fit(matches: &[Correspondence], subset: &[usize]) -> Option<Hypothesis> {
    let pts: Vec<Correspondence> = subset.iter().map(|&i| matches[i]).collect();
    let homography = estimate_global_homography(&pts).ok()?;
    let inverse = homography.inverse().ok()?;
    Some(Hypothesis {
        homography,
        inverse,
        subset: subset.to_vec(),
    })
}

/// Rows between refreshes of the preference prefixes during conditional
/// sampling.
const REFRESH_EVERY: usize = 10;

/// Draws `M` homography hypotheses: `M0` from uniform minimal subsets, the
/// rest by conditional sampling on the preference prefixes.
pub fn generate_hypotheses(
    matches: &[Correspondence],
    params: &SelectionParams,
    seed: u64,
) -> Result<HypothesisSet> {
    params.validate()?;
    let n = matches.len();
    if n < params.s {
        return Err(Error::InsufficientData { needed: params.s, got: n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut hyps: Vec<Hypothesis> = Vec::with_capacity(params.m_total);
    // residual columns, one per hypothesis
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(params.m_total);
    let max_attempts = 50 * params.m_total + 1000;
    let mut attempts = 0;

    let mut push = |subset: Vec<usize>, hyps: &mut Vec<Hypothesis>, columns: &mut Vec<Vec<f64>>| {
        let mut key = subset;
        key.sort_unstable();
        if seen.contains(&key) {
            return;
        }
        seen.insert(key.clone());
        if let Some(h) = fit(matches, &key) {
            columns.push(matches.iter().map(|c| h.residual(c)).collect());
            hyps.push(h);
        }
    };

    while hyps.len() < params.m0 && attempts < max_attempts {
        attempts += 1;
        let subset = sample(&mut rng, n, params.s).into_vec();
        push(subset, &mut hyps, &mut columns);
    }

    let mut prefixes: Vec<Prefix> = Vec::new();
    let mut m_eff = 1;
    let mut refreshed_at = usize::MAX;
    let mut weights = vec![0.0f64; n];
    while hyps.len() < params.m_total && attempts < max_attempts {
        attempts += 1;
        if hyps.is_empty() {
            let subset = sample(&mut rng, n, params.s).into_vec();
            push(subset, &mut hyps, &mut columns);
            continue;
        }
        if refreshed_at == usize::MAX || hyps.len() >= refreshed_at + REFRESH_EVERY {
            let count = hyps.len();
            m_eff = ((count * params.m).div_ceil(params.m_total)).clamp(1, count);
            let mut row = vec![0.0; count];
            prefixes = (0..n)
                .map(|i| {
                    for (h, col) in columns.iter().enumerate() {
                        row[h] = col[i];
                    }
                    let top = top_m(&row, m_eff);
                    Prefix::new(&top, m_eff, count)
                })
                .collect();
            refreshed_at = count;
        }

        let first = rng.random_range(0..n);
        let mut subset = vec![first];
        weights.iter_mut().for_each(|w| *w = 1.0);
        while subset.len() < params.s {
            let last = &prefixes[*subset.last().expect("non-empty")];
            for (j, w) in weights.iter_mut().enumerate() {
                *w *= last.shared(&prefixes[j]) as f64 / m_eff as f64;
            }
            for &c in &subset {
                weights[c] = 0.0;
            }
            let total: f64 = weights.iter().sum();
            let next = if total > 0.0 {
                let mut target = rng.random::<f64>() * total;
                let mut pick = None;
                for (j, &w) in weights.iter().enumerate() {
                    if w > 0.0 {
                        pick = Some(j);
                        if target < w {
                            break;
                        }
                        target -= w;
                    }
                }
                pick.expect("positive total weight")
            } else {
                loop {
                    let j = rng.random_range(0..n);
                    if !subset.contains(&j) {
                        break j;
                    }
                }
            };
            subset.push(next);
        }
        push(subset, &mut hyps, &mut columns);
    }

    if hyps.is_empty() {
        return Err(Error::Degenerate("no non-degenerate minimal subset".into()));
    }
    Ok(HypothesisSet { hypotheses: hyps })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_params_validate() {
        SelectionParams::default().validate().unwrap();
        let bad = SelectionParams { m: 0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = SelectionParams { m0: 600, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn conditional_probability_cases() {
        let a: Vec<u32> = (0..20).collect();
        assert_eq!(conditional_inlier_probability(&a, &a, 10).unwrap(), 1.0);
        let b: Vec<u32> = (10..30).collect();
        assert_eq!(conditional_inlier_probability(&a, &b, 10).unwrap(), 0.0);
        let c: Vec<u32> = (5..25).collect();
        assert_eq!(conditional_inlier_probability(&a, &c, 10).unwrap(), 0.5);
        assert!(conditional_inlier_probability(&a, &c, 0).is_err());
        assert!(conditional_inlier_probability(&a, &c, 21).is_err());
    }

    #[test]
    fn prefix_bitset_counts_intersection() {
        let a = Prefix::new(&[0, 3, 70, 5], 3, 100);
        let b = Prefix::new(&[70, 1, 0, 3], 3, 100);
        assert_eq!(a.shared(&b), 2);
    }

    #[test]
    fn rank_ties_go_to_lower_index() {
        assert_eq!(rank_row(&[2.0, 1.0, 1.0, 0.5]), vec![3, 1, 2, 0]);
    }
}

use std::cmp::Ordering;

use super::hypotheses::Prefix;
use super::{HypothesisSet, ResidualTable, SelectionMode, SelectionParams};
use crate::error::{Error, Result};
use crate::geometry::Correspondence;

/// Smallest residual of match `i` over hypotheses not fitted from a subset
/// containing `i` (an exact fit through the match itself says nothing about
/// it). Falls back to the overall best when every hypothesis contains it.
fn held_out_best_residual(i: usize, table: &ResidualTable, hyps: &HypothesisSet) -> f64 {
    let list = &table.ranked[i];
    list.iter()
        .find(|&&h| hyps.hypotheses[h as usize].subset.binary_search(&i).is_err())
        .or_else(|| list.first())
        .map(|&h| table.residual(i, h as usize))
        .unwrap_or(f64::INFINITY)
}

/// Hypotheses that match `i` is an inlier of (residual within `eps_o`), in
/// rank order, leaving out those fitted through `i` itself. A hypothesis the
/// match misses by a wide margin is no evidence of shared structure.
fn held_out_inlier_ranking(i: usize, table: &ResidualTable, hyps: &HypothesisSet, eps_o: f64) -> Vec<u32> {
    table.ranked[i]
        .iter()
        .copied()
        .take_while(|&h| table.residual(i, h as usize) <= eps_o)
        .filter(|&h| hyps.hypotheses[h as usize].subset.binary_search(&i).is_err())
        .collect()
}

fn canonical_order(a: &(f64, Correspondence, usize), b: &(f64, Correspondence, usize)) -> Ordering {
    let key = |c: &Correspondence| [c.src.x, c.src.y, c.dst.x, c.dst.y];
    a.0.total_cmp(&b.0)
        .then_with(|| {
            key(&a.1)
                .iter()
                .zip(key(&b.1).iter())
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        })
        .then(a.2.cmp(&b.2))
}

/// Greedy inlier selection. Returns indices into `matches` in admission
/// order (ascending held-out residual, ties by coordinates).
pub fn select_inlier_indices(
    matches: &[Correspondence],
    table: &ResidualTable,
    hyps: &HypothesisSet,
    params: &SelectionParams,
) -> Result<Vec<usize>> {
    params.validate()?;
    if table.n_matches != matches.len() || table.n_hypotheses != hyps.len() {
        return Err(Error::DimensionMismatch("residual table does not match inputs".into()));
    }
    if matches.is_empty() || hyps.is_empty() {
        return Err(Error::NoInliers);
    }
    let m = params.m.min(table.n_hypotheses);

    let mut candidates: Vec<(f64, Correspondence, usize)> = (0..matches.len())
        .map(|i| (held_out_best_residual(i, table, hyps), matches[i], i))
        .filter(|(r, _, _)| *r <= params.eps_o)
        .collect();
    candidates.sort_by(canonical_order);

    let prefixes: Vec<Option<Prefix>> = {
        let mut p = vec![None; matches.len()];
        for (_, _, i) in &candidates {
            p[*i] = Some(Prefix::new(&held_out_inlier_ranking(*i, table, hyps, params.eps_o), m, table.n_hypotheses));
        }
        p
    };
    let prefix = |i: usize| prefixes[i].as_ref().expect("candidate prefix");

    let mut selected: Vec<usize> = Vec::new();
    for &(_, _, i) in &candidates {
        let admit = match selected.first() {
            None => true,
            Some(&first) => {
                let p = prefix(i);
                let f = |j: usize| p.shared(prefix(j)) as f64 / m as f64;
                let score = match params.mode {
                    SelectionMode::FirstOnly => f(first),
                    SelectionMode::Mean => {
                        selected.iter().map(|&j| f(j)).sum::<f64>() / selected.len() as f64
                    }
                    SelectionMode::Any => selected.iter().map(|&j| f(j)).fold(0.0, f64::max),
                };
                score >= params.eps_r
            }
        };
        if admit {
            selected.push(i);
        }
    }
    if selected.is_empty() {
        return Err(Error::NoInliers);
    }
    Ok(selected)
}

/// Inlier set `P` drawn from the putative matches `F`.
pub fn select_inliers(
    matches: &[Correspondence],
    table: &ResidualTable,
    hyps: &HypothesisSet,
    params: &SelectionParams,
) -> Result<Vec<Correspondence>> {
    Ok(select_inlier_indices(matches, table, hyps, params)?
        .into_iter()
        .map(|i| matches[i])
        .collect())
}

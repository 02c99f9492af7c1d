//! Backtracking isometry and embedding search.
//!
//! Source points are assigned in ascending index order and candidates are
//! tried in ascending index order, so the first solution found is the
//! lexicographically least image vector. Candidates are pruned up front by
//! comparing distance multisets: a point can only go to a target whose row
//! contains (embedding) or equals (isometry) its own row as a multiset.

use std::collections::HashMap;

use super::{FiniteMetricSpace, MetricError, PartialIsometry, Rational};

fn needed_counts(space: &FiniteMetricSpace, u: usize) -> HashMap<Rational, usize> {
    let mut counts = HashMap::new();
    for w in space.points().filter(|&w| w != u) {
        *counts.entry(space.d(u, w)).or_insert(0) += 1;
    }
    counts
}

fn contains_multiset(big: &FiniteMetricSpace, v: usize, needed: &HashMap<Rational, usize>) -> bool {
    if needed.is_empty() {
        return true;
    }
    let mut have: HashMap<Rational, usize> = HashMap::with_capacity(needed.len());
    for w in big.points().filter(|&w| w != v) {
        let d = big.d(v, w);
        if needed.contains_key(&d) {
            *have.entry(d).or_insert(0) += 1;
        }
    }
    needed
        .iter()
        .all(|(d, &c)| have.get(d).copied().unwrap_or(0) >= c)
}

fn sorted_row(space: &FiniteMetricSpace, u: usize) -> Vec<Rational> {
    let mut r = space.row(u);
    r.sort_unstable();
    r
}

/// Candidate lists for every source point.
fn candidates(
    small: &FiniteMetricSpace,
    big: &FiniteMetricSpace,
    bijective: bool,
) -> Vec<Vec<usize>> {
    if bijective {
        let big_rows: Vec<_> = big.points().map(|v| sorted_row(big, v)).collect();
        small
            .points()
            .map(|u| {
                let r = sorted_row(small, u);
                big.points().filter(|&v| big_rows[v] == r).collect()
            })
            .collect()
    } else {
        small
            .points()
            .map(|u| {
                let needed = needed_counts(small, u);
                big.points()
                    .filter(|&v| contains_multiset(big, v, &needed))
                    .collect()
            })
            .collect()
    }
}

fn backtrack(
    small: &FiniteMetricSpace,
    big: &FiniteMetricSpace,
    cands: &[Vec<usize>],
    assign: &mut Vec<usize>,
    used: &mut [bool],
) -> bool {
    let u = assign.len();
    if u == small.n() {
        return true;
    }
    for &v in &cands[u] {
        if used[v] {
            continue;
        }
        if (0..u).all(|w| small.d(u, w) == big.d(v, assign[w])) {
            assign.push(v);
            used[v] = true;
            if backtrack(small, big, cands, assign, used) {
                return true;
            }
            used[v] = false;
            assign.pop();
        }
    }
    false
}

fn search(
    small: &FiniteMetricSpace,
    big: &FiniteMetricSpace,
    bijective: bool,
) -> Result<PartialIsometry, MetricError> {
    if small.n() > big.n() || (bijective && small.n() != big.n()) {
        return Err(MetricError::NotFound);
    }
    let cands = candidates(small, big, bijective);
    if cands.iter().any(|c| c.is_empty()) {
        return Err(MetricError::NotFound);
    }
    let mut assign = Vec::with_capacity(small.n());
    let mut used = vec![false; big.n()];
    if backtrack(small, big, &cands, &mut assign, &mut used) {
        Ok(PartialIsometry::new(
            assign.into_iter().enumerate().collect(),
        ))
    } else {
        Err(MetricError::NotFound)
    }
}

/// Lexicographically least isometric embedding of `small` into `big`.
pub fn find_embedding(
    small: &FiniteMetricSpace,
    big: &FiniteMetricSpace,
) -> Result<PartialIsometry, MetricError> {
    search(small, big, false)
}

/// Lexicographically least isometry `a -> b`; requires equal sizes.
pub fn find_isometry(
    a: &FiniteMetricSpace,
    b: &FiniteMetricSpace,
) -> Result<PartialIsometry, MetricError> {
    search(a, b, true)
}

//! Katetov maps over finite spaces.
//!
//! A Katetov map `f` on `X` satisfies `|f(x) - f(y)| <= d(x,y) <= f(x) + f(y)`
//! and describes a one-point metric extension of `X`. The set of all such
//! maps is infinite even for finite `X`, so it is never materialized: this
//! module works with checks, Katetov extensions from subsets, grid
//! enumerations and exact feasible intervals.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use crate::ratmetric::{FiniteMetricSpace, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KatetovError {
    #[error("NegativeValue {0}")]
    NegativeValue(usize),
    #[error("LipschitzViolation {0} {1}")]
    LipschitzViolation(usize, usize),
    #[error("SumViolation {0} {1}")]
    SumViolation(usize, usize),
    #[error("LengthMismatch expected {expected} got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("BaseMismatch")]
    BaseMismatch,
    #[error("InfeasiblePartial {0}")]
    InfeasiblePartial(usize),
    #[error("EmptyAssignment")]
    EmptyAssignment,
    #[error("IndexOutOfRange {0}")]
    IndexOutOfRange(usize),
    #[error("DuplicateIndex {0}")]
    DuplicateIndex(usize),
    #[error("NotASupport")]
    NotASupport,
}

/// A Katetov map on a whole base space, optionally carrying a support `S`
/// with `f(x) = min { f(s) + d(x,s) : s in S }`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct KatetovMap {
    values: Vec<Rational>,
    support: Option<Vec<usize>>,
}

impl KatetovMap {
    pub(crate) fn from_parts_unchecked(values: Vec<Rational>, support: Option<Vec<usize>>) -> Self {
        KatetovMap { values, support }
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn value(&self, x: usize) -> Rational {
        self.values[x]
    }

    pub fn support(&self) -> Option<&[usize]> {
        self.support.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<Rational> {
        self.values
    }

    pub fn min_value(&self) -> Option<Rational> {
        self.values.iter().copied().min()
    }

    /// Attaches `support` after checking that it controls the map.
    pub fn with_support(
        self,
        space: &FiniteMetricSpace,
        support: Vec<usize>,
    ) -> Result<Self, KatetovError> {
        if controls(space, &self.values, &support) {
            Ok(KatetovMap {
                support: Some(support),
                ..self
            })
        } else {
            Err(KatetovError::NotASupport)
        }
    }
}

impl fmt::Display for KatetovMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// Whether `support` controls `values`: every value is attained as
/// `min { f(s) + d(x,s) }` over the support.
pub fn controls(space: &FiniteMetricSpace, values: &[Rational], support: &[usize]) -> bool {
    !support.is_empty()
        && support.iter().all(|&s| s < space.n())
        && space
            .points()
            .all(|x| support.iter().map(|&s| values[s] + space.d(x, s)).min() == Some(values[x]))
}

fn check_indices(space: &FiniteMetricSpace, points: &[usize]) -> Result<(), KatetovError> {
    let mut seen = HashSet::new();
    for &p in points {
        if p >= space.n() {
            return Err(KatetovError::IndexOutOfRange(p));
        }
        if !seen.insert(p) {
            return Err(KatetovError::DuplicateIndex(p));
        }
    }
    Ok(())
}

/// Checks the Katetov inequalities for a partial assignment `points[i] ->
/// values[i]`. Violations are reported with ambient indices, pairs taken in
/// assignment order.
pub fn check_partial(
    space: &FiniteMetricSpace,
    points: &[usize],
    values: &[Rational],
) -> Result<(), KatetovError> {
    if points.len() != values.len() {
        return Err(KatetovError::LengthMismatch {
            expected: points.len(),
            got: values.len(),
        });
    }
    check_indices(space, points)?;
    if let Some(a) = values.iter().position(|v| v.is_negative()) {
        return Err(KatetovError::NegativeValue(points[a]));
    }
    for a in 0..points.len() {
        for b in a + 1..points.len() {
            let d = space.d(points[a], points[b]);
            if values[a].abs_diff(values[b]) > d {
                return Err(KatetovError::LipschitzViolation(points[a], points[b]));
            }
            if values[a] + values[b] < d {
                return Err(KatetovError::SumViolation(points[a], points[b]));
            }
        }
    }
    Ok(())
}

/// Validates a full assignment, one value per point.
pub fn katetov_check(
    space: &FiniteMetricSpace,
    values: Vec<Rational>,
) -> Result<KatetovMap, KatetovError> {
    if values.len() != space.n() {
        return Err(KatetovError::LengthMismatch {
            expected: space.n(),
            got: values.len(),
        });
    }
    let all: Vec<usize> = space.points().collect();
    check_partial(space, &all, &values)?;
    Ok(KatetovMap {
        values,
        support: None,
    })
}

/// `k(f)(x) = min { f(s) + d(x,s) }` without validating `f`.
pub(crate) fn extension_values(
    space: &FiniteMetricSpace,
    points: &[usize],
    values: &[Rational],
) -> Vec<Rational> {
    space
        .points()
        .map(|x| {
            points
                .iter()
                .zip(values)
                .map(|(&s, &v)| v + space.d(x, s))
                .min()
                .expect("nonempty assignment")
        })
        .collect()
}

/// The Katetov extension `k(f)`: the greatest 1-Lipschitz map agreeing with
/// `f` on `points`. The result carries `points` as its support.
pub fn katetov_extend(
    space: &FiniteMetricSpace,
    points: &[usize],
    values: &[Rational],
) -> Result<KatetovMap, KatetovError> {
    if points.is_empty() {
        return Err(KatetovError::EmptyAssignment);
    }
    check_partial(space, points, values)?;
    Ok(KatetovMap {
        values: extension_values(space, points, values),
        support: Some(points.to_vec()),
    })
}

/// `f_x = d(x, .)`, supported on `{x}`.
pub fn kuratowski(space: &FiniteMetricSpace, x: usize) -> KatetovMap {
    KatetovMap {
        values: space.row(x),
        support: Some(vec![x]),
    }
}

/// Sup-metric on maps over the same base.
pub fn sup_distance(f: &KatetovMap, g: &KatetovMap) -> Result<Rational, KatetovError> {
    if f.len() != g.len() {
        return Err(KatetovError::BaseMismatch);
    }
    Ok(f.values
        .iter()
        .zip(&g.values)
        .map(|(a, b)| a.abs_diff(*b))
        .max()
        .unwrap_or(Rational::ZERO))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    Finite(Rational),
    Unbounded,
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Finite(r) => write!(f, "{r}"),
            Bound::Unbounded => write!(f, "inf"),
        }
    }
}

/// Exact range of values `g(point)` over Katetov maps `g` extending a
/// partial assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeasibleInterval {
    pub point: usize,
    pub lower: Rational,
    pub upper: Bound,
}

impl FeasibleInterval {
    pub fn contains(&self, v: Rational) -> bool {
        v >= self.lower
            && match self.upper {
                Bound::Finite(u) => v <= u,
                Bound::Unbounded => true,
            }
    }

    pub fn is_forced(&self) -> bool {
        self.upper == Bound::Finite(self.lower)
    }
}

/// `lower = max |f(z) - d(x,z)|`, `upper = min f(z) + d(x,z)` over assigned
/// `z` (and `[0, inf)` when nothing is assigned). If `x` is itself assigned
/// the interval is the single assigned value.
pub fn feasible_interval(
    space: &FiniteMetricSpace,
    points: &[usize],
    values: &[Rational],
    x: usize,
) -> Result<FeasibleInterval, KatetovError> {
    if x >= space.n() {
        return Err(KatetovError::IndexOutOfRange(x));
    }
    if points.len() != values.len() {
        return Err(KatetovError::LengthMismatch {
            expected: points.len(),
            got: values.len(),
        });
    }
    if let Some(a) = points.iter().position(|&p| p == x) {
        return Ok(FeasibleInterval {
            point: x,
            lower: values[a],
            upper: Bound::Finite(values[a]),
        });
    }
    let mut lower = Rational::ZERO;
    let mut upper = Bound::Unbounded;
    for (&z, &v) in points.iter().zip(values) {
        let d = space.d(x, z);
        lower = lower.max(v.abs_diff(d));
        let u = v + d;
        upper = match upper {
            Bound::Finite(cur) if cur <= u => upper,
            _ => Bound::Finite(u),
        };
    }
    if let Bound::Finite(u) = upper {
        if lower > u {
            return Err(KatetovError::InfeasiblePartial(x));
        }
    }
    Ok(FeasibleInterval {
        point: x,
        lower,
        upper,
    })
}

/// Grid-valued Katetov assignments on small subsets, in a fixed order:
/// support size ascending, then subsets lexicographically, then value tuples
/// lexicographically in ascending grid order.
pub struct GridMaps<'a> {
    space: &'a FiniteMetricSpace,
    grid: Vec<Rational>,
    pool: usize,
    max_support: usize,
    subset: Vec<usize>,
    digits: Vec<usize>,
    done: bool,
}

impl<'a> GridMaps<'a> {
    pub fn new(space: &'a FiniteMetricSpace, grid: &[Rational], max_support: usize) -> Self {
        Self::over(space, grid, max_support, space.n())
    }

    /// Restricts supports to the first `pool` points of the space.
    pub fn over(
        space: &'a FiniteMetricSpace,
        grid: &[Rational],
        max_support: usize,
        pool: usize,
    ) -> Self {
        let mut grid = grid.to_vec();
        grid.sort_unstable();
        grid.dedup();
        let pool = pool.min(space.n());
        GridMaps {
            space,
            done: grid.is_empty() || max_support == 0 || pool == 0,
            grid,
            pool,
            max_support: max_support.min(pool),
            subset: vec![0],
            digits: vec![0],
        }
    }

    fn next_subset(&mut self) -> bool {
        let k = self.subset.len();
        let mut i = k;
        while i > 0 {
            i -= 1;
            if self.subset[i] < self.pool - (k - i) {
                self.subset[i] += 1;
                for j in i + 1..k {
                    self.subset[j] = self.subset[j - 1] + 1;
                }
                return true;
            }
        }
        false
    }

    fn advance(&mut self) {
        let g = self.grid.len();
        for i in (0..self.digits.len()).rev() {
            self.digits[i] += 1;
            if self.digits[i] < g {
                return;
            }
            self.digits[i] = 0;
        }
        if self.next_subset() {
            return;
        }
        let k = self.subset.len() + 1;
        if k > self.max_support {
            self.done = true;
        } else {
            self.subset = (0..k).collect();
            self.digits = vec![0; k];
        }
    }
}

impl Iterator for GridMaps<'_> {
    type Item = (Vec<usize>, Vec<Rational>);

    fn next(&mut self) -> Option<Self::Item> {
        while !self.done {
            let values: Vec<Rational> = self.digits.iter().map(|&d| self.grid[d]).collect();
            let support = self.subset.clone();
            self.advance();
            if check_partial(self.space, &support, &values).is_ok() {
                return Some((support, values));
            }
        }
        None
    }
}

/// Katetov extensions of every grid-valued Katetov map on a subset of at
/// most `max_support` points, deduplicated by value vector (first
/// occurrence wins, so each map keeps its smallest support).
///
/// The grid only constrains values on the support; elsewhere the values are
/// whatever the extension gives.
pub fn enumerate_katetov(
    space: &FiniteMetricSpace,
    grid: &[Rational],
    max_support: usize,
) -> Vec<KatetovMap> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (support, values) in GridMaps::new(space, grid, max_support) {
        let ext = extension_values(space, &support, &values);
        if seen.insert(ext.clone()) {
            out.push(KatetovMap {
                values: ext,
                support: Some(support),
            });
        }
    }
    out
}

/// Largest sup-distance from `f` to a Katetov map agreeing with `f` on `k`.
///
/// At each free point the admissible values form the exact interval
/// `[lower, k(f|K)(x)]`, and every value in it extends, so the radius is the
/// worst one-sided gap over free points.
pub fn saturation_radius(
    space: &FiniteMetricSpace,
    f: &KatetovMap,
    k: &[usize],
) -> Result<Rational, KatetovError> {
    if f.len() != space.n() {
        return Err(KatetovError::BaseMismatch);
    }
    if k.is_empty() {
        return Err(KatetovError::EmptyAssignment);
    }
    check_indices(space, k)?;
    let kv: Vec<Rational> = k.iter().map(|&i| f.value(i)).collect();
    let upper = extension_values(space, k, &kv);
    let mut radius = Rational::ZERO;
    for x in space.points().filter(|x| !k.contains(x)) {
        let lower = feasible_interval(space, k, &kv, x)?.lower;
        let fx = f.value(x);
        radius = radius.max(upper[x] - fx).max(fx - lower);
    }
    Ok(radius)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SaturationWitness {
    pub subset: Vec<usize>,
    pub radius: Rational,
    /// False when the subset came from the greedy search and may not be
    /// the smallest.
    pub optimal: bool,
}

/// Largest space for which [`min_saturation_witness`] searches exhaustively.
pub const EXHAUSTIVE_WITNESS_LIMIT: usize = 12;

/// Smallest subset `K` (ties broken lexicographically) with
/// `saturation_radius(f, K) <= eps`. Exhaustive up to
/// [`EXHAUSTIVE_WITNESS_LIMIT`] points, greedy beyond.
pub fn min_saturation_witness(
    space: &FiniteMetricSpace,
    f: &KatetovMap,
    eps: Rational,
) -> Result<SaturationWitness, KatetovError> {
    if space.n() > EXHAUSTIVE_WITNESS_LIMIT {
        return greedy_saturation_witness(space, f, eps);
    }
    exhaustive_saturation_witness(space, f, eps)
}

pub fn exhaustive_saturation_witness(
    space: &FiniteMetricSpace,
    f: &KatetovMap,
    eps: Rational,
) -> Result<SaturationWitness, KatetovError> {
    let n = space.n();
    if f.len() != n {
        return Err(KatetovError::BaseMismatch);
    }
    for size in 1..=n {
        let mut subset: Vec<usize> = (0..size).collect();
        loop {
            let r = saturation_radius(space, f, &subset)?;
            if r <= eps {
                return Ok(SaturationWitness {
                    subset,
                    radius: r,
                    optimal: true,
                });
            }
            let mut i = size;
            let mut moved = false;
            while i > 0 {
                i -= 1;
                if subset[i] < n - (size - i) {
                    subset[i] += 1;
                    for j in i + 1..size {
                        subset[j] = subset[j - 1] + 1;
                    }
                    moved = true;
                    break;
                }
            }
            if !moved {
                break;
            }
        }
    }
    Err(KatetovError::EmptyAssignment)
}

/// Adds points one at a time: the lowest-index point that brings the radius
/// within `eps` if there is one, otherwise the point that most reduces it
/// (lowest index on ties).
pub fn greedy_saturation_witness(
    space: &FiniteMetricSpace,
    f: &KatetovMap,
    eps: Rational,
) -> Result<SaturationWitness, KatetovError> {
    if f.len() != space.n() {
        return Err(KatetovError::BaseMismatch);
    }
    if space.is_empty() {
        return Err(KatetovError::EmptyAssignment);
    }
    let mut chosen: Vec<usize> = Vec::new();
    loop {
        let mut best: Option<(Rational, usize)> = None;
        for x in space.points().filter(|x| !chosen.contains(x)) {
            let mut trial = chosen.clone();
            trial.push(x);
            let r = saturation_radius(space, f, &trial)?;
            if best.is_none_or(|(b, _)| r < b) {
                best = Some((r, x));
            }
            if r <= eps {
                break;
            }
        }
        let (r, x) = best.expect("a free point remains while radius > eps");
        chosen.push(x);
        if r <= eps {
            chosen.sort_unstable();
            return Ok(SaturationWitness {
                subset: chosen,
                radius: r,
                optimal: false,
            });
        }
    }
}

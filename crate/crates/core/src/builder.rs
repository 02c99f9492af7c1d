//! The Katetov tower `X_0 ⊆ X_1 ⊆ ...`, truncated by grid, support size,
//! depth and a point budget.
//!
//! Level `i + 1` adds one point per grid-supported Katetov map over level
//! `i`. A new point `z_f` sits at distance `k(f)(x)` from every old point and
//! at sup-distance from the other new points of its level. Because the
//! Katetov extension is an isometric embedding `E(S ∪ T) -> E(X)`, the
//! sup-distance between `k(f)` and `k(g)` is already attained on the union
//! of their supports, which keeps each new-new distance cheap.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};

use thiserror::Error;

use crate::katetov::{check_partial, extension_values, GridMaps, KatetovError, KatetovMap};
use crate::ratmetric::{FiniteMetricSpace, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BuilderError {
    #[error("DuplicatePoint {0}")]
    DuplicatePoint(usize),
    #[error("BudgetExceeded {points} {limit}")]
    BudgetExceeded { points: usize, limit: usize },
    #[error("EmptyGrid")]
    EmptyGrid,
    #[error("NonPositiveGrid {0}")]
    NonPositiveGrid(Rational),
    #[error("ZeroSupport")]
    ZeroSupport,
    #[error("LevelOutOfRange {0}")]
    LevelOutOfRange(usize),
    #[error("OutsideLevel {0}")]
    OutsideLevel(usize),
    #[error(transparent)]
    Katetov(#[from] KatetovError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TowerConfig {
    pub grid: Vec<Rational>,
    pub max_support: usize,
    pub depth: usize,
    pub max_points: usize,
}

impl Default for TowerConfig {
    fn default() -> Self {
        TowerConfig {
            grid: (1..=6).map(|k| Rational::new(k, 2)).collect(),
            max_support: 3,
            depth: 2,
            max_points: 5000,
        }
    }
}

impl TowerConfig {
    pub fn validate(&self) -> Result<(), BuilderError> {
        if self.grid.is_empty() {
            return Err(BuilderError::EmptyGrid);
        }
        if let Some(&g) = self.grid.iter().find(|g| !g.is_positive()) {
            return Err(BuilderError::NonPositiveGrid(g));
        }
        if self.max_support == 0 {
            return Err(BuilderError::ZeroSupport);
        }
        Ok(())
    }
}

/// How an added point came about: its level, and the support and values of
/// the map it realizes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub index: usize,
    pub level: usize,
    pub support: Vec<usize>,
    pub values: Vec<Rational>,
}

#[derive(Debug, Clone)]
pub struct TowerApprox {
    /// The top level; every lower level is a prefix.
    pub space: FiniteMetricSpace,
    /// `level_ends[i]` is the point count of level `i`.
    pub level_ends: Vec<usize>,
    /// One record per point past the seed, in index order.
    pub provenance: Vec<Provenance>,
    /// Points at or past this index were added by [`extend_on_demand`] and
    /// realize their map over every point before them. They belong to no
    /// level.
    pub built_len: usize,
    /// Set when the budget stopped the build inside a level.
    pub truncated: bool,
}

impl TowerApprox {
    pub fn seed_len(&self) -> usize {
        self.level_ends[0]
    }

    /// Number of levels above the seed, counting a truncated one.
    pub fn depth(&self) -> usize {
        self.level_ends.len() - 1
    }

    /// Deepest level that was built in full.
    pub fn complete_depth(&self) -> usize {
        if self.truncated {
            self.depth() - 1
        } else {
            self.depth()
        }
    }

    pub fn level(&self, i: usize) -> FiniteMetricSpace {
        self.space.prefix(self.level_ends[i])
    }

    /// `Err(BudgetExceeded)` when the build was cut short.
    pub fn budget_status(&self, limit: usize) -> Result<(), BuilderError> {
        if self.truncated {
            Err(BuilderError::BudgetExceeded {
                points: self.space.n(),
                limit,
            })
        } else {
            Ok(())
        }
    }

    /// How many points a provenance record's map was extended over.
    pub fn generated_over(&self, p: &Provenance) -> usize {
        if p.index >= self.built_len {
            p.index
        } else {
            self.level_ends[p.level - 1]
        }
    }

    /// Checks `d(z, x) = k(f)(x)` for every record and every point `x` the
    /// record's map was extended over. Returns the first offending index.
    pub fn check_witnesses(&self) -> Result<(), usize> {
        for p in &self.provenance {
            let over = self.generated_over(p);
            for x in 0..over {
                let k = p
                    .support
                    .iter()
                    .zip(&p.values)
                    .map(|(&s, &v)| v + self.space.d(x, s))
                    .min();
                if k != Some(self.space.d(p.index, x)) {
                    return Err(p.index);
                }
            }
        }
        Ok(())
    }
}

/// `space` plus one point at distance `f(x)` from each `x`.
pub fn realize(
    space: &FiniteMetricSpace,
    f: &KatetovMap,
) -> Result<FiniteMetricSpace, BuilderError> {
    if f.len() != space.n() {
        return Err(KatetovError::LengthMismatch {
            expected: space.n(),
            got: f.len(),
        }
        .into());
    }
    if let Some(x) = f.values().iter().position(|v| v.is_zero()) {
        return Err(BuilderError::DuplicatePoint(x));
    }
    let mut out = space.clone();
    out.push_point_unchecked(f.values(), format!("z{}", space.n()));
    Ok(out)
}

fn hash_row(row: &[Rational]) -> u64 {
    let mut h = DefaultHasher::new();
    row.hash(&mut h);
    h.finish()
}

pub fn build_tower(
    seed: &FiniteMetricSpace,
    cfg: &TowerConfig,
) -> Result<TowerApprox, BuilderError> {
    cfg.validate()?;
    let mut t = TowerApprox {
        space: seed.clone(),
        level_ends: vec![seed.n()],
        provenance: Vec::new(),
        built_len: seed.n(),
        truncated: false,
    };
    for _ in 0..cfg.depth {
        let complete = grow_level(&mut t, cfg);
        t.built_len = t.space.n();
        if !complete {
            break;
        }
    }
    Ok(t)
}

/// Adds the next level; false when the budget cut it short.
fn grow_level(t: &mut TowerApprox, cfg: &TowerConfig) -> bool {
    let base = t.space.clone();
    let base_n = base.n();
    let level = t.level_ends.len();
    let seed_len = t.seed_len();
    t.level_ends.push(base_n);
    let mut seen: HashMap<u64, Vec<usize>> = HashMap::new();

    for (support, values) in GridMaps::new(&base, &cfg.grid, cfg.max_support) {
        let mut row = extension_values(&base, &support, &values);
        if row.iter().any(|v| v.is_zero()) {
            continue;
        }
        let h = hash_row(&row);
        if let Some(cands) = seen.get(&h) {
            if cands
                .iter()
                .any(|&z| (0..base_n).all(|x| t.space.d(z, x) == row[x]))
            {
                continue;
            }
        }
        if t.space.n() >= cfg.max_points {
            t.truncated = true;
            return false;
        }
        for z in base_n..t.space.n() {
            let other = &t.provenance[z - seed_len].support;
            let d = support
                .iter()
                .chain(other)
                .map(|&u| row[u].abs_diff(t.space.d(z, u)))
                .max()
                .expect("supports are nonempty");
            row.push(d);
        }
        let index = t.space.n();
        t.space.push_point_unchecked(&row, format!("z{index}"));
        t.provenance.push(Provenance {
            index,
            level,
            support,
            values,
        });
        seen.entry(h).or_default().push(index);
        *t.level_ends.last_mut().unwrap() = index + 1;
    }
    true
}

/// Outcome of checking finite injectivity against a grid.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AuditReport {
    pub checked: usize,
    /// Unrealized `(support, values)` assignments, in enumeration order.
    pub failures: Vec<(Vec<usize>, Vec<Rational>)>,
}

impl AuditReport {
    pub fn is_clean(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Some point of `space` realizing the assignment to within `eps`.
pub fn find_witness(
    space: &FiniteMetricSpace,
    support: &[usize],
    values: &[Rational],
    eps: Rational,
) -> Option<usize> {
    space.points().find(|&z| {
        support
            .iter()
            .zip(values)
            .all(|(&s, &v)| space.d(z, s).abs_diff(v) <= eps)
    })
}

/// For every subset of the first `pool` points with at most `k` elements and
/// every grid-valued Katetov assignment on it, looks for a point of the whole
/// space realizing it to within `eps`.
pub fn injectivity_audit(
    space: &FiniteMetricSpace,
    pool: usize,
    grid: &[Rational],
    k: usize,
    eps: Rational,
) -> AuditReport {
    let mut report = AuditReport::default();
    for (support, values) in GridMaps::over(space, grid, k, pool) {
        report.checked += 1;
        if find_witness(space, &support, &values, eps).is_none() {
            report.failures.push((support, values));
        }
    }
    report
}

/// Realizes `k(f)` for an assignment on points of `level`, extended over the
/// whole top space, and appends it past the built levels (its provenance
/// level is one above the top). Rejected when some point already has the
/// same distances to every point of the level.
pub fn extend_on_demand(
    t: &mut TowerApprox,
    level: usize,
    support: &[usize],
    values: &[Rational],
) -> Result<usize, BuilderError> {
    let end = *t
        .level_ends
        .get(level)
        .ok_or(BuilderError::LevelOutOfRange(level))?;
    if let Some(&s) = support.iter().find(|&&s| s >= end) {
        return Err(BuilderError::OutsideLevel(s));
    }
    if support.is_empty() {
        return Err(KatetovError::EmptyAssignment.into());
    }
    let index = realize_assignment(&mut t.space, end, support, values)?;
    t.provenance.push(Provenance {
        index,
        level: t.depth() + 1,
        support: support.to_vec(),
        values: values.to_vec(),
    });
    Ok(index)
}

/// Appends the point realizing `k(f)` over all of `space`, unless a point
/// already matches `k(f)` on the first `level_len` points.
pub fn realize_assignment(
    space: &mut FiniteMetricSpace,
    level_len: usize,
    support: &[usize],
    values: &[Rational],
) -> Result<usize, BuilderError> {
    check_partial(space, support, values)?;
    let row = extension_values(space, support, values);
    if let Some(z) = space
        .points()
        .find(|&z| (0..level_len).all(|x| space.d(z, x) == row[x]))
    {
        return Err(BuilderError::DuplicatePoint(z));
    }
    let index = space.n();
    space.push_point_unchecked(&row, format!("z{index}"));
    Ok(index)
}

/// [`realize_assignment`] with the whole space as the level.
pub fn extend_space(
    space: &mut FiniteMetricSpace,
    support: &[usize],
    values: &[Rational],
) -> Result<usize, BuilderError> {
    let n = space.n();
    realize_assignment(space, n, support, values)
}

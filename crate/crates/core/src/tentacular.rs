//! Finite evidence about inline sequences and separability of the space of
//! Katetov maps: the inline tests on sequence prefixes, the line `0..n`, a
//! spread-out family on which Katetov extensions stay far apart, and
//! convergence of extensions from initial segments.
//!
//! Statements of the form "there is `N` such that for all `n >= N`" are
//! evaluated on a finite prefix only.

use thiserror::Error;

use crate::katetov::{katetov_extend, sup_distance, KatetovError, KatetovMap};
use crate::ratmetric::{FiniteMetricSpace, MetricError, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TentacularError {
    #[error("TooShort {0}")]
    TooShort(usize),
    #[error("SearchFailed {size} {achieved}")]
    SearchFailed { size: usize, achieved: usize },
    #[error("DuplicateIndex {0}")]
    DuplicateIndex(usize),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Katetov(#[from] KatetovError),
}

/// A finite prefix `u_0, u_1, ...` of a sequence of distinct points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointSequence {
    pub space: FiniteMetricSpace,
    pub order: Vec<usize>,
}

impl PointSequence {
    pub fn new(space: FiniteMetricSpace, order: Vec<usize>) -> Result<Self, TentacularError> {
        let mut seen = vec![false; space.n()];
        for &i in &order {
            if i >= space.n() {
                return Err(MetricError::IndexOutOfRange(i).into());
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(TentacularError::DuplicateIndex(i));
            }
        }
        Ok(PointSequence { space, order })
    }

    /// The points of `space` in index order.
    pub fn natural(space: FiniteMetricSpace) -> Self {
        let order = space.points().collect();
        PointSequence { space, order }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    fn d(&self, a: usize, b: usize) -> Rational {
        self.space.d(self.order[a], self.order[b])
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InlineReport {
    pub holds: bool,
    /// The `r` with the least slack `d(u_0,u_{r+1}) + eps - sum`, if any.
    pub worst_r: Option<usize>,
    pub worst_slack: Option<Rational>,
}

/// `sum_{i<=r} d(u_i,u_{i+1}) <= d(u_0,u_{r+1}) + eps` for every `r`.
pub fn eps_good_inline(seq: &PointSequence, eps: Rational) -> InlineReport {
    let mut sum = Rational::ZERO;
    let mut worst: Option<(usize, Rational)> = None;
    for r in 0..seq.len().saturating_sub(1) {
        sum += seq.d(r, r + 1);
        let slack = seq.d(0, r + 1) + eps - sum;
        if worst.is_none_or(|w| slack < w.1) {
            worst = Some((r, slack));
        }
    }
    InlineReport {
        holds: worst.is_none_or(|w| !w.1.is_negative()),
        worst_r: worst.map(|w| w.0),
        worst_slack: worst.map(|w| w.1),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionC {
    pub holds: bool,
    /// Least working `N` on the prefix.
    pub n: Option<usize>,
}

/// Least `N` with `1 <= N <= len - 2` such that every `n > N` in the prefix
/// has some `1 <= i <= N` with `d(x_0,x_n) >= d(x_0,x_i) + d(x_i,x_n) - delta`.
///
/// `i = 0` and `n <= N` are left out because they satisfy the inequality for
/// every sequence; `N` is kept below the last index so that at least one `n`
/// is tested.
pub fn condition_c_check(seq: &PointSequence, delta: Rational) -> ConditionC {
    let len = seq.len();
    for big_n in 1..len.saturating_sub(1) {
        let ok = (big_n + 1..len)
            .all(|n| (1..=big_n).any(|i| seq.d(0, n) >= seq.d(0, i) + seq.d(i, n) - delta));
        if ok {
            return ConditionC {
                holds: true,
                n: Some(big_n),
            };
        }
    }
    ConditionC {
        holds: false,
        n: None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extraction {
    pub seq: PointSequence,
    /// Threshold of the last pass.
    pub final_delta: Rational,
    /// Sum of the thresholds of all passes; the output is good-inline at
    /// this tolerance.
    pub eps: Rational,
    pub passes: usize,
}

const MAX_PASSES: usize = 32;

/// Greedy pigeonhole passes: a pass keeps `u_0` and then every point whose
/// chain sum stays within `d(u_0, u) + delta` of the straight distance. The
/// threshold halves after each pass; passes stop once nothing is dropped.
pub fn extract_inline_subsequence(
    seq: &PointSequence,
    delta: Rational,
) -> Result<Extraction, TentacularError> {
    if seq.len() < 2 {
        return Err(TentacularError::TooShort(seq.len()));
    }
    let sp = &seq.space;
    let mut cur = seq.order.clone();
    let mut d = delta;
    let mut eps = Rational::ZERO;
    let mut passes = 0;
    loop {
        passes += 1;
        eps += d;
        let u0 = cur[0];
        let mut kept = vec![u0];
        let mut sum = Rational::ZERO;
        for &u in &cur[1..] {
            let last = *kept.last().unwrap();
            let step = sum + sp.d(last, u);
            if step <= sp.d(u0, u) + d {
                kept.push(u);
                sum = step;
            }
        }
        let stable = kept.len() == cur.len();
        cur = kept;
        if cur.len() < 2 {
            return Err(TentacularError::TooShort(cur.len()));
        }
        if stable || passes >= MAX_PASSES {
            break;
        }
        d = d.half();
    }
    Ok(Extraction {
        seq: PointSequence {
            space: seq.space.clone(),
            order: cur,
        },
        final_delta: d,
        eps,
        passes,
    })
}

/// `{0, ..., n-1}` with `d(i,j) = |i - j|`.
pub fn nat_line(n: usize) -> FiniteMetricSpace {
    FiniteMetricSpace::from_lower_unchecked(
        n,
        (0..n)
            .flat_map(|i| (0..i).map(move |j| Rational::integer((i - j) as i64)))
            .collect(),
    )
}

/// Grid step of the spread search.
const SPREAD_STEP: (i64, i64) = (1, 2);

/// A base point `0` and points `x_1, ..., x_{n-1}` with
/// `d(x_{i+1},0) >= d(x_i,0) + 1`, `d(x_1,0) >= 1` and, for `j < i`,
/// `d(x_i,0) <= d(x_i,x_j) + d(x_j,0) - 1`.
///
/// Points are placed one at a time. Each distance is the least value on a
/// half-integer grid that meets the constraints above and the triangle
/// inequality against everything placed so far.
pub fn euclid_spread(n: usize) -> Result<FiniteMetricSpace, TentacularError> {
    if n < 2 {
        return Err(TentacularError::TooShort(n));
    }
    let step = Rational::new(SPREAD_STEP.0, SPREAD_STEP.1);
    let mut space = FiniteMetricSpace::single_point();
    for i in 1..n {
        let radius = if i == 1 {
            Rational::ONE
        } else {
            space.d(i - 1, 0) + Rational::ONE
        };
        let mut row = vec![radius];
        for j in 1..i {
            // spread inequality: d(x_i,x_j) >= d(x_i,0) - d(x_j,0) + 1
            let lo = radius - space.d(j, 0) + Rational::ONE;
            let Some(v) = grid_search(lo, step, 4 * n, |v| {
                (0..j).all(|k| {
                    let dk = row[k];
                    let djk = space.d(j, k);
                    v <= dk + djk && dk <= v + djk && djk <= v + dk
                })
            }) else {
                return Err(TentacularError::SearchFailed {
                    size: n,
                    achieved: i,
                });
            };
            row.push(v);
        }
        space.push_point_unchecked(&row, format!("x{i}"));
    }
    space.check_metric()?;
    Ok(space.with_labels(
        std::iter::once("0".to_string())
            .chain((1..n).map(|i| format!("x{i}")))
            .collect(),
    )?)
}

fn grid_search(
    lo: Rational,
    step: Rational,
    tries: usize,
    ok: impl Fn(Rational) -> bool,
) -> Option<Rational> {
    let mut v = lo.max(step);
    for _ in 0..tries {
        if ok(v) {
            return Some(v);
        }
        v += step;
    }
    None
}

/// `f(x_i) = d(x_i, 0)` on the non-base points of a spread, as a map on the
/// subspace `x_1, ..., x_{n-1}`.
pub fn spread_values(spread: &FiniteMetricSpace) -> Vec<Rational> {
    (1..spread.n()).map(|i| spread.d(i, 0)).collect()
}

/// `f_A` for each `A`: the Katetov extension over `x_1..x_{n-1}` of the
/// base values restricted to `{x_i : i in A}`. Indices in `A` are spread
/// indices, so they run from 1.
pub fn fa_family(
    spread: &FiniteMetricSpace,
    subsets: &[Vec<usize>],
) -> Result<Vec<KatetovMap>, TentacularError> {
    let xs: Vec<usize> = (1..spread.n()).collect();
    let sub = spread.induced(&xs);
    let f = spread_values(spread);
    subsets
        .iter()
        .map(|a| {
            if let Some(&bad) = a.iter().find(|&&i| i == 0 || i >= spread.n()) {
                return Err(MetricError::IndexOutOfRange(bad).into());
            }
            let pts: Vec<usize> = a.iter().map(|&i| i - 1).collect();
            let vals: Vec<Rational> = pts.iter().map(|&p| f[p]).collect();
            Ok(katetov_extend(&sub, &pts, &vals)?)
        })
        .collect()
}

/// Every nonempty subset of `1..n`, ordered by bitmask.
pub fn nonempty_subsets(n: usize) -> Vec<Vec<usize>> {
    let m = n.saturating_sub(1);
    (1u64..(1u64 << m))
        .map(|mask| {
            (0..m)
                .filter(|b| mask >> b & 1 == 1)
                .map(|b| b + 1)
                .collect()
        })
        .collect()
}

/// Smallest pairwise sup-distance in a family, with the pair attaining it.
pub fn min_pairwise_distance(maps: &[KatetovMap]) -> Option<(Rational, usize, usize)> {
    let mut best: Option<(Rational, usize, usize)> = None;
    for a in 0..maps.len() {
        for b in a + 1..maps.len() {
            let d = sup_distance(&maps[a], &maps[b]).ok()?;
            if best.is_none_or(|w| d < w.0) {
                best = Some((d, a, b));
            }
        }
    }
    best
}

/// `sup |f - k(f|[0,i])|` for `i = 0, ..., n-1` on the line.
pub fn example1_convergence(
    line: &FiniteMetricSpace,
    f: &KatetovMap,
) -> Result<Vec<Rational>, TentacularError> {
    if f.len() != line.n() {
        return Err(KatetovError::BaseMismatch.into());
    }
    // k(f|[0,i]) is updated in place as i grows
    let fv = f.values();
    let mut ext: Vec<Option<Rational>> = vec![None; line.n()];
    let mut out = Vec::with_capacity(line.n());
    for i in 0..line.n() {
        let mut sup = Rational::ZERO;
        for (x, e) in ext.iter_mut().enumerate() {
            let cand = fv[i] + line.d(x, i);
            let v = e.map_or(cand, |old| old.min(cand));
            *e = Some(v);
            sup = sup.max(v.abs_diff(fv[x]));
        }
        out.push(sup);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::katetov::{katetov_check, kuratowski};

    fn int(v: i64) -> Rational {
        Rational::integer(v)
    }

    #[test]
    fn inline_examples() {
        let line = PointSequence::natural(nat_line(10));
        assert!(eps_good_inline(&line, int(0)).holds);
        let two = PointSequence::new(nat_line(5), vec![4, 1]).unwrap();
        assert!(eps_good_inline(&two, int(0)).holds);
        let eq = PointSequence::natural(FiniteMetricSpace::from_fn(3, |_, _| int(1)).unwrap());
        assert!(!eps_good_inline(&eq, Rational::new(1, 2)).holds);
        let r = eps_good_inline(&eq, int(1));
        assert!(r.holds);
        assert_eq!(r.worst_r, Some(1));
    }

    #[test]
    fn condition_c_examples() {
        let line = PointSequence::natural(nat_line(8));
        assert_eq!(
            condition_c_check(&line, int(0)),
            ConditionC {
                holds: true,
                n: Some(1)
            }
        );
        let spread = PointSequence::natural(euclid_spread(6).unwrap());
        assert!(!condition_c_check(&spread, Rational::new(1, 2)).holds);
    }

    #[test]
    fn nat_line_matrix() {
        assert_eq!(
            nat_line(3).to_matrix(),
            vec![
                vec![int(0), int(1), int(2)],
                vec![int(1), int(0), int(1)],
                vec![int(2), int(1), int(0)],
            ]
        );
    }

    #[test]
    fn spread_constraints() {
        for n in 2..=8 {
            let s = euclid_spread(n).unwrap();
            assert!(s.check_metric().is_ok());
            assert!(s.d(1, 0) >= int(1));
            for i in 1..n {
                if i + 1 < n {
                    assert!(s.d(i + 1, 0) >= s.d(i, 0) + int(1));
                }
                for j in 1..i {
                    assert!(s.d(i, 0) <= s.d(i, j) + s.d(j, 0) - int(1));
                }
            }
        }
    }

    #[test]
    fn fa_examples() {
        let s = euclid_spread(6).unwrap();
        let fam = fa_family(&s, &[vec![1, 2, 3, 4, 5], vec![1], vec![2]]).unwrap();
        assert_eq!(fam[0].values(), spread_values(&s).as_slice());
        assert!(sup_distance(&fam[1], &fam[2]).unwrap() >= int(1));
        assert_eq!(nonempty_subsets(6).len(), 31);
    }

    #[test]
    fn extraction_examples() {
        let line = PointSequence::natural(nat_line(6));
        let ex = extract_inline_subsequence(&line, Rational::new(1, 2)).unwrap();
        assert_eq!(ex.seq.order, line.order);

        let shuffled = PointSequence::new(nat_line(8), vec![3, 5, 1, 7, 0, 6, 2, 4]).unwrap();
        let ex = extract_inline_subsequence(&shuffled, Rational::new(1, 2)).unwrap();
        assert_eq!(ex.seq.order, vec![3, 5, 7]);
        assert!(eps_good_inline(&ex.seq, int(0)).holds);

        let spread = PointSequence::natural(euclid_spread(6).unwrap());
        let ex = extract_inline_subsequence(&spread, Rational::new(1, 2)).unwrap();
        assert!(eps_good_inline(&ex.seq, ex.eps).holds);
        assert_eq!(ex.seq.len(), 2);
    }

    #[test]
    fn convergence_examples() {
        let l = nat_line(6);
        let zeros = vec![int(0); 6];
        assert_eq!(example1_convergence(&l, &kuratowski(&l, 0)).unwrap(), zeros);
        let f = katetov_check(&l, (0..6).map(|k| int(k + 1)).collect()).unwrap();
        assert_eq!(example1_convergence(&l, &f).unwrap(), zeros);

        let v = [3, 2, 1, 2, 3, 4].map(int).to_vec();
        let f = katetov_check(&l, v.clone()).unwrap();
        let oracle: Vec<Rational> = (0..6)
            .map(|i| {
                let pts: Vec<usize> = (0..=i).collect();
                sup_distance(&f, &katetov_extend(&l, &pts, &v[..=i]).unwrap()).unwrap()
            })
            .collect();
        assert_eq!(oracle, [4, 2, 0, 0, 0, 0].map(int).to_vec());
        assert_eq!(example1_convergence(&l, &f).unwrap(), oracle);
    }
}

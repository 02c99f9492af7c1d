//! Extending partial isometries, distance traces, uniqueness sets, nice
//! maps and the two perturbed extensions used to separate and to avoid
//! points.

use thiserror::Error;

use crate::builder::{extend_space, find_witness, BuilderError};
use crate::katetov::{check_partial, extension_values, KatetovError, KatetovMap};
use crate::ratmetric::{FiniteMetricSpace, MetricError, PartialIsometry, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HomogeneityError {
    #[error("NotNice {0} {1}")]
    NotNice(usize, usize),
    #[error("AlphaTooLarge {alpha} {alpha_max}")]
    AlphaTooLarge {
        alpha: Rational,
        alpha_max: Rational,
    },
    #[error("NegativeAlpha {0}")]
    NegativeAlpha(Rational),
    #[error("TracesDiffer {0}")]
    TracesDiffer(usize),
    #[error("SamePoint {0}")]
    SamePoint(usize),
    #[error("PreconditionFailed {0}")]
    PreconditionFailed(String),
    #[error("MarginViolated {0}")]
    MarginViolated(usize),
    #[error("EmptySubset")]
    EmptySubset,
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Katetov(#[from] KatetovError),
    #[error(transparent)]
    Builder(#[from] BuilderError),
}

/// `z`'s distances to `subset`, as a Katetov map on the induced subspace.
/// When `z` lies in the subset this is its Kuratowski map there.
pub fn distance_trace(
    space: &FiniteMetricSpace,
    subset: &[usize],
    z: usize,
) -> Result<KatetovMap, HomogeneityError> {
    if subset.is_empty() {
        return Err(HomogeneityError::EmptySubset);
    }
    if let Some(&bad) = subset.iter().chain([&z]).find(|&&i| i >= space.n()) {
        return Err(MetricError::IndexOutOfRange(bad).into());
    }
    let values = subset.iter().map(|&s| space.d(z, s)).collect();
    let support = subset.iter().position(|&s| s == z).map(|p| vec![p]);
    Ok(KatetovMap::from_parts_unchecked(values, support))
}

/// One forth step: `source` was matched to `target`, which realizes the
/// forced distances `forced[k]` to the images of the previously matched
/// points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub source: usize,
    pub target: usize,
    pub forced: Vec<(usize, Rational)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Completed,
    /// No unused point realizes the forced assignment `(image point,
    /// distance)` for `source`.
    Stuck {
        step: usize,
        source: usize,
        forced: Vec<(usize, Rational)>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtensionTrace {
    pub steps: Vec<Step>,
    pub outcome: Outcome,
    pub map: PartialIsometry,
}

impl ExtensionTrace {
    pub fn is_completed(&self) -> bool {
        self.outcome == Outcome::Completed
    }
}

/// Extends `p` until its domain covers `targets`. Unmatched targets are
/// taken in ascending order; each goes to the least-index point outside the
/// current range whose distances to the matched images equal the source's
/// distances to the matched points.
pub fn back_and_forth(
    ambient: &FiniteMetricSpace,
    p: &PartialIsometry,
    targets: &[usize],
) -> Result<ExtensionTrace, HomogeneityError> {
    p.validate(ambient, ambient)?;
    if let Some(&t) = targets.iter().find(|&&t| t >= ambient.n()) {
        return Err(MetricError::IndexOutOfRange(t).into());
    }
    let mut map = p.clone();
    let mut steps = Vec::new();
    let mut pending: Vec<usize> = targets
        .iter()
        .copied()
        .filter(|&t| map.image(t).is_none())
        .collect();
    pending.sort_unstable();
    pending.dedup();
    for x in pending {
        let forced: Vec<(usize, Rational)> = map
            .pairs()
            .iter()
            .map(|&(u, v)| (v, ambient.d(x, u)))
            .collect();
        let range = map.range();
        let found = ambient
            .points()
            .find(|y| !range.contains(y) && forced.iter().all(|&(v, r)| ambient.d(*y, v) == r));
        match found {
            Some(y) => {
                map.push(x, y);
                debug_assert!(map.validate(ambient, ambient).is_ok());
                steps.push(Step {
                    source: x,
                    target: y,
                    forced,
                });
            }
            None => {
                let step = steps.len();
                return Ok(ExtensionTrace {
                    steps,
                    outcome: Outcome::Stuck {
                        step,
                        source: x,
                        forced,
                    },
                    map,
                });
            }
        }
    }
    Ok(ExtensionTrace {
        steps,
        outcome: Outcome::Completed,
        map,
    })
}

/// The lexicographically first pair of distinct points with equal traces on
/// `a`, or `None` when `a` is a set of uniqueness.
pub fn uniqueness_witness(space: &FiniteMetricSpace, a: &[usize]) -> Option<(usize, usize)> {
    let traces: Vec<Vec<Rational>> = space
        .points()
        .map(|z| a.iter().map(|&s| space.d(z, s)).collect())
        .collect();
    for x in space.points() {
        for y in x + 1..space.n() {
            if traces[x] == traces[y] {
                return Some((x, y));
            }
        }
    }
    None
}

pub fn is_uniqueness_set(space: &FiniteMetricSpace, a: &[usize]) -> bool {
    uniqueness_witness(space, a).is_none()
}

/// First pair on which a Katetov inequality is not strict, if any.
pub fn nice_violation(space: &FiniteMetricSpace, values: &[Rational]) -> Option<(usize, usize)> {
    for i in space.points() {
        for j in i + 1..space.n() {
            let d = space.d(i, j);
            if values[i].abs_diff(values[j]) >= d || values[i] + values[j] <= d {
                return Some((i, j));
            }
        }
    }
    None
}

/// Both Katetov inequalities hold strictly on every pair.
pub fn is_nice(space: &FiniteMetricSpace, f: &KatetovMap) -> bool {
    f.len() == space.n() && nice_violation(space, f.values()).is_none()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Separation {
    /// Points of the core in order: the `x_i`, then `x`, then `y`.
    pub core: Vec<usize>,
    /// `g_alpha` on the core, same order.
    pub values: Vec<Rational>,
    pub alpha: Rational,
    pub alpha_max: Rational,
}

/// `g_alpha`: the Katetov extension of `f` from the `x_i` to `x` and `y`,
/// lowered by `alpha` at `x`. `alpha_max` is the largest value keeping every
/// inequality at `x` valid; the default `alpha` is half of it.
pub fn separating_extension(
    space: &FiniteMetricSpace,
    points: &[usize],
    f: &[Rational],
    x: usize,
    y: usize,
    alpha: Option<Rational>,
) -> Result<Separation, HomogeneityError> {
    if points.is_empty() {
        return Err(HomogeneityError::EmptySubset);
    }
    check_partial(space, points, f)?;
    if x == y {
        return Err(HomogeneityError::SamePoint(x));
    }
    for &p in [x, y].iter() {
        if p >= space.n() {
            return Err(MetricError::IndexOutOfRange(p).into());
        }
        if points.contains(&p) {
            return Err(HomogeneityError::SamePoint(p));
        }
    }
    if let Some(&xi) = points.iter().find(|&&xi| space.d(x, xi) != space.d(y, xi)) {
        return Err(HomogeneityError::TracesDiffer(xi));
    }
    let sub = space.induced(points);
    if let Some((i, j)) = nice_violation(&sub, f) {
        return Err(HomogeneityError::NotNice(points[i], points[j]));
    }

    let mut core = points.to_vec();
    core.push(x);
    core.push(y);
    let gx = points
        .iter()
        .zip(f)
        .map(|(&s, &v)| v + space.d(x, s))
        .min()
        .unwrap();
    let dxy = space.d(x, y);
    let mut alpha_max = dxy.min(gx + gx - dxy);
    for (&s, &v) in points.iter().zip(f) {
        let d = space.d(x, s);
        alpha_max = alpha_max.min(gx - v + d).min(gx + v - d);
    }
    let alpha = alpha.unwrap_or_else(|| alpha_max.half());
    if alpha.is_negative() {
        return Err(HomogeneityError::NegativeAlpha(alpha));
    }
    if alpha > alpha_max {
        return Err(HomogeneityError::AlphaTooLarge { alpha, alpha_max });
    }
    let mut values = f.to_vec();
    values.push(gx - alpha);
    values.push(gx);
    Ok(Separation {
        core,
        values,
        alpha,
        alpha_max,
    })
}

#[derive(Debug, Clone)]
pub struct SeparationReport {
    /// The ambient space plus every point that had to be added.
    pub space: FiniteMetricSpace,
    /// `(x, y, z)`: `z` realizes `g_alpha` for the pair and so
    /// `d(z,x) != d(z,y)`.
    pub separators: Vec<(usize, usize, usize)>,
    /// Whether the `x_i` together with the separators form a set of
    /// uniqueness for the original points.
    pub separated_all: bool,
}

/// For every pair of original points outside the `x_i` with equal traces on
/// them, finds or inserts a point realizing the separating extension.
pub fn separate_equal_traces(
    ambient: &FiniteMetricSpace,
    points: &[usize],
    f: &[Rational],
) -> Result<SeparationReport, HomogeneityError> {
    let n = ambient.n();
    let mut space = ambient.clone();
    let mut separators = Vec::new();
    for x in 0..n {
        if points.contains(&x) {
            continue;
        }
        for y in x + 1..n {
            if points.contains(&y) || points.iter().any(|&s| ambient.d(x, s) != ambient.d(y, s)) {
                continue;
            }
            let sep = separating_extension(&space, points, f, x, y, None)?;
            let z = match find_witness(&space, &sep.core, &sep.values, Rational::ZERO) {
                Some(z) => z,
                None => extend_space(&mut space, &sep.core, &sep.values)?,
            };
            separators.push((x, y, z));
        }
    }
    let mut set = points.to_vec();
    set.extend(separators.iter().map(|s| s.2));
    let separated_all =
        (0..n).all(|a| (a + 1..n).all(|b| set.iter().any(|&s| space.d(a, s) != space.d(b, s))));
    Ok(SeparationReport {
        space,
        separators,
        separated_all,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Avoidance {
    /// Targets then net points.
    pub points: Vec<usize>,
    /// `g` on `points`.
    pub values: Vec<Rational>,
    pub m: Rational,
    pub eps: Rational,
    /// For each net point: `(x_j, g(x_j), target attaining the minimum)`.
    pub certificate: Vec<(usize, Rational, usize)>,
}

impl Avoidance {
    /// Smallest `g(x_j) - (M + eps)` over the net.
    pub fn margin(&self) -> Rational {
        self.certificate
            .iter()
            .map(|c| c.1 - self.m - self.eps)
            .min()
            .unwrap_or(Rational::ZERO)
    }

    /// Checks that `c` is at distance at least `M` from every point within
    /// `eps` of a net point.
    pub fn verify(&self, space: &FiniteMetricSpace, c: usize) -> Result<(), usize> {
        for &(xj, _, _) in &self.certificate {
            for x in space.points() {
                if x != c && space.d(x, xj) <= self.eps && space.d(c, x) < self.m {
                    return Err(x);
                }
            }
        }
        Ok(())
    }
}

/// Extends `f` from the targets to the net by the Katetov extension. Each
/// net point is then at least `M + eps` from any realization, hence every
/// point within `eps` of the net is at least `M` away.
pub fn avoidance_extension(
    space: &FiniteMetricSpace,
    targets: &[usize],
    f: &[Rational],
    net: &[usize],
    m: Rational,
    eps: Rational,
) -> Result<Avoidance, HomogeneityError> {
    if targets.is_empty() {
        return Err(HomogeneityError::EmptySubset);
    }
    check_partial(space, targets, f)?;
    if let Some(&x) = net.iter().find(|&&x| x >= space.n()) {
        return Err(MetricError::IndexOutOfRange(x).into());
    }
    if eps.is_negative() {
        return Err(HomogeneityError::PreconditionFailed("eps negative".into()));
    }
    let min_f = f.iter().copied().min().unwrap();
    if min_f < eps {
        return Err(HomogeneityError::PreconditionFailed(format!(
            "eps {eps} exceeds min f {min_f}"
        )));
    }
    for &y in targets {
        for &x in net {
            if space.d(x, y) < m {
                return Err(HomogeneityError::PreconditionFailed(format!(
                    "d({y},{x}) below M {m}"
                )));
            }
        }
    }
    let mut points = targets.to_vec();
    points.extend(net.iter().filter(|x| !targets.contains(x)));
    let ext = extension_values(space, targets, f);
    let values: Vec<Rational> = points.iter().map(|&p| ext[p]).collect();
    let mut certificate = Vec::with_capacity(net.len());
    for &x in net {
        let (via, _) = targets
            .iter()
            .zip(f)
            .map(|(&y, &v)| (y, v + space.d(x, y)))
            .min_by_key(|t| t.1)
            .unwrap();
        if ext[x] < m + eps {
            return Err(HomogeneityError::MarginViolated(x));
        }
        certificate.push((x, ext[x], via));
    }
    Ok(Avoidance {
        points,
        values,
        m,
        eps,
        certificate,
    })
}

use std::collections::BTreeSet;

use super::{MetricError, Rational};

/// A finite metric space with exact rational distances.
///
/// Distances are stored as a packed lower triangle: row `i` holds
/// `d(i, 0), ..., d(i, i - 1)`. Appending a point therefore leaves every
/// existing entry in place, which is what lets a tower of spaces share one
/// buffer (each level is a prefix of the next).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FiniteMetricSpace {
    n: usize,
    labels: Vec<String>,
    lower: Vec<Rational>,
}

#[inline]
fn tri(i: usize, j: usize) -> usize {
    debug_assert!(j < i);
    i * (i - 1) / 2 + j
}

fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

/// Checks every metric axiom on a square matrix and returns the space.
///
/// Violations are reported in a fixed order: shape, diagonal, symmetry and
/// positivity (pairs `i < j` in lexicographic order), then the triangle
/// inequality `d(i,k) <= d(i,j) + d(j,k)` over triples in lexicographic order.
pub fn validate_space(matrix: &[Vec<Rational>]) -> Result<FiniteMetricSpace, MetricError> {
    let n = matrix.len();
    for (row, r) in matrix.iter().enumerate() {
        if r.len() != n {
            return Err(MetricError::NotSquare {
                row,
                len: r.len(),
                n,
            });
        }
    }
    for (i, r) in matrix.iter().enumerate() {
        if !r[i].is_zero() {
            return Err(MetricError::NonZeroDiagonal(i));
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if matrix[i][j] != matrix[j][i] {
                return Err(MetricError::AsymmetricMatrix(i, j));
            }
            if !matrix[i][j].is_positive() {
                return Err(MetricError::NegativeOrZeroOffDiagonal(i, j));
            }
        }
    }
    let mut lower = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for (i, r) in matrix.iter().enumerate() {
        lower.extend_from_slice(&r[..i]);
    }
    let space = FiniteMetricSpace {
        n,
        labels: default_labels(n),
        lower,
    };
    space.check_triangles()?;
    Ok(space)
}

impl FiniteMetricSpace {
    pub fn from_matrix(matrix: &[Vec<Rational>]) -> Result<Self, MetricError> {
        validate_space(matrix)
    }

    /// Builds a space from a distance function evaluated on pairs `j < i`.
    pub fn from_fn(
        n: usize,
        mut dist: impl FnMut(usize, usize) -> Rational,
    ) -> Result<Self, MetricError> {
        let mut m = vec![vec![Rational::ZERO; n]; n];
        for i in 0..n {
            for j in 0..i {
                let v = dist(i, j);
                m[i][j] = v;
                m[j][i] = v;
            }
        }
        validate_space(&m)
    }

    pub fn single_point() -> Self {
        FiniteMetricSpace {
            n: 1,
            labels: default_labels(1),
            lower: Vec::new(),
        }
    }

    /// Skips validation. Callers inside the crate use this only when the
    /// distances come from a construction that is metric by design (amalgams,
    /// Katetov extensions, sup-metrics).
    pub(crate) fn from_lower_unchecked(n: usize, lower: Vec<Rational>) -> Self {
        debug_assert_eq!(lower.len(), n * n.saturating_sub(1) / 2);
        FiniteMetricSpace {
            n,
            labels: default_labels(n),
            lower,
        }
    }

    /// Appends one point given its distances to all existing points.
    pub(crate) fn push_point_unchecked(&mut self, dists: &[Rational], label: String) {
        debug_assert_eq!(dists.len(), self.n);
        self.lower.extend_from_slice(dists);
        self.labels.push(label);
        self.n += 1;
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self, MetricError> {
        if labels.len() != self.n {
            return Err(MetricError::LabelCount {
                expected: self.n,
                got: labels.len(),
            });
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn has_default_labels(&self) -> bool {
        self.labels
            .iter()
            .enumerate()
            .all(|(i, l)| *l == i.to_string())
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> Rational {
        use std::cmp::Ordering::*;
        match i.cmp(&j) {
            Equal => Rational::ZERO,
            Greater => self.lower[tri(i, j)],
            Less => self.lower[tri(j, i)],
        }
    }

    pub fn row(&self, i: usize) -> Vec<Rational> {
        (0..self.n).map(|j| self.d(i, j)).collect()
    }

    pub fn to_matrix(&self) -> Vec<Vec<Rational>> {
        (0..self.n).map(|i| self.row(i)).collect()
    }

    pub fn points(&self) -> std::ops::Range<usize> {
        0..self.n
    }

    pub fn diameter(&self) -> Rational {
        self.lower.iter().copied().max().unwrap_or(Rational::ZERO)
    }

    /// The first `m` points with their distances. Towers use this to view
    /// lower levels.
    pub fn prefix(&self, m: usize) -> FiniteMetricSpace {
        assert!(m <= self.n);
        FiniteMetricSpace {
            n: m,
            labels: self.labels[..m].to_vec(),
            lower: self.lower[..m * m.saturating_sub(1) / 2].to_vec(),
        }
    }

    /// The subspace on `subset`, in the given order, keeping labels.
    pub fn induced(&self, subset: &[usize]) -> FiniteMetricSpace {
        let m = subset.len();
        let mut lower = Vec::with_capacity(m * m.saturating_sub(1) / 2);
        for (a, &i) in subset.iter().enumerate() {
            for &j in &subset[..a] {
                lower.push(self.d(i, j));
            }
        }
        FiniteMetricSpace {
            n: m,
            labels: subset.iter().map(|&i| self.labels[i].clone()).collect(),
            lower,
        }
    }

    /// Relabels points: point `k` of the result is point `order[k]` here.
    pub fn reordered(&self, order: &[usize]) -> FiniteMetricSpace {
        assert_eq!(order.len(), self.n);
        self.induced(order)
    }

    /// Re-runs the metric checks; spaces built by the crate pass by construction.
    pub fn check_metric(&self) -> Result<(), MetricError> {
        for i in 0..self.n {
            for j in 0..i {
                if !self.d(i, j).is_positive() {
                    return Err(MetricError::NegativeOrZeroOffDiagonal(j, i));
                }
            }
        }
        self.check_triangles()
    }

    fn check_triangles(&self) -> Result<(), MetricError> {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                if j == i {
                    continue;
                }
                let dij = self.d(i, j);
                for k in 0..n {
                    if k == i || k == j {
                        continue;
                    }
                    if self.d(i, k) > dij + self.d(j, k) {
                        return Err(MetricError::TriangleViolation(i, j, k));
                    }
                }
            }
        }
        Ok(())
    }
}

impl std::fmt::Debug for FiniteMetricSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut s = f.debug_struct("FiniteMetricSpace");
        s.field("n", &self.n);
        if self.n <= 12 {
            s.field("dist", &self.to_matrix());
        }
        s.finish()
    }
}

/// Points strictly (`closed = false`) or weakly within `radius` of `center`.
pub fn ball(
    space: &FiniteMetricSpace,
    center: usize,
    radius: Rational,
    closed: bool,
) -> BTreeSet<usize> {
    space
        .points()
        .filter(|&x| {
            let d = space.d(center, x);
            if closed {
                d <= radius
            } else {
                d < radius
            }
        })
        .collect()
}

pub fn sphere(space: &FiniteMetricSpace, center: usize, radius: Rational) -> BTreeSet<usize> {
    space
        .points()
        .filter(|&x| space.d(center, x) == radius)
        .collect()
}

/// `{z : d(z,a) = d(z,b)}`. For `a != b` neither endpoint qualifies; for
/// `a == b` every point does.
pub fn med_set(space: &FiniteMetricSpace, a: usize, b: usize) -> BTreeSet<usize> {
    space
        .points()
        .filter(|&z| space.d(z, a) == space.d(z, b))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratmetric::q;

    fn m(rows: &[&[i64]]) -> Vec<Vec<Rational>> {
        rows.iter()
            .map(|r| r.iter().map(|&v| Rational::integer(v)).collect())
            .collect()
    }

    fn equilateral() -> FiniteMetricSpace {
        validate_space(&m(&[&[0, 1, 1], &[1, 0, 1], &[1, 1, 0]])).unwrap()
    }

    #[test]
    fn two_points_valid() {
        let s = validate_space(&m(&[&[0, 1], &[1, 0]])).unwrap();
        assert_eq!(s.n(), 2);
        assert_eq!(s.d(0, 1), Rational::ONE);
    }

    #[test]
    fn triangle_violation_reported() {
        let err = validate_space(&m(&[&[0, 1, 3], &[1, 0, 1], &[3, 1, 0]])).unwrap_err();
        assert_eq!(err, MetricError::TriangleViolation(0, 1, 2));
        assert_eq!(err.to_string(), "TriangleViolation 0 1 2");
    }

    #[test]
    fn equilateral_valid() {
        let s = equilateral();
        assert_eq!(s.diameter(), Rational::ONE);
    }

    #[test]
    fn asymmetric_and_degenerate() {
        assert_eq!(
            validate_space(&m(&[&[0, 1], &[2, 0]])).unwrap_err(),
            MetricError::AsymmetricMatrix(0, 1)
        );
        assert_eq!(
            validate_space(&m(&[&[0, 0], &[0, 0]])).unwrap_err(),
            MetricError::NegativeOrZeroOffDiagonal(0, 1)
        );
        assert_eq!(
            validate_space(&m(&[&[0, -1], &[-1, 0]])).unwrap_err(),
            MetricError::NegativeOrZeroOffDiagonal(0, 1)
        );
        assert_eq!(
            validate_space(&m(&[&[1, 1], &[1, 0]])).unwrap_err(),
            MetricError::NonZeroDiagonal(0)
        );
        assert!(matches!(
            validate_space(&[vec![Rational::ZERO, Rational::ONE]]).unwrap_err(),
            MetricError::NotSquare { .. }
        ));
    }

    #[test]
    fn balls_spheres_med() {
        let eq = equilateral();
        assert_eq!(sphere(&eq, 0, Rational::ONE), BTreeSet::from([1, 2]));
        assert_eq!(med_set(&eq, 0, 1), BTreeSet::from([2]));
        let p3 = validate_space(&m(&[&[0, 1, 2], &[1, 0, 1], &[2, 1, 0]])).unwrap();
        assert_eq!(ball(&p3, 0, Rational::ONE, true), BTreeSet::from([0, 1]));
        assert_eq!(ball(&p3, 0, Rational::ONE, false), BTreeSet::from([0]));
        assert_eq!(ball(&p3, 1, q(1, 2), false), BTreeSet::from([1]));
    }

    #[test]
    fn prefix_and_induced() {
        let p3 = validate_space(&m(&[&[0, 1, 2], &[1, 0, 1], &[2, 1, 0]])).unwrap();
        let pre = p3.prefix(2);
        assert_eq!(pre.to_matrix(), m(&[&[0, 1], &[1, 0]]));
        let ind = p3.induced(&[2, 0]);
        assert_eq!(ind.d(0, 1), Rational::integer(2));
        assert_eq!(ind.labels(), &["2".to_string(), "0".to_string()]);
    }
}

use std::collections::HashMap;

use super::{FiniteMetricSpace, MetricError, Rational};

/// A distance-preserving partial bijection between two spaces (or within
/// one). The spaces themselves are not stored; [`PartialIsometry::validate`]
/// checks the pairs against a concrete source and target.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PartialIsometry {
    pairs: Vec<(usize, usize)>,
}

impl PartialIsometry {
    pub fn new(pairs: Vec<(usize, usize)>) -> Self {
        PartialIsometry { pairs }
    }

    pub fn identity_on(points: &[usize]) -> Self {
        PartialIsometry {
            pairs: points.iter().map(|&p| (p, p)).collect(),
        }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn domain(&self) -> Vec<usize> {
        self.pairs.iter().map(|p| p.0).collect()
    }

    pub fn range(&self) -> Vec<usize> {
        self.pairs.iter().map(|p| p.1).collect()
    }

    pub fn image(&self, u: usize) -> Option<usize> {
        self.pairs.iter().find(|p| p.0 == u).map(|p| p.1)
    }

    pub fn preimage(&self, v: usize) -> Option<usize> {
        self.pairs.iter().find(|p| p.1 == v).map(|p| p.0)
    }

    pub fn push(&mut self, u: usize, v: usize) {
        self.pairs.push((u, v));
    }

    pub fn inverse(&self) -> PartialIsometry {
        PartialIsometry {
            pairs: self.pairs.iter().map(|&(u, v)| (v, u)).collect(),
        }
    }

    /// Image vector for a map that is total on `0..n`, if it is.
    pub fn as_total(&self, n: usize) -> Option<Vec<usize>> {
        let mut out = vec![usize::MAX; n];
        for &(u, v) in &self.pairs {
            if u >= n {
                return None;
            }
            out[u] = v;
        }
        out.iter().all(|&v| v != usize::MAX).then_some(out)
    }

    /// Checks injectivity in both coordinates and exact distance preservation.
    pub fn validate(
        &self,
        source: &FiniteMetricSpace,
        target: &FiniteMetricSpace,
    ) -> Result<(), MetricError> {
        let mut seen_u = HashMap::new();
        let mut seen_v = HashMap::new();
        for &(u, v) in &self.pairs {
            if u >= source.n() || v >= target.n() {
                return Err(MetricError::IndexOutOfRange(u.max(v)));
            }
            if seen_u.insert(u, v).is_some() || seen_v.insert(v, u).is_some() {
                return Err(MetricError::NotInjective(u, v));
            }
        }
        for (a, &(u, v)) in self.pairs.iter().enumerate() {
            for &(u2, v2) in &self.pairs[..a] {
                if source.d(u, u2) != target.d(v, v2) {
                    return Err(MetricError::DistanceNotPreserved(u2, u));
                }
            }
        }
        Ok(())
    }
}

/// A permutation of `0..n`, stored as its image vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self, MetricError> {
        let n = images.len();
        let mut hit = vec![false; n];
        for (i, &v) in images.iter().enumerate() {
            if v >= n {
                return Err(MetricError::IndexOutOfRange(v));
            }
            if hit[v] {
                return Err(MetricError::NotInjective(i, v));
            }
            hit[v] = true;
        }
        Ok(Permutation { images })
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            images: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.images.len()];
        for (i, &v) in self.images.iter().enumerate() {
            inv[v] = i;
        }
        Permutation { images: inv }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation {
            images: other.images.iter().map(|&i| self.images[i]).collect(),
        }
    }

    /// `self^k`, with negative powers taken through the inverse.
    pub fn pow(&self, k: i64) -> Permutation {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut out = Permutation::identity(self.len());
        for _ in 0..k.unsigned_abs() {
            out = base.compose(&out);
        }
        out
    }

    /// `self^k (i)` without building the power.
    pub fn apply_pow(&self, i: usize, k: i64) -> usize {
        let mut x = i;
        if k >= 0 {
            for _ in 0..k {
                x = self.images[x];
            }
        } else {
            let inv = self.inverse();
            for _ in 0..(-k) {
                x = inv.images[x];
            }
        }
        x
    }

    /// Orbit of `x` in the order `x, φ(x), φ²(x), ...`.
    pub fn orbit(&self, x: usize) -> Vec<usize> {
        let mut out = vec![x];
        let mut y = self.images[x];
        while y != x {
            out.push(y);
            y = self.images[y];
        }
        out
    }

    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.len()];
        let mut out = Vec::new();
        for x in 0..self.len() {
            if !seen[x] {
                let orb = self.orbit(x);
                for &y in &orb {
                    seen[y] = true;
                }
                out.push(orb);
            }
        }
        out
    }

    /// Order of the cyclic group generated by the permutation.
    pub fn order(&self) -> u64 {
        fn gcd(a: u64, b: u64) -> u64 {
            if b == 0 {
                a
            } else {
                gcd(b, a % b)
            }
        }
        self.cycles().iter().fold(1u64, |acc, c| {
            let l = c.len() as u64;
            acc / gcd(acc, l) * l
        })
    }

    pub fn fixed_points(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.images[i] == i).collect()
    }

    /// Largest `|d(φu, φv) - d(u, v)|` over all pairs; zero iff `φ` is an
    /// isometry of `space`.
    pub fn isometry_defect(&self, space: &FiniteMetricSpace) -> Rational {
        let mut worst = Rational::ZERO;
        for u in 0..space.n() {
            for v in 0..u {
                let e = space
                    .d(u, v)
                    .abs_diff(space.d(self.apply(u), self.apply(v)));
                if e > worst {
                    worst = e;
                }
            }
        }
        worst
    }

    pub fn is_isometry_of(&self, space: &FiniteMetricSpace) -> bool {
        self.len() == space.n() && self.isometry_defect(space).is_zero()
    }

    pub fn as_partial_isometry(&self) -> PartialIsometry {
        PartialIsometry::new(self.images.iter().copied().enumerate().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_algebra() {
        let p = Permutation::new(vec![1, 2, 0, 3]).unwrap();
        assert_eq!(p.order(), 3);
        assert_eq!(p.pow(3), Permutation::identity(4));
        assert_eq!(p.pow(-1), p.inverse());
        assert_eq!(p.apply_pow(0, -1), 2);
        assert_eq!(p.fixed_points(), vec![3]);
        assert_eq!(p.cycles(), vec![vec![0, 1, 2], vec![3]]);
        assert!(Permutation::new(vec![0, 0]).is_err());
        assert!(Permutation::new(vec![2, 0]).is_err());
    }

    #[test]
    fn partial_isometry_validation() {
        let s = FiniteMetricSpace::from_fn(3, |i, j| Rational::integer((i - j) as i64)).unwrap();
        assert!(PartialIsometry::new(vec![(0, 1), (1, 2)])
            .validate(&s, &s)
            .is_ok());
        assert_eq!(
            PartialIsometry::new(vec![(0, 0), (1, 2)]).validate(&s, &s),
            Err(MetricError::DistanceNotPreserved(0, 1))
        );
        assert_eq!(
            PartialIsometry::new(vec![(0, 1), (2, 1)]).validate(&s, &s),
            Err(MetricError::NotInjective(2, 1))
        );
    }
}

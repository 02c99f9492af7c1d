//! Seeded generators shared by the integration suites.

#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use urysohn::katetov::{feasible_interval, Bound};
use urysohn::ratmetric::{FiniteMetricSpace, Rational};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn q(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

/// Shortest-path closure of random weights in `{1/2, 1, ..., 4}`; always a
/// metric with positive off-diagonal entries.
pub fn random_space(r: &mut impl Rng, n: usize) -> FiniteMetricSpace {
    let mut m = vec![vec![Rational::ZERO; n]; n];
    for i in 0..n {
        for j in 0..i {
            let w = q(r.gen_range(1..=8), 2);
            m[i][j] = w;
            m[j][i] = w;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = m[i][k] + m[k][j];
                if via < m[i][j] {
                    m[i][j] = via;
                }
            }
        }
    }
    FiniteMetricSpace::from_matrix(&m).expect("closure is a metric")
}

/// Values on `points`, each drawn from its feasible interval given the
/// earlier ones, on a quarter grid. Unbounded intervals are capped at
/// `lower + 3`.
pub fn random_partial(
    r: &mut impl Rng,
    space: &FiniteMetricSpace,
    points: &[usize],
) -> Vec<Rational> {
    let mut values = Vec::with_capacity(points.len());
    for (k, &x) in points.iter().enumerate() {
        let v = if k == 0 {
            q(r.gen_range(0..=12), 4)
        } else {
            let iv = feasible_interval(space, &points[..k], &values, x).unwrap();
            let hi = match iv.upper {
                Bound::Finite(u) => u.min(iv.lower + Rational::integer(3)),
                Bound::Unbounded => iv.lower + Rational::integer(3),
            };
            let steps = ((hi - iv.lower) * Rational::integer(4)).to_f64().floor() as i64;
            iv.lower + q(r.gen_range(0..=steps.max(0)), 4)
        };
        values.push(v);
    }
    values
}

/// A random Katetov map on the whole space.
pub fn random_total(r: &mut impl Rng, space: &FiniteMetricSpace) -> Vec<Rational> {
    let mut order: Vec<usize> = space.points().collect();
    order.shuffle(r);
    let vals = random_partial(r, space, &order);
    let mut out = vec![Rational::ZERO; space.n()];
    for (&x, v) in order.iter().zip(vals) {
        out[x] = v;
    }
    out
}

pub fn random_subset(r: &mut impl Rng, n: usize, size: usize) -> Vec<usize> {
    let mut all: Vec<usize> = (0..n).collect();
    all.shuffle(r);
    all.truncate(size);
    all.sort_unstable();
    all
}

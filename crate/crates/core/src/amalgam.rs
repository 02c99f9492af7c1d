//! Metric amalgamation over a common subspace.
//!
//! All gluings here are free amalgams: a point on one side and a point on
//! the other are as far apart as the shortest route through the glued part
//! allows. That is always a metric, so results are built unchecked and the
//! tests re-validate them.

use thiserror::Error;

use crate::katetov::{KatetovError, KatetovMap};
use crate::ratmetric::{FiniteMetricSpace, MetricError, PartialIsometry, Permutation, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AmalgamError {
    #[error(transparent)]
    InvalidGlue(#[from] MetricError),
    #[error("EmptyGlue")]
    EmptyGlue,
    #[error("NotAnIsometry")]
    NotAnIsometry,
    #[error("BaseMismatch")]
    BaseMismatch,
    #[error("BaseNotPrefix {0}")]
    BaseNotPrefix(usize),
    #[error(transparent)]
    Katetov(#[from] KatetovError),
}

/// Two spaces and an identification `glue: left -> right` of subsets.
#[derive(Debug, Clone)]
pub struct AmalgamSpec {
    pub left: FiniteMetricSpace,
    pub right: FiniteMetricSpace,
    pub glue: PartialIsometry,
}

#[derive(Debug, Clone)]
pub struct Amalgam {
    pub space: FiniteMetricSpace,
    /// Index in `space` of each right point; left points keep their index.
    pub right_map: Vec<usize>,
}

/// Left points keep indices `0..left.n`; unglued right points follow in
/// ascending order.
pub fn amalgamate(spec: &AmalgamSpec) -> Result<Amalgam, AmalgamError> {
    let AmalgamSpec { left, right, glue } = spec;
    if glue.is_empty() {
        return Err(AmalgamError::EmptyGlue);
    }
    glue.validate(left, right)?;
    let l = left.n();
    let mut right_map = vec![usize::MAX; right.n()];
    for &(a, b) in glue.pairs() {
        right_map[b] = a;
    }
    let fresh: Vec<usize> = right
        .points()
        .filter(|&b| right_map[b] == usize::MAX)
        .collect();
    for (k, &b) in fresh.iter().enumerate() {
        right_map[b] = l + k;
    }

    let mut space = left.clone();
    for (k, &b) in fresh.iter().enumerate() {
        let mut row = Vec::with_capacity(l + k);
        for a in left.points() {
            let d = glue
                .pairs()
                .iter()
                .map(|&(p, q)| left.d(a, p) + right.d(q, b))
                .min()
                .expect("glue is nonempty");
            row.push(d);
        }
        row.extend(fresh[..k].iter().map(|&b2| right.d(b, b2)));
        space.push_point_unchecked(&row, format!("r{}", right.labels()[b]));
    }
    Ok(Amalgam { space, right_map })
}

#[derive(Debug, Clone)]
pub struct Doubled {
    pub space: FiniteMetricSpace,
    /// Swaps the two copies and fixes the glued points; an involution.
    pub swap: Permutation,
    /// Index of the second copy of each original point.
    pub second_copy: Vec<usize>,
}

/// Two copies of `space` glued along `glued`, with the copy-swapping
/// involution. The first copy keeps the original indices.
pub fn double_with_swap(
    space: &FiniteMetricSpace,
    glued: &[usize],
) -> Result<Doubled, AmalgamError> {
    let spec = AmalgamSpec {
        left: space.clone(),
        right: space.clone(),
        glue: PartialIsometry::identity_on(glued),
    };
    let am = amalgamate(&spec)?;
    let mut images: Vec<usize> = (0..am.space.n()).collect();
    for x in space.points() {
        let y = am.right_map[x];
        images[x] = y;
        images[y] = x;
    }
    let swap = Permutation::new(images)?;
    Ok(Doubled {
        space: am.space,
        swap,
        second_copy: am.right_map,
    })
}

/// The space `X` plus the orbit `y_{-N}, ..., y_N` of a one-point extension
/// under `phi`, with `d(x, y_i) = f(phi^{-i} x)`.
#[derive(Debug, Clone)]
pub struct OrbitAmalgam {
    pub base_len: usize,
    pub horizon: usize,
    pub space: FiniteMetricSpace,
    /// Index in `space` of `y_i`, stored at position `i + horizon`.
    pub y: Vec<usize>,
    /// `phi` on the base, `y_i -> y_{i+1}` for `i < N`.
    pub shift: PartialIsometry,
    /// `(i, x)` whenever `y_i` landed at distance 0 from base point `x` and
    /// was identified with it.
    pub collisions: Vec<(i64, usize)>,
}

impl OrbitAmalgam {
    pub fn y_index(&self, i: i64) -> usize {
        self.y[(i + self.horizon as i64) as usize]
    }
}

/// `f` composed with `phi^{-i}` for `i = -N..=N`.
pub(crate) fn orbit_values(
    phi: &Permutation,
    f: &[Rational],
    horizon: usize,
) -> Vec<Vec<Rational>> {
    let inv = phi.inverse();
    let n = f.len();
    let mut fwd = vec![f.to_vec()];
    for _ in 0..horizon {
        let prev = fwd.last().unwrap();
        fwd.push((0..n).map(|x| prev[inv.apply(x)]).collect());
    }
    let mut back = vec![];
    let mut cur = f.to_vec();
    for _ in 0..horizon {
        cur = (0..n).map(|x| cur[phi.apply(x)]).collect();
        back.push(cur.clone());
    }
    back.reverse();
    back.extend(fwd);
    back
}

pub fn orbit_amalgam(
    base: &FiniteMetricSpace,
    phi: &Permutation,
    f: &KatetovMap,
    horizon: usize,
) -> Result<OrbitAmalgam, AmalgamError> {
    if phi.len() != base.n() || f.len() != base.n() {
        return Err(AmalgamError::BaseMismatch);
    }
    if !phi.is_isometry_of(base) {
        return Err(AmalgamError::NotAnIsometry);
    }
    let n = base.n();
    let fs = orbit_values(phi, f.values(), horizon);
    let mut space = base.clone();
    let mut y = Vec::with_capacity(fs.len());
    let mut collisions = Vec::new();
    let mut fresh: Vec<usize> = Vec::new();
    for (k, fi) in fs.iter().enumerate() {
        let i = k as i64 - horizon as i64;
        if let Some(x) = fi.iter().position(|v| v.is_zero()) {
            collisions.push((i, x));
            y.push(x);
            continue;
        }
        let mut row = fi.clone();
        for &k2 in &fresh {
            let fj = &fs[k2];
            row.push((0..n).map(|x| fi[x] + fj[x]).min().expect("nonempty base"));
        }
        space.push_point_unchecked(&row, format!("y{i}"));
        y.push(space.n() - 1);
        fresh.push(k);
    }
    let mut shift = phi.as_partial_isometry();
    for k in 0..fs.len().saturating_sub(1) {
        if y[k] >= n {
            shift.push(y[k], y[k + 1]);
        }
    }
    Ok(OrbitAmalgam {
        base_len: n,
        horizon,
        space,
        y,
        shift,
        collisions,
    })
}

/// Free amalgam of several extensions of `base` over `base`. Each extension
/// must have `base` as its prefix; the result lists base points, then the new
/// points of each extension in order.
pub fn multi_amalgamate(
    base: &FiniteMetricSpace,
    extensions: &[FiniteMetricSpace],
) -> Result<FiniteMetricSpace, AmalgamError> {
    let n = base.n();
    if n == 0 {
        return Err(AmalgamError::EmptyGlue);
    }
    for (k, e) in extensions.iter().enumerate() {
        if e.n() < n || e.prefix(n).to_matrix() != base.to_matrix() {
            return Err(AmalgamError::BaseNotPrefix(k));
        }
    }
    let mut space = base.clone();
    // (extension, point within it) for every point appended so far
    let mut origin: Vec<(usize, usize)> = Vec::new();
    for (k, e) in extensions.iter().enumerate() {
        for p in n..e.n() {
            let mut row: Vec<Rational> = (0..n).map(|x| e.d(p, x)).collect();
            for &(k2, p2) in &origin {
                let d = if k2 == k {
                    e.d(p, p2)
                } else {
                    let e2 = &extensions[k2];
                    (0..n)
                        .map(|x| e.d(p, x) + e2.d(p2, x))
                        .min()
                        .expect("nonempty base")
                };
                row.push(d);
            }
            space.push_point_unchecked(&row, format!("e{k}.{}", e.labels()[p]));
            origin.push((k, p));
        }
    }
    Ok(space)
}
